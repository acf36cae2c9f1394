//! Place/transition nets, markings, and GMEC-defined final sets.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use petgraph::algo::{tarjan_scc, toposort};
use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Set of transition indices, kept in declared order.
pub type TransitionSet = BTreeSet<usize>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("transition index {index} out of range (net has {count} transitions)")]
    TransitionOutOfRange { index: usize, count: usize },

    #[error("transition '{0}' is not enabled")]
    NotEnabled(String),

    #[error("unknown transition '{0}'")]
    UnknownTransition(String),

    #[error("unknown place '{0}'")]
    UnknownPlace(String),

    #[error("duplicate identifier '{0}'")]
    DuplicateId(String),

    #[error("negative arc weight {weight} on ({place}, {transition})")]
    NegativeWeight {
        place: String,
        transition: String,
        weight: i64,
    },

    #[error("negative token count in marking")]
    NegativeTokens,

    #[error("final specification needs at least one GMEC")]
    EmptyFinalSpec,

    #[error("single-GMEC final specification holds {0} GMECs")]
    SingleWithMany(usize),

    #[error("integer overflow in token arithmetic")]
    Overflow,
}

pub type NetResult<T> = Result<T, NetError>;

/// Token distribution over the places of a net, in declared place order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Marking(Vec<i64>);

impl Marking {
    pub fn new(tokens: Vec<i64>) -> NetResult<Self> {
        if tokens.iter().any(|&x| x < 0) {
            return Err(NetError::NegativeTokens);
        }
        Ok(Marking(tokens))
    }

    pub fn zeros(places: usize) -> Self {
        Marking(vec![0; places])
    }

    pub fn tokens(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, place: usize) -> i64 {
        self.0[place]
    }

    pub fn into_inner(self) -> Vec<i64> {
        self.0
    }

    /// Componentwise `self >= other`.
    pub fn covers(&self, other: &[i64]) -> bool {
        self.0.iter().zip(other).all(|(a, b)| a >= b)
    }

    // Internal constructor for vectors already known to be nonnegative.
    pub(crate) fn from_raw(tokens: Vec<i64>) -> Self {
        debug_assert!(tokens.iter().all(|&x| x >= 0));
        Marking(tokens)
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

/// A place/transition net with dense `Pre`/`Post` matrices (row = place, column = transition).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetriNet {
    places: Vec<String>,
    transitions: Vec<String>,
    pre: Vec<i64>,
    post: Vec<i64>,
    incidence: Vec<i64>,
    place_index: HashMap<String, usize>,
    transition_index: HashMap<String, usize>,
}

impl PetriNet {
    /// Builds a net from row-major `places x transitions` arc-weight matrices.
    pub fn new(
        places: Vec<String>,
        transitions: Vec<String>,
        pre: Vec<Vec<i64>>,
        post: Vec<Vec<i64>>,
    ) -> NetResult<Self> {
        let m = places.len();
        let n = transitions.len();
        let place_index = index_names(&places)?;
        let transition_index = index_names(&transitions)?;
        for name in places.iter() {
            if transition_index.contains_key(name) {
                return Err(NetError::DuplicateId(name.clone()));
            }
        }
        let flatten = |rows: Vec<Vec<i64>>| -> NetResult<Vec<i64>> {
            if rows.len() != m {
                return Err(NetError::DimensionMismatch {
                    expected: m,
                    actual: rows.len(),
                });
            }
            let mut flat = Vec::with_capacity(m * n);
            for (p, row) in rows.into_iter().enumerate() {
                if row.len() != n {
                    return Err(NetError::DimensionMismatch {
                        expected: n,
                        actual: row.len(),
                    });
                }
                for (t, w) in row.into_iter().enumerate() {
                    if w < 0 {
                        return Err(NetError::NegativeWeight {
                            place: places[p].clone(),
                            transition: transitions[t].clone(),
                            weight: w,
                        });
                    }
                    flat.push(w);
                }
            }
            Ok(flat)
        };
        let pre = flatten(pre)?;
        let post = flatten(post)?;
        let incidence = pre
            .iter()
            .zip(&post)
            .map(|(a, b)| b.checked_sub(*a).ok_or(NetError::Overflow))
            .collect::<NetResult<Vec<_>>>()?;
        Ok(PetriNet {
            places,
            transitions,
            pre,
            post,
            incidence,
            place_index,
            transition_index,
        })
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn transitions(&self) -> &[String] {
        &self.transitions
    }

    pub fn place_name(&self, p: usize) -> &str {
        &self.places[p]
    }

    pub fn transition_name(&self, t: usize) -> &str {
        &self.transitions[t]
    }

    pub fn place_by_name(&self, name: &str) -> Option<usize> {
        self.place_index.get(name).copied()
    }

    pub fn transition_by_name(&self, name: &str) -> Option<usize> {
        self.transition_index.get(name).copied()
    }

    /// Resolves a list of transition names to a set of indices.
    pub fn transition_set<S: AsRef<str>>(&self, names: &[S]) -> NetResult<TransitionSet> {
        names
            .iter()
            .map(|s| {
                self.transition_by_name(s.as_ref())
                    .ok_or_else(|| NetError::UnknownTransition(s.as_ref().to_string()))
            })
            .collect()
    }

    pub fn pre(&self, p: usize, t: usize) -> i64 {
        self.pre[p * self.transitions.len() + t]
    }

    pub fn post(&self, p: usize, t: usize) -> i64 {
        self.post[p * self.transitions.len() + t]
    }

    pub fn incidence(&self, p: usize, t: usize) -> i64 {
        self.incidence[p * self.transitions.len() + t]
    }

    pub fn pre_column(&self, t: usize) -> Vec<i64> {
        (0..self.places.len()).map(|p| self.pre(p, t)).collect()
    }

    pub fn incidence_column(&self, t: usize) -> Vec<i64> {
        (0..self.places.len())
            .map(|p| self.incidence(p, t))
            .collect()
    }

    /// Output transitions of a place (`p•`).
    pub fn postset_of_place(&self, p: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.transitions.len()).filter(move |&t| self.pre(p, t) > 0)
    }

    /// Input places of a transition (`•t`).
    pub fn preset_of_transition(&self, t: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.places.len()).filter(move |&p| self.pre(p, t) > 0)
    }

    /// Output places of a transition (`t•`).
    pub fn postset_of_transition(&self, t: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.places.len()).filter(move |&p| self.post(p, t) > 0)
    }

    fn check_transition(&self, t: usize) -> NetResult<()> {
        if t >= self.transitions.len() {
            return Err(NetError::TransitionOutOfRange {
                index: t,
                count: self.transitions.len(),
            });
        }
        Ok(())
    }

    fn check_marking(&self, m: &Marking) -> NetResult<()> {
        check_dim(self.places.len(), m.len())
    }

    pub fn is_enabled(&self, m: &Marking, t: usize) -> NetResult<bool> {
        self.check_transition(t)?;
        self.check_marking(m)?;
        Ok(self.enabled_unchecked(m.tokens(), t))
    }

    pub(crate) fn enabled_unchecked(&self, tokens: &[i64], t: usize) -> bool {
        let n = self.transitions.len();
        tokens
            .iter()
            .enumerate()
            .all(|(p, &x)| x >= self.pre[p * n + t])
    }

    /// All transitions enabled at `m`, in declared order.
    pub fn enabled_transitions(&self, m: &Marking) -> NetResult<Vec<usize>> {
        self.check_marking(m)?;
        Ok((0..self.transitions.len())
            .filter(|&t| self.enabled_unchecked(m.tokens(), t))
            .collect())
    }

    /// Fires `t` once. Firing a disabled transition is an error.
    pub fn fire(&self, m: &Marking, t: usize) -> NetResult<Marking> {
        if !self.is_enabled(m, t)? {
            return Err(NetError::NotEnabled(self.transitions[t].clone()));
        }
        self.add_column(m.tokens(), t, 1).map(Marking::from_raw)
    }

    /// `tokens + times * C(., t)`; the caller guarantees the result is nonnegative.
    pub(crate) fn add_column(&self, tokens: &[i64], t: usize, times: i64) -> NetResult<Vec<i64>> {
        let n = self.transitions.len();
        tokens
            .iter()
            .enumerate()
            .map(|(p, &x)| {
                self.incidence[p * n + t]
                    .checked_mul(times)
                    .and_then(|d| x.checked_add(d))
                    .ok_or(NetError::Overflow)
            })
            .collect()
    }

    /// `m + C * y` when nonnegative, `None` otherwise. On acyclic nets a `Some` result means
    /// some firing sequence with firing vector `y` leads from `m` to the returned marking.
    pub fn fire_vector(&self, m: &Marking, y: &[i64]) -> NetResult<Option<Marking>> {
        self.check_marking(m)?;
        check_dim(self.transitions.len(), y.len())?;
        if y.iter().any(|&c| c < 0) {
            return Ok(None);
        }
        let mut out = m.tokens().to_vec();
        for (t, &count) in y.iter().enumerate() {
            if count != 0 {
                out = self.add_column(&out, t, count)?;
            }
        }
        if out.iter().any(|&x| x < 0) {
            return Ok(None);
        }
        Ok(Some(Marking::from_raw(out)))
    }

    pub fn is_dead(&self, m: &Marking) -> NetResult<bool> {
        Ok(self.enabled_transitions(m)?.is_empty())
    }

    /// Transitions sharing an input place with another transition.
    pub fn conflict_transitions(&self) -> TransitionSet {
        let mut out = TransitionSet::new();
        for p in 0..self.places.len() {
            let outs: Vec<usize> = self.postset_of_place(p).collect();
            if outs.len() >= 2 {
                out.extend(outs);
            }
        }
        out
    }

    /// Transitions whose firing strictly increases `w^T M` for some GMEC of `spec`.
    pub fn increasing_transitions(&self, spec: &FinalSpec) -> NetResult<TransitionSet> {
        let mut out = TransitionSet::new();
        for gmec in spec.gmecs() {
            check_dim(self.places.len(), gmec.weights.len())?;
            for t in 0..self.transitions.len() {
                if self.weighted_effect(&gmec.weights, t)? > 0 {
                    out.insert(t);
                }
            }
        }
        Ok(out)
    }

    /// `w^T C(., t)`.
    pub fn weighted_effect(&self, w: &[i64], t: usize) -> NetResult<i64> {
        checked_dot(w, &self.incidence_column(t))
    }

    /// The `tx`-induced subnet: same places, only the selected transition columns.
    pub fn induced_subnet(&self, tx: &TransitionSet) -> NetResult<PetriNet> {
        for &t in tx {
            self.check_transition(t)?;
        }
        let cols: Vec<usize> = tx.iter().copied().collect();
        let select = |flat: &Vec<i64>| -> Vec<Vec<i64>> {
            (0..self.places.len())
                .map(|p| {
                    cols.iter()
                        .map(|&t| flat[p * self.transitions.len() + t])
                        .collect()
                })
                .collect()
        };
        PetriNet::new(
            self.places.clone(),
            cols.iter().map(|&t| self.transitions[t].clone()).collect(),
            select(&self.pre),
            select(&self.post),
        )
    }

    pub fn is_acyclic(&self) -> bool {
        let all: TransitionSet = (0..self.transitions.len()).collect();
        toposort(&self.digraph(&all).0, None).is_ok()
    }

    /// Bipartite place/transition digraph restricted to the transitions in `tx`. Node `i < m`
    /// is place `i`; the returned map sends each transition index to its node.
    pub(crate) fn digraph(
        &self,
        tx: &TransitionSet,
    ) -> (DiGraph<(), ()>, HashMap<usize, NodeIndex>) {
        let mut g = DiGraph::new();
        let place_nodes: Vec<NodeIndex> = (0..self.places.len()).map(|_| g.add_node(())).collect();
        let mut trans_nodes = HashMap::new();
        for &t in tx {
            let node = g.add_node(());
            trans_nodes.insert(t, node);
            for (p, &pn) in place_nodes.iter().enumerate() {
                if self.pre(p, t) > 0 {
                    g.add_edge(pn, node, ());
                }
                if self.post(p, t) > 0 {
                    g.add_edge(node, pn, ());
                }
            }
        }
        (g, trans_nodes)
    }

    /// Transitions of `tx` that lie on some directed cycle of the `tx`-induced subnet.
    pub fn cyclic_transitions(&self, tx: &TransitionSet) -> TransitionSet {
        let (g, nodes) = self.digraph(tx);
        let mut on_cycle = vec![false; g.node_count()];
        for scc in tarjan_scc(&g) {
            let self_loop = scc.len() == 1 && g.contains_edge(scc[0], scc[0]);
            if scc.len() > 1 || self_loop {
                for node in scc {
                    on_cycle[node.index()] = true;
                }
            }
        }
        nodes
            .into_iter()
            .filter(|(_, node)| on_cycle[node.index()])
            .map(|(t, _)| t)
            .collect()
    }

    /// A topological order of the transitions in `tx` (upstream first), preferring smaller
    /// indices among ready transitions. `None` if the induced subnet has a cycle.
    pub fn transition_topological_order(&self, tx: &TransitionSet) -> Option<Vec<usize>> {
        let m = self.places.len();
        // in-degree counted over transition -> transition dependencies via shared places
        let mut indeg: HashMap<usize, usize> = tx.iter().map(|&t| (t, 0)).collect();
        let mut succ: HashMap<usize, Vec<usize>> = HashMap::new();
        for &u in tx {
            for &v in tx {
                if (0..m).any(|p| self.post(p, u) > 0 && self.pre(p, v) > 0) {
                    if u == v {
                        return None;
                    }
                    succ.entry(u).or_default().push(v);
                    *indeg.get_mut(&v).unwrap() += 1;
                }
            }
        }
        let mut ready: BTreeSet<usize> = indeg
            .iter()
            .filter(|(_, &d)| d == 0)
            .map(|(&t, _)| t)
            .collect();
        let mut order = Vec::with_capacity(tx.len());
        while let Some(t) = ready.pop_first() {
            order.push(t);
            for &v in succ.get(&t).map(Vec::as_slice).unwrap_or(&[]) {
                let d = indeg.get_mut(&v).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.insert(v);
                }
            }
        }
        (order.len() == tx.len()).then_some(order)
    }
}

fn index_names(names: &[String]) -> NetResult<HashMap<String, usize>> {
    let mut map = HashMap::with_capacity(names.len());
    for (i, name) in names.iter().enumerate() {
        if map.insert(name.clone(), i).is_some() {
            return Err(NetError::DuplicateId(name.clone()));
        }
    }
    Ok(map)
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> NetResult<()> {
    if expected != actual {
        return Err(NetError::DimensionMismatch { expected, actual });
    }
    Ok(())
}

pub(crate) fn checked_dot(a: &[i64], b: &[i64]) -> NetResult<i64> {
    a.iter().zip(b).try_fold(0i64, |acc, (x, y)| {
        x.checked_mul(*y)
            .and_then(|v| acc.checked_add(v))
            .ok_or(NetError::Overflow)
    })
}

/// Generalized mutual exclusion constraint `w^T M <= k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gmec {
    pub weights: Vec<i64>,
    pub bound: i64,
}

impl Gmec {
    pub fn new(weights: Vec<i64>, bound: i64) -> Self {
        Gmec { weights, bound }
    }

    pub fn holds(&self, m: &Marking) -> NetResult<bool> {
        check_dim(self.weights.len(), m.len())?;
        Ok(checked_dot(&self.weights, m.tokens())? <= self.bound)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combinator {
    Single,
    And,
    Or,
}

/// The final-marking set: one GMEC, or a conjunction/disjunction of several.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalSpec {
    combinator: Combinator,
    gmecs: Vec<Gmec>,
}

impl FinalSpec {
    pub fn new(combinator: Combinator, gmecs: Vec<Gmec>) -> NetResult<Self> {
        if gmecs.is_empty() {
            return Err(NetError::EmptyFinalSpec);
        }
        if combinator == Combinator::Single && gmecs.len() != 1 {
            return Err(NetError::SingleWithMany(gmecs.len()));
        }
        if let Some(first) = gmecs.first() {
            for g in &gmecs[1..] {
                check_dim(first.weights.len(), g.weights.len())?;
            }
        }
        Ok(FinalSpec { combinator, gmecs })
    }

    pub fn single(gmec: Gmec) -> Self {
        FinalSpec {
            combinator: Combinator::Single,
            gmecs: vec![gmec],
        }
    }

    pub fn combinator(&self) -> Combinator {
        self.combinator
    }

    pub fn gmecs(&self) -> &[Gmec] {
        &self.gmecs
    }

    pub fn gmecs_mut(&mut self) -> &mut [Gmec] {
        &mut self.gmecs
    }

    pub fn is_final(&self, m: &Marking) -> NetResult<bool> {
        match self.combinator {
            Combinator::Single | Combinator::And => {
                for g in &self.gmecs {
                    if !g.holds(m)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Combinator::Or => {
                for g in &self.gmecs {
                    if g.holds(m)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }
}

/// A marked net together with its final-marking set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plant {
    pub net: PetriNet,
    pub initial: Marking,
    pub final_spec: FinalSpec,
}

impl Plant {
    pub fn new(net: PetriNet, initial: Marking, final_spec: FinalSpec) -> NetResult<Self> {
        check_dim(net.place_count(), initial.len())?;
        for g in final_spec.gmecs() {
            check_dim(net.place_count(), g.weights.len())?;
        }
        Ok(Plant {
            net,
            initial,
            final_spec,
        })
    }
}
