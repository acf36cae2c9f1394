//! Basis partitions, minimal explanations and maximal implicit firing vectors.
//!
//! A basis partition splits the transitions into explicit ones (kept as graph events) and
//! implicit ones (abstracted away). The implicit subnet must be acyclic; when it is also
//! conflict-free and never raises any GMEC weight, the partition is a CI-partition and every
//! basis marking has a unique saturated ("i-maximal") implicit successor.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{check_dim, FinalSpec, Marking, NetError, PetriNet, TransitionSet};

/// Default bound on cumulative implicit firings explored by a single call.
pub const DEFAULT_SATURATION_CAP: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BasisError {
    #[error(transparent)]
    Net(#[from] NetError),

    #[error("not a partition of the transitions: {0}")]
    NotAPartition(String),

    #[error("transition '{0}' is not explicit")]
    NotExplicit(String),

    #[error("implicit subnet is not acyclic")]
    NotAcyclic,

    #[error("implicit subnet is not conflict-free")]
    Conflicting,

    #[error("partition is not a CI-partition ({0})")]
    NotCi(PartitionFlags),

    #[error("invalid implicit firing order: {0}")]
    BadOrder(String),

    #[error("more than {cap} implicit firings: implicit subnet looks unbounded")]
    SaturationCap { cap: u64 },

    #[error("implicit reach exceeds {cap} markings")]
    ReachCap { cap: usize },
}

pub type BasisResult<T> = Result<T, BasisError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionFlags {
    pub acyclic: bool,
    pub non_conflicting: bool,
    pub non_increasing: bool,
}

impl PartitionFlags {
    /// All three conditions hold.
    pub fn is_ci(&self) -> bool {
        self.acyclic && self.non_conflicting && self.non_increasing
    }
}

impl fmt::Display for PartitionFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "acyclic={}, non_conflicting={}, non_increasing={}",
            self.acyclic, self.non_conflicting, self.non_increasing
        )
    }
}

/// Split of the transitions into explicit and implicit sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisPartition {
    explicit: Vec<usize>,
    implicit: Vec<usize>,
    implicit_order: Vec<usize>,
    // transition index -> position within `implicit`
    position: Vec<Option<usize>>,
    flags: PartitionFlags,
}

impl BasisPartition {
    pub fn explicit(&self) -> &[usize] {
        &self.explicit
    }

    /// Implicit transitions in declared order; this order indexes [`ImplicitVector`].
    pub fn implicit(&self) -> &[usize] {
        &self.implicit
    }

    /// Topological order of the implicit subnet (empty when it has a cycle).
    pub fn implicit_order(&self) -> &[usize] {
        &self.implicit_order
    }

    pub fn flags(&self) -> PartitionFlags {
        self.flags
    }

    pub fn is_explicit(&self, t: usize) -> bool {
        self.position.get(t).is_some_and(|p| p.is_none())
    }

    /// Position of transition `t` inside the implicit vector, if implicit.
    pub fn implicit_position(&self, t: usize) -> Option<usize> {
        self.position.get(t).copied().flatten()
    }

    pub fn implicit_count(&self) -> usize {
        self.implicit.len()
    }

    fn require_acyclic(&self) -> BasisResult<()> {
        if self.flags.acyclic {
            Ok(())
        } else {
            Err(BasisError::NotAcyclic)
        }
    }

    fn require_conflict_free(&self) -> BasisResult<()> {
        self.require_acyclic()?;
        if self.flags.non_conflicting {
            Ok(())
        } else {
            Err(BasisError::Conflicting)
        }
    }

    pub(crate) fn require_ci(&self) -> BasisResult<()> {
        if self.flags.is_ci() {
            Ok(())
        } else {
            Err(BasisError::NotCi(self.flags))
        }
    }
}

/// Firing counts of the implicit transitions, indexed by [`BasisPartition::implicit`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ImplicitVector(Vec<i64>);

impl ImplicitVector {
    pub fn new(counts: Vec<i64>) -> Self {
        ImplicitVector(counts)
    }

    pub fn zeros(len: usize) -> Self {
        ImplicitVector(vec![0; len])
    }

    pub fn counts(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }

    /// Componentwise `self <= other`.
    pub fn dominated_by(&self, other: &ImplicitVector) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Expands to a firing vector over all `n` transitions of the net.
    pub fn to_firing_vector(&self, pi: &BasisPartition, n: usize) -> Vec<i64> {
        let mut y = vec![0; n];
        for (i, &t) in pi.implicit.iter().enumerate() {
            y[t] = self.0[i];
        }
        y
    }
}

impl fmt::Display for ImplicitVector {
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

/// Checks that `explicit`/`implicit` partition the transitions and recomputes all flags.
pub fn validate_partition(
    net: &PetriNet,
    spec: &FinalSpec,
    explicit: &TransitionSet,
    implicit: &TransitionSet,
) -> BasisResult<BasisPartition> {
    let n = net.transition_count();
    if let Some(&t) = explicit.iter().chain(implicit).find(|&&t| t >= n) {
        return Err(NetError::TransitionOutOfRange { index: t, count: n }.into());
    }
    if let Some(&t) = explicit.intersection(implicit).next() {
        return Err(BasisError::NotAPartition(format!(
            "'{}' is both explicit and implicit",
            net.transition_name(t)
        )));
    }
    if let Some(t) = (0..n).find(|t| !explicit.contains(t) && !implicit.contains(t)) {
        return Err(BasisError::NotAPartition(format!(
            "'{}' is neither explicit nor implicit",
            net.transition_name(t)
        )));
    }
    let order = net.transition_topological_order(implicit);
    let conflicts = net.conflict_transitions();
    let increasing = net.increasing_transitions(spec)?;
    let flags = PartitionFlags {
        acyclic: order.is_some(),
        non_conflicting: implicit.is_disjoint(&conflicts),
        non_increasing: implicit.is_disjoint(&increasing),
    };
    let mut position = vec![None; n];
    for (i, &t) in implicit.iter().enumerate() {
        position[t] = Some(i);
    }
    Ok(BasisPartition {
        explicit: explicit.iter().copied().collect(),
        implicit: implicit.iter().copied().collect(),
        implicit_order: order.unwrap_or_default(),
        position,
        flags,
    })
}

/// Partition whose implicit set is every transition not listed in `explicit`.
pub fn partition_from_explicit(
    net: &PetriNet,
    spec: &FinalSpec,
    explicit: &TransitionSet,
) -> BasisResult<BasisPartition> {
    let implicit: TransitionSet = (0..net.transition_count())
        .filter(|t| !explicit.contains(t))
        .collect();
    validate_partition(net, spec, explicit, &implicit)
}

/// Deterministic CI-partition: drop conflicting, increasing and forced transitions from the
/// implicit set, then repeatedly make explicit the smallest-index transition on a cycle.
pub fn derive_ci_partition(
    net: &PetriNet,
    spec: &FinalSpec,
    forced_explicit: &TransitionSet,
) -> BasisResult<BasisPartition> {
    let excluded: TransitionSet = net
        .conflict_transitions()
        .union(&net.increasing_transitions(spec)?)
        .copied()
        .chain(forced_explicit.iter().copied())
        .collect();
    let mut implicit: TransitionSet = (0..net.transition_count())
        .filter(|t| !excluded.contains(t))
        .collect();
    while let Some(&t) = net.cyclic_transitions(&implicit).iter().next() {
        implicit.remove(&t);
    }
    let explicit = (0..net.transition_count())
        .filter(|t| !implicit.contains(t))
        .collect();
    validate_partition(net, spec, &explicit, &implicit)
}

/// Precomputed implicit-subnet columns for repeated explanation queries.
pub struct Explainer<'a> {
    net: &'a PetriNet,
    pi: &'a BasisPartition,
    pre: Vec<Vec<i64>>,
    inc: Vec<Vec<i64>>,
    // per transition: implicit positions that can feed its input places
    cones: Vec<Option<Vec<usize>>>,
    cap: u64,
}

impl<'a> Explainer<'a> {
    pub fn new(net: &'a PetriNet, pi: &'a BasisPartition, cap: u64) -> BasisResult<Self> {
        pi.require_acyclic()?;
        check_dim(net.transition_count(), pi.position.len())?;
        let pre = pi.implicit.iter().map(|&t| net.pre_column(t)).collect();
        let inc = pi
            .implicit
            .iter()
            .map(|&t| net.incidence_column(t))
            .collect();
        let cones = (0..net.transition_count())
            .map(|t| pi.is_explicit(t).then(|| backward_cone(net, pi, t)))
            .collect();
        Ok(Explainer {
            net,
            pi,
            pre,
            inc,
            cones,
            cap,
        })
    }

    /// Componentwise-minimal implicit firing vectors after which `t` is enabled, sorted
    /// lexicographically. Empty when no implicit firing sequence enables `t`.
    pub fn min_explanations(&self, m: &Marking, t: usize) -> BasisResult<Vec<ImplicitVector>> {
        let net = self.net;
        check_dim(net.place_count(), m.len())?;
        if t >= net.transition_count() {
            return Err(NetError::TransitionOutOfRange {
                index: t,
                count: net.transition_count(),
            }
            .into());
        }
        let cone = self.cones[t]
            .as_ref()
            .ok_or_else(|| BasisError::NotExplicit(net.transition_name(t).to_string()))?;
        let need = net.pre_column(t);
        let n_i = self.pi.implicit.len();
        if m.covers(&need) {
            return Ok(vec![ImplicitVector::zeros(n_i)]);
        }

        // Breadth-first over firing vectors, level = number of implicit firings. A vector is
        // not extended once it explains `t` or dominates an explanation already found.
        let mut found: Vec<Vec<i64>> = Vec::new();
        let mut visited: HashSet<Vec<i64>> = HashSet::new();
        let mut frontier: Vec<(Vec<i64>, Vec<i64>)> = vec![(vec![0; n_i], m.tokens().to_vec())];
        let mut explored: u64 = 0;
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for (y, tokens) in &frontier {
                for &u in cone {
                    if !covers(tokens, &self.pre[u]) {
                        continue;
                    }
                    let mut y2 = y.clone();
                    y2[u] += 1;
                    if found.iter().any(|f| vec_le(f, &y2)) || !visited.insert(y2.clone()) {
                        continue;
                    }
                    explored += 1;
                    if explored > self.cap {
                        return Err(BasisError::SaturationCap { cap: self.cap });
                    }
                    let tokens2 = add_checked(tokens, &self.inc[u], 1)?;
                    if covers(&tokens2, &need) {
                        found.push(y2);
                    } else {
                        next.push((y2, tokens2));
                    }
                }
            }
            frontier = next;
        }
        let mut out: Vec<ImplicitVector> = found.into_iter().map(ImplicitVector).collect();
        out.sort();
        Ok(out)
    }
}

/// Implicit transitions (as positions) that can transitively put tokens into `•t`.
fn backward_cone(net: &PetriNet, pi: &BasisPartition, t: usize) -> Vec<usize> {
    let mut places: BTreeSet<usize> = net.preset_of_transition(t).collect();
    let mut queue: VecDeque<usize> = places.iter().copied().collect();
    let mut cone = BTreeSet::new();
    while let Some(p) = queue.pop_front() {
        for (i, &u) in pi.implicit.iter().enumerate() {
            if net.post(p, u) > 0 && cone.insert(i) {
                for q in net.preset_of_transition(u) {
                    if places.insert(q) {
                        queue.push_back(q);
                    }
                }
            }
        }
    }
    cone.into_iter().collect()
}

/// Minimal explanation vectors of explicit transition `t` at `m`.
pub fn min_explanations(
    net: &PetriNet,
    pi: &BasisPartition,
    m: &Marking,
    t: usize,
) -> BasisResult<Vec<ImplicitVector>> {
    Explainer::new(net, pi, DEFAULT_SATURATION_CAP)?.min_explanations(m, t)
}

/// The unique maximal implicit firing vector at `m` (conflict-free implicit subnet required).
pub fn max_ifv(
    net: &PetriNet,
    pi: &BasisPartition,
    m: &Marking,
    cap: u64,
) -> BasisResult<ImplicitVector> {
    pi.require_conflict_free()?;
    saturate(net, pi, m, &pi.implicit_order, cap).map(|(y, _)| y)
}

/// As [`max_ifv`], saturating along a caller-supplied topological order of the implicit set.
pub fn max_ifv_in_order(
    net: &PetriNet,
    pi: &BasisPartition,
    m: &Marking,
    order: &[usize],
    cap: u64,
) -> BasisResult<ImplicitVector> {
    pi.require_conflict_free()?;
    check_order(net, pi, order)?;
    saturate(net, pi, m, order, cap).map(|(y, _)| y)
}

/// `m + C_I * max_ifv(m)`.
pub fn i_max_marking(
    net: &PetriNet,
    pi: &BasisPartition,
    m: &Marking,
    cap: u64,
) -> BasisResult<Marking> {
    pi.require_conflict_free()?;
    saturate(net, pi, m, &pi.implicit_order, cap).map(|(_, mk)| mk)
}

/// Both the maximal implicit firing vector and the marking it yields.
pub fn saturate_implicit(
    net: &PetriNet,
    pi: &BasisPartition,
    m: &Marking,
    cap: u64,
) -> BasisResult<(ImplicitVector, Marking)> {
    pi.require_conflict_free()?;
    saturate(net, pi, m, &pi.implicit_order, cap)
}

fn saturate(
    net: &PetriNet,
    pi: &BasisPartition,
    m: &Marking,
    order: &[usize],
    cap: u64,
) -> BasisResult<(ImplicitVector, Marking)> {
    check_dim(net.place_count(), m.len())?;
    let mut tokens = m.tokens().to_vec();
    let mut y = vec![0i64; pi.implicit.len()];
    let mut total: u64 = 0;
    for &u in order {
        let mut times: Option<i64> = None;
        for p in net.preset_of_transition(u) {
            let k = tokens[p] / net.pre(p, u);
            times = Some(times.map_or(k, |c: i64| c.min(k)));
        }
        // no input place: fires forever
        let times = times.ok_or(BasisError::SaturationCap { cap })?;
        if times == 0 {
            continue;
        }
        total = total.saturating_add(times as u64);
        if total > cap {
            return Err(BasisError::SaturationCap { cap });
        }
        tokens = net.add_column(&tokens, u, times)?;
        y[pi.implicit_position(u)
            .expect("order lists implicit transitions")] = times;
    }
    Ok((ImplicitVector(y), Marking::from_raw(tokens)))
}

fn check_order(net: &PetriNet, pi: &BasisPartition, order: &[usize]) -> BasisResult<()> {
    let mut seen = BTreeSet::new();
    for &t in order {
        if pi.implicit_position(t).is_none() || !seen.insert(t) {
            return Err(BasisError::BadOrder(format!(
                "transition index {t} is not an implicit transition or repeats"
            )));
        }
    }
    if seen.len() != pi.implicit.len() {
        return Err(BasisError::BadOrder(
            "order omits implicit transitions".into(),
        ));
    }
    for (i, &u) in order.iter().enumerate() {
        for &v in &order[..i] {
            // v fires before u, so u must not feed v
            if (0..net.place_count()).any(|p| net.post(p, u) > 0 && net.pre(p, v) > 0) {
                return Err(BasisError::BadOrder(format!(
                    "'{}' feeds '{}' but comes after it",
                    net.transition_name(u),
                    net.transition_name(v)
                )));
            }
        }
    }
    Ok(())
}

/// Every marking reachable from `m` by implicit firings only, bounded by `cap` markings.
pub fn implicit_reach(
    net: &PetriNet,
    pi: &BasisPartition,
    m: &Marking,
    cap: usize,
) -> BasisResult<BTreeSet<Marking>> {
    pi.require_acyclic()?;
    check_dim(net.place_count(), m.len())?;
    let mut seen: HashSet<Marking> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(m.clone());
    queue.push_back(m.clone());
    while let Some(cur) = queue.pop_front() {
        for &u in &pi.implicit {
            if net.enabled_unchecked(cur.tokens(), u) {
                let next = Marking::from_raw(net.add_column(cur.tokens(), u, 1)?);
                if seen.insert(next.clone()) {
                    if seen.len() > cap {
                        return Err(BasisError::ReachCap { cap });
                    }
                    queue.push_back(next);
                }
            }
        }
    }
    Ok(seen.into_iter().collect())
}

pub(crate) fn covers(tokens: &[i64], need: &[i64]) -> bool {
    tokens.iter().zip(need).all(|(a, b)| a >= b)
}

fn vec_le(a: &[i64], b: &[i64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn add_checked(a: &[i64], b: &[i64], times: i64) -> Result<Vec<i64>, NetError> {
    a.iter()
        .zip(b)
        .map(|(x, d)| {
            d.checked_mul(times)
                .and_then(|v| x.checked_add(v))
                .ok_or(NetError::Overflow)
        })
        .collect()
}
