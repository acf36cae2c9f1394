//! Ground-truth engines: exhaustive reachability graph, direct non-blockingness check,
//! brute-force explanation enumeration and a seeded random plant generator.
//!
//! Everything here trades speed for obviousness. None of it is used by the verification
//! pipeline; tests compare the two.

use std::collections::{HashMap, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::basis::{covers, BasisPartition, ImplicitVector};
use crate::net::{Combinator, FinalSpec, Gmec, Marking, NetError, PetriNet, Plant};

pub const DEFAULT_RG_CAP: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error(transparent)]
    Net(#[from] NetError),

    #[error("reachability graph exceeds {cap} markings")]
    Cap { cap: usize },

    #[error("implicit subnet is not acyclic")]
    NotAcyclic,
}

pub type OracleResult<T> = Result<T, OracleError>;

/// Full reachability graph of a marked net.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachGraph {
    pub states: Vec<Marking>,
    pub index: HashMap<Marking, usize>,
    /// `(source, transition, target)`
    pub edges: Vec<(usize, usize, usize)>,
    pub dead: Vec<usize>,
}

impl ReachGraph {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn contains(&self, m: &Marking) -> bool {
        self.index.contains_key(m)
    }
}

pub fn build_rg(net: &PetriNet, initial: &Marking, cap: usize) -> OracleResult<ReachGraph> {
    let mut states = vec![initial.clone()];
    let mut index = HashMap::from([(initial.clone(), 0usize)]);
    let mut edges = Vec::new();
    let mut dead = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let m = states[s].clone();
        let enabled = net.enabled_transitions(&m)?;
        if enabled.is_empty() {
            dead.push(s);
        }
        for t in enabled {
            let next = net.fire(&m, t)?;
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    let id = states.len();
                    if id >= cap {
                        return Err(OracleError::Cap { cap });
                    }
                    index.insert(next.clone(), id);
                    states.push(next);
                    queue.push_back(id);
                    id
                }
            };
            edges.push((s, t, id));
        }
    }
    dead.sort_unstable();
    Ok(ReachGraph {
        states,
        index,
        edges,
        dead,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgVerdict {
    pub nonblocking: bool,
    /// Smallest-index reachable marking from which no final marking is reachable.
    pub witness: Option<usize>,
}

/// Direct check: every reachable marking can reach a final marking.
pub fn rg_nonblocking(rg: &ReachGraph, spec: &FinalSpec) -> OracleResult<RgVerdict> {
    let mut preds = vec![Vec::new(); rg.states.len()];
    for &(s, _, t) in &rg.edges {
        preds[t].push(s);
    }
    let mut seen = vec![false; rg.states.len()];
    let mut queue = VecDeque::new();
    for (i, m) in rg.states.iter().enumerate() {
        if spec.is_final(m)? {
            seen[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(s) = queue.pop_front() {
        for &p in &preds[s] {
            if !seen[p] {
                seen[p] = true;
                queue.push_back(p);
            }
        }
    }
    let witness = seen.iter().position(|&ok| !ok);
    Ok(RgVerdict {
        nonblocking: witness.is_none(),
        witness,
    })
}

/// Every implicit firing vector feasible from `m`, paired with the marking it yields.
/// Explores sequences depth-first and merges those with equal firing vectors.
pub fn implicit_vectors(
    net: &PetriNet,
    pi: &BasisPartition,
    m: &Marking,
    cap: usize,
) -> OracleResult<Vec<(ImplicitVector, Marking)>> {
    if !pi.flags().acyclic {
        return Err(OracleError::NotAcyclic);
    }
    let n_i = pi.implicit_count();
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut out = Vec::new();
    let mut stack = vec![(vec![0i64; n_i], m.clone())];
    seen.insert(vec![0; n_i]);
    while let Some((y, mk)) = stack.pop() {
        for (i, &u) in pi.implicit().iter().enumerate() {
            if net.is_enabled(&mk, u)? {
                let mut y2 = y.clone();
                y2[i] += 1;
                if seen.insert(y2.clone()) {
                    if seen.len() > cap {
                        return Err(OracleError::Cap { cap });
                    }
                    stack.push((y2, net.fire(&mk, u)?));
                }
            }
        }
        out.push((ImplicitVector::new(y), mk));
    }
    out.sort();
    Ok(out)
}

/// Reference minimal explanations: all feasible implicit vectors whose marking enables `t`,
/// filtered to the componentwise-minimal ones.
pub fn brute_min_explanations(
    net: &PetriNet,
    pi: &BasisPartition,
    m: &Marking,
    t: usize,
    cap: usize,
) -> OracleResult<Vec<ImplicitVector>> {
    let need = net.pre_column(t);
    let explaining: Vec<ImplicitVector> = implicit_vectors(net, pi, m, cap)?
        .into_iter()
        .filter(|(_, mk)| covers(mk.tokens(), &need))
        .map(|(y, _)| y)
        .collect();
    Ok(minimal_elements(&explaining))
}

/// Reference maximal implicit vectors: feasible vectors not strictly dominated by another.
pub fn brute_max_ifvs(
    net: &PetriNet,
    pi: &BasisPartition,
    m: &Marking,
    cap: usize,
) -> OracleResult<Vec<ImplicitVector>> {
    let all: Vec<ImplicitVector> = implicit_vectors(net, pi, m, cap)?
        .into_iter()
        .map(|(y, _)| y)
        .collect();
    Ok(all
        .iter()
        .filter(|y| !all.iter().any(|z| z != *y && y.dominated_by(z)))
        .cloned()
        .collect())
}

fn minimal_elements(ys: &[ImplicitVector]) -> Vec<ImplicitVector> {
    let mut out: Vec<ImplicitVector> = ys
        .iter()
        .filter(|y| !ys.iter().any(|z| z != *y && z.dominated_by(y)))
        .cloned()
        .collect();
    out.sort();
    out.dedup();
    out
}

/// A firing sequence from `m` whose firing vector is exactly `y`, by exhaustive search.
pub fn find_firing_sequence(
    net: &PetriNet,
    m: &Marking,
    y: &[i64],
) -> OracleResult<Option<Vec<usize>>> {
    fn go(
        net: &PetriNet,
        m: &Marking,
        rest: &mut Vec<i64>,
        seq: &mut Vec<usize>,
        dead: &mut HashSet<Vec<i64>>,
    ) -> OracleResult<bool> {
        if rest.iter().all(|&c| c == 0) {
            return Ok(true);
        }
        if dead.contains(rest) {
            return Ok(false);
        }
        for t in 0..rest.len() {
            if rest[t] > 0 && net.is_enabled(m, t)? {
                let next = net.fire(m, t)?;
                rest[t] -= 1;
                seq.push(t);
                if go(net, &next, rest, seq, dead)? {
                    return Ok(true);
                }
                seq.pop();
                rest[t] += 1;
            }
        }
        // the marking is determined by `rest`, so failures can be memoised on it
        dead.insert(rest.clone());
        Ok(false)
    }
    if y.iter().any(|&c| c < 0) {
        return Ok(None);
    }
    let mut rest = y.to_vec();
    let mut seq = Vec::new();
    let found = go(net, m, &mut rest, &mut seq, &mut HashSet::new())?;
    Ok(found.then_some(seq))
}

/// Parameters for [`random_plant`].
#[derive(Debug, Clone, PartialEq)]
pub struct RandomPlantParams {
    pub places: usize,
    pub transitions: usize,
    pub max_weight: i64,
    pub max_tokens: i64,
    /// Probability that a place carries a nonzero GMEC weight.
    pub gmec_density: f64,
    /// Plants whose reachability graph exceeds this are rejected.
    pub rg_cap: usize,
    pub retries: usize,
}

impl Default for RandomPlantParams {
    fn default() -> Self {
        RandomPlantParams {
            places: 8,
            transitions: 8,
            max_weight: 2,
            max_tokens: 4,
            gmec_density: 0.4,
            rg_cap: 20_000,
            retries: 8,
        }
    }
}

/// Deterministic random plant for differential testing. Nets have between 2 and
/// `params.places` places and between 1 and `params.transitions` transitions; every
/// transition consumes at least as many tokens as it produces, so every net is bounded.
/// Returns `None` if every attempt produced a reachability graph above `rg_cap`.
pub fn random_plant(seed: u64, params: &RandomPlantParams) -> Option<Plant> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..params.retries.max(1) {
        let plant = sample_plant(&mut rng, params);
        if build_rg(&plant.net, &plant.initial, params.rg_cap).is_ok() {
            return Some(plant);
        }
    }
    None
}

fn sample_plant(rng: &mut ChaCha8Rng, params: &RandomPlantParams) -> Plant {
    let m = rng.gen_range(2..=params.places.max(2));
    let n = rng.gen_range(1..=params.transitions.max(1));
    let w = params.max_weight.max(1);
    let mut pre = vec![vec![0i64; n]; m];
    let mut post = vec![vec![0i64; n]; m];
    for t in 0..n {
        // first input place is spread over the places to keep structural conflicts sparse
        let first = if rng.gen_bool(0.6) {
            t % m
        } else {
            rng.gen_range(0..m)
        };
        pre[first][t] = rng.gen_range(1..=w);
        if rng.gen_bool(0.3) {
            let p = rng.gen_range(0..m);
            pre[p][t] = rng.gen_range(1..=w);
        }
        let consumed: i64 = pre.iter().map(|row| row[t]).sum();
        // conservative by default, occasionally a sink that destroys tokens
        let mut budget = if rng.gen_bool(0.2) {
            rng.gen_range(0..consumed)
        } else {
            consumed
        };
        while budget > 0 {
            let p = rng.gen_range(0..m);
            let k = rng.gen_range(1..=budget.min(w));
            post[p][t] += k;
            budget -= k;
        }
    }
    let initial: Vec<i64> = (0..m)
        .map(|_| {
            if rng.gen_bool(0.5) {
                rng.gen_range(1..=params.max_tokens.max(1))
            } else {
                0
            }
        })
        .collect();
    let gmec_count = if rng.gen_bool(0.25) { 2 } else { 1 };
    let combinator = match (gmec_count, rng.gen_bool(0.5)) {
        (1, _) => Combinator::Single,
        (_, true) => Combinator::And,
        (_, false) => Combinator::Or,
    };
    let total: i64 = initial.iter().sum();
    let gmecs = (0..gmec_count)
        .map(|_| {
            let weights: Vec<i64> = (0..m)
                .map(|_| {
                    if rng.gen_bool(params.gmec_density) {
                        *[-1, 1, 1, 2].get(rng.gen_range(0..4)).unwrap()
                    } else {
                        0
                    }
                })
                .collect();
            let bound = rng.gen_range(0..=total.max(1));
            Gmec::new(weights, bound)
        })
        .collect();
    let places = (1..=m).map(|i| format!("p{i}")).collect();
    let transitions = (1..=n).map(|i| format!("t{i}")).collect();
    let net = PetriNet::new(places, transitions, pre, post).expect("generated net is valid");
    Plant::new(
        net,
        Marking::new(initial).unwrap(),
        FinalSpec::new(combinator, gmecs).unwrap(),
    )
    .expect("generated plant is consistent")
}
