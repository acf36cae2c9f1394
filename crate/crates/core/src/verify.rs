//! Non-blockingness decision on a CI basis reachability graph.
//!
//! A plant is non-blocking iff every basis marking can reach, inside the graph, a basis
//! marking whose saturated implicit successor is final. Finality of that successor is
//! decided once per state; reachability is a single reverse search from the final-basis set.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::basis::{derive_ci_partition, i_max_marking, BasisError, BasisPartition};
use crate::brg::{build_brg, BrgError, BrgLimits, CiBrg};
use crate::net::{NetError, Plant, TransitionSet};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Basis(#[from] BasisError),

    #[error(transparent)]
    Brg(#[from] BrgError),

    #[error(transparent)]
    Net(#[from] NetError),
}

pub type VerifyResult<T> = Result<T, VerifyError>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Timings {
    pub partition: Duration,
    pub build: Duration,
    pub final_basis: Duration,
    pub coreachability: Duration,
}

impl Timings {
    pub fn total(&self) -> Duration {
        self.partition + self.build + self.final_basis + self.coreachability
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stats {
    pub states: usize,
    pub edges: usize,
    pub final_basis: usize,
    pub timings: Timings,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub nonblocking: bool,
    /// States whose implicit reach meets the final set, ascending.
    pub final_basis: Vec<usize>,
    /// Smallest-index state that cannot reach `final_basis`.
    pub blocking_witness: Option<usize>,
    pub dead_end_states: Vec<usize>,
    pub stats: Stats,
}

/// Partition, graph and verdict of one run.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub partition: BasisPartition,
    pub brg: CiBrg,
    pub verdict: Verdict,
}

/// States whose i-maximal marking is final. Requires a CI-partition.
pub fn final_basis_set(
    brg: &CiBrg,
    plant: &Plant,
    saturation_cap: u64,
) -> VerifyResult<Vec<usize>> {
    let pi = brg.partition();
    pi.require_ci()?;
    let mut out = Vec::new();
    for (s, m) in brg.states().iter().enumerate() {
        let top = i_max_marking(&plant.net, pi, m, saturation_cap)?;
        if plant.final_spec.is_final(&top)? {
            out.push(s);
        }
    }
    Ok(out)
}

/// `result[s]` is true iff some state of `targets` is reachable from `s`.
pub fn coreachable(brg: &CiBrg, targets: &[usize]) -> Vec<bool> {
    let preds = brg.reverse_adjacency();
    let mut seen = vec![false; brg.state_count()];
    let mut queue = VecDeque::new();
    for &s in targets {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
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
    seen
}

/// States with no outgoing edge. On a CI-graph these are exactly the basis markings whose
/// implicit reach contains a dead marking (namely their i-maximal marking).
pub fn dead_basis_markings(brg: &CiBrg) -> Vec<usize> {
    brg.dead_ends()
}

/// Decides non-blockingness on an already built CI-graph.
pub fn verify_brg(brg: &CiBrg, plant: &Plant, saturation_cap: u64) -> VerifyResult<Verdict> {
    let started = Instant::now();
    let final_basis = final_basis_set(brg, plant, saturation_cap)?;
    let final_time = started.elapsed();

    let started = Instant::now();
    let reach = coreachable(brg, &final_basis);
    let blocking_witness = reach.iter().position(|&ok| !ok);
    let coreach_time = started.elapsed();

    Ok(Verdict {
        nonblocking: blocking_witness.is_none(),
        stats: Stats {
            states: brg.state_count(),
            edges: brg.edge_count(),
            final_basis: final_basis.len(),
            timings: Timings {
                final_basis: final_time,
                coreachability: coreach_time,
                ..Timings::default()
            },
        },
        final_basis,
        blocking_witness,
        dead_end_states: dead_basis_markings(brg),
    })
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    pub limits: BrgLimits,
    /// Transitions kept explicit when deriving a partition.
    pub forced_explicit: TransitionSet,
}

/// Full pipeline: derive (or check) a CI-partition, build the graph and decide.
pub fn check_nonblocking(
    plant: &Plant,
    partition: Option<&BasisPartition>,
    opts: &VerifyOptions,
) -> VerifyResult<Analysis> {
    let started = Instant::now();
    let pi = match partition {
        Some(pi) => pi.clone(),
        None => derive_ci_partition(&plant.net, &plant.final_spec, &opts.forced_explicit)?,
    };
    pi.require_ci()?;
    let partition_time = started.elapsed();

    let started = Instant::now();
    let brg = build_brg(plant, &pi, opts.limits)?;
    let build_time = started.elapsed();

    let mut verdict = verify_brg(&brg, plant, opts.limits.saturation)?;
    verdict.stats.timings.partition = partition_time;
    verdict.stats.timings.build = build_time;
    Ok(Analysis {
        partition: pi,
        brg,
        verdict,
    })
}
