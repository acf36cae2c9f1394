//! JSON verification report.
//!
//! ```json
//! {
//!   "verdict": "blocking",
//!   "partition": { "explicit": ["t3", "t4", "t6"], "implicit": ["t1", "t2", "t5", "t7"] },
//!   "brg": { "states": 6, "edges": 11, "final_basis": 5, "dead_ends": [3] },
//!   "witness": { "state": 3, "marking": [0, 0, 0, 0, 1, 0] },
//!   "timings": { "partition_us": 4, "build_us": 31, "final_basis_us": 2, "coreachability_us": 1, "total_us": 38 }
//! }
//! ```
//!
//! `witness` is present exactly when the verdict is `blocking`. Apart from `timings`, a report
//! is a function of the input plant and partition only.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{Marking, Plant};
use crate::verify::{Analysis, Timings};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("invalid report JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("inconsistent report: {0}")]
    Inconsistent(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictKind {
    Nonblocking,
    Blocking,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub explicit: Vec<String>,
    pub implicit: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrgReport {
    pub states: usize,
    pub edges: usize,
    pub final_basis: usize,
    pub dead_ends: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub state: usize,
    pub marking: Marking,
}

/// Stage timings in microseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimingsReport {
    pub partition_us: u64,
    pub build_us: u64,
    pub final_basis_us: u64,
    pub coreachability_us: u64,
    pub total_us: u64,
}

impl From<&Timings> for TimingsReport {
    fn from(t: &Timings) -> Self {
        let us = |d: std::time::Duration| u64::try_from(d.as_micros()).unwrap_or(u64::MAX);
        TimingsReport {
            partition_us: us(t.partition),
            build_us: us(t.build),
            final_basis_us: us(t.final_basis),
            coreachability_us: us(t.coreachability),
            total_us: us(t.total()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub verdict: VerdictKind,
    pub partition: PartitionReport,
    pub brg: BrgReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
    pub timings: TimingsReport,
}

impl Report {
    pub fn from_analysis(analysis: &Analysis, plant: &Plant) -> Self {
        let net = &plant.net;
        let names = |ts: &[usize]| -> Vec<String> {
            ts.iter()
                .map(|&t| net.transition_name(t).to_string())
                .collect()
        };
        let v = &analysis.verdict;
        Report {
            verdict: if v.nonblocking {
                VerdictKind::Nonblocking
            } else {
                VerdictKind::Blocking
            },
            partition: PartitionReport {
                explicit: names(analysis.partition.explicit()),
                implicit: names(analysis.partition.implicit()),
            },
            brg: BrgReport {
                states: v.stats.states,
                edges: v.stats.edges,
                final_basis: v.stats.final_basis,
                dead_ends: v.dead_end_states.clone(),
            },
            witness: v.blocking_witness.map(|s| WitnessReport {
                state: s,
                marking: analysis.brg.state(s).clone(),
            }),
            timings: TimingsReport::from(&v.stats.timings),
        }
    }

    pub fn is_nonblocking(&self) -> bool {
        self.verdict == VerdictKind::Nonblocking
    }

    /// Witness present iff blocking, and every index within the state count.
    pub fn check(&self) -> Result<(), ReportError> {
        match (&self.verdict, &self.witness) {
            (VerdictKind::Blocking, None) => {
                return Err(ReportError::Inconsistent(
                    "blocking verdict without witness",
                ))
            }
            (VerdictKind::Nonblocking, Some(_)) => {
                return Err(ReportError::Inconsistent(
                    "non-blocking verdict with witness",
                ))
            }
            _ => {}
        }
        let n = self.brg.states;
        if self.brg.final_basis > n
            || self.brg.dead_ends.iter().any(|&s| s >= n)
            || self.witness.as_ref().is_some_and(|w| w.state >= n)
        {
            return Err(ReportError::Inconsistent("state index out of range"));
        }
        Ok(())
    }

    /// Copy with zeroed timings, for byte-level comparison of runs.
    pub fn without_timings(&self) -> Self {
        Report {
            timings: TimingsReport::default(),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        let r: Report = serde_json::from_str(text)?;
        r.check()?;
        Ok(r)
    }
}
