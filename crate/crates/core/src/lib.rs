//! Non-blockingness verification of bounded Petri nets whose final markings are given by
//! generalized mutual exclusion constraints.
//!
//! The decision procedure builds a basis reachability graph under a partition whose implicit
//! transitions are conflict-free, acyclic and never increase any constraint weight, then
//! checks that every basis marking can reach one whose saturated implicit successor is final.
//! The [`oracle`] module holds an exhaustive reachability-graph baseline for cross-checking.

pub mod basis;
pub mod bench;
pub mod brg;
pub mod caps;
pub mod format;
pub mod net;
pub mod oracle;
pub mod report;
pub mod samples;
pub mod verify;

pub use basis::{BasisPartition, ImplicitVector, PartitionFlags};
pub use brg::CiBrg;
pub use net::{Combinator, FinalSpec, Gmec, Marking, PetriNet, Plant, TransitionSet};
pub use verify::{check_nonblocking, Analysis, Verdict};
