//! Basis reachability graph construction, adjacency queries, DOT and JSON export.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::{
    partition_from_explicit, BasisError, BasisPartition, Explainer, ImplicitVector,
    DEFAULT_SATURATION_CAP,
};
use crate::net::{Marking, NetError, PetriNet, Plant, TransitionSet};

pub const DEFAULT_STATE_CAP: usize = 10_000_000;

#[derive(Debug, Error)]
pub enum BrgError {
    #[error(transparent)]
    Basis(#[from] BasisError),

    #[error(transparent)]
    Net(#[from] NetError),

    #[error("basis reachability graph exceeds {cap} states (net may be unbounded)")]
    StateCap { cap: usize },

    #[error("malformed graph dump: {0}")]
    Dump(String),
}

pub type BrgResult<T> = Result<T, BrgError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BrgLimits {
    pub states: usize,
    pub saturation: u64,
}

impl Default for BrgLimits {
    fn default() -> Self {
        BrgLimits {
            states: DEFAULT_STATE_CAP,
            saturation: DEFAULT_SATURATION_CAP,
        }
    }
}

/// An explicit transition paired with the minimal explanation that enabled it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    pub transition: usize,
    pub explanation: ImplicitVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: usize,
    pub event: Event,
    pub target: usize,
}

/// Deterministic automaton over basis markings. State 0 is the initial marking; states are
/// numbered in first-in-first-out discovery order and edges are grouped by source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CiBrg {
    states: Vec<Marking>,
    index: HashMap<Marking, usize>,
    edges: Vec<Edge>,
    // per state: range into `edges`
    outgoing: Vec<(usize, usize)>,
    partition: BasisPartition,
}

impl CiBrg {
    pub fn initial(&self) -> usize {
        0
    }

    pub fn states(&self) -> &[Marking] {
        &self.states
    }

    pub fn state(&self, s: usize) -> &Marking {
        &self.states[s]
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, m: &Marking) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn partition(&self) -> &BasisPartition {
        &self.partition
    }

    /// The event alphabet.
    pub fn events(&self) -> BTreeSet<&Event> {
        self.edges.iter().map(|e| &e.event).collect()
    }

    /// Outgoing edges of `s`, ordered by transition index then explanation.
    pub fn successors(&self, s: usize) -> &[Edge] {
        let (lo, hi) = self.outgoing[s];
        &self.edges[lo..hi]
    }

    /// Predecessor lists, one entry per incoming edge.
    pub fn reverse_adjacency(&self) -> Vec<Vec<usize>> {
        let mut preds = vec![Vec::new(); self.states.len()];
        for e in &self.edges {
            preds[e.target].push(e.source);
        }
        preds
    }

    /// States without outgoing edges.
    pub fn dead_ends(&self) -> Vec<usize> {
        (0..self.states.len())
            .filter(|&s| self.successors(s).is_empty())
            .collect()
    }

    fn from_parts(
        states: Vec<Marking>,
        mut edges: Vec<Edge>,
        partition: BasisPartition,
    ) -> BrgResult<Self> {
        let mut index = HashMap::with_capacity(states.len());
        for (i, m) in states.iter().enumerate() {
            if index.insert(m.clone(), i).is_some() {
                return Err(BrgError::Dump(format!("duplicate state {m}")));
            }
        }
        edges.sort_by(|a, b| (a.source, &a.event, a.target).cmp(&(b.source, &b.event, b.target)));
        let mut outgoing = vec![(0, 0); states.len()];
        let mut i = 0;
        for (s, range) in outgoing.iter_mut().enumerate() {
            let lo = i;
            while i < edges.len() && edges[i].source == s {
                i += 1;
            }
            *range = (lo, i);
        }
        if i != edges.len() {
            return Err(BrgError::Dump("edge refers to unknown state".into()));
        }
        Ok(CiBrg {
            states,
            index,
            edges,
            outgoing,
            partition,
        })
    }
}

/// Builds the basis reachability graph of `plant` under `pi` by breadth-first expansion.
pub fn build_brg(plant: &Plant, pi: &BasisPartition, limits: BrgLimits) -> BrgResult<CiBrg> {
    let net = &plant.net;
    let explainer = Explainer::new(net, pi, limits.saturation)?;
    let mut states = vec![plant.initial.clone()];
    let mut index = HashMap::from([(plant.initial.clone(), 0usize)]);
    let mut edges = Vec::new();
    let mut outgoing = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let lo = edges.len();
        let source = states[s].clone();
        for &t in pi.explicit() {
            for y in explainer.min_explanations(&source, t)? {
                let target = apply_event(net, pi, &source, t, &y)?;
                let id = match index.get(&target) {
                    Some(&id) => id,
                    None => {
                        let id = states.len();
                        if id >= limits.states {
                            return Err(BrgError::StateCap { cap: limits.states });
                        }
                        index.insert(target.clone(), id);
                        states.push(target);
                        queue.push_back(id);
                        id
                    }
                };
                edges.push(Edge {
                    source: s,
                    event: Event {
                        transition: t,
                        explanation: y,
                    },
                    target: id,
                });
            }
        }
        outgoing.push((lo, edges.len()));
    }
    Ok(CiBrg {
        states,
        index,
        edges,
        outgoing,
        partition: pi.clone(),
    })
}

/// `m + C_I y + C(., t)`.
pub fn apply_event(
    net: &PetriNet,
    pi: &BasisPartition,
    m: &Marking,
    t: usize,
    y: &ImplicitVector,
) -> BrgResult<Marking> {
    let mut full = y.to_firing_vector(pi, net.transition_count());
    full[t] += 1;
    net.fire_vector(m, &full)?.ok_or_else(|| {
        BrgError::Dump(format!(
            "event ({}, {y}) not firable at {m}",
            net.transition_name(t)
        ))
    })
}

/// Per-state highlighting for [`export_dot`].
#[derive(Debug, Clone, Default)]
pub struct DotAnnotations {
    pub final_states: BTreeSet<usize>,
    pub dead_states: BTreeSet<usize>,
}

/// Graphviz rendering. Final states are drawn as red dashed boxes, dead ends doubly outlined.
pub fn export_dot(brg: &CiBrg, net: &PetriNet, notes: &DotAnnotations) -> String {
    let mut out = String::new();
    writeln!(out, "digraph brg {{").unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
    writeln!(out, "  node [shape=ellipse, fontname=\"monospace\"];").unwrap();
    for (s, m) in brg.states().iter().enumerate() {
        let mut attrs = format!("label=\"Mb{s}\\n{m}\"");
        if notes.final_states.contains(&s) {
            attrs.push_str(", shape=box, style=dashed, color=red");
        }
        if notes.dead_states.contains(&s) {
            attrs.push_str(", peripheries=2");
        }
        writeln!(out, "  s{s} [{attrs}];").unwrap();
    }
    for e in brg.edges() {
        writeln!(
            out,
            "  s{} -> s{} [label=\"({}, {})\"];",
            e.source,
            e.target,
            escape(net.transition_name(e.event.transition)),
            e.event.explanation
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// JSON-friendly form of a graph: states as token vectors, edges as triples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrgDump {
    pub places: Vec<String>,
    pub transitions: Vec<String>,
    pub explicit: Vec<String>,
    pub implicit: Vec<String>,
    pub states: Vec<Marking>,
    pub edges: Vec<EdgeDump>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDump {
    pub source: usize,
    pub transition: String,
    pub explanation: ImplicitVector,
    pub target: usize,
}

impl BrgDump {
    pub fn from_brg(brg: &CiBrg, net: &PetriNet) -> Self {
        let names = |ts: &[usize]| {
            ts.iter()
                .map(|&t| net.transition_name(t).to_string())
                .collect()
        };
        BrgDump {
            places: net.places().to_vec(),
            transitions: net.transitions().to_vec(),
            explicit: names(brg.partition.explicit()),
            implicit: names(brg.partition.implicit()),
            states: brg.states.clone(),
            edges: brg
                .edges
                .iter()
                .map(|e| EdgeDump {
                    source: e.source,
                    transition: net.transition_name(e.event.transition).to_string(),
                    explanation: e.event.explanation.clone(),
                    target: e.target,
                })
                .collect(),
        }
    }

    /// Rebuilds the automaton against `plant`, checking names, dimensions and every edge.
    pub fn into_brg(self, plant: &Plant) -> BrgResult<CiBrg> {
        let net = &plant.net;
        if self.places != net.places() || self.transitions != net.transitions() {
            return Err(BrgError::Dump(
                "place/transition names differ from the net".into(),
            ));
        }
        let explicit: TransitionSet = net.transition_set(&self.explicit)?;
        let pi = partition_from_explicit(net, &plant.final_spec, &explicit)?;
        if self.implicit
            != pi
                .implicit()
                .iter()
                .map(|&t| net.transition_name(t))
                .collect::<Vec<_>>()
        {
            return Err(BrgError::Dump(
                "implicit set inconsistent with explicit set".into(),
            ));
        }
        for m in &self.states {
            if m.len() != net.place_count() || m.tokens().iter().any(|&x| x < 0) {
                return Err(BrgError::Dump(format!("bad state {m}")));
            }
        }
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in self.edges {
            let t = net
                .transition_by_name(&e.transition)
                .ok_or_else(|| NetError::UnknownTransition(e.transition.clone()))?;
            if e.source >= self.states.len() || e.target >= self.states.len() {
                return Err(BrgError::Dump("edge refers to unknown state".into()));
            }
            if e.explanation.len() != pi.implicit_count() {
                return Err(BrgError::Dump("explanation length mismatch".into()));
            }
            let reached = apply_event(net, &pi, &self.states[e.source], t, &e.explanation)?;
            if reached != self.states[e.target] {
                return Err(BrgError::Dump(format!(
                    "edge {} -> {} does not match marking arithmetic",
                    e.source, e.target
                )));
            }
            edges.push(Edge {
                source: e.source,
                event: Event {
                    transition: t,
                    explanation: e.explanation,
                },
                target: e.target,
            });
        }
        CiBrg::from_parts(self.states, edges, pi)
    }
}
