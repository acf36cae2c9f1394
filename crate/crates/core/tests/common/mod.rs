//! Shared helpers for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use basisnet::basis::{
    derive_ci_partition, implicit_reach, partition_from_explicit, BasisPartition,
};
use basisnet::brg::{build_brg, BrgLimits};
use basisnet::oracle::{build_rg, random_plant, RandomPlantParams, ReachGraph, DEFAULT_RG_CAP};
use basisnet::{CiBrg, FinalSpec, Gmec, Marking, PetriNet, Plant, TransitionSet};

pub const SEEDS: u64 = 200;

/// The differential corpus: plants for seeds `0..SEEDS` that the generator accepted.
pub fn corpus() -> Vec<(u64, Plant)> {
    let params = RandomPlantParams::default();
    (0..SEEDS)
        .filter_map(|seed| random_plant(seed, &params).map(|p| (seed, p)))
        .collect()
}

pub struct Instance {
    pub plant: Plant,
    pub pi: BasisPartition,
    pub brg: CiBrg,
    pub rg: ReachGraph,
}

pub fn instance(plant: Plant) -> Instance {
    let pi = derive_ci_partition(&plant.net, &plant.final_spec, &TransitionSet::new()).unwrap();
    let brg = build_brg(&plant, &pi, BrgLimits::default()).unwrap();
    let rg = build_rg(&plant.net, &plant.initial, DEFAULT_RG_CAP).unwrap();
    Instance { plant, pi, brg, rg }
}

/// Partition with every transition explicit.
pub fn all_explicit(plant: &Plant) -> BasisPartition {
    let all: TransitionSet = (0..plant.net.transition_count()).collect();
    partition_from_explicit(&plant.net, &plant.final_spec, &all).unwrap()
}

/// Union of the implicit reaches of all basis markings.
pub fn union_of_implicit_reaches(inst: &Instance) -> BTreeSet<Marking> {
    let mut out = BTreeSet::new();
    for m in inst.brg.states() {
        out.extend(implicit_reach(&inst.plant.net, &inst.pi, m, 1_000_000).unwrap());
    }
    out
}

/// Up to `limit` distinct topological orders of the implicit transitions, where `u` must
/// precede `v` whenever an output place of `u` is an input place of `v`.
pub fn topological_orders(net: &PetriNet, pi: &BasisPartition, limit: usize) -> Vec<Vec<usize>> {
    let ts = pi.implicit().to_vec();
    let feeds = |u: usize, v: usize| {
        (0..net.place_count()).any(|p| net.post(p, u) > 0 && net.pre(p, v) > 0)
    };
    let mut indeg: HashMap<usize, usize> = ts.iter().map(|&v| (v, 0)).collect();
    for &u in &ts {
        for &v in &ts {
            if u != v && feeds(u, v) {
                *indeg.get_mut(&v).unwrap() += 1;
            }
        }
    }
    fn go(
        ts: &[usize],
        feeds: &dyn Fn(usize, usize) -> bool,
        indeg: &mut HashMap<usize, usize>,
        placed: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        limit: usize,
    ) {
        if out.len() >= limit {
            return;
        }
        if placed.len() == ts.len() {
            out.push(placed.clone());
            return;
        }
        // try candidates in reverse order too, so the first few orders differ early
        let ready: Vec<usize> = ts
            .iter()
            .rev()
            .copied()
            .filter(|t| !placed.contains(t) && indeg[t] == 0)
            .collect();
        for u in ready {
            placed.push(u);
            for &v in ts {
                if v != u && feeds(u, v) {
                    *indeg.get_mut(&v).unwrap() -= 1;
                }
            }
            go(ts, feeds, indeg, placed, out, limit);
            for &v in ts {
                if v != u && feeds(u, v) {
                    *indeg.get_mut(&v).unwrap() += 1;
                }
            }
            placed.pop();
        }
    }
    let mut out = Vec::new();
    go(&ts, &feeds, &mut indeg, &mut Vec::new(), &mut out, limit);
    out
}

/// Partitions on which `max_ifv` is defined: the derived CI-partition, and the widest
/// conflict-free acyclic one (increasing transitions left implicit).
pub fn conflict_free_partitions(plant: &Plant) -> Vec<BasisPartition> {
    let zero = FinalSpec::single(Gmec::new(vec![0; plant.net.place_count()], 0));
    vec![
        derive_ci_partition(&plant.net, &plant.final_spec, &TransitionSet::new()).unwrap(),
        derive_ci_partition(&plant.net, &zero, &TransitionSet::new()).unwrap(),
    ]
}

/// Number of topological orders, counted up to `limit`.
pub fn count_orders(net: &PetriNet, pi: &BasisPartition, limit: usize) -> usize {
    topological_orders(net, pi, limit).len()
}

/// Checks that a BRG built with no implicit transitions is the reachability graph:
/// same marking set and, under the induced bijection, the same labelled edges.
pub fn brg_matches_rg(brg: &CiBrg, rg: &ReachGraph) -> Result<(), String> {
    if brg.state_count() != rg.state_count() {
        return Err(format!(
            "{} basis markings vs {} reachable markings",
            brg.state_count(),
            rg.state_count()
        ));
    }
    let to_rg: Vec<usize> = brg
        .states()
        .iter()
        .map(|m| {
            rg.index
                .get(m)
                .copied()
                .ok_or_else(|| format!("{m} not reachable"))
        })
        .collect::<Result<_, _>>()?;
    let a: BTreeSet<(usize, usize, usize)> = brg
        .edges()
        .iter()
        .map(|e| {
            assert!(e.event.explanation.is_empty());
            (to_rg[e.source], e.event.transition, to_rg[e.target])
        })
        .collect();
    let b: BTreeSet<(usize, usize, usize)> = rg.edges.iter().copied().collect();
    if a.len() != brg.edge_count() || a != b {
        return Err(format!("edge sets differ ({} vs {})", a.len(), b.len()));
    }
    Ok(())
}

/// Minimal Graphviz checker for the subset written by `export_dot`: returns (nodes, edges).
pub fn check_dot(text: &str) -> Result<(usize, usize), String> {
    let mut lines = text.lines();
    let head = lines.next().ok_or("empty")?;
    let name = head
        .strip_prefix("digraph ")
        .and_then(|s| s.strip_suffix(" {"))
        .ok_or_else(|| format!("bad header '{head}'"))?;
    if !is_id(name) {
        return Err(format!("bad graph name '{name}'"));
    }
    let body: Vec<&str> = lines.collect();
    let (last, body) = body.split_last().ok_or("missing closing brace")?;
    if *last != "}" {
        return Err(format!("expected '}}', found '{last}'"));
    }
    let mut nodes = BTreeSet::new();
    let mut edges = Vec::new();
    for line in body {
        let stmt = line
            .trim()
            .strip_suffix(';')
            .ok_or_else(|| format!("statement without ';': '{line}'"))?;
        let (head, attrs) = match stmt.find('[') {
            Some(i) => {
                let attrs = stmt[i..]
                    .strip_prefix('[')
                    .and_then(|s| s.strip_suffix(']'))
                    .ok_or_else(|| format!("unbalanced attribute list: '{line}'"))?;
                (stmt[..i].trim(), Some(attrs))
            }
            None => (stmt, None),
        };
        if let Some(attrs) = attrs {
            check_attrs(attrs).map_err(|e| format!("{e} in '{line}'"))?;
        }
        if let Some((a, b)) = head.split_once(" -> ") {
            if !is_id(a) || !is_id(b) {
                return Err(format!("bad edge '{line}'"));
            }
            edges.push((a.to_string(), b.to_string()));
        } else if head == "node" || head == "edge" || head == "graph" {
            if attrs.is_none() {
                return Err(format!("'{head}' without attributes"));
            }
        } else if attrs.is_none() && head.contains('=') {
            check_attrs(head)?;
        } else if is_id(head) {
            if !nodes.insert(head.to_string()) {
                return Err(format!("node '{head}' declared twice"));
            }
        } else {
            return Err(format!("unrecognised statement '{line}'"));
        }
    }
    for (a, b) in &edges {
        if !nodes.contains(a) || !nodes.contains(b) {
            return Err(format!("edge {a} -> {b} uses an undeclared node"));
        }
    }
    Ok((nodes.len(), edges.len()))
}

fn is_id(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// `key=value, key="quoted", ...`
fn check_attrs(s: &str) -> Result<(), String> {
    let mut rest = s.trim();
    while !rest.is_empty() {
        let eq = rest.find('=').ok_or("attribute without '='")?;
        let key = rest[..eq].trim();
        if !is_id(key) {
            return Err(format!("bad attribute name '{key}'"));
        }
        rest = rest[eq + 1..].trim_start();
        if let Some(q) = rest.strip_prefix('"') {
            let mut end = None;
            let mut escaped = false;
            for (i, c) in q.char_indices() {
                match (escaped, c) {
                    (true, _) => escaped = false,
                    (false, '\\') => escaped = true,
                    (false, '"') => {
                        end = Some(i);
                        break;
                    }
                    _ => {}
                }
            }
            let end = end.ok_or("unterminated string")?;
            rest = q[end + 1..].trim_start();
        } else {
            let end = rest.find(',').unwrap_or(rest.len());
            let value = rest[..end].trim();
            if value.is_empty()
                || !value
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
            {
                return Err(format!("bad attribute value '{value}'"));
            }
            rest = &rest[end..];
        }
        rest = rest.trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
            if rest.is_empty() {
                return Err("trailing ','".into());
            }
        } else if !rest.is_empty() {
            return Err(format!("unexpected '{rest}'"));
        }
    }
    Ok(())
}
