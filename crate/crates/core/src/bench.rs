//! Parameter sweeps: rerun verification over a grid of initial token counts and GMEC bounds.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use crate::caps::Caps;
use crate::net::{Marking, Plant, TransitionSet};
use crate::oracle::{build_rg, rg_nonblocking};
use crate::verify::{check_nonblocking, VerifyOptions};

/// `place=v1,v2,...`: the initial token counts to try for one place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scale {
    pub place: String,
    pub values: Vec<i64>,
}

impl std::str::FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (place, values) = s
            .split_once('=')
            .ok_or_else(|| format!("expected place=v1,v2,..., found '{s}'"))?;
        let values = values
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<i64>()
                    .map_err(|_| format!("bad token count '{v}' in '{s}'"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if place.trim().is_empty() || values.is_empty() {
            return Err(format!("expected place=v1,v2,..., found '{s}'"));
        }
        Ok(Scale {
            place: place.trim().to_string(),
            values,
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct BenchConfig {
    pub scales: Vec<Scale>,
    /// Each value replaces the bound of every GMEC; empty keeps the file's bounds.
    pub bounds: Vec<i64>,
    pub oracle: bool,
    pub caps: Caps,
    pub forced_explicit: TransitionSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowResult {
    pub reach: Option<usize>,
    pub basis: usize,
    pub final_basis: usize,
    pub nonblocking: bool,
    pub oracle_nonblocking: Option<bool>,
    pub brg_time: Duration,
    pub rg_time: Option<Duration>,
}

impl RowResult {
    /// `|M_B| / |R|`.
    pub fn ratio(&self) -> Option<f64> {
        self.reach.map(|r| self.basis as f64 / r as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub assignment: Vec<(String, i64)>,
    pub bound: Option<i64>,
    pub outcome: Result<RowResult, String>,
}

/// Cartesian product of the scale values, in lexicographic order of the scale list.
fn assignments(scales: &[Scale]) -> Vec<Vec<(String, i64)>> {
    let mut out = vec![Vec::new()];
    for s in scales {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                s.values.iter().map(move |&v| {
                    let mut row = prefix.clone();
                    row.push((s.place.clone(), v));
                    row
                })
            })
            .collect();
    }
    out
}

fn instantiate(
    base: &Plant,
    assignment: &[(String, i64)],
    bound: Option<i64>,
) -> Result<Plant, String> {
    let mut plant = base.clone();
    let mut tokens = plant.initial.tokens().to_vec();
    for (place, v) in assignment {
        let p = plant
            .net
            .place_by_name(place)
            .ok_or_else(|| format!("unknown place '{place}'"))?;
        tokens[p] = *v;
    }
    plant.initial = Marking::new(tokens).map_err(|e| e.to_string())?;
    if let Some(k) = bound {
        for g in plant.final_spec.gmecs_mut() {
            g.bound = k;
        }
    }
    Ok(plant)
}

fn run_row(plant: &Plant, config: &BenchConfig) -> Result<RowResult, String> {
    let opts = VerifyOptions {
        limits: config.caps.brg_limits(),
        forced_explicit: config.forced_explicit.clone(),
    };
    let started = Instant::now();
    let analysis = check_nonblocking(plant, None, &opts).map_err(|e| e.to_string())?;
    let brg_time = started.elapsed();
    let (reach, oracle_nonblocking, rg_time) = if config.oracle {
        let started = Instant::now();
        let rg = build_rg(&plant.net, &plant.initial, config.caps.rg_states)
            .map_err(|e| e.to_string())?;
        let v = rg_nonblocking(&rg, &plant.final_spec).map_err(|e| e.to_string())?;
        (
            Some(rg.state_count()),
            Some(v.nonblocking),
            Some(started.elapsed()),
        )
    } else {
        (None, None, None)
    };
    Ok(RowResult {
        reach,
        basis: analysis.verdict.stats.states,
        final_basis: analysis.verdict.stats.final_basis,
        nonblocking: analysis.verdict.nonblocking,
        oracle_nonblocking,
        brg_time,
        rg_time,
    })
}

/// One row per (assignment, bound) pair. A failing row records its error and the sweep continues.
pub fn run_bench(base: &Plant, config: &BenchConfig) -> Vec<BenchRow> {
    let bounds: Vec<Option<i64>> = if config.bounds.is_empty() {
        vec![None]
    } else {
        config.bounds.iter().copied().map(Some).collect()
    };
    let mut rows = Vec::new();
    for assignment in assignments(&config.scales) {
        for &bound in &bounds {
            let outcome = instantiate(base, &assignment, bound).and_then(|p| run_row(&p, config));
            rows.push(BenchRow {
                assignment: assignment.clone(),
                bound,
                outcome,
            });
        }
    }
    rows
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "Yes"
    } else {
        "No"
    }
}

/// Tab-separated table, one line per row plus a header.
pub fn format_table(rows: &[BenchRow]) -> String {
    let mut out = String::from(
        "run\tparams\tk\t|R|\t|M_B|\t|M^_B|\tnonblocking\toracle\tratio\tbrg_s\trg_s\n",
    );
    for (i, row) in rows.iter().enumerate() {
        let params = row
            .assignment
            .iter()
            .map(|(p, v)| format!("{p}={v}"))
            .collect::<Vec<_>>()
            .join(",");
        let k = row.bound.map_or("-".to_string(), |k| k.to_string());
        write!(
            out,
            "{}\t{}\t{k}\t",
            i + 1,
            if params.is_empty() { "-" } else { &params }
        )
        .unwrap();
        match &row.outcome {
            Ok(r) => {
                let opt = |x: Option<String>| x.unwrap_or_else(|| "-".into());
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{:.3}\t{}",
                    opt(r.reach.map(|n| n.to_string())),
                    r.basis,
                    r.final_basis,
                    yes_no(r.nonblocking),
                    opt(r.oracle_nonblocking.map(|b| yes_no(b).to_string())),
                    opt(r.ratio().map(|x| format!("{:.1}%", 100.0 * x))),
                    r.brg_time.as_secs_f64(),
                    opt(r.rg_time.map(|d| format!("{:.3}", d.as_secs_f64()))),
                )
                .unwrap();
            }
            Err(e) => writeln!(out, "error: {e}").unwrap(),
        }
    }
    out
}
