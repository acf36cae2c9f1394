//! Line-oriented plant description format (`.pnet`).
//!
//! ```text
//! # comment
//! place p1 tokens=2
//! place p2
//! trans t1
//! arc p1 -> t1 w=2      # input arc (Pre)
//! arc t1 -> p2          # output arc (Post)
//! gmec 3 : 1*p1 + -2*p2 # 1*p1 - 2*p2 <= 3
//! final or              # combine several gmec lines (default: and)
//! explicit t1           # keep t1 explicit when deriving a partition
//! ```
//!
//! Arc weights default to 1 and must be positive; initial tokens default to 0.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::net::{Combinator, FinalSpec, Gmec, Marking, NetError, PetriNet, Plant, TransitionSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: syntax error: {msg}")]
    Syntax { line: usize, msg: String },

    #[error("line {line}: unknown identifier '{id}'")]
    UnknownId { line: usize, id: String },

    #[error("line {line}: duplicate definition of '{id}'")]
    Duplicate { line: usize, id: String },

    #[error("line {line}: {msg}")]
    Semantic { line: usize, msg: String },

    #[error("{0}")]
    Net(#[from] NetError),
}

/// A parsed plant plus the transitions the file asks to keep explicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetFile {
    pub plant: Plant,
    pub forced_explicit: Vec<String>,
}

impl NetFile {
    pub fn forced_explicit_set(&self) -> Result<TransitionSet, NetError> {
        self.plant.net.transition_set(&self.forced_explicit)
    }
}

enum Line<'a> {
    Arc {
        from: &'a str,
        to: &'a str,
        weight: i64,
    },
    Gmec {
        bound: i64,
        terms: Vec<(i64, &'a str)>,
    },
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn valid_id(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '[' | ']'))
}

fn parse_int(line: usize, s: &str, what: &str) -> Result<i64, ParseError> {
    s.parse::<i64>()
        .map_err(|_| syntax(line, format!("expected integer {what}, found '{s}'")))
}

/// `key=value` option with an integer value.
fn parse_option(line: usize, word: &str, key: &str) -> Result<i64, ParseError> {
    match word.split_once('=') {
        Some((k, v)) if k == key => parse_int(line, v, key),
        _ => Err(syntax(
            line,
            format!("expected '{key}=<n>', found '{word}'"),
        )),
    }
}

fn id_list(line: usize, words: &[&str]) -> Result<Vec<String>, ParseError> {
    let joined = words.join("");
    let ids: Vec<String> = joined
        .split(',')
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect();
    if ids.is_empty() {
        return Err(syntax(
            line,
            "expected a comma-separated list of transitions",
        ));
    }
    if let Some(bad) = ids.iter().find(|s| !valid_id(s)) {
        return Err(syntax(line, format!("invalid identifier '{bad}'")));
    }
    Ok(ids)
}

pub fn parse_net(text: &str) -> Result<NetFile, ParseError> {
    let mut places: Vec<(String, i64)> = Vec::new();
    let mut transitions: Vec<String> = Vec::new();
    let mut declared: HashSet<String> = HashSet::new();
    let mut pending: Vec<(usize, Line)> = Vec::new();
    let mut combinator: Option<(usize, Combinator)> = None;
    let mut forced: Vec<String> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = content.split_whitespace().collect();
        let Some((&keyword, rest)) = words.split_first() else {
            continue;
        };
        match keyword {
            "place" => {
                let (id, opts) = rest
                    .split_first()
                    .ok_or_else(|| syntax(line, "expected 'place <id> [tokens=<n>]'"))?;
                if !valid_id(id) {
                    return Err(syntax(line, format!("invalid identifier '{id}'")));
                }
                let tokens = match opts {
                    [] => 0,
                    [opt] => parse_option(line, opt, "tokens")?,
                    _ => return Err(syntax(line, "trailing input after place declaration")),
                };
                if tokens < 0 {
                    return Err(ParseError::Semantic {
                        line,
                        msg: format!("negative token count {tokens} for '{id}'"),
                    });
                }
                if !declared.insert(id.to_string()) {
                    return Err(ParseError::Duplicate {
                        line,
                        id: id.to_string(),
                    });
                }
                places.push((id.to_string(), tokens));
            }
            "trans" => {
                let [id] = rest else {
                    return Err(syntax(line, "expected 'trans <id>'"));
                };
                if !valid_id(id) {
                    return Err(syntax(line, format!("invalid identifier '{id}'")));
                }
                if !declared.insert(id.to_string()) {
                    return Err(ParseError::Duplicate {
                        line,
                        id: id.to_string(),
                    });
                }
                transitions.push(id.to_string());
            }
            "arc" => {
                let (from, to, opts) = match rest {
                    [from, "->", to, opts @ ..] => (*from, *to, opts),
                    _ => return Err(syntax(line, "expected 'arc <from> -> <to> [w=<n>]'")),
                };
                let weight = match opts {
                    [] => 1,
                    [opt] => parse_option(line, opt, "w")?,
                    _ => return Err(syntax(line, "trailing input after arc")),
                };
                if weight <= 0 {
                    return Err(ParseError::Semantic {
                        line,
                        msg: format!("arc weight must be positive, found {weight}"),
                    });
                }
                pending.push((line, Line::Arc { from, to, weight }));
            }
            "gmec" => {
                let (bound, terms) = content
                    .trim_start()
                    .strip_prefix("gmec")
                    .and_then(|s| s.split_once(':'))
                    .ok_or_else(|| syntax(line, "expected 'gmec <k> : <c>*<place> + ...'"))?;
                let bound = parse_int(line, bound.trim(), "bound")?;
                let terms = gmec_terms(terms).map_err(|msg| syntax(line, msg))?;
                pending.push((line, Line::Gmec { bound, terms }));
            }
            "final" => {
                let c = match rest {
                    ["and"] => Combinator::And,
                    ["or"] => Combinator::Or,
                    _ => return Err(syntax(line, "expected 'final and' or 'final or'")),
                };
                if combinator.is_some() {
                    return Err(ParseError::Duplicate {
                        line,
                        id: "final".into(),
                    });
                }
                combinator = Some((line, c));
            }
            "explicit" => forced.extend(id_list(line, rest)?),
            other => return Err(syntax(line, format!("unknown keyword '{other}'"))),
        }
    }

    let place_idx: HashMap<&str, usize> = places
        .iter()
        .enumerate()
        .map(|(i, (p, _))| (p.as_str(), i))
        .collect();
    let trans_idx: HashMap<&str, usize> = transitions
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let (m, n) = (places.len(), transitions.len());
    let mut pre = vec![vec![0i64; n]; m];
    let mut post = vec![vec![0i64; n]; m];
    let mut gmecs = Vec::new();
    for (line, item) in pending {
        match item {
            Line::Arc { from, to, weight } => {
                let unknown = |id: &str| ParseError::UnknownId {
                    line,
                    id: id.to_string(),
                };
                let slot = match (place_idx.get(from), trans_idx.get(to)) {
                    (Some(&p), Some(&t)) => &mut pre[p][t],
                    (Some(_), None) => return Err(unknown(to)),
                    (None, _) => match (trans_idx.get(from), place_idx.get(to)) {
                        (Some(&t), Some(&p)) => &mut post[p][t],
                        (Some(_), None) => return Err(unknown(to)),
                        (None, _) => return Err(unknown(from)),
                    },
                };
                if *slot != 0 {
                    return Err(ParseError::Duplicate {
                        line,
                        id: format!("{from} -> {to}"),
                    });
                }
                *slot = weight;
            }
            Line::Gmec { bound, terms } => {
                let mut weights = vec![0i64; m];
                let mut seen = HashSet::new();
                for (c, id) in terms {
                    let &p = place_idx.get(id).ok_or_else(|| ParseError::UnknownId {
                        line,
                        id: id.to_string(),
                    })?;
                    if !seen.insert(p) {
                        return Err(ParseError::Duplicate {
                            line,
                            id: id.to_string(),
                        });
                    }
                    weights[p] = c;
                }
                gmecs.push((line, Gmec::new(weights, bound)));
            }
        }
    }

    let last_line = text.lines().count().max(1);
    if gmecs.is_empty() {
        return Err(ParseError::Semantic {
            line: last_line,
            msg: "no 'gmec' line: the final-marking set is undefined".into(),
        });
    }
    let combinator = match combinator {
        Some((_, c)) => c,
        None if gmecs.len() == 1 => Combinator::Single,
        None => Combinator::And,
    };
    for id in &forced {
        if !trans_idx.contains_key(id.as_str()) {
            let line = text
                .lines()
                .position(|l| l.trim_start().starts_with("explicit") && l.contains(id.as_str()))
                .map_or(last_line, |i| i + 1);
            return Err(ParseError::UnknownId {
                line,
                id: id.clone(),
            });
        }
    }
    let initial = Marking::new(places.iter().map(|(_, k)| *k).collect())?;
    let net = PetriNet::new(
        places.into_iter().map(|(p, _)| p).collect(),
        transitions,
        pre,
        post,
    )?;
    let spec = FinalSpec::new(combinator, gmecs.into_iter().map(|(_, g)| g).collect())?;
    Ok(NetFile {
        plant: Plant::new(net, initial, spec)?,
        forced_explicit: forced,
    })
}

/// `<c>*<place> + ...`; a bare place has coefficient 1.
fn gmec_terms(terms: &str) -> Result<Vec<(i64, &str)>, String> {
    let mut out = Vec::new();
    if terms.trim().is_empty() {
        return Ok(out);
    }
    for term in terms.split('+') {
        let term = term.trim();
        let (c, id) = match term.split_once('*') {
            Some((c, id)) => {
                let c: String = c.split_whitespace().collect();
                let c = c
                    .parse::<i64>()
                    .map_err(|_| format!("expected integer coefficient, found '{c}'"))?;
                (c, id.trim())
            }
            None => (1, term),
        };
        if !valid_id(id) {
            return Err(format!("invalid term '{term}'"));
        }
        out.push((c, id));
    }
    Ok(out)
}

/// Reads a partition file: one or more `explicit a,b,...` lines listing the explicit set.
pub fn parse_partition(text: &str, net: &PetriNet) -> Result<TransitionSet, ParseError> {
    let mut out = TransitionSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = content.split_whitespace().collect();
        match words.split_first() {
            None => continue,
            Some((&"explicit", rest)) => {
                for id in id_list(line, rest)? {
                    let t = net
                        .transition_by_name(&id)
                        .ok_or(ParseError::UnknownId { line, id })?;
                    out.insert(t);
                }
            }
            Some((other, _)) => {
                return Err(syntax(
                    line,
                    format!("expected 'explicit', found '{other}'"),
                ))
            }
        }
    }
    Ok(out)
}

/// Writes `plant` in the format accepted by [`parse_net`].
pub fn to_text(plant: &Plant, forced_explicit: &[String]) -> String {
    let net = &plant.net;
    let mut out = String::new();
    for (p, name) in net.places().iter().enumerate() {
        match plant.initial.get(p) {
            0 => writeln!(out, "place {name}"),
            k => writeln!(out, "place {name} tokens={k}"),
        }
        .unwrap();
    }
    for name in net.transitions() {
        writeln!(out, "trans {name}").unwrap();
    }
    for t in 0..net.transition_count() {
        for p in 0..net.place_count() {
            let (a, b) = (net.pre(p, t), net.post(p, t));
            if a > 0 {
                write_arc(&mut out, net.place_name(p), net.transition_name(t), a);
            }
            if b > 0 {
                write_arc(&mut out, net.transition_name(t), net.place_name(p), b);
            }
        }
    }
    for g in plant.final_spec.gmecs() {
        let terms: Vec<String> = g
            .weights
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(p, c)| format!("{c}*{}", net.place_name(p)))
            .collect();
        writeln!(out, "gmec {} : {}", g.bound, terms.join(" + ")).unwrap();
    }
    match plant.final_spec.combinator() {
        Combinator::Single => {}
        Combinator::And => out.push_str("final and\n"),
        Combinator::Or => out.push_str("final or\n"),
    }
    if !forced_explicit.is_empty() {
        writeln!(out, "explicit {}", forced_explicit.join(",")).unwrap();
    }
    out
}

fn write_arc(out: &mut String, from: &str, to: &str, w: i64) {
    if w == 1 {
        writeln!(out, "arc {from} -> {to}").unwrap();
    } else {
        writeln!(out, "arc {from} -> {to} w={w}").unwrap();
    }
}
