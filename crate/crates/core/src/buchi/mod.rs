//! Büchi automata with Boolean guards, and their Petri-net encoding.
//!
//! Text format:
//!
//! ```text
//! states: s1 s2 s3
//! initial: s1
//! final: s3
//! atoms: y1 y2 y3        (optional; inferred from the guards when absent)
//! edge: s1 s2 y1 & y2
//! ```

mod formula;
mod pn;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use formula::{clause_satisfied, dnf_satisfied, parse_formula, to_dnf, Clause, Formula};
pub use pn::{build_buchi_pn, BuchiPn};

use crate::alphabet::{Alphabet, Atom, ObsSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub guard: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuchiAutomaton {
    pub states: Vec<String>,
    pub initial: Vec<usize>,
    pub finals: Vec<usize>,
    pub edges: Vec<Edge>,
    pub alphabet: Alphabet,
}

impl BuchiAutomaton {
    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn is_final(&self, state: usize) -> bool {
        self.finals.contains(&state)
    }

    /// True iff some self-loop on `state` is enabled by `active`.
    pub fn self_loop_holds(&self, state: usize, active: &ObsSet) -> bool {
        self.edges
            .iter()
            .any(|e| e.source == state && e.target == state && e.guard.eval(active))
    }

    /// States reachable from `state` in one step reading `active`.
    pub fn successors(&self, state: usize, active: &ObsSet) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter(|e| e.source == state && e.guard.eval(active))
            .map(|e| e.target)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn words_with_columns(s: &str, base: usize) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in s.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(st)) => {
                out.push((base + st, &s[st..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(st) = start {
        out.push((base + st, &s[st..]));
    }
    out
}

pub fn parse_automaton(text: &str) -> Result<BuchiAutomaton> {
    let mut states: Option<Vec<String>> = None;
    let mut initial_raw: Option<(usize, Vec<(usize, String)>)> = None;
    let mut final_raw: Option<(usize, Vec<(usize, String)>)> = None;
    let mut atoms_decl: Option<Vec<Atom>> = None;
    let mut edges_raw = Vec::new();
    let mut last_line = 1;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with("//") {
            continue;
        }
        last_line = line;
        let Some((key, rest)) = raw.split_once(':') else {
            return Err(Error::parse(line, 1, "expected `key: value`"));
        };
        let base = key.len() + 2;
        let items = words_with_columns(rest, base);
        match key.trim() {
            "states" => {
                if states.is_some() {
                    return Err(Error::parse(line, 1, "`states` declared twice"));
                }
                let mut names: Vec<String> = Vec::new();
                for (col, w) in &items {
                    if names.iter().any(|n| n == w) {
                        return Err(Error::parse(line, *col, format!("state `{w}` declared twice")));
                    }
                    names.push(w.to_string());
                }
                states = Some(names);
            }
            "initial" => {
                initial_raw = Some((line, items.iter().map(|(c, w)| (*c, w.to_string())).collect()))
            }
            "final" => {
                final_raw = Some((line, items.iter().map(|(c, w)| (*c, w.to_string())).collect()))
            }
            "atoms" => {
                let mut atoms = Vec::new();
                for (col, w) in &items {
                    atoms.push(w.parse::<Atom>().map_err(|m| Error::parse(line, *col, m))?);
                }
                atoms_decl = Some(atoms);
            }
            "edge" => {
                if items.len() < 3 {
                    return Err(Error::parse(line, 1, "expected `edge: <src> <dst> <formula>`"));
                }
                let (fcol, _) = items[2];
                let formula_text = &raw[fcol - 1..];
                edges_raw.push((line, items[0], items[1], fcol, formula_text.to_string()));
            }
            other => {
                return Err(Error::parse(line, 1, format!("unknown key `{other}`")));
            }
        }
    }

    let states = states.ok_or_else(|| Error::parse(last_line, 1, "missing `states` line"))?;
    let lookup: HashMap<&str, usize> = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let resolve = |line: usize, col: usize, name: &str| {
        lookup
            .get(name)
            .copied()
            .ok_or_else(|| Error::parse(line, col, format!("undeclared state `{name}`")))
    };
    let resolve_set = |raw: Option<(usize, Vec<(usize, String)>)>, what: &str| -> Result<Vec<usize>> {
        let (line, items) = raw.ok_or_else(|| Error::parse(last_line, 1, format!("missing `{what}` line")))?;
        if items.is_empty() {
            return Err(Error::parse(line, 1, format!("`{what}` set is empty")));
        }
        let mut out = Vec::new();
        for (col, name) in items {
            let s = resolve(line, col, &name)?;
            if !out.contains(&s) {
                out.push(s);
            }
        }
        Ok(out)
    };
    let initial = resolve_set(initial_raw, "initial")?;
    let finals = resolve_set(final_raw, "final")?;

    let mut edges = Vec::new();
    for (line, (sc, src), (dc, dst), fcol, ftext) in edges_raw {
        let source = resolve(line, sc, src)?;
        let target = resolve(line, dc, dst)?;
        let guard = parse_formula(&ftext, line, fcol)?;
        if let Some(decl) = &atoms_decl {
            if let Some(bad) = guard.atoms().into_iter().find(|a| !decl.contains(a)) {
                return Err(Error::parse(line, fcol, format!("undeclared atom `{bad}`")));
            }
        }
        edges.push(Edge {
            source,
            target,
            guard,
        });
    }
    let alphabet = match atoms_decl {
        Some(a) => Alphabet::new(a),
        None => Alphabet::new(edges.iter().flat_map(|e| e.guard.atoms())),
    };
    Ok(BuchiAutomaton {
        states,
        initial,
        finals,
        edges,
        alphabet,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const OFFICE: &str = "states: s1 s2 s3\ninitial: s1\nfinal: s3\n\
        edge: s1 s1 !(y1 | y2)\nedge: s1 s2 y1 & y2\nedge: s1 s3 y1 & y2 & y3\n\
        edge: s2 s2 true\nedge: s2 s3 y1 & y2 & y3\nedge: s3 s3 true\n";

    #[test]
    fn parses_three_state_automaton() {
        let b = parse_automaton(OFFICE).unwrap();
        assert_eq!(b.states, vec!["s1", "s2", "s3"]);
        assert_eq!(b.initial, vec![0]);
        assert_eq!(b.finals, vec![2]);
        assert_eq!(b.edges.len(), 6);
        assert_eq!(b.alphabet.atoms(), &[Atom(1), Atom(2), Atom(3)]);
        let all = ObsSet::from([Atom(1), Atom(2), Atom(3)]);
        assert!(b.self_loop_holds(2, &all));
        assert_eq!(b.successors(0, &all), vec![1, 2]);
    }

    #[test]
    fn top_automaton_accepts_everything() {
        let b = parse_automaton("states: s\ninitial: s\nfinal: s\nedge: s s true\n").unwrap();
        assert!(b.self_loop_holds(0, &ObsSet::new()));
        assert!(b.alphabet.is_empty());
    }

    #[test]
    fn undeclared_atom_is_rejected() {
        let text = "states: s\ninitial: s\nfinal: s\natoms: y1\nedge: s s y1 | y9\n";
        assert!(matches!(
            parse_automaton(text),
            Err(Error::Parse { line: 5, .. })
        ));
    }

    #[test]
    fn structural_errors() {
        assert!(parse_automaton("states: a\ninitial: b\nfinal: a\n").is_err());
        assert!(parse_automaton("states: a\ninitial:\nfinal: a\n").is_err());
        assert!(parse_automaton("states: a\ninitial: a\n").is_err());
        assert!(parse_automaton("states: a\ninitial: a\nfinal: a\nedge: a a y1 &\n").is_err());
    }

    #[test]
    fn formula_error_column_points_into_line() {
        let err = parse_automaton("states: a\ninitial: a\nfinal: a\nedge: a a (y1\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 4,
                column: 14,
                message: "expected `)`".into()
            }
        );
    }
}
