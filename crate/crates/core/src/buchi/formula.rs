//! Boolean guards over ROI atoms and their disjunctive normal form.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::alphabet::{Atom, ObsSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn eval(&self, active: &ObsSet) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(a) => active.contains(a),
            Formula::Not(f) => !f.eval(active),
            Formula::And(a, b) => a.eval(active) && b.eval(active),
            Formula::Or(a, b) => a.eval(active) || b.eval(active),
        }
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                out.insert(*a);
            }
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(x) => write!(f, "!({x})"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
        }
    }
}

/// One conjunctive term: all `positive` atoms active, all `negative` inactive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Clause {
    pub positive: BTreeSet<Atom>,
    pub negative: BTreeSet<Atom>,
}

impl Clause {
    pub fn is_empty(&self) -> bool {
        self.positive.is_empty() && self.negative.is_empty()
    }

    fn subsumes(&self, other: &Clause) -> bool {
        self.positive.is_subset(&other.positive) && self.negative.is_subset(&other.negative)
    }

    fn conjoin(&self, other: &Clause) -> Option<Clause> {
        let positive: BTreeSet<Atom> = self.positive.union(&other.positive).copied().collect();
        let negative: BTreeSet<Atom> = self.negative.union(&other.negative).copied().collect();
        if positive.is_disjoint(&negative) {
            Some(Clause { positive, negative })
        } else {
            None
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "true");
        }
        let mut parts: Vec<String> = self.positive.iter().map(|a| a.to_string()).collect();
        parts.extend(self.negative.iter().map(|a| format!("!{a}")));
        write!(f, "{}", parts.join(" & "))
    }
}

pub fn clause_satisfied(c: &Clause, active: &ObsSet) -> bool {
    c.positive.is_subset(active) && c.negative.is_disjoint(active)
}

pub fn dnf_satisfied(clauses: &[Clause], active: &ObsSet) -> bool {
    clauses.iter().any(|c| clause_satisfied(c, active))
}

/// Drops subsumed and duplicate clauses, keeping first-appearance order.
fn simplify(clauses: Vec<Clause>) -> Vec<Clause> {
    let mut out: Vec<Clause> = Vec::new();
    for (i, c) in clauses.iter().enumerate() {
        let dominated = clauses.iter().enumerate().any(|(j, d)| {
            j != i && d.subsumes(c) && (d != c || j < i)
        });
        if !dominated {
            out.push(c.clone());
        }
    }
    out
}

/// Disjunctive normal form. `true` gives a single empty clause, `false` gives none.
pub fn to_dnf(guard: &Formula) -> Vec<Clause> {
    dnf(guard, false)
}

fn dnf(f: &Formula, negated: bool) -> Vec<Clause> {
    match (f, negated) {
        (Formula::True, false) | (Formula::False, true) => vec![Clause::default()],
        (Formula::True, true) | (Formula::False, false) => vec![],
        (Formula::Atom(a), neg) => {
            let mut c = Clause::default();
            if neg {
                c.negative.insert(*a);
            } else {
                c.positive.insert(*a);
            }
            vec![c]
        }
        (Formula::Not(x), neg) => dnf(x, !neg),
        (Formula::And(a, b), false) | (Formula::Or(a, b), true) => {
            let left = dnf(a, negated);
            let right = dnf(b, negated);
            let mut out = Vec::new();
            for l in &left {
                for r in &right {
                    if let Some(c) = l.conjoin(r) {
                        out.push(c);
                    }
                }
            }
            simplify(out)
        }
        (Formula::Or(a, b), false) | (Formula::And(a, b), true) => {
            let mut out = dnf(a, negated);
            out.extend(dnf(b, negated));
            simplify(out)
        }
    }
}

/// Parses `! & |`, parentheses, atoms `yK`, `true` and `false`.
/// `column` is the 1-based column of `text` within its line, for error positions.
pub fn parse_formula(text: &str, line: usize, column: usize) -> Result<Formula> {
    let mut p = Parser {
        chars: text.char_indices().collect(),
        pos: 0,
        line,
        column,
        len: text.len(),
    };
    let f = p.or()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(f)
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
    line: usize,
    column: usize,
    len: usize,
}

impl Parser {
    fn error(&self, message: &str) -> Error {
        let offset = self.chars.get(self.pos).map_or(self.len, |c| c.0);
        Error::parse(self.line, self.column + offset, message)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut left = self.and()?;
        while self.peek() == Some('|') {
            self.pos += 1;
            let right = self.and()?;
            left = Formula::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut left = self.unary()?;
        while self.peek() == Some('&') {
            self.pos += 1;
            let right = self.unary()?;
            left = Formula::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek() {
            Some('!') => {
                self.pos += 1;
                Ok(Formula::Not(Box::new(self.unary()?)))
            }
            Some('(') => {
                self.pos += 1;
                let f = self.or()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(f)
            }
            Some(c) if c.is_ascii_alphanumeric() => {
                let start = self.pos;
                while self
                    .chars
                    .get(self.pos)
                    .is_some_and(|c| c.1.is_ascii_alphanumeric() || c.1 == '_')
                {
                    self.pos += 1;
                }
                let word: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
                match word.as_str() {
                    "true" => Ok(Formula::True),
                    "false" => Ok(Formula::False),
                    _ => word.parse::<Atom>().map(Formula::Atom).map_err(|m| {
                        self.pos = start;
                        self.error(&m)
                    }),
                }
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of formula")),
        }
    }
}
