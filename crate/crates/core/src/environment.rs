//! Partitioned environments and the robot motion Petri net built from them.
//!
//! Two text formats are accepted. The grid format:
//!
//! ```text
//! grid 3 2 2
//! .@r1  y1   #
//! .     y1+y2@r2 .
//! ```
//!
//! and the cell-list format for irregular decompositions:
//!
//! ```text
//! cells 3 1
//! cell 1 0 0 .@r1
//! cell 2 1 0 y1
//! cell 3 2 0 .
//! adj 1 2
//! adj 2 3
//! ```
//!
//! In the cell-list format, when no `adj` line is present the adjacency is
//! the 4-connectivity of the given coordinates. Lines starting with `//` are
//! comments in both formats.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Atom, ObsSet};
use crate::error::{Error, Result};
use crate::petri::{Marking, PetriNet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    /// Display name, also the RMPN place name.
    pub name: String,
    pub x: i64,
    pub y: i64,
    pub labels: ObsSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Environment {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<Cell>,
    /// Undirected adjacencies `(a, b)` with `a < b`, sorted.
    pub adjacency: Vec<(usize, usize)>,
    /// Start cell of each robot, robot 1 first.
    pub robot_cells: Vec<usize>,
    pub alphabet: Alphabet,
}

impl Environment {
    pub fn robot_count(&self) -> usize {
        self.robot_cells.len()
    }

    pub fn cell_index(&self, name: &str) -> Option<usize> {
        self.cells.iter().position(|c| c.name == name)
    }
}

struct Token {
    labels: ObsSet,
    robot: Option<usize>,
    hole: bool,
}

fn parse_token(text: &str, line: usize, column: usize) -> Result<Token> {
    let (body, robot) = match text.split_once('@') {
        Some((body, r)) => {
            let n = r
                .strip_prefix('r')
                .and_then(|d| d.parse::<usize>().ok())
                .filter(|&n| n >= 1)
                .ok_or_else(|| Error::parse(line, column, format!("bad robot marker `@{r}`")))?;
            (body, Some(n))
        }
        None => (text, None),
    };
    match body {
        "." => Ok(Token {
            labels: ObsSet::new(),
            robot,
            hole: false,
        }),
        "#" => {
            if robot.is_some() {
                return Err(Error::parse(line, column, "robot placed on a hole"));
            }
            Ok(Token {
                labels: ObsSet::new(),
                robot,
                hole: true,
            })
        }
        _ => {
            let mut labels = ObsSet::new();
            for part in body.split('+') {
                let atom: Atom = part
                    .parse()
                    .map_err(|m: String| Error::parse(line, column, m))?;
                labels.insert(atom);
            }
            Ok(Token {
                labels,
                robot,
                hole: false,
            })
        }
    }
}

/// Content lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with("//")
        })
}

/// Whitespace-separated words with their 1-based columns.
fn words(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn parse_usize(word: &str, line: usize, column: usize, what: &str) -> Result<usize> {
    word.parse()
        .map_err(|_| Error::parse(line, column, format!("expected {what}, found `{word}`")))
}

fn parse_i64(word: &str, line: usize, column: usize, what: &str) -> Result<i64> {
    word.parse()
        .map_err(|_| Error::parse(line, column, format!("expected {what}, found `{word}`")))
}

struct RobotTable {
    expected: usize,
    cells: BTreeMap<usize, usize>,
}

impl RobotTable {
    fn place(&mut self, robot: usize, cell: usize, line: usize, column: usize) -> Result<()> {
        if robot > self.expected {
            return Err(Error::parse(
                line,
                column,
                format!("robot r{robot} exceeds declared count {}", self.expected),
            ));
        }
        if self.cells.insert(robot, cell).is_some() {
            return Err(Error::parse(line, column, format!("robot r{robot} placed twice")));
        }
        if self.cells.iter().filter(|(_, &c)| c == cell).count() > 1 {
            return Err(Error::parse(line, column, "duplicate robot cell"));
        }
        Ok(())
    }

    fn finish(self, line: usize) -> Result<Vec<usize>> {
        if self.cells.len() != self.expected {
            return Err(Error::parse(
                line,
                1,
                format!(
                    "declared {} robots but placed {}",
                    self.expected,
                    self.cells.len()
                ),
            ));
        }
        Ok(self.cells.into_values().collect())
    }
}

fn grid_adjacency(cells: &[Cell]) -> Vec<(usize, usize)> {
    let at: HashMap<(i64, i64), usize> = cells
        .iter()
        .enumerate()
        .map(|(i, c)| ((c.x, c.y), i))
        .collect();
    let mut edges = BTreeSet::new();
    for (i, c) in cells.iter().enumerate() {
        for (dx, dy) in [(1, 0), (0, 1)] {
            if let Some(&j) = at.get(&(c.x + dx, c.y + dy)) {
                edges.insert((i.min(j), i.max(j)));
            }
        }
    }
    edges.into_iter().collect()
}

/// Parses either environment format, chosen by the header keyword.
pub fn parse_environment(text: &str) -> Result<Environment> {
    let mut lines = content_lines(text);
    let (ln, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, 1, "empty environment file"))?;
    let head = words(header);
    match head.first().map(|w| w.1) {
        Some("grid") => parse_grid(ln, &head, lines),
        Some("cells") => parse_cell_list(ln, &head, lines),
        _ => Err(Error::parse(ln, 1, "expected `grid W H R` or `cells N R` header")),
    }
}

fn parse_grid<'a>(
    ln: usize,
    head: &[(usize, &str)],
    lines: impl Iterator<Item = (usize, &'a str)>,
) -> Result<Environment> {
    if head.len() != 4 {
        return Err(Error::parse(ln, 1, "header must be `grid W H R`"));
    }
    let width = parse_usize(head[1].1, ln, head[1].0, "width")?;
    let height = parse_usize(head[2].1, ln, head[2].0, "height")?;
    let robots = parse_usize(head[3].1, ln, head[3].0, "robot count")?;
    if width == 0 || height == 0 {
        return Err(Error::parse(ln, 1, "grid dimensions must be positive"));
    }
    let mut cells = Vec::new();
    let mut table = RobotTable {
        expected: robots,
        cells: BTreeMap::new(),
    };
    let mut rows = 0;
    let mut last_line = ln;
    for (line, text) in lines {
        last_line = line;
        if rows == height {
            return Err(Error::parse(line, 1, format!("more than {height} grid rows")));
        }
        let toks = words(text);
        if toks.len() != width {
            return Err(Error::parse(
                line,
                1,
                format!("expected {width} cells, found {}", toks.len()),
            ));
        }
        for (x, (col, word)) in toks.into_iter().enumerate() {
            let tok = parse_token(word, line, col)?;
            if tok.hole {
                continue;
            }
            let index = cells.len();
            if let Some(r) = tok.robot {
                table.place(r, index, line, col)?;
            }
            cells.push(Cell {
                name: format!("p{}", index + 1),
                x: x as i64,
                y: rows as i64,
                labels: tok.labels,
            });
        }
        rows += 1;
    }
    if rows != height {
        return Err(Error::parse(
            last_line,
            1,
            format!("expected {height} grid rows, found {rows}"),
        ));
    }
    if cells.is_empty() {
        return Err(Error::parse(ln, 1, "grid has no cells"));
    }
    let robot_cells = table.finish(last_line)?;
    let adjacency = grid_adjacency(&cells);
    let alphabet = Alphabet::new(cells.iter().flat_map(|c| c.labels.iter().copied()));
    Ok(Environment {
        width,
        height,
        cells,
        adjacency,
        robot_cells,
        alphabet,
    })
}

fn parse_cell_list<'a>(
    ln: usize,
    head: &[(usize, &str)],
    lines: impl Iterator<Item = (usize, &'a str)>,
) -> Result<Environment> {
    if head.len() != 3 {
        return Err(Error::parse(ln, 1, "header must be `cells N R`"));
    }
    let count = parse_usize(head[1].1, ln, head[1].0, "cell count")?;
    let robots = parse_usize(head[2].1, ln, head[2].0, "robot count")?;
    // id -> (x, y, token, line, column)
    let mut decl: BTreeMap<usize, (i64, i64, Token, usize, usize)> = BTreeMap::new();
    let mut adj_raw: Vec<(usize, usize, usize, usize)> = Vec::new();
    let mut last_line = ln;
    for (line, text) in lines {
        last_line = line;
        let w = words(text);
        match w[0].1 {
            "cell" => {
                if w.len() != 5 {
                    return Err(Error::parse(line, 1, "expected `cell <id> <x> <y> <token>`"));
                }
                let id = parse_usize(w[1].1, line, w[1].0, "cell id")?;
                let x = parse_i64(w[2].1, line, w[2].0, "x coordinate")?;
                let y = parse_i64(w[3].1, line, w[3].0, "y coordinate")?;
                let tok = parse_token(w[4].1, line, w[4].0)?;
                if tok.hole {
                    return Err(Error::parse(line, w[4].0, "holes are not cells"));
                }
                if decl.insert(id, (x, y, tok, line, w[1].0)).is_some() {
                    return Err(Error::parse(line, w[1].0, format!("cell {id} declared twice")));
                }
            }
            "adj" => {
                if w.len() != 3 {
                    return Err(Error::parse(line, 1, "expected `adj <a> <b>`"));
                }
                let a = parse_usize(w[1].1, line, w[1].0, "cell id")?;
                let b = parse_usize(w[2].1, line, w[2].0, "cell id")?;
                adj_raw.push((a, b, line, w[1].0));
            }
            other => {
                return Err(Error::parse(line, w[0].0, format!("unknown directive `{other}`")));
            }
        }
    }
    if decl.len() != count {
        return Err(Error::parse(
            last_line,
            1,
            format!("declared {count} cells, found {}", decl.len()),
        ));
    }
    let index: HashMap<usize, usize> = decl.keys().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut cells = Vec::new();
    let mut seen = HashMap::new();
    let mut table = RobotTable {
        expected: robots,
        cells: BTreeMap::new(),
    };
    for (i, (id, (x, y, tok, line, col))) in decl.into_iter().enumerate() {
        if let Some(prev) = seen.insert((x, y), id) {
            return Err(Error::parse(
                line,
                col,
                format!("cell {id} shares coordinates with cell {prev}"),
            ));
        }
        if let Some(r) = tok.robot {
            table.place(r, i, line, col)?;
        }
        cells.push(Cell {
            name: format!("p{id}"),
            x,
            y,
            labels: tok.labels,
        });
    }
    let robot_cells = table.finish(last_line)?;
    let adjacency = if adj_raw.is_empty() {
        grid_adjacency(&cells)
    } else {
        let mut edges = BTreeSet::new();
        for (a, b, line, col) in adj_raw {
            let (Some(&ia), Some(&ib)) = (index.get(&a), index.get(&b)) else {
                return Err(Error::parse(line, col, format!("adjacency {a}-{b} names an unknown cell")));
            };
            if ia == ib {
                return Err(Error::parse(line, col, "cell adjacent to itself"));
            }
            edges.insert((ia.min(ib), ia.max(ib)));
        }
        edges.into_iter().collect()
    };
    let (w, h) = bounding_box(&cells);
    let alphabet = Alphabet::new(cells.iter().flat_map(|c| c.labels.iter().copied()));
    Ok(Environment {
        width: w,
        height: h,
        cells,
        adjacency,
        robot_cells,
        alphabet,
    })
}

fn bounding_box(cells: &[Cell]) -> (usize, usize) {
    let span = |f: fn(&Cell) -> i64| {
        let lo = cells.iter().map(f).min().unwrap_or(0);
        let hi = cells.iter().map(f).max().unwrap_or(-1);
        (hi - lo + 1) as usize
    };
    (span(|c| c.x), span(|c| c.y))
}

/// Robot motion Petri net: state-machine net over cells with an observation map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rmpn {
    pub net: PetriNet,
    pub m0: Marking,
    pub alphabet: Alphabet,
    /// Observation `h(p)` of every place.
    pub obs: Vec<ObsSet>,
}

impl Rmpn {
    pub fn robot_count(&self) -> usize {
        self.m0.total() as usize
    }

    /// `(input place, output place)` of a state-machine transition.
    pub fn endpoints(&self, transition: usize) -> (usize, usize) {
        let from = self.net.preset(transition);
        let to = self.net.postset(transition);
        (from[0], to[0])
    }

    /// Atoms visited by marking `m`.
    pub fn observation(&self, m: &Marking) -> ObsSet {
        m.0.iter()
            .zip(&self.obs)
            .filter(|(&n, _)| n > 0)
            .flat_map(|(_, o)| o.iter().copied())
            .collect()
    }

    /// True iff every transition has exactly one unit input and one unit output place.
    pub fn is_state_machine(&self) -> bool {
        (0..self.net.transition_count()).all(|t| {
            let pre = self.net.preset(t);
            let post = self.net.postset(t);
            pre.len() == 1
                && post.len() == 1
                && self.net.pre(pre[0], t) == 1
                && self.net.post(post[0], t) == 1
        })
    }

    /// Builds a state-machine RMPN from place data and undirected adjacencies.
    pub fn from_parts(
        names: Vec<String>,
        obs: Vec<ObsSet>,
        edges: &[(usize, usize)],
        m0: Marking,
        alphabet: Alphabet,
    ) -> Self {
        let mut net = PetriNet::new(names, vec![]);
        for &(a, b) in edges {
            for (from, to) in [(a, b), (b, a)] {
                let name = format!("{}->{}", net.place_name(from), net.place_name(to));
                let t = net.add_transition(name);
                net.set_pre(from, t, 1);
                net.set_post(to, t, 1);
            }
        }
        Rmpn {
            net,
            m0,
            alphabet,
            obs,
        }
    }
}

/// One place per cell, two opposite transitions per adjacency, one token per robot.
pub fn build_rmpn(env: &Environment) -> Rmpn {
    let names = env.cells.iter().map(|c| c.name.clone()).collect();
    let obs = env.cells.iter().map(|c| c.labels.clone()).collect();
    let mut m0 = Marking::zeros(env.cells.len());
    for &c in &env.robot_cells {
        m0.0[c] += 1;
    }
    Rmpn::from_parts(names, obs, &env.adjacency, m0, env.alphabet.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_free_cell() {
        let env = parse_environment("grid 1 1 1\n.@r1\n").unwrap();
        assert_eq!(env.cells.len(), 1);
        assert!(env.cells[0].labels.is_empty());
        assert_eq!(env.robot_cells, vec![0]);
        let q = build_rmpn(&env);
        assert_eq!(q.net.transition_count(), 0);
        assert_eq!(q.m0, Marking(vec![1]));
    }

    #[test]
    fn one_labeled_cell() {
        let env = parse_environment("grid 2 3 1\n.@r1 .\n. y1\n. .\n").unwrap();
        let q = build_rmpn(&env);
        assert_eq!(q.obs.iter().filter(|o| !o.is_empty()).count(), 1);
        assert_eq!(q.obs[3], ObsSet::from([Atom(1)]));
        assert_eq!(q.net.place_count(), 6);
        assert_eq!(q.net.transition_count(), 14);
        assert!(q.is_state_machine());
    }

    #[test]
    fn one_by_two() {
        let q = build_rmpn(&parse_environment("grid 2 1 1\n.@r1 .\n").unwrap());
        assert_eq!((q.net.place_count(), q.net.transition_count()), (2, 2));
    }

    #[test]
    fn holes_and_multi_labels() {
        let env = parse_environment("grid 3 1 2\ny1+y2@r2 # .@r1\n").unwrap();
        assert_eq!(env.cells.len(), 2);
        assert!(env.adjacency.is_empty());
        assert_eq!(env.robot_cells, vec![1, 0]);
        assert_eq!(env.alphabet.atoms(), &[Atom(1), Atom(2)]);
    }

    #[test]
    fn parse_errors_carry_position() {
        let e = parse_environment("grid 2 1 1\n.@r1 z3\n").unwrap_err();
        assert_eq!(
            e,
            Error::Parse {
                line: 2,
                column: 6,
                message: "unknown ROI symbol `z3`".into()
            }
        );
        assert!(matches!(
            parse_environment("grid 2 1 2\n.@r1 .@r1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_environment("grid 2 2 1\n.@r1 .\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_environment("grid 2 1 1\n. . .\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn cell_list_with_explicit_adjacency() {
        let text = "cells 3 1\n// comment\ncell 1 0 0 .@r1\ncell 2 5 5 y1\ncell 3 1 0 .\nadj 1 2\n";
        let env = parse_environment(text).unwrap();
        assert_eq!(env.adjacency, vec![(0, 1)]);
        assert_eq!(env.cells[1].name, "p2");
    }

    #[test]
    fn cell_list_infers_grid_adjacency() {
        let text = "cells 3 1\ncell 1 0 0 .@r1\ncell 2 1 0 y1\ncell 3 1 1 .\n";
        let env = parse_environment(text).unwrap();
        assert_eq!(env.adjacency, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn observation_of_marking() {
        let q = build_rmpn(&parse_environment("grid 3 1 1\ny1@r1 y2 y1+y3\n").unwrap());
        assert_eq!(q.observation(&q.m0), ObsSet::from([Atom(1)]));
        assert_eq!(
            q.observation(&Marking(vec![0, 1, 1])),
            ObsSet::from([Atom(1), Atom(2), Atom(3)])
        );
    }
}
