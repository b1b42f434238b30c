//! LP file export, a reader for the same subset, and solution-file import.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use super::model::{MilpModel, MilpSolution, Relation, SolveStatus};
use super::rational::Rational;
use crate::error::{Error, Result};

const TERMS_PER_LINE: usize = 8;

fn lp_name(name: &str) -> String {
    let mut out: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "_.!#$%&(){}|~'@?".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        out.insert(0, '_');
    }
    out
}

fn write_terms(out: &mut String, model: &MilpModel, terms: &[(usize, i64)]) {
    for (k, &(v, c)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c < 0 { '-' } else { '+' };
        let name = lp_name(&model.variables[v].name);
        if k == 0 && c >= 0 {
            let _ = write!(out, " {} {name}", c);
        } else {
            let _ = write!(out, " {sign} {} {name}", c.unsigned_abs());
        }
    }
}

/// Renders the model as an LP file.
pub fn export_lp(model: &MilpModel) -> String {
    let mut out = String::new();
    out.push_str("Minimize\n");
    if !model.variables.is_empty() {
        out.push_str(" obj:");
        if model.objective.is_empty() {
            let _ = write!(out, " 0 {}", lp_name(&model.variables[0].name));
        } else {
            write_terms(&mut out, model, &model.objective);
        }
        out.push('\n');
    }
    out.push_str("Subject To\n");
    let mut seen = HashSet::new();
    for (i, c) in model.constraints.iter().enumerate() {
        let mut row = lp_name(&c.name);
        if !seen.insert(row.clone()) {
            row = lp_name(&format!("c{}_{}", i + 1, c.name));
            seen.insert(row.clone());
        }
        let _ = write!(out, " {row}:");
        if c.coeffs.is_empty() {
            let _ = write!(out, " 0 {}", lp_name(&model.variables[0].name));
        } else {
            write_terms(&mut out, model, &c.coeffs);
        }
        let _ = writeln!(out, " {} {}", c.relation.symbol(), c.rhs);
    }
    out.push_str("Bounds\n");
    for v in &model.variables {
        let name = lp_name(&v.name);
        match v.upper {
            Some(u) if u == v.lower => {
                let _ = writeln!(out, " {name} = {u}");
            }
            Some(u) => {
                let _ = writeln!(out, " {} <= {name} <= {u}", v.lower);
            }
            None => {
                let _ = writeln!(out, " {name} >= {}", v.lower);
            }
        }
    }
    out.push_str("Generals\n");
    let ints: Vec<String> = model
        .variables
        .iter()
        .filter(|v| v.integer)
        .map(|v| lp_name(&v.name))
        .collect();
    for chunk in ints.chunks(TERMS_PER_LINE) {
        let _ = writeln!(out, " {}", chunk.join(" "));
    }
    out.push_str("End\n");
    out
}

#[derive(PartialEq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    Generals,
    End,
}

fn parse_terms(
    tokens: &[&str],
    line: usize,
    index: &mut HashMap<String, usize>,
    model: &mut MilpModel,
) -> Result<Vec<(usize, i64)>> {
    let mut out = Vec::new();
    let mut sign = 1i64;
    let mut coef: Option<i64> = None;
    for tok in tokens {
        match *tok {
            "+" => sign = 1,
            "-" => sign = -1,
            t => {
                if let Ok(c) = t.parse::<i64>() {
                    coef = Some(c);
                    continue;
                }
                let v = *index.entry(t.to_string()).or_insert_with(|| {
                    model.add_variable(t.to_string(), 0, None, false)
                });
                out.push((v, sign * coef.unwrap_or(1)));
                sign = 1;
                coef = None;
            }
        }
    }
    if coef.is_some() {
        return Err(Error::parse(line, 1, "dangling coefficient"));
    }
    Ok(out)
}

/// Reads the LP subset written by [`export_lp`] (integer coefficients only).
pub fn parse_lp(text: &str) -> Result<MilpModel> {
    let mut model = MilpModel::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut section = Section::None;
    let mut pending: Option<(usize, String)> = None;
    let mut statements: Vec<(usize, Section, String)> = Vec::new();
    // join continuation lines of objective and constraints
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('\\') {
            continue;
        }
        let header = match t.to_ascii_lowercase().as_str() {
            "minimize" | "minimum" | "min" => Some(Section::Objective),
            "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
            "bounds" => Some(Section::Bounds),
            "generals" | "general" | "integers" => Some(Section::Generals),
            "end" => Some(Section::End),
            _ => None,
        };
        if let Some(h) = header {
            if let Some((l, s)) = pending.take() {
                statements.push((l, std::mem::replace(&mut section, Section::None), s));
            }
            section = h;
            continue;
        }
        match section {
            Section::Objective | Section::Constraints => {
                let continuation = raw.starts_with("   ");
                match (&mut pending, continuation) {
                    (Some((_, s)), true) => {
                        s.push(' ');
                        s.push_str(t);
                    }
                    _ => {
                        if let Some((l, s)) = pending.take() {
                            let sec = if section == Section::Objective {
                                Section::Objective
                            } else {
                                Section::Constraints
                            };
                            statements.push((l, sec, s));
                        }
                        pending = Some((line, t.to_string()));
                    }
                }
            }
            Section::Bounds => statements.push((line, Section::Bounds, t.to_string())),
            Section::Generals => statements.push((line, Section::Generals, t.to_string())),
            Section::None | Section::End => {
                return Err(Error::parse(line, 1, "content outside of a section"));
            }
        }
    }
    if let Some((l, s)) = pending.take() {
        statements.push((l, section, s));
    }

    // variables first appear in the bounds section, which lists every one
    let mut bounds_lines = Vec::new();
    let mut other = Vec::new();
    for st in statements {
        if st.1 == Section::Bounds {
            bounds_lines.push(st);
        } else {
            other.push(st);
        }
    }
    for (line, _, s) in &bounds_lines {
        let tok: Vec<&str> = s.split_whitespace().collect();
        let num = |t: &str| {
            t.parse::<i64>()
                .map_err(|_| Error::parse(*line, 1, format!("bad bound `{t}`")))
        };
        let (name, lo, up) = match tok.as_slice() {
            [n, "=", v] => (*n, num(v)?, Some(num(v)?)),
            [l, "<=", n, "<=", u] => (*n, num(l)?, Some(num(u)?)),
            [n, ">=", l] => (*n, num(l)?, None),
            _ => return Err(Error::parse(*line, 1, "unsupported bound line")),
        };
        let v = *index
            .entry(name.to_string())
            .or_insert_with(|| model.add_variable(name.to_string(), 0, None, false));
        model.variables[v].lower = lo;
        model.variables[v].upper = up;
    }
    for (line, sec, s) in other {
        match sec {
            Section::Objective => {
                let body = s.split_once(':').map_or(s.as_str(), |x| x.1);
                let tok: Vec<&str> = body.split_whitespace().collect();
                let terms = parse_terms(&tok, line, &mut index, &mut model)?;
                model.set_objective(terms);
            }
            Section::Constraints => {
                let (name, body) = s
                    .split_once(':')
                    .ok_or_else(|| Error::parse(line, 1, "constraint without a name"))?;
                let tok: Vec<&str> = body.split_whitespace().collect();
                let pos = tok
                    .iter()
                    .position(|t| matches!(*t, "<=" | ">=" | "=" | "=<" | "=>"))
                    .ok_or_else(|| Error::parse(line, 1, "constraint without a relation"))?;
                let relation = match tok[pos] {
                    "<=" | "=<" => Relation::Le,
                    ">=" | "=>" => Relation::Ge,
                    _ => Relation::Eq,
                };
                let rhs = tok
                    .get(pos + 1)
                    .and_then(|t| t.parse::<i64>().ok())
                    .ok_or_else(|| Error::parse(line, 1, "bad right-hand side"))?;
                let terms = parse_terms(&tok[..pos], line, &mut index, &mut model)?;
                model.add_constraint(name.trim(), terms, relation, rhs);
            }
            Section::Generals => {
                for name in s.split_whitespace() {
                    let v = *index
                        .get(name)
                        .ok_or_else(|| Error::parse(line, 1, format!("unknown variable `{name}`")))?;
                    model.variables[v].integer = true;
                }
            }
            _ => {}
        }
    }
    Ok(model)
}

/// Reads `name value` pairs produced by an external solver for `model`.
///
/// Variables not listed are taken as zero. The point is checked against every
/// bound, constraint and integrality flag within a tolerance of `1e-9`, and
/// integer variables are then rounded to the nearest integer.
pub fn import_solution(model: &MilpModel, text: &str) -> Result<MilpSolution> {
    let names: HashMap<String, usize> = model
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| (lp_name(&v.name), i))
        .collect();
    let mut values = vec![Rational::ZERO; model.variables.len()];
    let mut seen = vec![false; model.variables.len()];
    for (i, raw) in text.lines().enumerate() {
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with('\\') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        let [name, value] = parts.as_slice() else {
            return Err(Error::SolutionImport(format!("line {}: expected `name value`", i + 1)));
        };
        let &v = names
            .get(*name)
            .ok_or_else(|| Error::SolutionImport(format!("unknown variable `{name}`")))?;
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::SolutionImport(format!("variable `{name}` listed twice")));
        }
        values[v] = Rational::parse(value)
            .ok_or_else(|| Error::SolutionImport(format!("bad value `{value}` for `{name}`")))?;
    }
    let tol = Rational::new(1, 1_000_000_000);
    let problems = model.violations(&values, &tol);
    if !problems.is_empty() {
        return Err(Error::SolutionImport(problems.join("; ")));
    }
    for (v, x) in model.variables.iter().zip(values.iter_mut()) {
        if v.integer {
            let down = x.floor();
            *x = if (&*x - &down) * Rational::from_int(2) >= Rational::ONE {
                x.ceil()
            } else {
                down
            };
        }
    }
    let problems = model.violations(&values, &tol);
    if !problems.is_empty() {
        return Err(Error::SolutionImport(problems.join("; ")));
    }
    let objective = model.objective_value(&values);
    Ok(MilpSolution {
        status: SolveStatus::Optimal,
        values,
        objective: Some(objective),
        nodes: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MilpModel {
        let mut m = MilpModel::new();
        let x = m.add_variable("x[1]", 0, Some(3), true);
        let y = m.add_variable("y", -2, None, false);
        let z = m.add_variable("z", 1, Some(1), true);
        m.add_constraint("a", vec![(x, 1), (y, -2)], Relation::Le, 4);
        m.add_constraint("b", vec![(y, 1), (z, 1)], Relation::Ge, -1);
        m.set_objective(vec![(x, -1), (y, 3)]);
        m
    }

    #[test]
    fn empty_model_is_header_only() {
        assert_eq!(
            export_lp(&MilpModel::new()),
            "Minimize\nSubject To\nBounds\nGenerals\nEnd\n"
        );
    }

    #[test]
    fn round_trip() {
        let m = sample();
        let text = export_lp(&m);
        assert!(text.contains("Generals\n x_1_ z\n"));
        let back = parse_lp(&text).unwrap();
        assert_eq!(back.variable_count(), 3);
        assert_eq!(back.integer_count(), 2);
        assert_eq!(back.constraints.len(), 2);
        assert_eq!(back.objective, vec![(0, -1), (1, 3)]);
        assert_eq!(back.variables[1].lower, -2);
        assert_eq!(back.variables[2].upper, Some(1));
        assert_eq!(back.constraints[1].relation, Relation::Ge);
        assert_eq!(back.constraints[1].rhs, -1);
    }

    #[test]
    fn long_rows_wrap_and_parse_back() {
        let mut m = MilpModel::new();
        let vars: Vec<usize> = (0..20).map(|i| m.add_variable(format!("v{i}"), 0, Some(1), true)).collect();
        m.add_constraint("sum", vars.iter().map(|&v| (v, 1)).collect(), Relation::Eq, 3);
        let back = parse_lp(&export_lp(&m)).unwrap();
        assert_eq!(back.constraints[0].coeffs.len(), 20);
    }

    #[test]
    fn solution_import_validates() {
        let m = sample();
        let ok = import_solution(&m, "x_1_ 3.0000000000001\ny -0.5\nz 1\n").unwrap();
        assert_eq!(ok.values[0], Rational::from_int(3));
        assert!(import_solution(&m, "x_1_ 1.5\nz 1\n").is_err());
        assert!(import_solution(&m, "w 1\n").is_err());
        assert!(import_solution(&m, "x_1_ 9\nz 1\n").is_err());
        assert!(import_solution(&m, "z 1\nz 1\n").is_err());
    }
}
