use serde::{Deserialize, Serialize};

use super::rational::Rational;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }

    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: i64,
    /// `None` means unbounded above.
    pub upper: Option<i64>,
    pub integer: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    /// Sparse row `(variable, coefficient)`; one entry per variable.
    pub coeffs: Vec<(usize, i64)>,
    pub relation: Relation,
    pub rhs: i64,
}

/// Minimization model with integer coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<(usize, i64)>,
}

/// Sums duplicate indices and drops zeros, sorted by index.
pub fn normalize_row(row: Vec<(usize, i64)>) -> Vec<(usize, i64)> {
    let mut row = row;
    row.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, i64)> = Vec::with_capacity(row.len());
    for (v, c) in row {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += c,
            _ => out.push((v, c)),
        }
    }
    out.retain(|e| e.1 != 0);
    out
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        lower: i64,
        upper: Option<i64>,
        integer: bool,
    ) -> usize {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
            integer,
        });
        self.variables.len() - 1
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, i64)>,
        relation: Relation,
        rhs: i64,
    ) {
        self.constraints.push(Constraint {
            name: name.into(),
            coeffs: normalize_row(coeffs),
            relation,
            rhs,
        });
    }

    pub fn set_objective(&mut self, coeffs: Vec<(usize, i64)>) {
        self.objective = normalize_row(coeffs);
    }

    pub fn variable_count(&self) -> usize {
        self.variables.len()
    }

    pub fn integer_count(&self) -> usize {
        self.variables.iter().filter(|v| v.integer).count()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.variables.len();
        for v in &self.variables {
            if v.upper.is_some_and(|u| u < v.lower) {
                return Err(Error::contract(format!("variable {} has lower > upper", v.name)));
            }
        }
        for c in &self.constraints {
            if c.coeffs.iter().any(|&(v, _)| v >= n) {
                return Err(Error::contract(format!(
                    "constraint {} references an undeclared variable",
                    c.name
                )));
            }
        }
        if self.objective.iter().any(|&(v, _)| v >= n) {
            return Err(Error::contract("objective references an undeclared variable"));
        }
        Ok(())
    }

    pub fn objective_value(&self, values: &[Rational]) -> Rational {
        self.objective
            .iter()
            .fold(Rational::ZERO, |acc, &(v, c)| &acc + &(&Rational::from_int(c) * &values[v]))
    }

    /// Names of violated constraints, bounds and integrality flags. Empty when feasible.
    pub fn violations(&self, values: &[Rational], tol: &Rational) -> Vec<String> {
        let mut out = Vec::new();
        for (v, x) in self.variables.iter().zip(values) {
            if x < &(&Rational::from_int(v.lower) - tol) {
                out.push(format!("{} below lower bound", v.name));
            }
            if let Some(u) = v.upper {
                if x > &(&Rational::from_int(u) + tol) {
                    out.push(format!("{} above upper bound", v.name));
                }
            }
            if v.integer && !x.close_to(&x.floor(), tol) && !x.close_to(&x.ceil(), tol) {
                out.push(format!("{} not integral", v.name));
            }
        }
        for c in &self.constraints {
            let lhs = c
                .coeffs
                .iter()
                .fold(Rational::ZERO, |acc, &(v, a)| &acc + &(&Rational::from_int(a) * &values[v]));
            let rhs = Rational::from_int(c.rhs);
            let ok = match c.relation {
                Relation::Le => lhs <= &rhs + tol,
                Relation::Ge => lhs >= &rhs - tol,
                Relation::Eq => lhs.close_to(&rhs, tol),
            };
            if !ok {
                out.push(format!("constraint {} violated", c.name));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NodeLimit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MilpSolution {
    pub status: SolveStatus,
    /// Value of every variable; the best incumbent on `NodeLimit`, empty if none.
    pub values: Vec<Rational>,
    pub objective: Option<Rational>,
    /// Branch-and-bound nodes whose relaxation was solved.
    pub nodes: usize,
}

impl MilpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Integer value of variable `v`. Panics if the value is not integral.
    pub fn int_value(&self, v: usize) -> i64 {
        self.values[v]
            .to_i64()
            .unwrap_or_else(|| panic!("variable {v} has non-integral value {}", self.values[v]))
    }
}
