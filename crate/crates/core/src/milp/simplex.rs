//! Two-phase primal simplex on a sparse exact-rational tableau.
//!
//! Entering columns follow Dantzig's rule; after a run of degenerate pivots the
//! rule falls back to Bland's until the objective moves again. The right-hand
//! side carries a symbolic perturbation `b + ε·d` with a fixed positive `d`;
//! leaving rows are chosen by the lexicographic minimum ratio, remaining ties
//! broken by the lowest basic column.

use super::model::{MilpModel, Relation};
use super::rational::Rational;

const DEGENERATE_STREAK: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal {
        values: Vec<Rational>,
        objective: Rational,
    },
    Infeasible,
    Unbounded,
}

type Row = Vec<(u32, Rational)>;

fn row_get(row: &Row, col: u32) -> Option<&Rational> {
    row.binary_search_by_key(&col, |e| e.0).ok().map(|i| &row[i].1)
}

/// `a - f * b`, both sorted.
fn row_axpy(a: &Row, f: &Rational, b: &Row) -> Row {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ca = a.get(i).map_or(u32::MAX, |e| e.0);
        let cb = b.get(j).map_or(u32::MAX, |e| e.0);
        if ca < cb {
            out.push(a[i].clone());
            i += 1;
        } else if cb < ca {
            out.push((cb, -(f * &b[j].1)));
            j += 1;
        } else {
            let v = &a[i].1 - &(f * &b[j].1);
            if !v.is_zero() {
                out.push((ca, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

#[derive(Debug, Clone)]
struct Tableau {
    rows: Vec<Row>,
    rhs: Vec<Rational>,
    /// Coefficient of ε in each right-hand side.
    pert: Vec<Rational>,
    basis: Vec<usize>,
    /// Reduced costs over all columns.
    cost: Vec<Rational>,
    objective: Rational,
    /// Columns at or past this index may not enter.
    enter_limit: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let col = c as u32;
        let piv = row_get(&self.rows[r], col).cloned().expect("pivot entry present");
        if piv != Rational::ONE {
            for e in self.rows[r].iter_mut() {
                e.1 = &e.1 / &piv;
            }
            self.rhs[r] = &self.rhs[r] / &piv;
            self.pert[r] = &self.pert[r] / &piv;
        }
        let prow = std::mem::take(&mut self.rows[r]);
        let prhs = self.rhs[r].clone();
        let ppert = self.pert[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            if let Some(a) = row_get(&self.rows[i], col).cloned() {
                self.rows[i] = row_axpy(&self.rows[i], &a, &prow);
                self.rhs[i] = &self.rhs[i] - &(&a * &prhs);
                if !ppert.is_zero() {
                    self.pert[i] = &self.pert[i] - &(&a * &ppert);
                }
            }
        }
        let d = self.cost[c].clone();
        if !d.is_zero() {
            for (j, v) in &prow {
                let j = *j as usize;
                self.cost[j] = &self.cost[j] - &(&d * v);
            }
            self.objective = &self.objective + &(&d * &prhs);
        }
        self.rows[r] = prow;
        self.basis[r] = c;
    }

    /// Dual simplex from a dual-feasible basis. The leaving row has the most
    /// negative right-hand side; the entering column has the minimum ratio of
    /// reduced cost to entry, ties to the lowest column.
    fn dual(&mut self) -> Warm {
        let cap = 20 * (self.rows.len() + self.cost.len());
        for _ in 0..cap {
            let mut leave: Option<usize> = None;
            for i in 0..self.rows.len() {
                if self.rhs[i].is_negative() && leave.is_none_or(|r| self.rhs[i] < self.rhs[r]) {
                    leave = Some(i);
                }
            }
            let Some(r) = leave else {
                return Warm::Optimal;
            };
            let mut enter: Option<(usize, Rational)> = None;
            for (j, a) in &self.rows[r] {
                if !a.is_negative() {
                    continue;
                }
                let j = *j as usize;
                let ratio = &self.cost[j] / &-a;
                if enter.as_ref().is_none_or(|(_, best)| ratio < *best) {
                    enter = Some((j, ratio));
                }
            }
            let Some((c, _)) = enter else {
                return Warm::Infeasible;
            };
            self.pivot(r, c);
        }
        Warm::GaveUp
    }

    fn run(&mut self) -> PhaseEnd {
        let mut streak = 0;
        loop {
            let bland = streak >= DEGENERATE_STREAK;
            let mut enter = None;
            for j in 0..self.enter_limit {
                if self.cost[j].is_negative() {
                    match enter {
                        None => enter = Some(j),
                        Some(e) if !bland && self.cost[j] < self.cost[e] => enter = Some(j),
                        _ => {}
                    }
                    if bland {
                        break;
                    }
                }
            }
            let Some(c) = enter else {
                return PhaseEnd::Optimal;
            };
            let col = c as u32;
            let mut leave: Option<(usize, Rational, Rational)> = None;
            for i in 0..self.rows.len() {
                let Some(a) = row_get(&self.rows[i], col) else {
                    continue;
                };
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((r, best, best_p)) => match ratio.cmp(best) {
                        std::cmp::Ordering::Less => true,
                        std::cmp::Ordering::Greater => false,
                        std::cmp::Ordering::Equal => {
                            let p = &self.pert[i] / a;
                            p < *best_p || (p == *best_p && self.basis[i] < self.basis[*r])
                        }
                    },
                };
                if better {
                    let p = &self.pert[i] / a;
                    leave = Some((i, ratio, p));
                }
            }
            let Some((r, ratio, p)) = leave else {
                return PhaseEnd::Unbounded;
            };
            if ratio.is_zero() && p.is_zero() {
                streak += 1;
            } else {
                streak = 0;
            }
            self.pivot(r, c);
        }
    }
}

/// Fixed pseudo-random positive weight of row `i` in the perturbation.
fn perturbation(i: usize) -> i64 {
    let x = (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    1 + ((x >> 33) % 997) as i64
}

/// Optimal tableau of an LP relaxation, kept so that branches can be re-solved
/// from it with dual simplex pivots.
#[derive(Debug, Clone)]
pub(super) struct LpState {
    t: Tableau,
    var_of: Vec<usize>,
    col_of: Vec<usize>,
    lower: Vec<i64>,
    nfree: usize,
}

pub(super) enum Root {
    Optimal(LpState),
    Infeasible,
    Unbounded,
}

/// New bound on a model variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum Bound {
    AtMost(i64),
    AtLeast(i64),
}

pub(super) enum Warm {
    Optimal,
    Infeasible,
    /// Too many dual pivots; the caller should solve from scratch.
    GaveUp,
}

impl LpState {
    pub(super) fn values(&self) -> Vec<Rational> {
        let mut values: Vec<Rational> = self.lower.iter().map(|&l| Rational::from_int(l)).collect();
        for (r, &b) in self.t.basis.iter().enumerate() {
            if b < self.nfree {
                let j = self.var_of[b];
                values[j] = &values[j] + &self.t.rhs[r];
            }
        }
        values
    }

    /// Adds `bound` on variable `var`, which must be basic, and restores optimality.
    pub(super) fn branch(&mut self, var: usize, bound: Bound) -> Warm {
        let k = self.col_of[var];
        let Some(r) = (k != usize::MAX).then(|| self.t.basis.iter().position(|&b| b == k)).flatten() else {
            return Warm::GaveUp;
        };
        let s = self.t.cost.len() as u32;
        self.t.cost.push(Rational::ZERO);
        let (row, rhs) = match bound {
            Bound::AtMost(u) => {
                let base = vec![(k as u32, Rational::ONE), (s, Rational::ONE)];
                let rhs = &Rational::from_int(u - self.lower[var]) - &self.t.rhs[r];
                (row_axpy(&base, &Rational::ONE, &self.t.rows[r]), rhs)
            }
            Bound::AtLeast(l) => {
                let base = vec![(k as u32, -Rational::ONE), (s, Rational::ONE)];
                let rhs = &self.t.rhs[r] - &Rational::from_int(l - self.lower[var]);
                (row_axpy(&base, &-Rational::ONE, &self.t.rows[r]), rhs)
            }
        };
        let pert = match bound {
            Bound::AtMost(_) => -&self.t.pert[r],
            Bound::AtLeast(_) => self.t.pert[r].clone(),
        };
        self.t.rows.push(row);
        self.t.rhs.push(rhs);
        self.t.pert.push(pert);
        self.t.basis.push(s as usize);
        self.t.dual()
    }
}

/// Solves the LP relaxation of `model` with the given per-variable bounds.
pub fn solve_lp(model: &MilpModel, lower: &[i64], upper: &[Option<i64>]) -> LpOutcome {
    match solve_root(model, lower, upper) {
        Root::Infeasible => LpOutcome::Infeasible,
        Root::Unbounded => LpOutcome::Unbounded,
        Root::Optimal(state) => {
            let values = state.values();
            let objective = model.objective_value(&values);
            LpOutcome::Optimal { values, objective }
        }
    }
}

pub(super) fn solve_root(model: &MilpModel, lower: &[i64], upper: &[Option<i64>]) -> Root {
    let n = model.variables.len();
    if (0..n).any(|j| upper[j].is_some_and(|u| u < lower[j])) {
        return Root::Infeasible;
    }
    let fixed: Vec<bool> = (0..n).map(|j| upper[j] == Some(lower[j])).collect();
    let mut col_of = vec![usize::MAX; n];
    let mut var_of = Vec::new();
    for j in 0..n {
        if !fixed[j] {
            col_of[j] = var_of.len();
            var_of.push(j);
        }
    }
    let nfree = var_of.len();

    // (row, relation, rhs) over shifted free columns
    let mut raw: Vec<(Row, Relation, Rational)> = Vec::new();
    for c in &model.constraints {
        let mut rhs = i128::from(c.rhs);
        let mut row: Row = Vec::new();
        for &(v, a) in &c.coeffs {
            rhs -= i128::from(a) * i128::from(lower[v]);
            if !fixed[v] {
                row.push((col_of[v] as u32, Rational::from_int(a)));
            }
        }
        let rhs = Rational::from_int(i64::try_from(rhs).expect("rhs fits in i64"));
        if row.is_empty() {
            if !c.relation.holds(&Rational::ZERO, &rhs) {
                return Root::Infeasible;
            }
            continue;
        }
        row.sort_by_key(|e| e.0);
        raw.push((row, c.relation, rhs));
    }
    for (k, &j) in var_of.iter().enumerate() {
        if let Some(u) = upper[j] {
            raw.push((
                vec![(k as u32, Rational::ONE)],
                Relation::Le,
                Rational::from_int(u - lower[j]),
            ));
        }
    }
    for r in raw.iter_mut() {
        if r.2.is_negative() {
            for e in r.0.iter_mut() {
                e.1 = -&e.1;
            }
            r.2 = -&r.2;
            r.1 = match r.1 {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = raw.len();
    let slack_count = raw.iter().filter(|r| r.1 != Relation::Eq).count();
    let art_start = nfree + slack_count;
    let art_count = raw.iter().filter(|r| r.1 != Relation::Le).count();
    let total = art_start + art_count;

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut pert = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut cost = vec![Rational::ZERO; total];
    let mut objective = Rational::ZERO;
    let (mut next_slack, mut next_art) = (nfree, art_start);
    for (mut row, rel, b) in raw {
        match rel {
            Relation::Le => {
                row.push((next_slack as u32, Rational::ONE));
                basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                row.push((next_slack as u32, -Rational::ONE));
                next_slack += 1;
                row.push((next_art as u32, Rational::ONE));
                basis.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                row.push((next_art as u32, Rational::ONE));
                basis.push(next_art);
                next_art += 1;
            }
        }
        if basis[basis.len() - 1] >= art_start {
            for (j, v) in &row {
                if (*j as usize) < art_start {
                    cost[*j as usize] = &cost[*j as usize] - v;
                }
            }
            objective = &objective + &b;
        }
        rows.push(row);
        rhs.push(b);
        pert.push(Rational::from_int(perturbation(rows.len())));
    }

    let mut t = Tableau {
        rows,
        rhs,
        pert,
        basis,
        cost,
        objective,
        enter_limit: art_start,
    };

    if art_count > 0 {
        t.run();
        if t.objective.is_positive() {
            return Root::Infeasible;
        }
        // drive remaining artificials out of the basis
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= art_start {
                let col = t.rows[r]
                    .iter()
                    .find(|e| (e.0 as usize) < art_start)
                    .map(|e| e.0 as usize);
                match col {
                    Some(c) => t.pivot(r, c),
                    None => {
                        t.rows.remove(r);
                        t.rhs.remove(r);
                        t.pert.remove(r);
                        t.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        for row in t.rows.iter_mut() {
            row.retain(|e| (e.0 as usize) < art_start);
        }
    }

    // phase II costs
    let mut c = vec![Rational::ZERO; art_start];
    for &(v, a) in &model.objective {
        if !fixed[v] {
            c[col_of[v]] = Rational::from_int(a);
        }
    }
    t.cost = c.clone();
    t.cost.resize(total, Rational::ZERO);
    t.objective = Rational::ZERO;
    for r in 0..t.rows.len() {
        let cb = &c[t.basis[r]];
        if cb.is_zero() {
            continue;
        }
        for (j, v) in &t.rows[r] {
            let j = *j as usize;
            t.cost[j] = &t.cost[j] - &(cb * v);
        }
        t.objective = &t.objective + &(cb * &t.rhs[r]);
    }
    if let PhaseEnd::Unbounded = t.run() {
        return Root::Unbounded;
    }

    Root::Optimal(LpState {
        t,
        var_of,
        col_of,
        lower: lower.to_vec(),
        nfree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds(m: &MilpModel) -> (Vec<i64>, Vec<Option<i64>>) {
        (
            m.variables.iter().map(|v| v.lower).collect(),
            m.variables.iter().map(|v| v.upper).collect(),
        )
    }

    fn solve(m: &MilpModel) -> LpOutcome {
        let (l, u) = bounds(m);
        solve_lp(m, &l, &u)
    }

    #[test]
    fn two_variable_vertex() {
        // min -x - 2y  s.t. x + y <= 4, x + 3y <= 6  ->  (3, 1), -5
        let mut m = MilpModel::new();
        let x = m.add_variable("x", 0, None, false);
        let y = m.add_variable("y", 0, None, false);
        m.add_constraint("a", vec![(x, 1), (y, 1)], Relation::Le, 4);
        m.add_constraint("b", vec![(x, 1), (y, 3)], Relation::Le, 6);
        m.set_objective(vec![(x, -1), (y, -2)]);
        let LpOutcome::Optimal { values, objective } = solve(&m) else {
            panic!()
        };
        assert_eq!(values, vec![Rational::from_int(3), Rational::from_int(1)]);
        assert_eq!(objective, Rational::from_int(-5));
    }

    #[test]
    fn fractional_vertex() {
        // min -x  s.t. 3x <= 2  ->  2/3
        let mut m = MilpModel::new();
        let x = m.add_variable("x", 0, None, false);
        m.add_constraint("a", vec![(x, 3)], Relation::Le, 2);
        m.set_objective(vec![(x, -1)]);
        let LpOutcome::Optimal { values, .. } = solve(&m) else {
            panic!()
        };
        assert_eq!(values[0], Rational::new(2, 3));
    }

    #[test]
    fn contradictory_equalities() {
        let mut m = MilpModel::new();
        let x = m.add_variable("x", 0, None, false);
        m.add_constraint("a", vec![(x, 1)], Relation::Eq, 1);
        m.add_constraint("b", vec![(x, 1)], Relation::Eq, 2);
        assert_eq!(solve(&m), LpOutcome::Infeasible);
    }

    #[test]
    fn unbounded() {
        let mut m = MilpModel::new();
        let x = m.add_variable("x", 0, None, false);
        m.set_objective(vec![(x, -1)]);
        assert_eq!(solve(&m), LpOutcome::Unbounded);
    }

    #[test]
    fn ge_rows_negative_lower_bounds_and_fixed() {
        // min x + y  s.t. x + y >= -1, x >= -3, y in [-2, 5], z fixed 2, x - z >= -4
        let mut m = MilpModel::new();
        let x = m.add_variable("x", -3, None, false);
        let y = m.add_variable("y", -2, Some(5), false);
        let z = m.add_variable("z", 2, Some(2), false);
        m.add_constraint("a", vec![(x, 1), (y, 1)], Relation::Ge, -1);
        m.add_constraint("b", vec![(x, 1), (z, -1)], Relation::Ge, -4);
        m.set_objective(vec![(x, 1), (y, 1)]);
        let LpOutcome::Optimal { values, objective } = solve(&m) else {
            panic!()
        };
        assert_eq!(objective, Rational::from_int(-1));
        assert_eq!(values[2], Rational::from_int(2));
        assert!(values[0] >= Rational::from_int(-2));
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut m = MilpModel::new();
        let x = m.add_variable("x", 0, None, false);
        let y = m.add_variable("y", 0, None, false);
        m.add_constraint("a", vec![(x, 1), (y, 1)], Relation::Eq, 2);
        m.add_constraint("b", vec![(x, 2), (y, 2)], Relation::Eq, 4);
        m.set_objective(vec![(x, 1), (y, 2)]);
        let LpOutcome::Optimal { values, .. } = solve(&m) else {
            panic!()
        };
        assert_eq!(values, vec![Rational::from_int(2), Rational::ZERO]);
    }
}
