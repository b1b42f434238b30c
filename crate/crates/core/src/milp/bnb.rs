//! Depth-first branch and bound over the exact LP relaxation.

use super::model::{MilpModel, MilpSolution, SolveStatus};
use super::rational::Rational;
use super::presolve::tighten;
use super::simplex::{solve_root, Bound, LpState, Root, Warm};

struct Node {
    lower: Vec<i64>,
    upper: Vec<Option<i64>>,
    /// Parent tableau and the bound that separates this node from it.
    warm: Option<(LpState, usize, Bound)>,
}

enum NodeLp {
    Optimal(LpState),
    Infeasible,
    Unbounded,
}

fn node_lp(model: &MilpModel, node: Node) -> NodeLp {
    if let Some((mut state, var, bound)) = node.warm {
        match state.branch(var, bound) {
            Warm::Optimal => return NodeLp::Optimal(state),
            Warm::Infeasible => return NodeLp::Infeasible,
            Warm::GaveUp => {}
        }
    }
    let (mut lower, mut upper) = (node.lower, node.upper);
    if !tighten(model, &mut lower, &mut upper) {
        return NodeLp::Infeasible;
    }
    match solve_root(model, &lower, &upper) {
        Root::Optimal(s) => NodeLp::Optimal(s),
        Root::Infeasible => NodeLp::Infeasible,
        Root::Unbounded => NodeLp::Unbounded,
    }
}

/// Branches on the lowest-index fractional integer variable and explores the
/// floor child first. Children start from the parent's optimal tableau. When
/// every objective term is an integer variable with an integer coefficient,
/// nodes whose rounded-up bound cannot beat the incumbent are pruned.
pub fn solve(model: &MilpModel, node_limit: usize) -> MilpSolution {
    if let Err(e) = model.validate() {
        panic!("solve called on a malformed model: {e}");
    }
    let integral_objective = model
        .objective
        .iter()
        .all(|&(v, _)| model.variables[v].integer);
    let mut stack = vec![Node {
        lower: model.variables.iter().map(|v| v.lower).collect(),
        upper: model.variables.iter().map(|v| v.upper).collect(),
        warm: None,
    }];
    let mut incumbent: Option<(Vec<Rational>, Rational)> = None;
    let mut nodes = 0;

    while let Some(node) = stack.pop() {
        if nodes >= node_limit {
            let (values, objective) = match incumbent {
                Some((v, o)) => (v, Some(o)),
                None => (Vec::new(), None),
            };
            return MilpSolution {
                status: SolveStatus::NodeLimit,
                values,
                objective,
                nodes,
            };
        }
        nodes += 1;
        let (lo, up) = (node.lower.clone(), node.upper.clone());
        let state = match node_lp(model, node) {
            NodeLp::Infeasible => continue,
            NodeLp::Unbounded => {
                return MilpSolution {
                    status: SolveStatus::Unbounded,
                    values: Vec::new(),
                    objective: None,
                    nodes,
                };
            }
            NodeLp::Optimal(s) => s,
        };
        let values = state.values();
        let bound = model.objective_value(&values);
        if let Some((_, best)) = &incumbent {
            let effective = if integral_objective { bound.ceil() } else { bound.clone() };
            if effective >= *best {
                continue;
            }
        }
        let fractional = model
            .variables
            .iter()
            .enumerate()
            .find(|(j, v)| v.integer && !values[*j].is_integer())
            .map(|(j, _)| j);
        match fractional {
            None => incumbent = Some((values, bound)),
            Some(j) => {
                let floor = values[j].floor().to_i64().expect("branch value fits in i64");
                let mut ceil_lo = lo.clone();
                ceil_lo[j] = floor + 1;
                let mut floor_up = up.clone();
                floor_up[j] = Some(floor);
                stack.push(Node {
                    lower: ceil_lo,
                    upper: up,
                    warm: Some((state.clone(), j, Bound::AtLeast(floor + 1))),
                });
                stack.push(Node {
                    lower: lo,
                    upper: floor_up,
                    warm: Some((state, j, Bound::AtMost(floor))),
                });
            }
        }
    }
    match incumbent {
        Some((values, objective)) => MilpSolution {
            status: SolveStatus::Optimal,
            values,
            objective: Some(objective),
            nodes,
        },
        None => MilpSolution {
            status: SolveStatus::Infeasible,
            values: Vec::new(),
            objective: None,
            nodes,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::model::Relation;

    #[test]
    fn knapsack_matches_enumeration() {
        // max 5a + 4b + 3c  s.t. 2a + 3b + c <= 5, binaries
        let w = [2, 3, 1];
        let p = [5, 4, 3];
        let mut m = MilpModel::new();
        let vars: Vec<usize> = (0..3).map(|i| m.add_variable(format!("x{i}"), 0, Some(1), true)).collect();
        m.add_constraint("cap", vars.iter().zip(w).map(|(&v, w)| (v, w)).collect(), Relation::Le, 5);
        m.set_objective(vars.iter().zip(p).map(|(&v, p)| (v, -p)).collect());
        let s = solve(&m, 1000);
        let mut best = 0;
        for mask in 0..8 {
            let weight: i64 = (0..3).filter(|i| mask & (1 << i) != 0).map(|i| w[i]).sum();
            let profit: i64 = (0..3).filter(|i| mask & (1 << i) != 0).map(|i| p[i]).sum();
            if weight <= 5 {
                best = best.max(profit);
            }
        }
        assert_eq!(s.status, SolveStatus::Optimal);
        assert_eq!(s.objective, Some(Rational::from_int(-best)));
    }

    #[test]
    fn integer_infeasible_but_lp_feasible() {
        let mut m = MilpModel::new();
        let x = m.add_variable("x", 0, None, true);
        m.add_constraint("a", vec![(x, 2)], Relation::Eq, 1);
        assert_eq!(solve(&m, 100).status, SolveStatus::Infeasible);
    }

    #[test]
    fn node_limit_is_reported() {
        let mut m = MilpModel::new();
        let x = m.add_variable("x", 0, Some(10), true);
        let y = m.add_variable("y", 0, Some(10), true);
        let z = m.add_variable("z", 0, Some(10), true);
        m.add_constraint("a", vec![(x, 2), (y, 2), (z, 2)], Relation::Eq, 7);
        let s = solve(&m, 1);
        assert_eq!(s.status, SolveStatus::NodeLimit);
        assert_eq!(s.nodes, 1);
    }

    #[test]
    fn deterministic() {
        let mut m = MilpModel::new();
        let vars: Vec<usize> = (0..4).map(|i| m.add_variable(format!("x{i}"), 0, Some(3), true)).collect();
        m.add_constraint("a", vars.iter().map(|&v| (v, 3)).collect(), Relation::Ge, 7);
        m.add_constraint("b", vec![(vars[0], 2), (vars[3], -1)], Relation::Le, 1);
        m.set_objective(vars.iter().enumerate().map(|(i, &v)| (v, i as i64 + 1)).collect());
        let a = solve(&m, 1000);
        let b = solve(&m, 1000);
        assert_eq!(a, b);
        let mut best = i64::MAX;
        for code in 0..256 {
            let x: Vec<i64> = (0..4).map(|i| (code >> (2 * i)) & 3).collect();
            if 3 * x.iter().sum::<i64>() >= 7 && 2 * x[0] - x[3] <= 1 {
                best = best.min(x.iter().enumerate().map(|(i, v)| (i as i64 + 1) * v).sum());
            }
        }
        assert_eq!(a.objective, Some(Rational::from_int(best)));
    }
}
