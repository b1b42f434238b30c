//! Activity-based bound tightening. Integer variables get rounded bounds, so
//! the result is valid for the MILP and may cut off fractional LP points.

use super::model::{MilpModel, Relation};

const ROUNDS: usize = 20;

fn floor_div(n: i128, d: i128) -> i128 {
    let q = n / d;
    if (n % d != 0) && ((n < 0) != (d < 0)) {
        q - 1
    } else {
        q
    }
}

fn ceil_div(n: i128, d: i128) -> i128 {
    -floor_div(-n, d)
}

/// Tightens `lower`/`upper` in place. Returns false when some row cannot be satisfied.
pub(super) fn tighten(model: &MilpModel, lower: &mut [i64], upper: &mut [Option<i64>]) -> bool {
    let rows: Vec<(Vec<(usize, i128)>, i128)> = model
        .constraints
        .iter()
        .flat_map(|c| {
            let pos: Vec<(usize, i128)> = c.coeffs.iter().map(|&(v, a)| (v, i128::from(a))).collect();
            let neg: Vec<(usize, i128)> = pos.iter().map(|&(v, a)| (v, -a)).collect();
            let b = i128::from(c.rhs);
            match c.relation {
                Relation::Le => vec![(pos, b)],
                Relation::Ge => vec![(neg, -b)],
                Relation::Eq => vec![(pos, b), (neg, -b)],
            }
        })
        .collect();
    for _ in 0..ROUNDS {
        let mut changed = false;
        for (row, b) in &rows {
            // minimum activity, with the number of unbounded terms
            let mut min = 0i128;
            let mut unbounded = 0;
            let mut free_var = usize::MAX;
            for &(v, a) in row {
                if a > 0 {
                    min += a * i128::from(lower[v]);
                } else {
                    match upper[v] {
                        Some(u) => min += a * i128::from(u),
                        None => {
                            unbounded += 1;
                            free_var = v;
                        }
                    }
                }
            }
            if unbounded == 0 && min > *b {
                return false;
            }
            if unbounded > 1 {
                continue;
            }
            for &(v, a) in row {
                let own = if a > 0 {
                    a * i128::from(lower[v])
                } else {
                    match upper[v] {
                        Some(u) => a * i128::from(u),
                        None => 0,
                    }
                };
                if unbounded == 1 && free_var != v {
                    continue;
                }
                let slack = b - (min - own);
                let integer = model.variables[v].integer;
                if a > 0 {
                    if !integer && slack % a != 0 {
                        continue;
                    }
                    let bound = floor_div(slack, a);
                    if upper[v].is_none_or(|u| bound < i128::from(u)) {
                        let Ok(bound) = i64::try_from(bound) else { continue };
                        upper[v] = Some(bound);
                        changed = true;
                    }
                } else {
                    if !integer && slack % a != 0 {
                        continue;
                    }
                    let bound = ceil_div(slack, a);
                    if bound > i128::from(lower[v]) {
                        let Ok(bound) = i64::try_from(bound) else { continue };
                        lower[v] = bound;
                        changed = true;
                    }
                }
                if upper[v].is_some_and(|u| u < lower[v]) {
                    return false;
                }
            }
        }
        if !changed {
            break;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_of_rows_fixes_variables() {
        // x + y <= 1, y >= 1  ->  y = 1, x = 0
        let mut m = MilpModel::new();
        let x = m.add_variable("x", 0, None, true);
        let y = m.add_variable("y", 0, None, true);
        m.add_constraint("a", vec![(x, 1), (y, 1)], Relation::Le, 1);
        m.add_constraint("b", vec![(y, 1)], Relation::Ge, 1);
        let (mut lo, mut up) = (vec![0, 0], vec![None, None]);
        assert!(tighten(&m, &mut lo, &mut up));
        assert_eq!((lo, up), (vec![0, 1], vec![Some(0), Some(1)]));
    }

    #[test]
    fn integer_rounding_and_infeasibility() {
        let mut m = MilpModel::new();
        let x = m.add_variable("x", 0, Some(5), true);
        m.add_constraint("a", vec![(x, 2)], Relation::Le, 3);
        let (mut lo, mut up) = (vec![0], vec![Some(5)]);
        assert!(tighten(&m, &mut lo, &mut up));
        assert_eq!(up, vec![Some(1)]);
        m.add_constraint("b", vec![(x, 2)], Relation::Ge, 3);
        let (mut lo, mut up) = (vec![0], vec![Some(5)]);
        assert!(!tighten(&m, &mut lo, &mut up));
    }

    #[test]
    fn continuous_bounds_stay_exact() {
        // 3x <= 2 with x continuous: no integral bound follows
        let mut m = MilpModel::new();
        let x = m.add_variable("x", 0, None, false);
        m.add_constraint("a", vec![(x, 3)], Relation::Le, 2);
        let (mut lo, mut up) = (vec![0], vec![None]);
        assert!(tighten(&m, &mut lo, &mut up));
        assert_eq!(up, vec![None]);
    }
}
