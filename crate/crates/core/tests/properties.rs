use std::collections::BTreeSet;

use ltlpn::alphabet::{Atom, ObsSet};
use ltlpn::buchi::{dnf_satisfied, to_dnf, Formula};
use ltlpn::milp::{export_lp, parse_lp, MilpModel, Rational, Relation};
use num_rational::BigRational;
use proptest::prelude::*;

fn formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::True),
        Just(Formula::False),
        (1u32..=3).prop_map(|a| Formula::Atom(Atom(a))),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|f| Formula::Not(Box::new(f))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::Or(Box::new(a), Box::new(b))),
        ]
    })
}

fn small() -> impl Strategy<Value = (i64, i64)> {
    (-1_000i64..1_000, 1i64..200)
}

fn big(v: &Rational) -> BigRational {
    v.to_big()
}

proptest! {
    #[test]
    fn dnf_agrees_with_the_guard(f in formula()) {
        let clauses = to_dnf(&f);
        for mask in 0u32..8 {
            let obs: ObsSet = (1..=3).filter(|a| mask & (1 << (a - 1)) != 0).map(Atom).collect();
            prop_assert_eq!(dnf_satisfied(&clauses, &obs), f.eval(&obs));
        }
    }

    #[test]
    fn rational_arithmetic_matches_bigrational(a in small(), b in small(), c in small()) {
        let (x, y, z) = (Rational::new(a.0, a.1), Rational::new(b.0, b.1), Rational::new(c.0, c.1));
        let sum = x.clone() + y.clone();
        prop_assert_eq!(big(&sum), big(&x) + big(&y));
        let prod = x.clone() * y.clone();
        prop_assert_eq!(big(&prod), big(&x) * big(&y));
        prop_assert_eq!((x.clone() + y.clone()) * z.clone(), x.clone() * z.clone() + y.clone() * z.clone());
        prop_assert_eq!(x.cmp(&y), big(&x).cmp(&big(&y)));
        prop_assert!(x.floor() <= x && x <= x.ceil());
    }

    #[test]
    fn lp_export_round_trips(
        bounds in prop::collection::vec((-3i64..=0, 0i64..=4, any::<bool>()), 1..6),
        rows in prop::collection::vec((prop::collection::vec(-5i64..=5, 6), 0usize..3, -9i64..=9), 0..5),
        obj in prop::collection::vec(-5i64..=5, 6),
    ) {
        let mut m = MilpModel::new();
        for (j, &(lo, width, integer)) in bounds.iter().enumerate() {
            m.add_variable(format!("x{j}"), lo, Some(lo + width), integer);
        }
        let n = bounds.len();
        for (r, (coeffs, rel, rhs)) in rows.iter().enumerate() {
            let row: Vec<(usize, i64)> = coeffs.iter().take(n).enumerate().filter(|(_, &a)| a != 0).map(|(j, &a)| (j, a)).collect();
            if row.is_empty() {
                continue;
            }
            let rel = [Relation::Le, Relation::Ge, Relation::Eq][*rel];
            m.add_constraint(format!("c{r}"), row, rel, *rhs);
        }
        m.set_objective(obj.iter().take(n).enumerate().filter(|(_, &a)| a != 0).map(|(j, &a)| (j, a)).collect());
        let text = export_lp(&m);
        let back = parse_lp(&text).unwrap();
        prop_assert_eq!(export_lp(&back), text);
        prop_assert_eq!(back.variable_count(), n);
        let names: BTreeSet<_> = back.variables.iter().map(|v| v.name.clone()).collect();
        prop_assert_eq!(names.len(), n);
    }
}
