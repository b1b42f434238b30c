//! Reachability MILP over the composed net: `2k` alternating steps, quotient
//! moves on odd steps and one Büchi transition on even steps.

use super::model::{MilpModel, MilpSolution, Relation};
use crate::compose::ComposedPn;
use crate::error::{Error, Result};
use crate::petri::{FiringCount, Marking};

/// Which marking the enabledness rows of odd steps are written on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Enabledness {
    /// `m_{i-1} - Pre·σ_i >= 0`.
    #[default]
    Strict,
    /// `m_i - Pre·σ_i >= 0`.
    Literal,
}

#[derive(Debug, Clone, Default)]
pub struct ReachOptions {
    pub enabledness: Enabledness,
    /// Cells in each quotient place. When set, a step may not move more robots
    /// into a region than it has free cells.
    pub region_capacity: Option<Vec<u32>>,
    /// Upper bound on the firings of each quotient transition in one step.
    pub transition_capacity: Option<Vec<u32>>,
    /// Forces `m_{2k}` restricted to the quotient block to equal this marking.
    pub final_quotient: Option<Marking>,
    /// Solve prefix and suffix together: `4k` steps, the final state marked at
    /// steps `2k` and `4k`, and the quotient marking of step `4k` equal to that
    /// of step `2k`.
    pub lasso: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReachLayout {
    pub k: usize,
    pub places: usize,
    pub transitions: usize,
}

impl ReachLayout {
    pub fn steps(&self) -> usize {
        2 * self.k
    }

    /// Variable of `m_i[p]`, `i` in `1..=2k`.
    pub fn m_var(&self, i: usize, p: usize) -> usize {
        (i - 1) * self.places + p
    }

    /// Variable of `σ_i[t]`, `i` in `1..=2k`.
    pub fn s_var(&self, i: usize, t: usize) -> usize {
        self.steps() * self.places + (i - 1) * self.transitions + t
    }

    /// `steps × (|P^C| + |T^C|)`.
    pub fn variable_count(&self) -> usize {
        self.steps() * (self.places + self.transitions)
    }
}

#[derive(Debug, Clone)]
pub struct ReachModel {
    pub model: MilpModel,
    pub layout: ReachLayout,
}

/// Markings `m_1..m_2k` and firings `σ_1..σ_2k` of a solved model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachTrace {
    pub markings: Vec<Marking>,
    pub firings: Vec<FiringCount>,
}

impl ReachModel {
    pub fn trace(&self, sol: &MilpSolution) -> Result<ReachTrace> {
        let l = self.layout;
        let int = |v: usize| -> Result<u32> {
            sol.values[v]
                .to_i64()
                .and_then(|x| u32::try_from(x).ok())
                .ok_or_else(|| Error::Internal(format!("non-integral value {} in reachability solution", sol.values[v])))
        };
        let mut markings = Vec::with_capacity(l.steps());
        let mut firings = Vec::with_capacity(l.steps());
        for i in 1..=l.steps() {
            markings.push(Marking(
                (0..l.places).map(|p| int(l.m_var(i, p))).collect::<Result<_>>()?,
            ));
            firings.push(FiringCount(
                (0..l.transitions).map(|t| int(l.s_var(i, t))).collect::<Result<_>>()?,
            ));
        }
        Ok(ReachTrace { markings, firings })
    }
}

pub fn build_reachability_milp(
    c: &ComposedPn,
    m0: &Marking,
    target_final: usize,
    k: usize,
    opts: &ReachOptions,
) -> Result<ReachModel> {
    if k == 0 {
        return Err(Error::contract("k must be at least 1"));
    }
    if !c.buchi.virtual_of.contains(&target_final) {
        return Err(Error::contract(format!(
            "state {target_final} is not a final state"
        )));
    }
    if m0.len() != c.net.place_count() {
        return Err(Error::contract("initial marking does not match the composed net"));
    }
    let b = c.blocks;
    let loop_start = if opts.lasso { Some(2 * k) } else { None };
    let k = if opts.lasso { 2 * k } else { k };
    // steps that must read a real Büchi transition
    let first_read = |i: usize| i == 2 || loop_start.is_some_and(|s| i == s + 2);
    let layout = ReachLayout {
        k,
        places: c.net.place_count(),
        transitions: c.net.transition_count(),
    };
    let r = i64::from(c.robot_count);
    let mut model = MilpModel::new();
    for i in 1..=layout.steps() {
        for p in 0..layout.places {
            model.add_variable(format!("m{i}_p{p}"), 0, None, false);
        }
    }
    for i in 1..=layout.steps() {
        let odd = i % 2 == 1;
        for t in 0..layout.transitions {
            let is_m = b.m_transitions().contains(&t);
            let is_v = b.v_transitions().contains(&t);
            let upper = if odd {
                if is_m {
                    let cap = opts
                        .transition_capacity
                        .as_ref()
                        .map_or(r, |caps| i64::from(caps[t]).min(r));
                    cap
                } else {
                    0
                }
            } else if is_m || (first_read(i) && is_v) {
                0
            } else {
                1
            };
            model.add_variable(format!("s{i}_t{t}"), 0, Some(upper), true);
        }
    }

    let flow = c.net.token_flow();
    let allowed = |i: usize| -> Vec<usize> {
        if i % 2 == 1 {
            b.m_transitions().collect()
        } else if first_read(i) {
            b.b_transitions().collect()
        } else {
            b.b_transitions().chain(b.v_transitions()).collect()
        }
    };

    for i in 1..=layout.steps() {
        let ts = allowed(i);
        // state equation
        for p in 0..layout.places {
            let mut row = vec![(layout.m_var(i, p), 1)];
            let mut rhs = 0;
            if i == 1 {
                rhs = i64::from(m0.0[p]);
            } else {
                row.push((layout.m_var(i - 1, p), -1));
            }
            for &t in &ts {
                if flow[p][t] != 0 {
                    row.push((layout.s_var(i, t), -flow[p][t]));
                }
            }
            model.add_constraint(format!("state{i}_p{p}"), row, Relation::Eq, rhs);
        }
        // enabledness
        let literal = i % 2 == 1 && opts.enabledness == Enabledness::Literal;
        for p in 0..layout.places {
            let pre: Vec<(usize, i64)> = ts
                .iter()
                .filter(|&&t| c.net.pre(p, t) > 0)
                .map(|&t| (layout.s_var(i, t), -i64::from(c.net.pre(p, t))))
                .collect();
            if pre.is_empty() {
                continue;
            }
            let mut row = pre;
            let mut rhs = 0;
            if literal {
                row.push((layout.m_var(i, p), 1));
            } else if i == 1 {
                rhs = -i64::from(m0.0[p]);
            } else {
                row.push((layout.m_var(i - 1, p), 1));
            }
            model.add_constraint(format!("enabled{i}_p{p}"), row, Relation::Ge, rhs);
        }
        if i % 2 == 1 {
            // moves are only made when the next Büchi step reads them
            let mut row: Vec<(usize, i64)> = b
                .m_transitions()
                .map(|t| (layout.s_var(i, t), 1))
                .collect();
            row.extend(b.b_transitions().map(|t| (layout.s_var(i + 1, t), -r)));
            model.add_constraint(format!("moves{i}"), row, Relation::Le, 0);
            if let Some(cap) = &opts.region_capacity {
                for q in b.m_places() {
                    let mut row: Vec<(usize, i64)> = b
                        .m_transitions()
                        .filter(|&t| c.net.post(q, t) > 0)
                        .map(|t| (layout.s_var(i, t), 1))
                        .collect();
                    if row.is_empty() {
                        continue;
                    }
                    let mut rhs = i64::from(cap[q]);
                    if i == 1 {
                        rhs -= i64::from(m0.0[q]);
                    } else {
                        row.push((layout.m_var(i - 1, q), 1));
                    }
                    model.add_constraint(format!("capacity{i}_q{q}"), row, Relation::Le, rhs);
                }
            }
        } else {
            let row: Vec<(usize, i64)> = ts.iter().map(|&t| (layout.s_var(i, t), 1)).collect();
            model.add_constraint(format!("buchi{i}"), row, Relation::Eq, 1);
        }
    }
    // implied: one Büchi token at every step
    for i in 1..=layout.steps() {
        let row = b.b_places().map(|p| (layout.m_var(i, p), 1)).collect();
        model.add_constraint(format!("token{i}"), row, Relation::Eq, 1);
    }
    model.add_constraint(
        "final",
        vec![(layout.m_var(layout.steps(), b.place_b(target_final)), 1)],
        Relation::Eq,
        1,
    );
    if let Some(s) = loop_start {
        model.add_constraint(
            "loop_final",
            vec![(layout.m_var(s, b.place_b(target_final)), 1)],
            Relation::Eq,
            1,
        );
        for q in b.m_places() {
            model.add_constraint(
                format!("loop_q{q}"),
                vec![(layout.m_var(layout.steps(), q), 1), (layout.m_var(s, q), -1)],
                Relation::Eq,
                0,
            );
        }
    }
    if let Some(fq) = &opts.final_quotient {
        for q in b.m_places() {
            model.add_constraint(
                format!("closure_q{q}"),
                vec![(layout.m_var(layout.steps(), q), 1)],
                Relation::Eq,
                i64::from(fq.0[q]),
            );
        }
    }
    let mut objective = Vec::new();
    for i in 1..=layout.steps() {
        let w = i as i64;
        for t in b.m_transitions().chain(b.b_transitions()) {
            objective.push((layout.s_var(i, t), w));
        }
    }
    model.set_objective(objective);
    Ok(ReachModel { model, layout })
}
