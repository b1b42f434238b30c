//! Projection MILP: expands a quotient marking sequence into cell-level markings.
//!
//! For a sequence `M = ⟨M_0, ..., M_{L-1}⟩` there are `L + 1` blocks, each with
//! `|R| + 1` sub-steps. Block `b` holds the quotient marking `H_b = M_{min(b, L-1)}`
//! during sub-steps `1..=|R|`, where robots may only travel inside their own
//! region, and reaches `H_{b+1}` at the synchronous sub-step `|R| + 1`.

use super::model::{MilpModel, MilpSolution, Relation};
use crate::environment::Rmpn;
use crate::error::{Error, Result};
use crate::petri::{FiringCount, Marking};
use crate::quotient::QuotientResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProjectionLayout {
    /// Length of the marking sequence.
    pub sequence_len: usize,
    pub robots: usize,
    pub places: usize,
    pub transitions: usize,
}

impl ProjectionLayout {
    pub fn blocks(&self) -> usize {
        self.sequence_len + 1
    }

    pub fn sub_steps(&self) -> usize {
        self.robots + 1
    }

    fn slot(&self, b: usize, j: usize) -> usize {
        b * self.sub_steps() + (j - 1)
    }

    /// Variable of `m_{b,j}[p]`, `j` in `1..=|R|+1`.
    pub fn m_var(&self, b: usize, j: usize, p: usize) -> usize {
        self.slot(b, j) * self.places + p
    }

    /// Variable of `σ_{b,j}[t]`.
    pub fn s_var(&self, b: usize, j: usize, t: usize) -> usize {
        self.blocks() * self.sub_steps() * self.places + self.slot(b, j) * self.transitions + t
    }

    /// `(|M| + 1)(|R| + 1)(|P| + |T|)`.
    pub fn variable_count(&self) -> usize {
        self.blocks() * self.sub_steps() * (self.places + self.transitions)
    }

    /// Hold target of block `b`.
    pub fn hold_index(&self, b: usize) -> usize {
        b.min(self.sequence_len - 1)
    }
}

#[derive(Debug, Clone)]
pub struct ProjectionModel {
    pub model: MilpModel,
    pub layout: ProjectionLayout,
}

/// Cell markings and firings per block and sub-step; `markings[b][j-1]` is `m_{b,j}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionTrace {
    pub markings: Vec<Vec<Marking>>,
    pub firings: Vec<Vec<FiringCount>>,
}

impl ProjectionModel {
    pub fn trace(&self, sol: &MilpSolution) -> Result<ProjectionTrace> {
        let l = self.layout;
        let int = |v: usize| -> Result<u32> {
            sol.values[v]
                .to_i64()
                .and_then(|x| u32::try_from(x).ok())
                .ok_or_else(|| Error::Internal(format!("non-integral value {} in projection solution", sol.values[v])))
        };
        let mut markings = Vec::new();
        let mut firings = Vec::new();
        for b in 0..l.blocks() {
            let mut mb = Vec::new();
            let mut fb = Vec::new();
            for j in 1..=l.sub_steps() {
                mb.push(Marking((0..l.places).map(|p| int(l.m_var(b, j, p))).collect::<Result<_>>()?));
                fb.push(FiringCount(
                    (0..l.transitions).map(|t| int(l.s_var(b, j, t))).collect::<Result<_>>()?,
                ));
            }
            markings.push(mb);
            firings.push(fb);
        }
        Ok(ProjectionTrace { markings, firings })
    }
}

/// Builds the projection model. `zeros[i][q] = 1` iff `markings[i][q] = 0`.
/// With `closure = Some(s)`, the last marking must equal the marking at the start of block `s`.
pub fn build_projection_milp(
    rmpn: &Rmpn,
    q: &QuotientResult,
    markings: &[Marking],
    zeros: &[Vec<u8>],
    robot_count: usize,
    closure: Option<usize>,
) -> Result<ProjectionModel> {
    if markings.is_empty() {
        return Err(Error::contract("marking sequence is empty"));
    }
    if zeros.len() != markings.len() {
        return Err(Error::contract("zero indicators do not match the marking sequence"));
    }
    let nq = q.projection.len();
    for (m, g) in markings.iter().zip(zeros) {
        if m.len() != nq || g.len() != nq {
            return Err(Error::contract("quotient marking has the wrong length"));
        }
        if m.0.iter().zip(g).any(|(&v, &z)| (v == 0) != (z == 1)) {
            return Err(Error::contract("zero indicator disagrees with its marking"));
        }
    }
    if closure.is_some_and(|s| s >= markings.len()) {
        return Err(Error::contract("closure index outside of the sequence"));
    }
    let net = &rmpn.net;
    let layout = ProjectionLayout {
        sequence_len: markings.len(),
        robots: robot_count,
        places: net.place_count(),
        transitions: net.transition_count(),
    };
    let class: Vec<usize> = (0..layout.places).map(|p| q.class_of(p)).collect();
    let ends: Vec<(usize, usize)> = (0..layout.transitions).map(|t| rmpn.endpoints(t)).collect();
    let sync = layout.sub_steps();

    // cell occupancy and firing upper bounds of one are implied by the entry rows
    let mut model = MilpModel::new();
    for b in 0..layout.blocks() {
        for j in 1..=sync {
            for p in 0..layout.places {
                model.add_variable(format!("m{b}_{j}_p{p}"), 0, None, false);
            }
        }
    }
    for b in 0..layout.blocks() {
        let hold = &zeros[layout.hold_index(b)];
        let next = &zeros[layout.hold_index(b + 1)];
        for j in 1..=sync {
            for (t, &(from, to)) in ends.iter().enumerate() {
                let g = if j == sync { next } else { hold };
                let open = g[class[to]] == 0 && (j == sync || class[from] == class[to]);
                model.add_variable(format!("s{b}_{j}_t{t}"), 0, if open { None } else { Some(0) }, true);
            }
        }
    }

    let prev_m = |b: usize, j: usize| -> Option<(usize, usize)> {
        if j > 1 {
            Some((b, j - 1))
        } else if b > 0 {
            Some((b - 1, sync))
        } else {
            None
        }
    };
    let flow = net.token_flow();
    for b in 0..layout.blocks() {
        for j in 1..=sync {
            let open: Vec<usize> = (0..layout.transitions)
                .filter(|&t| model.variables[layout.s_var(b, j, t)].upper != Some(0))
                .collect();
            let prev = prev_m(b, j);
            for p in 0..layout.places {
                // state equation
                let mut row = vec![(layout.m_var(b, j, p), 1)];
                let mut rhs = 0;
                match prev {
                    Some((pb, pj)) => row.push((layout.m_var(pb, pj, p), -1)),
                    None => rhs = i64::from(rmpn.m0.0[p]),
                }
                for &t in &open {
                    if flow[p][t] != 0 {
                        row.push((layout.s_var(b, j, t), -flow[p][t]));
                    }
                }
                model.add_constraint(format!("state{b}_{j}_p{p}"), row, Relation::Eq, rhs);

                // each cell entered at most once, and only when empty
                let entering: Vec<(usize, i64)> = open
                    .iter()
                    .filter(|&&t| ends[t].1 == p)
                    .map(|&t| (layout.s_var(b, j, t), 1))
                    .collect();
                if !entering.is_empty() {
                    let mut row = entering;
                    let mut rhs = 1;
                    match prev {
                        Some((pb, pj)) => row.push((layout.m_var(pb, pj, p), 1)),
                        None => rhs -= i64::from(rmpn.m0.0[p]),
                    }
                    model.add_constraint(format!("entry{b}_{j}_p{p}"), row, Relation::Le, rhs);
                }

                // synchronous sub-step: every move starts from an occupied cell
                if j == sync {
                    let leaving: Vec<(usize, i64)> = open
                        .iter()
                        .filter(|&&t| ends[t].0 == p)
                        .map(|&t| (layout.s_var(b, j, t), -1))
                        .collect();
                    if !leaving.is_empty() {
                        let mut row = leaving;
                        let mut rhs = 0;
                        match prev {
                            Some((pb, pj)) => row.push((layout.m_var(pb, pj, p), 1)),
                            None => rhs = -i64::from(rmpn.m0.0[p]),
                        }
                        model.add_constraint(format!("sync{b}_p{p}"), row, Relation::Ge, rhs);
                    }
                }
            }
            // observation pinning
            let target = if j == sync {
                &markings[layout.hold_index(b + 1)]
            } else {
                &markings[layout.hold_index(b)]
            };
            for (k, members) in q.projection.iter().enumerate() {
                let row: Vec<(usize, i64)> = members
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v == 1)
                    .map(|(p, _)| (layout.m_var(b, j, p), 1))
                    .collect();
                model.add_constraint(
                    format!("region{b}_{j}_q{k}"),
                    row,
                    Relation::Eq,
                    i64::from(target.0[k]),
                );
            }
        }
    }
    if let Some(s) = closure {
        let last = layout.blocks() - 1;
        for p in 0..layout.places {
            let mut row = vec![(layout.m_var(last, sync, p), 1)];
            let rhs = match prev_m(s, 1) {
                Some((pb, pj)) => {
                    row.push((layout.m_var(pb, pj, p), -1));
                    0
                }
                None => i64::from(rmpn.m0.0[p]),
            };
            model.add_constraint(format!("closure_p{p}"), row, Relation::Eq, rhs);
        }
    }
    let objective = (0..layout.blocks())
        .flat_map(|b| (1..=sync).flat_map(move |j| (0..layout.transitions).map(move |t| (b, j, t))))
        .map(|(b, j, t)| (layout.s_var(b, j, t), 1))
        .collect();
    model.set_objective(objective);
    Ok(ProjectionModel { model, layout })
}
