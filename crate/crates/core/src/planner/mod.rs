//! Global planning loop: reachability on the composed net, then projection to cells.

pub mod plan_doc;
pub mod sequence;
pub mod trajectory;
pub mod verify;

use std::time::Instant;

pub use plan_doc::{BuchiRun, Counts, NetCounts, Objectives, Plan, RobotTrajectory, TickRead, Timings};
pub use sequence::{compact_marking_sequence, compact_run, MarkingSequence, RawRun, Read};
pub use trajectory::{close_loop, decompose_firing, extract_trajectories, Timeline};
pub use verify::{verify_plan, Verdict};

use crate::buchi::{build_buchi_pn, BuchiAutomaton};
use crate::compose::{compose, ComposedPn};
use crate::environment::{build_rmpn, Environment, Rmpn};
use crate::error::{Error, Result};
use crate::milp::{
    build_projection_milp, build_reachability_milp, solve, Enabledness, MilpModel, MilpSolution,
    ReachModel, ReachOptions, ReachTrace, SolveStatus, DEFAULT_NODE_LIMIT,
};
use crate::petri::Marking;
use crate::quotient::{quotient, QuotientResult};

#[derive(Debug, Clone)]
pub struct PlannerConfig {
    /// First value of `k` tried.
    pub k_init: usize,
    /// Branch-and-bound node limit per MILP.
    pub node_limit: usize,
    /// Try every final state and keep the cheapest projection instead of the first success.
    pub explore_all_finals: bool,
    pub enabledness: Enabledness,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            k_init: 4,
            node_limit: DEFAULT_NODE_LIMIT,
            explore_all_finals: false,
            enabledness: Enabledness::Strict,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfeasibleReport {
    pub message: String,
    pub k_tried: Vec<usize>,
    /// True when some MILP stopped at the node limit without a solution.
    pub node_limit_hit: bool,
    pub solver_nodes: usize,
}

#[derive(Debug, Clone)]
pub enum PlanOutcome {
    Plan(Box<Plan>),
    Infeasible(InfeasibleReport),
}

/// The MILPs solved for the returned plan.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub prefix: MilpModel,
    pub suffix: Option<MilpModel>,
    /// Joint prefix and suffix model, when the separate suffix had no solution.
    pub lasso: Option<MilpModel>,
    pub projection: MilpModel,
    pub sequence: MarkingSequence,
}

/// Nets shared by every candidate.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub rmpn: Rmpn,
    pub robot_cells: Vec<usize>,
    pub quotient: QuotientResult,
    pub composed: ComposedPn,
    pub options: ReachOptions,
}

impl Prepared {
    pub fn new(rmpn: &Rmpn, robot_cells: &[usize], buchi: &BuchiAutomaton, enabledness: Enabledness) -> Result<Self> {
        if !rmpn.is_state_machine() {
            return Err(Error::contract("environment net is not a state machine"));
        }
        if rmpn.m0.0.iter().any(|&n| n > 1) {
            return Err(Error::contract("two robots start in the same cell"));
        }
        if robot_cells.len() != rmpn.robot_count() || robot_cells.iter().any(|&c| rmpn.m0.get(c) != 1) {
            return Err(Error::contract("robot cells do not match the initial marking"));
        }
        if rmpn.robot_count() == 0 {
            return Err(Error::contract("no robots"));
        }
        let mut rmpn = rmpn.clone();
        rmpn.alphabet = rmpn.alphabet.union(&buchi.alphabet);
        let q = quotient(&rmpn);
        let bpn = build_buchi_pn(buchi);
        let composed = compose(&q, &bpn, rmpn.robot_count() as u32, &rmpn.alphabet)?;
        let options = ReachOptions {
            enabledness,
            region_capacity: Some(region_capacity(&q)),
            transition_capacity: Some(transition_capacity(&rmpn, &q, &composed)),
            final_quotient: None,
            lasso: false,
        };
        Ok(Prepared {
            rmpn,
            robot_cells: robot_cells.to_vec(),
            quotient: q,
            composed,
            options,
        })
    }

    pub fn prefix_model(&self, k: usize, final_state: usize, initial: usize) -> Result<ReachModel> {
        let m0 = self.composed.with_buchi_state(&self.composed.m0, initial);
        build_reachability_milp(&self.composed, &m0, final_state, k, &self.options)
    }

    /// Largest `k` in the schedule.
    pub fn k_cap(&self) -> usize {
        let b = self.composed.blocks;
        (b.quotient_places.saturating_sub(1) * b.buchi_places.saturating_sub(1)).max(1)
    }

    pub fn counts(&self, buchi: &BuchiAutomaton) -> Counts {
        let bpn = &self.composed.buchi;
        Counts {
            rmpn: NetCounts {
                places: self.rmpn.net.place_count(),
                transitions: self.rmpn.net.transition_count(),
            },
            quotient: NetCounts {
                places: self.quotient.qnet.net.place_count(),
                transitions: self.quotient.qnet.net.transition_count(),
            },
            buchi: NetCounts {
                places: buchi.states.len(),
                transitions: bpn.net.transition_count(),
            },
            composed: NetCounts {
                places: self.composed.net.place_count(),
                transitions: self.composed.net.transition_count(),
            },
            ..Counts::default()
        }
    }
}

/// Number of cells in each region.
fn region_capacity(q: &QuotientResult) -> Vec<u32> {
    q.projection
        .iter()
        .map(|row| row.iter().map(|&v| u32::from(v)).sum())
        .collect()
}

/// Robots that can cross from one region into another in one step: bounded by
/// the border cells on either side.
fn transition_capacity(rmpn: &Rmpn, q: &QuotientResult, c: &ComposedPn) -> Vec<u32> {
    let mut caps = vec![0; c.net.transition_count()];
    for t in 0..q.qnet.net.transition_count() {
        let (a, b) = q.qnet.endpoints(t);
        let mut src = std::collections::BTreeSet::new();
        let mut dst = std::collections::BTreeSet::new();
        for e in 0..rmpn.net.transition_count() {
            let (x, y) = rmpn.endpoints(e);
            if q.class_of(x) == a && q.class_of(y) == b {
                src.insert(x);
                dst.insert(y);
            }
        }
        caps[c.blocks.trans_m(t)] = src.len().min(dst.len()) as u32;
    }
    caps
}

/// True when the Büchi net can move its token from `from` to `to` in one or more
/// clause transitions, ignoring guards.
fn graph_reaches(c: &ComposedPn, from: usize, to: usize) -> bool {
    let edges = &c.buchi.edge_of;
    let mut seen = vec![false; c.blocks.buchi_places];
    let mut stack: Vec<usize> = edges.iter().filter(|e| e.0 == from).map(|e| e.1).collect();
    while let Some(s) = stack.pop() {
        if std::mem::replace(&mut seen[s], true) {
            continue;
        }
        stack.extend(edges.iter().filter(|e| e.0 == s).map(|e| e.1));
    }
    seen[to]
}

/// `k_init, 2 k_init, ...` up to and including the cap.
pub fn k_schedule(k_init: usize, cap: usize) -> Vec<usize> {
    let k_init = k_init.max(1);
    if k_init >= cap {
        return vec![k_init];
    }
    let mut ks = Vec::new();
    let mut k = k_init;
    while k < cap {
        ks.push(k);
        k *= 2;
    }
    ks.push(cap);
    ks
}

struct Candidate {
    plan: Plan,
    artifacts: Artifacts,
}

#[derive(Default)]
struct Search {
    node_limit_hit: bool,
    nodes: usize,
}

impl Search {
    fn run(&mut self, model: &MilpModel, limit: usize) -> Option<MilpSolution> {
        let sol = solve(model, limit);
        self.nodes += sol.nodes;
        match sol.status {
            SolveStatus::Optimal => Some(sol),
            SolveStatus::NodeLimit if !sol.values.is_empty() => Some(sol),
            SolveStatus::NodeLimit => {
                self.node_limit_hit = true;
                None
            }
            _ => None,
        }
    }
}

fn objective_i64(sol: &MilpSolution) -> i64 {
    sol.objective.as_ref().and_then(|o| o.to_i64()).unwrap_or(0)
}

/// `Σ i·(σ^M_i + σ^B_i)` over the given steps, numbered from 1.
fn step_objective(c: &ComposedPn, firings: &[crate::petri::FiringCount]) -> i64 {
    let b = c.blocks;
    firings
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let n: u64 = b.m_transitions().chain(b.b_transitions()).map(|t| u64::from(s.0[t])).sum();
            (i as i64 + 1) * n as i64
        })
        .sum()
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1000.0
}

fn self_loop_edge(buchi: &BuchiAutomaton, f: usize, active: &crate::alphabet::ObsSet) -> Option<usize> {
    buchi
        .edges
        .iter()
        .position(|e| e.source == f && e.target == f && e.guard.eval(active))
}

#[allow(clippy::too_many_arguments)]
fn try_candidate(
    prep: &Prepared,
    buchi: &BuchiAutomaton,
    cfg: &PlannerConfig,
    k: usize,
    f: usize,
    s0: usize,
    search: &mut Search,
    timings: &mut Timings,
) -> Result<Option<Candidate>> {
    let c = &prep.composed;
    let t0 = Instant::now();
    let prefix = prep.prefix_model(k, f, s0)?;
    let Some(psol) = search.run(&prefix.model, cfg.node_limit) else {
        timings.prefix_ms += ms(t0);
        return Ok(None);
    };
    let ptrace = prefix.trace(&psol)?;
    timings.prefix_ms += ms(t0);
    let m_end = ptrace.markings.last().cloned().unwrap_or_else(|| c.m0.clone());
    let q_end = c.quotient_marking(&m_end);
    let active = c.active_observations(&m_end);
    let praw = RawRun::from_trace(c, &ptrace);

    let t1 = Instant::now();
    let trivial = buchi.self_loop_holds(f, &active);
    let mut suffix: Option<(MilpModel, i64, RawRun)> = None;
    let mut lasso: Option<MilpModel> = None;
    let mut praw = praw;
    let mut prefix_objective = objective_i64(&psol);
    if !trivial {
        let opts = ReachOptions {
            final_quotient: Some(q_end.clone()),
            ..prep.options.clone()
        };
        let model = build_reachability_milp(c, &m_end, f, k, &opts)?;
        if let Some(ssol) = search.run(&model.model, cfg.node_limit) {
            let strace = model.trace(&ssol)?;
            suffix = Some((model.model, objective_i64(&ssol), RawRun::from_trace(c, &strace)));
        } else {
            // the prefix may have ended where no loop closes; solve both parts together
            let opts = ReachOptions {
                lasso: true,
                ..prep.options.clone()
            };
            let m0 = c.with_buchi_state(&c.m0, s0);
            let joint = build_reachability_milp(c, &m0, f, k, &opts)?;
            let Some(lsol) = search.run(&joint.model, cfg.node_limit) else {
                timings.suffix_ms += ms(t1);
                return Ok(None);
            };
            let mut trace = joint.trace(&lsol)?;
            let tail = ReachTrace {
                markings: trace.markings.split_off(2 * k),
                firings: trace.firings.split_off(2 * k),
            };
            prefix_objective = step_objective(c, &trace.firings);
            praw = RawRun::from_trace(c, &trace);
            suffix = Some((
                prefix.model.clone(),
                step_objective(c, &tail.firings),
                RawRun::from_trace(c, &tail),
            ));
            lasso = Some(joint.model);
        }
    }
    timings.suffix_ms += ms(t1);
    let trivial = suffix.is_none();

    let q0 = c.quotient_marking(&c.m0);
    let seq = compact_run(&praw, suffix.as_ref().map(|s| &s.2), &q0);
    let closure = (!trivial).then_some(seq.split_index);

    let t2 = Instant::now();
    let proj = build_projection_milp(
        &prep.rmpn,
        &prep.quotient,
        &seq.markings,
        &seq.zero_indicators,
        prep.rmpn.robot_count(),
        closure,
    )?;
    let Some(jsol) = search.run(&proj.model, cfg.node_limit) else {
        timings.projection_ms += ms(t2);
        return Ok(None);
    };
    let jtrace = proj.trace(&jsol)?;
    let tl = extract_trajectories(&prep.rmpn, &prep.robot_cells, &jtrace)?;
    timings.projection_ms += ms(t2);

    let end = tl.ticks.len() - 1;
    let loop_tick = if trivial { end } else { tl.block_start[seq.split_index] };
    let read_tick = |e: usize| if e == 0 { 0 } else { tl.sync_ticks[e - 1] };
    let name = |s: usize| buchi.states[s].clone();
    let tick_reads = |range: std::ops::Range<usize>| -> Vec<TickRead> {
        range
            .flat_map(|e| {
                seq.reads[e].iter().map(move |r| (e, *r))
            })
            .map(|(e, r)| TickRead {
                tick: read_tick(e),
                from: name(r.from),
                to: name(r.to),
                edge: r.edge,
            })
            .collect()
    };
    let prefix_reads = tick_reads(0..seq.split_index + 1);
    let (suffix_ticks, reps) = close_loop(&tl.ticks[loop_tick..])?;
    let period = end - loop_tick;
    let mut sync_points = tl.sync_ticks.clone();
    for n in 1..reps {
        sync_points.extend(tl.sync_ticks.iter().filter(|&&t| t > loop_tick).map(|t| t + n * period));
    }
    let suffix_reads = if trivial {
        let edge = self_loop_edge(buchi, f, &active)
            .ok_or_else(|| Error::Internal("self-loop guard vanished".into()))?;
        vec![TickRead {
            tick: end,
            from: name(f),
            to: name(f),
            edge,
        }]
    } else {
        let once = tick_reads(seq.split_index + 1..seq.len());
        (0..reps)
            .flat_map(|n| {
                once.iter().map(move |r| TickRead {
                    tick: r.tick + n * period,
                    ..r.clone()
                })
            })
            .collect()
    };
    let states = |start: usize, reads: &[TickRead]| -> Vec<String> {
        std::iter::once(name(start)).chain(reads.iter().map(|r| r.to.clone())).collect()
    };
    let trajectories = (0..prep.rmpn.robot_count())
        .map(|r| RobotTrajectory {
            robot: r + 1,
            prefix: tl.ticks[..=loop_tick].iter().map(|t| t[r]).collect(),
            suffix: suffix_ticks.iter().map(|t| t[r]).collect(),
        })
        .collect();
    let mut counts = prep.counts(buchi);
    counts.k = k;
    counts.prefix_variables = prefix.model.variable_count();
    counts.suffix_variables = match lasso {
        Some(_) => None,
        None => suffix.as_ref().map(|s| s.0.variable_count()),
    };
    counts.lasso_variables = lasso.as_ref().map(|m| m.variable_count());
    counts.projection_variables = proj.model.variable_count();
    counts.marking_sequence = seq.len();
    let plan = Plan {
        robots: prep.rmpn.robot_count(),
        cell_names: prep.rmpn.net.place_names().to_vec(),
        trajectories,
        loop_tick,
        sync_points,
        buchi_run: BuchiRun {
            final_state: name(f),
            prefix_states: states(s0, &prefix_reads),
            suffix_states: states(f, &suffix_reads),
            prefix_reads,
            suffix_reads,
        },
        objectives: Objectives {
            prefix: prefix_objective,
            suffix: suffix.as_ref().map(|s| s.1),
            projection: objective_i64(&jsol),
        },
        counts,
        timings: None,
    };
    let verdict = verify_plan(&plan, &prep.rmpn, buchi);
    if !verdict.accepted() {
        return Err(Error::Internal(format!(
            "planner produced an invalid plan: {}",
            verdict.failures.join("; ")
        )));
    }
    Ok(Some(Candidate {
        plan,
        artifacts: Artifacts {
            prefix: prefix.model,
            suffix: if lasso.is_some() { None } else { suffix.map(|s| s.0) },
            lasso,
            projection: proj.model,
            sequence: seq,
        },
    }))
}

/// Plans on an environment, taking robot order from its `@r` labels.
pub fn plan(env: &Environment, buchi: &BuchiAutomaton, cfg: &PlannerConfig) -> Result<PlanOutcome> {
    plan_rmpn(&build_rmpn(env), &env.robot_cells, buchi, cfg)
}

pub fn plan_rmpn(
    rmpn: &Rmpn,
    robot_cells: &[usize],
    buchi: &BuchiAutomaton,
    cfg: &PlannerConfig,
) -> Result<PlanOutcome> {
    plan_detailed(rmpn, robot_cells, buchi, cfg).map(|(o, _)| o)
}

/// Like [`plan_rmpn`], also returning the models solved for the plan.
pub fn plan_detailed(
    rmpn: &Rmpn,
    robot_cells: &[usize],
    buchi: &BuchiAutomaton,
    cfg: &PlannerConfig,
) -> Result<(PlanOutcome, Option<Artifacts>)> {
    let start = Instant::now();
    let prep = Prepared::new(rmpn, robot_cells, buchi, cfg.enabledness)?;
    let mut timings = Timings {
        build_ms: ms(start),
        ..Timings::default()
    };
    let mut search = Search::default();
    let ks = k_schedule(cfg.k_init, prep.k_cap());
    let mut tried = Vec::new();
    for &k in &ks {
        tried.push(k);
        let mut best: Option<Candidate> = None;
        'finals: for &f in &buchi.finals {
            for &s0 in &buchi.initial {
                let c = &prep.composed;
                if !graph_reaches(c, s0, f) || !graph_reaches(c, f, f) {
                    continue;
                }
                let Some(cand) = try_candidate(&prep, buchi, cfg, k, f, s0, &mut search, &mut timings)? else {
                    continue;
                };
                let better = best
                    .as_ref()
                    .is_none_or(|b| cand.plan.objectives.projection < b.plan.objectives.projection);
                if better {
                    best = Some(cand);
                }
                if !cfg.explore_all_finals {
                    break 'finals;
                }
            }
        }
        if let Some(mut cand) = best {
            cand.plan.counts.solver_nodes = search.nodes;
            timings.total_ms = ms(start);
            cand.plan.timings = Some(timings);
            return Ok((PlanOutcome::Plan(Box::new(cand.plan)), Some(cand.artifacts)));
        }
    }
    let mut message = "the formula cannot be achieved by the robots".to_string();
    if search.node_limit_hit {
        message.push_str(" (some searches stopped at the node limit)");
    }
    Ok((
        PlanOutcome::Infeasible(InfeasibleReport {
            message,
            k_tried: tried,
            node_limit_hit: search.node_limit_hit,
            solver_nodes: search.nodes,
        }),
        None,
    ))
}

/// Quotient marking of the environment's initial cells.
pub fn initial_quotient(prep: &Prepared) -> Marking {
    prep.quotient.project(&prep.rmpn.m0)
}
