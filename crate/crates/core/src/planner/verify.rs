//! Independent check of a plan against the environment net and the automaton.

use std::collections::HashSet;

use super::plan_doc::{Plan, TickRead};
use crate::alphabet::ObsSet;
use crate::buchi::BuchiAutomaton;
use crate::environment::Rmpn;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub failures: Vec<String>,
}

impl Verdict {
    pub fn accepted(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Checker<'a> {
    rmpn: &'a Rmpn,
    buchi: &'a BuchiAutomaton,
    failures: Vec<String>,
}

impl Checker<'_> {
    fn fail(&mut self, msg: String) {
        self.failures.push(msg);
    }

    fn state(&mut self, name: &str) -> Option<usize> {
        let s = self.buchi.state_index(name);
        if s.is_none() {
            self.fail(format!("unknown Büchi state `{name}`"));
        }
        s
    }

    fn observation(&self, cells: &[usize]) -> ObsSet {
        cells
            .iter()
            .flat_map(|&c| self.rmpn.obs[c].iter().copied())
            .collect()
    }

    /// Checks guards and chaining of `reads`, starting from `start`. Returns the last state.
    fn reads(&mut self, label: &str, reads: &[TickRead], start: usize, obs_at: &dyn Fn(usize) -> Option<ObsSet>) -> Option<usize> {
        let mut cur = start;
        let mut last_tick = 0;
        for (n, r) in reads.iter().enumerate() {
            let (Some(from), Some(to)) = (self.state(&r.from), self.state(&r.to)) else {
                return None;
            };
            if from != cur {
                self.fail(format!("{label} read {n} starts in {} but the run is in {}", r.from, self.buchi.states[cur]));
            }
            if r.tick < last_tick {
                self.fail(format!("{label} read {n} goes back in time"));
            }
            last_tick = r.tick;
            let Some(edge) = self.buchi.edges.get(r.edge) else {
                self.fail(format!("{label} read {n} names a missing edge"));
                return None;
            };
            if edge.source != from || edge.target != to {
                self.fail(format!("{label} read {n} does not match edge {}", r.edge));
            }
            match obs_at(r.tick) {
                None => self.fail(format!("{label} read {n} at tick {} is outside the plan", r.tick)),
                Some(obs) => {
                    if !edge.guard.eval(&obs) {
                        self.fail(format!(
                            "{label} read {n} at tick {}: guard {} is false on {}",
                            r.tick,
                            edge.guard,
                            crate::alphabet::format_obs(&obs)
                        ));
                    }
                }
            }
            cur = to;
        }
        Some(cur)
    }
}

/// Start index of every maximal run of equal values.
fn segment_starts<T: PartialEq>(xs: &[T]) -> Vec<usize> {
    (0..xs.len()).filter(|&i| i == 0 || xs[i] != xs[i - 1]).collect()
}

pub fn verify_plan(plan: &Plan, rmpn: &Rmpn, buchi: &BuchiAutomaton) -> Verdict {
    let mut ck = Checker {
        rmpn,
        buchi,
        failures: Vec::new(),
    };
    let robots = rmpn.robot_count();
    if plan.robots != robots || plan.trajectories.len() != robots {
        ck.fail(format!("plan has {} trajectories for {robots} robots", plan.trajectories.len()));
        return Verdict { failures: ck.failures };
    }
    let places = rmpn.net.place_count();
    for tr in &plan.trajectories {
        if tr.prefix.len() != plan.loop_tick + 1 || tr.suffix.is_empty() {
            ck.fail(format!("robot {} trajectory does not match loop tick {}", tr.robot, plan.loop_tick));
            return Verdict { failures: ck.failures };
        }
        if tr.prefix.iter().chain(&tr.suffix).any(|&c| c >= places) {
            ck.fail(format!("robot {} visits an unknown cell", tr.robot));
            return Verdict { failures: ck.failures };
        }
        if tr.prefix.last() != tr.suffix.first() {
            ck.fail(format!("robot {} suffix does not start where its prefix ends", tr.robot));
        }
        if tr.suffix.first() != tr.suffix.last() {
            ck.fail(format!("robot {} suffix does not return to its start", tr.robot));
        }
    }
    let period = plan.period();
    if plan.trajectories.iter().any(|t| t.suffix.len() != period + 1) {
        ck.fail("suffix lengths differ between robots".into());
        return Verdict { failures: ck.failures };
    }
    let tl = plan.timeline();

    let mut start = vec![0u32; places];
    for &c in &tl[0] {
        start[c] += 1;
    }
    if start != rmpn.m0.0 {
        ck.fail("initial cells do not match the environment".into());
    }
    let adjacent: HashSet<(usize, usize)> = (0..rmpn.net.transition_count()).map(|t| rmpn.endpoints(t)).collect();
    for (t, w) in tl.windows(2).enumerate() {
        for r in 0..robots {
            let (a, b) = (w[0][r], w[1][r]);
            if a != b && !adjacent.contains(&(a, b)) {
                ck.fail(format!("robot {} jumps from {} to {} at tick {}", r + 1, rmpn.net.place_name(a), rmpn.net.place_name(b), t + 1));
            }
            for s in 0..robots {
                if s != r && a != b && w[0][s] == b && w[1][s] == a {
                    ck.fail(format!("robots {} and {} swap cells at tick {}", r + 1, s + 1, t + 1));
                }
            }
        }
    }
    for (t, cells) in tl.iter().enumerate() {
        let distinct: HashSet<usize> = cells.iter().copied().collect();
        if distinct.len() != cells.len() {
            ck.fail(format!("two robots share a cell at tick {t}"));
        }
    }

    let obs: Vec<ObsSet> = tl.iter().map(|c| ck.observation(c)).collect();
    let end = plan.loop_tick + period;
    let obs_at = |t: usize| obs.get(t).cloned();
    let run = &plan.buchi_run;
    let Some(f) = ck.state(&run.final_state) else {
        return Verdict { failures: ck.failures };
    };
    if !buchi.is_final(f) {
        ck.fail(format!("{} is not a final state", run.final_state));
    }

    // prefix
    let start_state = match run.prefix_reads.first() {
        Some(r) => ck.state(&r.from),
        None => run.prefix_states.first().and_then(|s| ck.state(s)),
    };
    if let Some(s0) = start_state {
        if !buchi.initial.contains(&s0) {
            ck.fail(format!("run starts in {}, which is not initial", buchi.states[s0]));
        }
        if run.prefix_reads.iter().any(|r| r.tick > plan.loop_tick) {
            ck.fail("prefix read after the loop tick".into());
        }
        if ck.reads("prefix", &run.prefix_reads, s0, &obs_at) != Some(f) {
            ck.fail("prefix does not end in the final state".into());
        }
    } else {
        ck.fail("prefix run is empty".into());
    }

    // suffix
    if run.suffix_reads.is_empty() {
        ck.fail("suffix has no reads".into());
    }
    if run.suffix_reads.iter().any(|r| r.tick < plan.loop_tick || r.tick > end) {
        ck.fail("suffix read outside the loop".into());
    }
    if ck.reads("suffix", &run.suffix_reads, f, &obs_at) != Some(f) {
        ck.fail("suffix does not return to the final state".into());
    }

    // every observation segment must be read; the initial one may be skipped
    let prefix_obs = &obs[..=plan.loop_tick];
    let starts = segment_starts(prefix_obs);
    for (n, &s) in starts.iter().enumerate() {
        let e = starts.get(n + 1).copied().unwrap_or(plan.loop_tick + 1);
        let read = run.prefix_reads.iter().any(|r| r.tick >= s && r.tick < e);
        if !read && n > 0 {
            ck.fail(format!("observation {} from tick {s} is never read in the prefix", crate::alphabet::format_obs(&obs[s])));
        }
    }
    if period > 0 {
        let cycle = &obs[plan.loop_tick..end];
        let pos = |t: usize| (t - plan.loop_tick) % period;
        let boundaries: Vec<usize> = (0..period).filter(|&i| cycle[i] != cycle[(i + period - 1) % period]).collect();
        if boundaries.is_empty() {
            if run.suffix_reads.is_empty() {
                ck.fail("loop observation is never read".into());
            }
        } else {
            for (n, &s) in boundaries.iter().enumerate() {
                let e = boundaries[(n + 1) % boundaries.len()];
                let inside = |p: usize| {
                    if s < e {
                        p >= s && p < e
                    } else {
                        p >= s || p < e
                    }
                };
                if !run.suffix_reads.iter().any(|r| inside(pos(r.tick))) {
                    ck.fail(format!("loop observation {} at tick {} is never read", crate::alphabet::format_obs(&cycle[s]), plan.loop_tick + s));
                }
            }
        }
    }
    Verdict { failures: ck.failures }
}
