//! Composition of the quotient net and the Büchi net through observation places.
//!
//! Places are ordered `P^M, P^B, P^O, P^¬O`; transitions `T^M, T^B, T^V`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, ObsSet};
use crate::buchi::BuchiPn;
use crate::error::{Error, Result};
use crate::petri::{Marking, PetriNet};
use crate::quotient::QuotientResult;

/// Sizes of the place and transition blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Blocks {
    pub quotient_places: usize,
    pub buchi_places: usize,
    pub atoms: usize,
    pub quotient_transitions: usize,
    pub clause_transitions: usize,
    pub virtual_transitions: usize,
}

impl Blocks {
    pub fn place_m(&self, k: usize) -> usize {
        k
    }

    pub fn place_b(&self, s: usize) -> usize {
        self.quotient_places + s
    }

    pub fn place_o(&self, i: usize) -> usize {
        self.quotient_places + self.buchi_places + i
    }

    pub fn place_not_o(&self, i: usize) -> usize {
        self.quotient_places + self.buchi_places + self.atoms + i
    }

    pub fn trans_m(&self, t: usize) -> usize {
        t
    }

    pub fn trans_b(&self, t: usize) -> usize {
        self.quotient_transitions + t
    }

    pub fn trans_v(&self, t: usize) -> usize {
        self.quotient_transitions + self.clause_transitions + t
    }

    pub fn place_count(&self) -> usize {
        self.quotient_places + self.buchi_places + 2 * self.atoms
    }

    pub fn transition_count(&self) -> usize {
        self.quotient_transitions + self.clause_transitions + self.virtual_transitions
    }

    pub fn m_places(&self) -> std::ops::Range<usize> {
        0..self.quotient_places
    }

    pub fn b_places(&self) -> std::ops::Range<usize> {
        self.quotient_places..self.quotient_places + self.buchi_places
    }

    pub fn m_transitions(&self) -> std::ops::Range<usize> {
        0..self.quotient_transitions
    }

    pub fn b_transitions(&self) -> std::ops::Range<usize> {
        self.quotient_transitions..self.quotient_transitions + self.clause_transitions
    }

    pub fn v_transitions(&self) -> std::ops::Range<usize> {
        let start = self.quotient_transitions + self.clause_transitions;
        start..start + self.virtual_transitions
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComposedPn {
    pub net: PetriNet,
    pub m0: Marking,
    pub blocks: Blocks,
    pub robot_count: u32,
    pub alphabet: Alphabet,
    /// Observation of each quotient place.
    pub quotient_obs: Vec<ObsSet>,
    pub buchi: BuchiPn,
}

impl ComposedPn {
    /// `{ y_i : m[p_i^O] > 0 }`.
    pub fn active_observations(&self, m: &Marking) -> ObsSet {
        self.alphabet
            .atoms()
            .iter()
            .enumerate()
            .filter(|(i, _)| m.0[self.blocks.place_o(*i)] > 0)
            .map(|(_, &a)| a)
            .collect()
    }

    /// Observation computed from the quotient block of `m` through the observation map.
    pub fn quotient_observation(&self, m: &Marking) -> ObsSet {
        self.blocks
            .m_places()
            .filter(|&k| m.0[k] > 0)
            .flat_map(|k| self.quotient_obs[k].iter().copied())
            .collect()
    }

    pub fn quotient_marking(&self, m: &Marking) -> Marking {
        Marking(m.0[self.blocks.m_places()].to_vec())
    }

    /// Büchi state marked in `m`, if exactly one is.
    pub fn buchi_state(&self, m: &Marking) -> Option<usize> {
        let marked: Vec<usize> = self
            .blocks
            .b_places()
            .filter(|&p| m.0[p] > 0)
            .map(|p| p - self.blocks.quotient_places)
            .collect();
        (marked.len() == 1).then(|| marked[0])
    }

    /// Copy of `m0` with the Büchi block replaced by a single token on `state`.
    pub fn with_buchi_state(&self, m: &Marking, state: usize) -> Marking {
        let mut out = m.clone();
        for p in self.blocks.b_places() {
            out.0[p] = 0;
        }
        out.0[self.blocks.place_b(state)] = 1;
        out
    }

    /// Text edge list: one line per arc, `place -> transition (w)` or `transition -> place (w)`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "places {} transitions {}",
            self.net.place_count(),
            self.net.transition_count()
        );
        for t in 0..self.net.transition_count() {
            for p in 0..self.net.place_count() {
                let w = self.net.pre(p, t);
                if w > 0 {
                    let _ = writeln!(
                        out,
                        "{} -> {} ({w})",
                        self.net.place_name(p),
                        self.net.transition_name(t)
                    );
                }
            }
            for p in 0..self.net.place_count() {
                let w = self.net.post(p, t);
                if w > 0 {
                    let _ = writeln!(
                        out,
                        "{} -> {} ({w})",
                        self.net.transition_name(t),
                        self.net.place_name(p)
                    );
                }
            }
        }
        out
    }
}

/// Builds the composed net.
///
/// For a quotient transition whose source and target both carry `y_i`, the
/// entering and leaving arcs on `p_i^O` and `p_i^¬O` cancel and are left out.
pub fn compose(
    q: &QuotientResult,
    b: &BuchiPn,
    robot_count: u32,
    alphabet: &Alphabet,
) -> Result<ComposedPn> {
    if robot_count == 0 {
        return Err(Error::contract("robot count must be at least 1"));
    }
    if &q.qnet.alphabet != alphabet {
        return Err(Error::contract("quotient alphabet differs from Y"));
    }
    for c in &b.clause_of {
        if let Some(a) = c.positive.iter().chain(&c.negative).find(|a| !alphabet.contains(**a)) {
            return Err(Error::contract(format!("guard atom {a} is not in Y")));
        }
    }
    if q.qnet.m0.total() != u64::from(robot_count) {
        return Err(Error::contract("initial quotient marking does not hold |R| tokens"));
    }
    let qn = &q.qnet.net;
    let blocks = Blocks {
        quotient_places: qn.place_count(),
        buchi_places: b.net.place_count(),
        atoms: alphabet.len(),
        quotient_transitions: qn.transition_count(),
        clause_transitions: b.clause_transition_count(),
        virtual_transitions: b.virtual_transition_count(),
    };
    let mut places: Vec<String> = qn.place_names().to_vec();
    places.extend(b.net.place_names().iter().map(|s| format!("pB:{s}")));
    places.extend(alphabet.atoms().iter().map(|a| format!("pO:{a}")));
    places.extend(alphabet.atoms().iter().map(|a| format!("pNotO:{a}")));
    let mut transitions: Vec<String> = qn.transition_names().to_vec();
    transitions.extend(b.net.transition_names().iter().cloned());
    let mut net = PetriNet::new(places, transitions);

    for p in 0..qn.place_count() {
        for t in 0..qn.transition_count() {
            net.set_pre(blocks.place_m(p), blocks.trans_m(t), qn.pre(p, t));
            net.set_post(blocks.place_m(p), blocks.trans_m(t), qn.post(p, t));
        }
    }
    for s in 0..b.net.place_count() {
        for t in 0..b.net.transition_count() {
            net.set_pre(blocks.place_b(s), blocks.trans_b(t), b.net.pre(s, t));
            net.set_post(blocks.place_b(s), blocks.trans_b(t), b.net.post(s, t));
        }
    }

    let obs = &q.qnet.obs;
    for (i, &y) in alphabet.atoms().iter().enumerate() {
        let o = blocks.place_o(i);
        let no = blocks.place_not_o(i);
        for t in 0..qn.transition_count() {
            let from = (0..qn.place_count()).find(|&p| qn.pre(p, t) > 0).unwrap();
            let to = (0..qn.place_count()).find(|&p| qn.post(p, t) > 0).unwrap();
            let leaves = obs[from].contains(&y);
            let enters = obs[to].contains(&y);
            let tc = blocks.trans_m(t);
            if enters && !leaves {
                net.set_post(o, tc, 1);
                net.set_pre(no, tc, 1);
            } else if leaves && !enters {
                net.set_pre(o, tc, 1);
                net.set_post(no, tc, 1);
            }
        }
        for (t, c) in b.clause_of.iter().enumerate() {
            let tc = blocks.trans_b(t);
            if c.positive.contains(&y) {
                net.set_pre(o, tc, 1);
                net.set_post(o, tc, 1);
            }
            if c.negative.contains(&y) {
                net.set_pre(no, tc, robot_count);
                net.set_post(no, tc, robot_count);
            }
        }
    }

    let mut m0 = Marking::zeros(blocks.place_count());
    for k in 0..qn.place_count() {
        m0.0[blocks.place_m(k)] = q.qnet.m0.0[k];
    }
    for s in 0..b.net.place_count() {
        m0.0[blocks.place_b(s)] = b.m0.0[s];
    }
    for (i, y) in alphabet.atoms().iter().enumerate() {
        let inside: u32 = (0..qn.place_count())
            .filter(|&k| obs[k].contains(y))
            .map(|k| q.qnet.m0.0[k])
            .sum();
        m0.0[blocks.place_o(i)] = inside;
        m0.0[blocks.place_not_o(i)] = robot_count - inside;
    }

    Ok(ComposedPn {
        net,
        m0,
        blocks,
        robot_count,
        alphabet: alphabet.clone(),
        quotient_obs: obs.clone(),
        buchi: b.clone(),
    })
}
