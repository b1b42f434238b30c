//! Place/transition nets with dense incidence matrices.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Token count per place.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Marking(pub Vec<u32>);

impl Marking {
    pub fn zeros(len: usize) -> Self {
        Marking(vec![0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&v| u64::from(v)).sum()
    }

    pub fn get(&self, place: usize) -> u32 {
        self.0[place]
    }
}

/// Number of firings per transition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiringCount(pub Vec<u32>);

impl FiringCount {
    pub fn zeros(len: usize) -> Self {
        FiringCount(vec![0; len])
    }

    pub fn unit(len: usize, transition: usize) -> Self {
        let mut v = vec![0; len];
        v[transition] = 1;
        FiringCount(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&v| u64::from(v)).sum()
    }
}

impl std::ops::Add for &FiringCount {
    type Output = FiringCount;

    fn add(self, rhs: &FiringCount) -> FiringCount {
        FiringCount(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

/// A Petri net `⟨P, T, Pre, Post⟩`. Matrices are indexed `[place][transition]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PetriNet {
    places: Vec<String>,
    transitions: Vec<String>,
    pre: Vec<Vec<u32>>,
    post: Vec<Vec<u32>>,
}

impl PetriNet {
    /// Net with the given names and no arcs.
    pub fn new(places: Vec<String>, transitions: Vec<String>) -> Self {
        let rows = places.len();
        let cols = transitions.len();
        PetriNet {
            places,
            transitions,
            pre: vec![vec![0; cols]; rows],
            post: vec![vec![0; cols]; rows],
        }
    }

    pub fn from_matrices(
        places: Vec<String>,
        transitions: Vec<String>,
        pre: Vec<Vec<u32>>,
        post: Vec<Vec<u32>>,
    ) -> Result<Self> {
        let shape_ok = |m: &Vec<Vec<u32>>| {
            m.len() == places.len() && m.iter().all(|row| row.len() == transitions.len())
        };
        if !shape_ok(&pre) || !shape_ok(&post) {
            return Err(Error::contract(format!(
                "incidence matrices must be {}x{}",
                places.len(),
                transitions.len()
            )));
        }
        Ok(PetriNet {
            places,
            transitions,
            pre,
            post,
        })
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn place_name(&self, place: usize) -> &str {
        &self.places[place]
    }

    pub fn transition_name(&self, transition: usize) -> &str {
        &self.transitions[transition]
    }

    pub fn place_names(&self) -> &[String] {
        &self.places
    }

    pub fn transition_names(&self) -> &[String] {
        &self.transitions
    }

    pub fn pre(&self, place: usize, transition: usize) -> u32 {
        self.pre[place][transition]
    }

    pub fn post(&self, place: usize, transition: usize) -> u32 {
        self.post[place][transition]
    }

    pub fn set_pre(&mut self, place: usize, transition: usize, weight: u32) {
        self.pre[place][transition] = weight;
    }

    pub fn set_post(&mut self, place: usize, transition: usize, weight: u32) {
        self.post[place][transition] = weight;
    }

    /// Appends a transition with no arcs and returns its index.
    pub fn add_transition(&mut self, name: impl Into<String>) -> usize {
        self.transitions.push(name.into());
        for row in self.pre.iter_mut().chain(self.post.iter_mut()) {
            row.push(0);
        }
        self.transitions.len() - 1
    }

    /// Input places of a transition (places with a nonzero `Pre` entry).
    pub fn preset(&self, transition: usize) -> Vec<usize> {
        (0..self.places.len())
            .filter(|&p| self.pre[p][transition] > 0)
            .collect()
    }

    /// Output places of a transition.
    pub fn postset(&self, transition: usize) -> Vec<usize> {
        (0..self.places.len())
            .filter(|&p| self.post[p][transition] > 0)
            .collect()
    }

    /// `C = Post - Pre`.
    pub fn token_flow(&self) -> Vec<Vec<i64>> {
        self.pre
            .iter()
            .zip(&self.post)
            .map(|(pre, post)| {
                pre.iter()
                    .zip(post)
                    .map(|(&a, &b)| i64::from(b) - i64::from(a))
                    .collect()
            })
            .collect()
    }

    fn check_dims(&self, m: &Marking, firing: &FiringCount) -> Result<()> {
        if m.len() != self.places.len() || firing.len() != self.transitions.len() {
            return Err(Error::contract(format!(
                "marking/firing dimensions {}/{} do not match net {}x{}",
                m.len(),
                firing.len(),
                self.places.len(),
                self.transitions.len()
            )));
        }
        Ok(())
    }

    /// True iff `m - Pre·firing >= 0`.
    pub fn is_enabled(&self, m: &Marking, firing: &FiringCount) -> Result<bool> {
        self.check_dims(m, firing)?;
        Ok(self.pre.iter().zip(&m.0).all(|(row, &tokens)| {
            let demand: u64 = row
                .iter()
                .zip(&firing.0)
                .map(|(&w, &n)| u64::from(w) * u64::from(n))
                .sum();
            demand <= u64::from(tokens)
        }))
    }

    /// State equation `m + C·firing`. Only nonnegativity of the result is checked.
    pub fn fire(&self, m: &Marking, firing: &FiringCount) -> Result<Marking> {
        self.check_dims(m, firing)?;
        let mut out = Vec::with_capacity(m.len());
        for (p, &tokens) in m.0.iter().enumerate() {
            let mut v = i64::from(tokens);
            for (t, &n) in firing.0.iter().enumerate() {
                if n != 0 {
                    v += (i64::from(self.post[p][t]) - i64::from(self.pre[p][t])) * i64::from(n);
                }
            }
            if v < 0 {
                return Err(Error::InfeasibleFiring {
                    place: self.places[p].clone(),
                    tokens: v,
                });
            }
            out.push(v as u32);
        }
        Ok(Marking(out))
    }

    /// Fires one transition if it is enabled.
    pub fn fire_single(&self, m: &Marking, transition: usize) -> Option<Marking> {
        let unit = FiringCount::unit(self.transitions.len(), transition);
        match self.is_enabled(m, &unit) {
            Ok(true) => self.fire(m, &unit).ok(),
            _ => None,
        }
    }
}

/// Result of a bounded breadth-first exploration.
#[derive(Debug, Clone)]
pub struct Reachability {
    pub markings: Vec<Marking>,
    /// `(parent marking index, fired transition)` for every non-root marking.
    pub parent: Vec<Option<(usize, usize)>>,
}

impl Reachability {
    pub fn contains(&self, m: &Marking) -> bool {
        self.markings.contains(m)
    }

    /// Transition sequence from the root to `markings[index]`.
    pub fn firing_sequence(&self, mut index: usize) -> Vec<usize> {
        let mut seq = Vec::new();
        while let Some((parent, t)) = self.parent[index] {
            seq.push(t);
            index = parent;
        }
        seq.reverse();
        seq
    }
}

/// Exact set of markings reachable with at most `depth_bound` single firings.
pub fn reachable_markings(
    net: &PetriNet,
    m0: &Marking,
    depth_bound: usize,
    node_cap: usize,
) -> Result<Reachability> {
    if m0.len() != net.place_count() {
        return Err(Error::contract("initial marking length differs from |P|"));
    }
    let mut markings = vec![m0.clone()];
    let mut parent = vec![None];
    let mut index: HashMap<Marking, usize> = HashMap::from([(m0.clone(), 0)]);
    let mut queue = VecDeque::from([(0usize, 0usize)]);
    while let Some((current, depth)) = queue.pop_front() {
        if depth == depth_bound {
            continue;
        }
        for t in 0..net.transition_count() {
            let Some(next) = net.fire_single(&markings[current], t) else {
                continue;
            };
            if index.contains_key(&next) {
                continue;
            }
            if markings.len() >= node_cap {
                return Err(Error::OracleOverflow { cap: node_cap });
            }
            index.insert(next.clone(), markings.len());
            markings.push(next);
            parent.push(Some((current, t)));
            queue.push_back((markings.len() - 1, depth + 1));
        }
    }
    Ok(Reachability { markings, parent })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> PetriNet {
        // p0 <-> p1 <-> ... state machine
        let places = (0..n).map(|i| format!("p{i}")).collect();
        let mut net = PetriNet::new(places, vec![]);
        for i in 0..n.saturating_sub(1) {
            let t = net.add_transition(format!("t{i}f"));
            net.set_pre(i, t, 1);
            net.set_post(i + 1, t, 1);
            let t = net.add_transition(format!("t{i}b"));
            net.set_pre(i + 1, t, 1);
            net.set_post(i, t, 1);
        }
        net
    }

    #[test]
    fn self_loop_has_zero_flow() {
        let mut net = PetriNet::new(vec!["p".into()], vec![]);
        let t = net.add_transition("t");
        net.set_pre(0, t, 1);
        net.set_post(0, t, 1);
        assert_eq!(net.token_flow(), vec![vec![0]]);
    }

    #[test]
    fn state_machine_move_column() {
        let net = line(2);
        let c = net.token_flow();
        assert_eq!((c[0][0], c[1][0]), (-1, 1));
    }

    #[test]
    fn enabledness_and_firing() {
        let net = line(2);
        let t = FiringCount::unit(2, 0);
        assert!(net.is_enabled(&Marking(vec![1, 0]), &t).unwrap());
        assert!(!net.is_enabled(&Marking(vec![0, 1]), &t).unwrap());
        assert_eq!(net.fire(&Marking(vec![1, 0]), &t).unwrap(), Marking(vec![0, 1]));
        let twice = FiringCount(vec![2, 0]);
        assert!(net.is_enabled(&Marking(vec![2, 0]), &twice).unwrap());
        assert!(!net.is_enabled(&Marking(vec![1, 0]), &twice).unwrap());
        let zero = FiringCount::zeros(2);
        assert_eq!(net.fire(&Marking(vec![1, 0]), &zero).unwrap(), Marking(vec![1, 0]));
    }

    #[test]
    fn negative_result_is_rejected() {
        let net = line(2);
        let err = net.fire(&Marking(vec![0, 0]), &FiringCount::unit(2, 0));
        assert!(matches!(err, Err(Error::InfeasibleFiring { .. })));
    }

    #[test]
    fn dimension_mismatch_is_contract_error() {
        let net = line(2);
        let err = net.is_enabled(&Marking(vec![1]), &FiringCount::unit(2, 0));
        assert!(matches!(err, Err(Error::Contract(_))));
    }

    #[test]
    fn disjoint_moves_fire_together() {
        let net = line(4);
        // robots at p0 and p2, move p0->p1 (t0f = 0) and p2->p3 (t2f = 4)
        let m = Marking(vec![1, 0, 1, 0]);
        let both = FiringCount(vec![1, 0, 0, 0, 1, 0]);
        let together = net.fire(&m, &both).unwrap();
        let seq = net
            .fire(&net.fire(&m, &FiringCount::unit(6, 0)).unwrap(), &FiringCount::unit(6, 4))
            .unwrap();
        assert_eq!(together, seq);
        assert_eq!(together, Marking(vec![0, 1, 0, 1]));
    }

    #[test]
    fn reachability_depths() {
        let net = line(2);
        let m0 = Marking(vec![1, 0]);
        let r0 = reachable_markings(&net, &m0, 0, 100).unwrap();
        assert_eq!(r0.markings, vec![m0.clone()]);
        let r1 = reachable_markings(&net, &m0, 1, 100).unwrap();
        assert_eq!(r1.markings.len(), 2);
        assert!(r1.contains(&Marking(vec![0, 1])));
    }

    #[test]
    fn node_cap_overflow() {
        let net = line(6);
        let m0 = Marking(vec![1, 0, 0, 0, 0, 0]);
        assert!(matches!(
            reachable_markings(&net, &m0, 10, 3),
            Err(Error::OracleOverflow { cap: 3 })
        ));
    }

    #[test]
    fn parent_chain_replays() {
        let net = line(5);
        let m0 = Marking(vec![1, 0, 0, 0, 0]);
        let r = reachable_markings(&net, &m0, 4, 100).unwrap();
        for (i, m) in r.markings.iter().enumerate() {
            let mut cur = m0.clone();
            for t in r.firing_sequence(i) {
                cur = net.fire_single(&cur, t).expect("replay step enabled");
            }
            assert_eq!(&cur, m);
        }
    }
}
