use serde::{Deserialize, Serialize};

use super::formula::{to_dnf, Clause};
use super::BuchiAutomaton;
use crate::petri::{Marking, PetriNet};

/// Petri net of a Büchi automaton. Transitions are the clause transitions
/// `T^B` (edge order, then clause order) followed by the virtual self-loops `T^V`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuchiPn {
    pub net: PetriNet,
    pub m0: Marking,
    /// Clause of each `T^B` transition.
    pub clause_of: Vec<Clause>,
    /// `(source, target)` state of each `T^B` transition.
    pub edge_of: Vec<(usize, usize)>,
    /// Index of the automaton edge behind each `T^B` transition.
    pub edge_index: Vec<usize>,
    /// Final state of each `T^V` transition.
    pub virtual_of: Vec<usize>,
}

impl BuchiPn {
    pub fn clause_transition_count(&self) -> usize {
        self.clause_of.len()
    }

    pub fn virtual_transition_count(&self) -> usize {
        self.virtual_of.len()
    }
}

pub fn build_buchi_pn(b: &BuchiAutomaton) -> BuchiPn {
    let mut net = PetriNet::new(b.states.clone(), vec![]);
    let mut clause_of = Vec::new();
    let mut edge_of = Vec::new();
    let mut edge_index = Vec::new();
    for (ei, e) in b.edges.iter().enumerate() {
        for (ci, c) in to_dnf(&e.guard).into_iter().enumerate() {
            let t = net.add_transition(format!(
                "tB{}:{}->{}#{}",
                clause_of.len() + 1,
                b.states[e.source],
                b.states[e.target],
                ci + 1
            ));
            net.set_pre(e.source, t, 1);
            net.set_post(e.target, t, 1);
            clause_of.push(c);
            edge_of.push((e.source, e.target));
            edge_index.push(ei);
        }
    }
    let mut virtual_of = Vec::new();
    for &f in &b.finals {
        let t = net.add_transition(format!("tV:{}", b.states[f]));
        net.set_pre(f, t, 1);
        net.set_post(f, t, 1);
        virtual_of.push(f);
    }
    let mut m0 = Marking::zeros(b.states.len());
    for &s in &b.initial {
        m0.0[s] = 1;
    }
    BuchiPn {
        net,
        m0,
        clause_of,
        edge_of,
        edge_index,
        virtual_of,
    }
}
