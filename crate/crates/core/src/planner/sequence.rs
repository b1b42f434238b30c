use serde::{Deserialize, Serialize};

use crate::compose::ComposedPn;
use crate::milp::ReachTrace;
use crate::petri::Marking;

/// One Büchi transition fired by the reachability solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Read {
    pub from: usize,
    pub to: usize,
    /// Index of the automaton edge whose clause was used.
    pub edge: usize,
}

/// Quotient markings visited by a reachability solution, one entry per odd
/// step, with the Büchi read that follows it (`None` for a virtual step).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRun {
    pub markings: Vec<Marking>,
    pub reads: Vec<Option<Read>>,
}

impl RawRun {
    pub fn from_trace(c: &ComposedPn, trace: &ReachTrace) -> Self {
        let b = c.blocks;
        let mut markings = Vec::new();
        let mut reads = Vec::new();
        for (i, (m, s)) in trace.markings.iter().zip(&trace.firings).enumerate() {
            if i % 2 == 0 {
                markings.push(c.quotient_marking(m));
            } else {
                let fired = b.b_transitions().find(|&t| s.0[t] > 0);
                reads.push(fired.map(|t| {
                    let local = t - b.quotient_transitions;
                    let (from, to) = c.buchi.edge_of[local];
                    Read {
                        from,
                        to,
                        edge: c.buchi.edge_index[local],
                    }
                }));
            }
        }
        RawRun { markings, reads }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkingSequence {
    pub markings: Vec<Marking>,
    /// `zero_indicators[i][q] = 1` iff `markings[i][q] = 0`.
    pub zero_indicators: Vec<Vec<u8>>,
    /// Index of the marking that ends the prefix.
    pub split_index: usize,
    /// Büchi reads made on each marking, in order.
    pub reads: Vec<Vec<Read>>,
}

impl MarkingSequence {
    pub fn len(&self) -> usize {
        self.markings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markings.is_empty()
    }
}

fn zeros(m: &Marking) -> Vec<u8> {
    m.0.iter().map(|&v| u8::from(v == 0)).collect()
}

/// Prepends `m0` and removes successive duplicates. The result ends the prefix.
pub fn compact_marking_sequence(raw: &[Marking], m0: &Marking) -> MarkingSequence {
    let reads = vec![None; raw.len()];
    compact_run(&RawRun { markings: raw.to_vec(), reads }, None, m0)
}

/// Compacts a prefix run and an optional suffix run into one sequence. The
/// suffix starts a new element even when its first marking repeats the last
/// prefix marking.
pub fn compact_run(prefix: &RawRun, suffix: Option<&RawRun>, m0: &Marking) -> MarkingSequence {
    let mut markings = vec![m0.clone()];
    let mut reads: Vec<Vec<Read>> = vec![Vec::new()];
    let mut push = |m: &Marking, r: Option<Read>, force: bool, markings: &mut Vec<Marking>| {
        if force || markings.last() != Some(m) {
            markings.push(m.clone());
            reads.push(Vec::new());
        }
        if let Some(r) = r {
            reads.last_mut().unwrap().push(r);
        }
    };
    for (m, r) in prefix.markings.iter().zip(&prefix.reads) {
        push(m, *r, false, &mut markings);
    }
    let split_index = markings.len() - 1;
    if let Some(s) = suffix {
        for (i, (m, r)) in s.markings.iter().zip(&s.reads).enumerate() {
            push(m, *r, i == 0, &mut markings);
        }
    }
    let zero_indicators = markings.iter().map(zeros).collect();
    MarkingSequence {
        markings,
        zero_indicators,
        split_index,
        reads,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: &[u32]) -> Marking {
        Marking(v.to_vec())
    }

    #[test]
    fn repeated_marking_collapses() {
        let a = m(&[0, 1]);
        let s = compact_marking_sequence(&[a.clone(), a.clone(), a.clone()], &m(&[1, 0]));
        assert_eq!(s.markings, vec![m(&[1, 0]), a]);
        assert_eq!(s.split_index, 1);
    }

    #[test]
    fn inner_duplicates_collapse() {
        let (a, b, c) = (m(&[1, 0, 0]), m(&[0, 1, 0]), m(&[0, 0, 1]));
        let m0 = m(&[2, 0, 0]);
        let s = compact_marking_sequence(&[a.clone(), b.clone(), b.clone(), c.clone()], &m0);
        assert_eq!(s.markings, vec![m0, a, b, c]);
        assert_eq!(s.zero_indicators[2], vec![1, 0, 1]);
    }

    #[test]
    fn first_marking_equal_to_m0_is_merged() {
        let m0 = m(&[1, 0]);
        let s = compact_marking_sequence(&[m0.clone(), m(&[0, 1])], &m0);
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn boundary_is_kept_and_reads_follow_markings() {
        let (a, b) = (m(&[1, 0]), m(&[0, 1]));
        let r = |from, to| Some(Read { from, to, edge: 0 });
        let prefix = RawRun {
            markings: vec![b.clone(), b.clone()],
            reads: vec![r(0, 1), None],
        };
        let suffix = RawRun {
            markings: vec![b.clone(), a.clone(), b.clone()],
            reads: vec![r(1, 2), r(2, 2), r(2, 1)],
        };
        let s = compact_run(&prefix, Some(&suffix), &a);
        assert_eq!(s.markings, vec![a.clone(), b.clone(), b.clone(), a, b]);
        assert_eq!(s.split_index, 1);
        assert_eq!(s.reads[1].len(), 1);
        assert_eq!(s.reads[2][0].from, 1);
        assert!(s.reads[0].is_empty());
    }
}
