//! Fusion of adjacent same-observation places.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::environment::Rmpn;
use crate::petri::{Marking, PetriNet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientResult {
    pub qnet: Rmpn,
    /// `Pr[k][p] = 1` iff original place `p` was fused into quotient place `k`.
    pub projection: Vec<Vec<u8>>,
}

impl QuotientResult {
    /// `Pr · m`.
    pub fn project(&self, m: &Marking) -> Marking {
        Marking(
            self.projection
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(&m.0)
                        .filter(|(&r, _)| r == 1)
                        .map(|(_, &v)| v)
                        .sum()
                })
                .collect(),
        )
    }

    /// Original places fused into quotient place `k`, ascending.
    pub fn members(&self, k: usize) -> Vec<usize> {
        self.projection[k]
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == 1)
            .map(|(p, _)| p)
            .collect()
    }

    /// Quotient place holding original place `p`.
    pub fn class_of(&self, p: usize) -> usize {
        self.projection
            .iter()
            .position(|row| row[p] == 1)
            .expect("every column of the projection has one entry")
    }
}

/// Quotient of an RMPN. The pair to fuse is always the lowest `(i, j)` with
/// `i < j`; place `i` is folded into place `j` and its row removed, so quotient
/// places end up ordered by their highest original member.
pub fn quotient(rmpn: &Rmpn) -> QuotientResult {
    let n = rmpn.net.place_count();
    let nt = rmpn.net.transition_count();
    let mut pre: Vec<Vec<u32>> = (0..n)
        .map(|p| (0..nt).map(|t| rmpn.net.pre(p, t)).collect())
        .collect();
    let mut post: Vec<Vec<u32>> = (0..n)
        .map(|p| (0..nt).map(|t| rmpn.net.post(p, t)).collect())
        .collect();
    let mut pr: Vec<Vec<u8>> = (0..n)
        .map(|p| (0..n).map(|q| u8::from(p == q)).collect())
        .collect();
    let mut m0 = rmpn.m0.0.clone();
    let mut obs = rmpn.obs.clone();
    let mut alive: Vec<bool> = vec![true; nt];

    let endpoints = |pre: &Vec<Vec<u32>>, post: &Vec<Vec<u32>>, t: usize| {
        let from = pre.iter().position(|row| row[t] > 0);
        let to = post.iter().position(|row| row[t] > 0);
        (from.unwrap(), to.unwrap())
    };

    loop {
        let places = pre.len();
        let mut pair = None;
        'search: for i in 0..places {
            for j in i + 1..places {
                if obs[i] != obs[j] {
                    continue;
                }
                let connected = (0..nt).any(|t| {
                    alive[t] && {
                        let (a, b) = endpoints(&pre, &post, t);
                        (a, b) == (i, j) || (a, b) == (j, i)
                    }
                });
                if connected {
                    pair = Some((i, j));
                    break 'search;
                }
            }
        }
        let Some((i, j)) = pair else { break };
        for t in 0..nt {
            if alive[t] {
                let (a, b) = endpoints(&pre, &post, t);
                if (a == i || a == j) && (b == i || b == j) {
                    alive[t] = false;
                }
            }
        }
        for t in 0..nt {
            pre[j][t] += pre[i][t];
            post[j][t] += post[i][t];
        }
        for q in 0..n {
            pr[j][q] |= pr[i][q];
        }
        m0[j] += m0[i];
        pre.remove(i);
        post.remove(i);
        pr.remove(i);
        m0.remove(i);
        obs.remove(i);
    }

    let mut seen = HashSet::new();
    let mut kept = Vec::new();
    for t in 0..nt {
        if alive[t] && seen.insert(endpoints(&pre, &post, t)) {
            kept.push(t);
        }
    }
    let places = pre.len();
    let place_names: Vec<String> = (1..=places).map(|k| format!("pM{k}")).collect();
    let transition_names: Vec<String> = kept
        .iter()
        .map(|&t| {
            let (a, b) = endpoints(&pre, &post, t);
            format!("{}->{}", place_names[a], place_names[b])
        })
        .collect();
    let pick = |m: &Vec<Vec<u32>>| -> Vec<Vec<u32>> {
        m.iter()
            .map(|row| kept.iter().map(|&t| row[t]).collect())
            .collect()
    };
    let net = PetriNet::from_matrices(place_names, transition_names, pick(&pre), pick(&post))
        .expect("quotient matrices are well-shaped");
    QuotientResult {
        qnet: Rmpn {
            net,
            m0: Marking(m0),
            alphabet: rmpn.alphabet.clone(),
            obs,
        },
        projection: pr,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{build_rmpn, parse_environment};

    fn rmpn(text: &str) -> Rmpn {
        build_rmpn(&parse_environment(text).unwrap())
    }

    #[test]
    fn distinct_observations_give_identity() {
        let q = quotient(&rmpn("grid 3 1 1\ny1@r1 y2 y3\n"));
        assert_eq!(q.qnet.net.place_count(), 3);
        assert_eq!(q.qnet.net.transition_count(), 4);
        for (k, row) in q.projection.iter().enumerate() {
            for (p, &v) in row.iter().enumerate() {
                assert_eq!(v, u8::from(k == p));
            }
        }
    }

    #[test]
    fn free_corridor_fuses_to_one_place() {
        let q = quotient(&rmpn("grid 3 1 1\n.@r1 . .\n"));
        assert_eq!(q.qnet.net.place_count(), 1);
        assert_eq!(q.qnet.net.transition_count(), 0);
        assert_eq!(q.qnet.m0, Marking(vec![1]));
    }

    #[test]
    fn separated_regions_with_equal_labels_stay_apart() {
        let q = quotient(&rmpn("grid 3 1 1\ny1@r1 . y1\n"));
        assert_eq!(q.qnet.net.place_count(), 3);
    }

    #[test]
    fn parallel_transitions_are_deduplicated() {
        // two free cells both touch two y1 cells
        let q = quotient(&rmpn("grid 2 2 1\n.@r1 .\ny1 y1\n"));
        assert_eq!(q.qnet.net.place_count(), 2);
        assert_eq!(q.qnet.net.transition_count(), 2);
        assert!(q.qnet.is_state_machine());
    }

    #[test]
    fn projection_maps_initial_marking() {
        let base = rmpn("grid 3 2 2\n.@r1 . y1\ny2 .@r2 y1\n");
        let q = quotient(&base);
        assert_eq!(q.project(&base.m0), q.qnet.m0);
        for p in 0..base.net.place_count() {
            let col: u32 = q.projection.iter().map(|r| u32::from(r[p])).sum();
            assert_eq!(col, 1);
        }
    }

    #[test]
    fn quotient_is_a_fixpoint() {
        let q = quotient(&rmpn("grid 3 2 1\n.@r1 . y1\ny2 . y1\n"));
        let qq = quotient(&q.qnet);
        assert_eq!(qq.qnet.net.place_count(), q.qnet.net.place_count());
        assert_eq!(qq.qnet.net, q.qnet.net);
    }
}
