use crate::environment::Rmpn;
use crate::error::{Error, Result};
use crate::milp::ProjectionTrace;
use crate::petri::{FiringCount, Marking};

/// Robot positions over time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Timeline {
    /// `ticks[t][r]` is the cell of robot `r` at tick `t`.
    pub ticks: Vec<Vec<usize>>,
    /// Tick reached by the synchronous sub-step of each block.
    pub sync_ticks: Vec<usize>,
    /// Tick at which each block starts.
    pub block_start: Vec<usize>,
}

/// Splits one sub-step's firing vector into per-robot paths. The robot with
/// the lowest index claims the lowest-index fired transition leaving its cell.
pub fn decompose_firing(
    rmpn: &Rmpn,
    positions: &[usize],
    firing: &FiringCount,
) -> Result<Vec<Vec<usize>>> {
    let mut left = firing.0.clone();
    let mut paths = Vec::with_capacity(positions.len());
    for &start in positions {
        let mut cur = start;
        let mut path = Vec::new();
        while let Some(t) = (0..left.len()).find(|&t| left[t] > 0 && rmpn.endpoints(t).0 == cur) {
            left[t] -= 1;
            cur = rmpn.endpoints(t).1;
            path.push(cur);
            if path.len() > left.len() + 1 {
                return Err(Error::Internal("firing vector contains a cycle".into()));
            }
        }
        paths.push(path);
    }
    if let Some(t) = left.iter().position(|&n| n > 0) {
        return Err(Error::Internal(format!(
            "firing of {} has no robot at its input cell",
            rmpn.net.transition_name(t)
        )));
    }
    Ok(paths)
}

fn occupancy(rmpn: &Rmpn, positions: &[usize]) -> Marking {
    let mut m = Marking::zeros(rmpn.net.place_count());
    for &p in positions {
        m.0[p] += 1;
    }
    m
}

/// Expands a projection solution into ticks. Robots on shorter paths wait at
/// their last cell. Each synchronous sub-step takes exactly one tick; hold
/// sub-steps take as many ticks as their longest path.
pub fn extract_trajectories(
    rmpn: &Rmpn,
    robot_cells: &[usize],
    trace: &ProjectionTrace,
) -> Result<Timeline> {
    let mut positions = robot_cells.to_vec();
    let mut ticks = vec![positions.clone()];
    let mut sync_ticks = Vec::new();
    let mut block_start = Vec::new();
    for (b, block) in trace.firings.iter().enumerate() {
        block_start.push(ticks.len() - 1);
        let last = block.len() - 1;
        for (j, firing) in block.iter().enumerate() {
            let paths = decompose_firing(rmpn, &positions, firing)?;
            let mut len = paths.iter().map(Vec::len).max().unwrap_or(0);
            if j == last {
                len = len.max(1);
            }
            for tau in 0..len {
                for (r, path) in paths.iter().enumerate() {
                    if let Some(&cell) = path.get(tau) {
                        positions[r] = cell;
                    }
                }
                ticks.push(positions.clone());
            }
            if occupancy(rmpn, &positions) != trace.markings[b][j] {
                return Err(Error::Internal(format!(
                    "decomposed moves disagree with the projected marking at block {b}, sub-step {}",
                    j + 1
                )));
            }
            if j == last {
                sync_ticks.push(ticks.len() - 1);
            }
        }
    }
    Ok(Timeline {
        ticks,
        sync_ticks,
        block_start,
    })
}

/// Repeats a loop of ticks until every robot is back at its own start cell.
/// The loop must end on a permutation of its starting positions. Returns the
/// closed loop and the number of repetitions.
pub fn close_loop(ticks: &[Vec<usize>]) -> Result<(Vec<Vec<usize>>, usize)> {
    let (first, last) = match (ticks.first(), ticks.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Ok((Vec::new(), 1)),
    };
    // robot r ends where robot perm[r] started
    let perm: Vec<usize> = last
        .iter()
        .map(|c| first.iter().position(|d| d == c))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Internal("loop does not return to its start cells".into()))?;
    let mut out = ticks.to_vec();
    let mut cur: Vec<usize> = perm.clone();
    let mut reps = 1;
    while cur.iter().enumerate().any(|(r, &p)| r != p) {
        for row in &ticks[1..] {
            out.push(cur.iter().map(|&p| row[p]).collect());
        }
        cur = cur.iter().map(|&p| perm[p]).collect();
        reps += 1;
    }
    Ok((out, reps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{build_rmpn, parse_environment};

    fn grid(text: &str) -> Rmpn {
        build_rmpn(&parse_environment(text).unwrap())
    }

    fn t(r: &Rmpn, from: usize, to: usize) -> usize {
        (0..r.net.transition_count()).find(|&t| r.endpoints(t) == (from, to)).unwrap()
    }

    #[test]
    fn zero_firing_keeps_everyone() {
        let r = grid("grid 2 1 1\n.@r1 .\n");
        let paths = decompose_firing(&r, &[0], &FiringCount::zeros(2)).unwrap();
        assert_eq!(paths, vec![Vec::<usize>::new()]);
    }

    #[test]
    fn single_move() {
        let r = grid("grid 2 1 1\n.@r1 .\n");
        let f = FiringCount::unit(2, t(&r, 0, 1));
        assert_eq!(decompose_firing(&r, &[0], &f).unwrap(), vec![vec![1]]);
    }

    #[test]
    fn rotation_on_a_two_by_two_grid() {
        // cells 0 1 / 2 3; robots at 0 and 3 rotate clockwise.
        let r = grid("grid 2 2 2\n.@r1 .\n. .@r2\n");
        let mut f = FiringCount::zeros(r.net.transition_count());
        f.0[t(&r, 0, 1)] = 1;
        f.0[t(&r, 3, 2)] = 1;
        let paths = decompose_firing(&r, &[0, 3], &f).unwrap();
        assert_eq!(paths, vec![vec![1], vec![2]]);
    }

    #[test]
    fn paths_follow_chains() {
        let r = grid("grid 3 1 1\n.@r1 . .\n");
        let mut f = FiringCount::zeros(r.net.transition_count());
        f.0[t(&r, 0, 1)] = 1;
        f.0[t(&r, 1, 2)] = 1;
        assert_eq!(decompose_firing(&r, &[0], &f).unwrap(), vec![vec![1, 2]]);
    }

    #[test]
    fn permuted_loop_is_repeated() {
        let ticks = vec![vec![0, 1], vec![2, 3], vec![1, 0]];
        let (out, reps) = close_loop(&ticks).unwrap();
        assert_eq!(reps, 2);
        assert_eq!(out, vec![vec![0, 1], vec![2, 3], vec![1, 0], vec![3, 2], vec![0, 1]]);
    }

    #[test]
    fn closed_loop_is_unchanged() {
        let ticks = vec![vec![0, 1], vec![2, 1], vec![0, 1]];
        assert_eq!(close_loop(&ticks).unwrap(), (ticks, 1));
    }

    #[test]
    fn orphan_firing_is_an_error() {
        let r = grid("grid 3 1 1\n.@r1 . .\n");
        let f = FiringCount::unit(r.net.transition_count(), t(&r, 1, 2));
        assert!(matches!(decompose_firing(&r, &[0], &f), Err(Error::Internal(_))));
    }
}
