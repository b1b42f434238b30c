//! Test-only helpers: random instances and a brute-force lasso search.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};

use ltlpn::alphabet::ObsSet;
use ltlpn::buchi::BuchiAutomaton;
use ltlpn::environment::{build_rmpn, Environment};
use rand::seq::SliceRandom;
use rand::Rng;

pub const OFFICE_CELLS: &str = include_str!("../../fixtures/office.cells");
pub const OFFICE_BUCHI: &str = include_str!("../../fixtures/office.buchi");
pub const TOP_BUCHI: &str = include_str!("../../fixtures/top.buchi");
pub const DISJOINT_CELLS: &str = include_str!("../../fixtures/disjoint3.grid");
pub const DISJOINT_BUCHI: &str = include_str!("../../fixtures/all_three.buchi");

#[derive(Debug, Clone)]
pub struct Instance {
    pub env: String,
    pub buchi: String,
}

fn random_guard(rng: &mut impl Rng, atoms: usize) -> String {
    let lit = |rng: &mut dyn rand::RngCore| {
        let a = rng.gen_range(1..=atoms);
        if rng.gen_bool(0.3) {
            format!("!y{a}")
        } else {
            format!("y{a}")
        }
    };
    match rng.gen_range(0..6) {
        0 => "true".into(),
        1 | 2 => lit(rng),
        3 => format!("{} & {}", lit(rng), lit(rng)),
        4 => format!("{} | {}", lit(rng), lit(rng)),
        _ => format!("!({} | {})", lit(rng), lit(rng)),
    }
}

/// Grid at most 4×3 with up to 3 robots and 3 atoms, and a 2–4 state automaton.
pub fn random_instance(rng: &mut impl Rng) -> Instance {
    let (w, h) = loop {
        let w = rng.gen_range(2..=4);
        let h = rng.gen_range(1..=3);
        if w * h >= 3 {
            break (w, h);
        }
    };
    let atoms = rng.gen_range(1..=3);
    let mut cells: Vec<Option<String>> = (0..w * h)
        .map(|_| {
            if rng.gen_bool(0.1) {
                None
            } else if rng.gen_bool(0.35) {
                Some(format!("y{}", rng.gen_range(1..=atoms)))
            } else {
                Some(".".into())
            }
        })
        .collect();
    let open: Vec<usize> = (0..cells.len()).filter(|&i| cells[i].is_some()).collect();
    let open = if open.is_empty() {
        cells[0] = Some(".".into());
        vec![0]
    } else {
        open
    };
    let robots = rng.gen_range(1..=3.min(open.len()));
    let mut starts = open.clone();
    starts.shuffle(rng);
    for (r, &c) in starts.iter().take(robots).enumerate() {
        let cell = cells[c].as_mut().unwrap();
        cell.push_str(&format!("@r{}", r + 1));
    }
    let mut env = format!("grid {w} {h} {robots}\n");
    for y in 0..h {
        let row: Vec<String> = (0..w)
            .map(|x| cells[y * w + x].clone().unwrap_or_else(|| "#".into()))
            .collect();
        env.push_str(&row.join(" "));
        env.push('\n');
    }

    let n = rng.gen_range(2..=4);
    let states: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
    let mut finals: Vec<&String> = states.iter().filter(|_| rng.gen_bool(0.4)).collect();
    if finals.is_empty() {
        finals.push(&states[n - 1]);
    }
    let mut buchi = format!(
        "states: {}\ninitial: q0\nfinal: {}\natoms: {}\n",
        states.join(" "),
        finals.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" "),
        (1..=atoms).map(|a| format!("y{a}")).collect::<Vec<_>>().join(" ")
    );
    for s in &states {
        for t in &states {
            if rng.gen_bool(0.45) {
                buchi.push_str(&format!("edge: {s} {t} {}\n", random_guard(rng, atoms)));
            }
        }
    }
    Instance { env, buchi }
}

type Config = Vec<usize>;

/// Brute-force search for an accepted lasso.
///
/// A step lets robots rearrange freely inside their current regions, then
/// moves every robot at most one cell into a cell that was empty, then reads
/// the new observation at least once. Configurations that differ only by a
/// rearrangement are merged. The initial observation need not be read.
pub fn lasso_exists(env: &Environment, buchi: &BuchiAutomaton) -> bool {
    let rmpn = build_rmpn(env);
    let n = env.cells.len();
    let mut nbrs = vec![Vec::new(); n];
    for &(a, b) in &env.adjacency {
        nbrs[a].push(b);
        nbrs[b].push(a);
    }
    // regions: connected components of equal labels
    let mut region = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if region[s] != usize::MAX {
            continue;
        }
        region[s] = next;
        let mut queue = VecDeque::from([s]);
        while let Some(p) = queue.pop_front() {
            for &q in &nbrs[p] {
                if region[q] == usize::MAX && env.cells[q].labels == env.cells[s].labels {
                    region[q] = next;
                    queue.push_back(q);
                }
            }
        }
        next += 1;
    }
    let obs = |c: &Config| -> ObsSet { c.iter().flat_map(|&p| rmpn.obs[p].iter().copied()).collect() };

    let mut class_of: HashMap<Config, usize> = HashMap::new();
    let mut members: Vec<Vec<Config>> = Vec::new();
    let class = |c: &Config, class_of: &mut HashMap<Config, usize>, members: &mut Vec<Vec<Config>>| -> usize {
        if let Some(&k) = class_of.get(c) {
            return k;
        }
        let k = members.len();
        let mut seen = vec![c.clone()];
        class_of.insert(c.clone(), k);
        let mut i = 0;
        while i < seen.len() {
            let cur = seen[i].clone();
            i += 1;
            for r in 0..cur.len() {
                for &q in &nbrs[cur[r]] {
                    if region[q] != region[cur[r]] || cur.contains(&q) {
                        continue;
                    }
                    let mut nxt = cur.clone();
                    nxt[r] = q;
                    nxt.sort_unstable();
                    if !class_of.contains_key(&nxt) {
                        class_of.insert(nxt.clone(), k);
                        seen.push(nxt);
                    }
                }
            }
        }
        members.push(seen);
        k
    };

    let mut start: Config = env.robot_cells.clone();
    start.sort_unstable();
    let k0 = class(&start, &mut class_of, &mut members);
    let mut succ: Vec<Option<BTreeSet<usize>>> = Vec::new();
    let mut class_obs: Vec<ObsSet> = Vec::new();
    let mut frontier = vec![k0];
    while let Some(k) = frontier.pop() {
        if succ.len() <= k {
            succ.resize(k + 1, None);
        }
        if succ[k].is_some() {
            continue;
        }
        let mut out = BTreeSet::new();
        for c in members[k].clone() {
            let mut choices: Vec<Vec<usize>> = Vec::new();
            for &p in &c {
                let mut opts = vec![p];
                opts.extend(nbrs[p].iter().copied().filter(|q| !c.contains(q)));
                choices.push(opts);
            }
            let mut idx = vec![0; c.len()];
            loop {
                let targets: Vec<usize> = idx.iter().enumerate().map(|(r, &i)| choices[r][i]).collect();
                let distinct: BTreeSet<usize> = targets.iter().copied().collect();
                if distinct.len() == targets.len() {
                    let mut t = targets;
                    t.sort_unstable();
                    out.insert(class(&t, &mut class_of, &mut members));
                }
                let mut r = 0;
                while r < idx.len() {
                    idx[r] += 1;
                    if idx[r] < choices[r].len() {
                        break;
                    }
                    idx[r] = 0;
                    r += 1;
                }
                if r == idx.len() {
                    break;
                }
            }
        }
        frontier.extend(out.iter().copied());
        succ[k] = Some(out);
    }
    for m in &members {
        class_obs.push(obs(&m[0]));
    }

    let ns = buchi.states.len();
    let node = |k: usize, s: usize| k * ns + s;
    let total = members.len() * ns;
    let mut edges = vec![Vec::new(); total];
    for (k, out) in succ.iter().enumerate() {
        let Some(out) = out else { continue };
        for s in 0..ns {
            for &k2 in out {
                for e in buchi.edges.iter().filter(|e| e.source == s) {
                    if e.guard.eval(&class_obs[k2]) {
                        edges[node(k, s)].push(node(k2, e.target));
                    }
                }
            }
        }
    }
    let reach_from = |starts: &[usize]| -> Vec<bool> {
        let mut seen = vec![false; total];
        let mut stack: Vec<usize> = starts.iter().flat_map(|&s| edges[s].iter().copied()).collect();
        while let Some(v) = stack.pop() {
            if !seen[v] {
                seen[v] = true;
                stack.extend(edges[v].iter().copied());
            }
        }
        seen
    };
    let initial: Vec<usize> = buchi.initial.iter().map(|&s| node(k0, s)).collect();
    let reached = reach_from(&initial);
    (0..total).any(|v| reached[v] && buchi.is_final(v % ns) && reach_from(&[v])[v])
}
