//! Breadth-first search over the score vectors reachable with `k` operations,
//! `k = 0, 1, 2, …`. Two multisets of operations that reach the same score
//! vector (and use the same amount of every limited group) are
//! interchangeable, so each reachable state is expanded once.

use std::collections::HashSet;

use crate::gsr::ord;

use super::{VoInstance, VoSolution, VoValue};

#[derive(Clone, PartialEq, Eq, Hash)]
struct State {
    score: Vec<i64>,
    usage: Vec<u64>,
}

pub(super) fn solve_bfs(inst: &VoInstance, cap: u64) -> VoSolution {
    let t = inst.ops.len();
    let limits = inst.ops.limits();
    // group membership of each column
    let mut groups_of: Vec<Vec<usize>> = vec![Vec::new(); t];
    for (g, l) in limits.iter().enumerate() {
        for &c in &l.columns {
            groups_of[c].push(g);
        }
    }
    let start = State {
        score: inst.score.clone(),
        usage: vec![0; limits.len()],
    };
    if inst.goal_met_on(&ord(&start.score)) {
        return VoSolution::finite(inst, vec![0; t]);
    }
    // parent index and the column applied to reach each state
    let mut states: Vec<(State, usize, usize)> = vec![(start.clone(), usize::MAX, usize::MAX)];
    let mut seen: HashSet<State> = HashSet::new();
    seen.insert(start);
    let mut frontier: Vec<usize> = vec![0];
    for _k in 1..=cap {
        let mut next = Vec::new();
        for &idx in &frontier {
            for (col, groups) in groups_of.iter().enumerate() {
                let (cur, _, _) = &states[idx];
                if groups
                    .iter()
                    .any(|&g| cur.usage[g] >= limits[g].max)
                {
                    continue;
                }
                let mut s = cur.clone();
                for (x, &d) in s.score.iter_mut().zip(inst.ops.column(col)) {
                    *x += d;
                }
                for &g in &groups_of[col] {
                    s.usage[g] += 1;
                }
                if seen.contains(&s) {
                    continue;
                }
                let hit = inst.goal_met_on(&ord(&s.score));
                seen.insert(s.clone());
                states.push((s, idx, col));
                let new_idx = states.len() - 1;
                if hit {
                    return VoSolution::finite(inst, witness(&states, new_idx, t));
                }
                next.push(new_idx);
            }
        }
        if next.is_empty() {
            // every reachable state has been visited
            return VoSolution::without_witness(VoValue::Infinite);
        }
        frontier = next;
    }
    VoSolution::without_witness(VoValue::UnknownAtCap(cap))
}

fn witness(states: &[(State, usize, usize)], mut idx: usize, t: usize) -> Vec<u64> {
    let mut v = vec![0u64; t];
    while states[idx].1 != usize::MAX {
        v[states[idx].2] += 1;
        idx = states[idx].1;
    }
    v
}
