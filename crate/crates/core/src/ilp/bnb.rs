//! Best-bound branch and bound with most-fractional branching.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::presolve::presolve;
use super::simplex::{rat, LinearProgram, LpResult, RowKind};
use super::{proximity_cap, subdeterminant_upper_bound, IlpOutcome, IlpProblem};

pub const DEFAULT_NODE_LIMIT: usize = 20_000;

struct Node {
    bound: BigRational,
    seq: u64,
    lo: Vec<u64>,
    hi: Vec<Option<u64>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // reversed so that the max-heap pops the smallest bound, oldest first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .cmp(&self.bound)
            .then(other.seq.cmp(&self.seq))
    }
}

/// Cap on `Σv` used to bound the search, and whether exhausting it proves
/// that no solution exists.
fn search_cap(prob: &IlpProblem) -> (u64, bool) {
    let mut explicit = prob.budget_cap;
    if let Some(ub) = &prob.upper_bounds {
        let total = ub.iter().fold(0u64, |a, &u| a.saturating_add(u));
        explicit = Some(explicit.map_or(total, |c| c.min(total)));
    }
    if let Some(c) = explicit {
        return (prob.implied_cap.map_or(c, |i| i.min(c)), true);
    }
    if let Some(c) = prob.implied_cap {
        return (c, true);
    }
    let m = subdeterminant_upper_bound(&prob.reduced_rows());
    match proximity_cap(prob.t, &m, prob.rhs_inf_norm()) {
        Some(c) => (c, true),
        None => {
            let b = prob.rhs_inf_norm().saturating_add(1);
            (b.saturating_mul(10).saturating_mul(prob.t as u64), false)
        }
    }
}

fn int(x: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// LP relaxation with `lo ≤ v ≤ hi` and `Σv ≤ budget`, shifted to `w = v - lo`.
fn relax(
    prob: &IlpProblem,
    lo: &[u64],
    hi: &[Option<u64>],
    budget: Option<u64>,
) -> Option<(BigRational, Vec<BigRational>)> {
    let t = prob.t;
    let mut lp = LinearProgram::new(t);
    lp.objective = vec![BigRational::one(); t];
    let shifted = |row: &[i64], rhs: i64| -> BigRational {
        let used: i128 = row.iter().zip(lo).map(|(&a, &l)| a as i128 * l as i128).sum();
        BigRational::from_integer(BigInt::from(rhs as i128 - used))
    };
    for (row, rhs) in &prob.eq_rows {
        lp.add_row(row.iter().map(|&a| rat(a)).collect(), RowKind::Eq, shifted(row, *rhs));
    }
    for (row, rhs) in &prob.ge_rows {
        lp.add_row(row.iter().map(|&a| rat(a)).collect(), RowKind::Ge, shifted(row, *rhs));
    }
    for (i, h) in hi.iter().enumerate() {
        if let Some(h) = *h {
            if h < lo[i] {
                return None;
            }
            let mut row = vec![BigRational::zero(); t];
            row[i] = BigRational::one();
            lp.add_row(row, RowKind::Le, int(h - lo[i]));
        }
    }
    let lo_sum: u64 = lo.iter().sum();
    if let Some(b) = budget {
        if b < lo_sum {
            return None;
        }
        lp.add_row(vec![BigRational::one(); t], RowKind::Le, int(b - lo_sum));
    }
    match lp.solve() {
        LpResult::Optimal { value, x } => {
            let v = x.into_iter().zip(lo).map(|(w, &l)| w + int(l)).collect();
            Some((value + int(lo_sum), v))
        }
        LpResult::Infeasible => None,
        LpResult::Unbounded => unreachable!("objective Σv is bounded below on v ≥ 0"),
    }
}

fn ceil_u64(x: &BigRational) -> u64 {
    x.ceil().to_integer().to_u64().unwrap_or(u64::MAX)
}

pub(super) fn branch_and_bound(prob: &IlpProblem, cutoff: Option<u64>) -> Option<IlpOutcome> {
    prob.validate().expect("malformed ILP problem");
    let original = prob;
    let Some(presolved) = presolve(prob) else {
        return cutoff.is_none().then_some(IlpOutcome::Infeasible);
    };
    let prob = &presolved;
    let t = prob.t;
    let lo0 = vec![0u64; t];
    let hi0: Vec<Option<u64>> = match &prob.upper_bounds {
        Some(ub) => ub.iter().map(|&u| Some(u)).collect(),
        None => vec![None; t],
    };
    let Some((root_bound, _)) = relax(prob, &lo0, &hi0, None) else {
        return cutoff.is_none().then_some(IlpOutcome::Infeasible);
    };
    let (cap, sound) = search_cap(prob);
    let limit = match cutoff {
        Some(0) => return None,
        Some(c) => cap.min(c - 1),
        None => cap,
    };
    let limited_by_cutoff = cutoff.is_some_and(|c| c - 1 <= cap);

    let mut incumbent: Option<(u64, Vec<u64>)> = None;
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Node {
        bound: root_bound,
        seq,
        lo: lo0,
        hi: hi0,
    });
    let mut explored = 0usize;
    while let Some(node) = heap.pop() {
        let allowed = match &incumbent {
            Some((0, _)) => break,
            Some((best, _)) => limit.min(best - 1),
            None => limit,
        };
        if ceil_u64(&node.bound) > allowed {
            continue;
        }
        explored += 1;
        if explored > prob.node_limit {
            return Some(IlpOutcome::UnknownAtCap(cap));
        }
        let Some((bound, x)) = relax(prob, &node.lo, &node.hi, Some(allowed)) else {
            continue;
        };
        if ceil_u64(&bound) > allowed {
            continue;
        }
        let mut branch: Option<(usize, BigRational)> = None;
        for (i, xi) in x.iter().enumerate() {
            if xi.is_integer() {
                continue;
            }
            let frac = xi - xi.floor();
            let dist = (&frac).min(&(BigRational::one() - &frac)).clone();
            if branch.as_ref().is_none_or(|(_, d)| dist > *d) {
                branch = Some((i, dist));
            }
        }
        let Some((i, _)) = branch else {
            let v: Vec<u64> = x.iter().map(|xi| xi.to_integer().to_u64().unwrap()).collect();
            let value = v.iter().sum();
            incumbent = Some((value, v));
            continue;
        };
        // cheap rounding heuristic for an early incumbent
        let rounded: Vec<u64> = x.iter().map(ceil_u64).collect();
        let rounded_sum: u64 = rounded.iter().sum();
        if rounded_sum <= allowed && prob.is_feasible(&rounded) {
            incumbent = Some((rounded_sum, rounded));
        }
        let xi = &x[i];
        let floor = xi.floor().to_integer().to_u64().unwrap_or(0);
        let mut left_hi = node.hi.clone();
        left_hi[i] = Some(floor);
        let mut right_lo = node.lo.clone();
        right_lo[i] = floor + 1;
        for (lo, hi) in [(node.lo.clone(), left_hi), (right_lo, node.hi)] {
            seq += 1;
            heap.push(Node {
                bound: bound.clone(),
                seq,
                lo,
                hi,
            });
        }
    }
    match incumbent {
        Some((value, witness)) => {
            debug_assert!(original.is_feasible(&witness));
            Some(IlpOutcome::Optimal { value, witness })
        }
        None if cutoff.is_some() && (sound || limited_by_cutoff) => None,
        None if sound => Some(IlpOutcome::Infeasible),
        None => Some(IlpOutcome::UnknownAtCap(cap)),
    }
}
