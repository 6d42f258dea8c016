//! Fixtures shared by the benchmarks.

use voteops_core::experiment::{sample_profile, trial_rng};
use voteops_core::gsr::rule_by_name;
use voteops_core::ilp::IlpProblem;
use voteops_core::{Alternatives, GsRule, Profile, VoteDistribution};

pub fn rule(name: &str, m: usize) -> GsRule {
    rule_by_name(name, m).expect("known rule")
}

/// An impartial-culture profile of `n` votes over `m` alternatives.
pub fn uniform_profile(m: usize, n: usize, seed: u64) -> Profile {
    let pi = VoteDistribution::uniform(Alternatives::new(m).expect("m >= 2"));
    sample_profile(&pi, n, &mut trial_rng(seed, n as u64, 0))
}

/// A covering problem `min Σv` with `t` variables and `t/2` rows whose
/// LP relaxation is fractional, so branching is needed.
pub fn covering_ilp(t: usize) -> IlpProblem {
    let mut p = IlpProblem::new(t);
    for r in 0..t / 2 {
        let row = (0..t).map(|j| ((j + r) % 3 == 0) as i64 * 2 + ((j + 2 * r) % 5 == 0) as i64).collect();
        p.add_ge(row, 7 + r as i64);
    }
    p
}
