//! The γ-majority rule over two alternatives `{a, b}`: `b` wins iff the number
//! of `b` voters exceeds the number of `a` voters by at least `n^γ`.
//!
//! It is anonymous but not homogeneous, so it has no generalized scoring
//! encoding. It lives here as a negative control for the scaling experiments.

use num_bigint::BigUint;

use super::{Alternative, GsrError, Profile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GammaMajorityRule {
    num: u32,
    den: u32,
}

/// Which way the strategic individual may change the votes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaOps {
    /// Change existing votes (n stays fixed).
    Bribery,
    /// Add new votes.
    Addition,
}

/// What the strategic individual wants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaGoal {
    MakeWin(Alternative),
    MakeLose(Alternative),
    ChangeWinner,
}

impl GammaMajorityRule {
    /// `γ = num/den`, required to lie strictly between 1/2 and 1.
    pub fn new(num: u32, den: u32) -> Result<Self, GsrError> {
        if den == 0 || 2 * num <= den || num >= den {
            return Err(GsrError::Weights(format!(
                "gamma must lie in (1/2, 1), got {num}/{den}"
            )));
        }
        Ok(Self { num, den })
    }

    pub fn parse(text: &str) -> Result<Self, GsrError> {
        let (n, d) = text
            .split_once('/')
            .ok_or_else(|| GsrError::Weights(format!("gamma `{text}` is not a fraction")))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<u32>()
                .map_err(|e| GsrError::Weights(format!("gamma `{text}`: {e}")))
        };
        Self::new(parse(n)?, parse(d)?)
    }

    pub fn gamma(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn name(&self) -> String {
        format!("gamma-majority:{}/{}", self.num, self.den)
    }

    /// Smallest integer `t ≥ 0` with `t ≥ n^γ`.
    pub fn threshold(&self, n: u64) -> u64 {
        let target = BigUint::from(n).pow(self.num);
        let ok = |t: u64| BigUint::from(t).pow(self.den) >= target;
        let mut t = ((n as f64).powf(self.gamma()).ceil() as u64).saturating_sub(2);
        while !ok(t) {
            t += 1;
        }
        while t > 0 && ok(t - 1) {
            t -= 1;
        }
        t
    }

    /// Winner given the number of `a` and `b` voters.
    pub fn winner_from_counts(&self, n_a: u64, n_b: u64) -> Alternative {
        let n = n_a + n_b;
        if n_b >= n_a && n_b - n_a >= self.threshold(n) {
            Alternative(1)
        } else {
            Alternative(0)
        }
    }

    pub fn winner(&self, profile: &Profile) -> Result<Alternative, GsrError> {
        if profile.m() != 2 {
            return Err(GsrError::AlternativeCount {
                rule: self.name(),
                m: profile.m(),
                min: 2,
                max: 2,
            });
        }
        let n_b = profile.votes().iter().filter(|v| v.top().0 == 1).count() as u64;
        let n_a = profile.n() as u64 - n_b;
        Ok(self.winner_from_counts(n_a, n_b))
    }

    /// Minimum number of operations to meet `goal`, or `None` if no number up
    /// to `cap` works. Bribery can never exceed `n` changes.
    pub fn min_operations(
        &self,
        n_a: u64,
        n_b: u64,
        ops: GammaOps,
        goal: GammaGoal,
        cap: u64,
    ) -> Option<u64> {
        let current = self.winner_from_counts(n_a, n_b);
        let met = |w: Alternative| match goal {
            GammaGoal::MakeWin(c) => w == c,
            GammaGoal::MakeLose(c) => w != c,
            GammaGoal::ChangeWinner => w != current,
        };
        for k in 0..=cap {
            let candidates: [Option<(u64, u64)>; 2] = match ops {
                GammaOps::Bribery => [
                    (k <= n_a).then(|| (n_a - k, n_b + k)),
                    (k <= n_b).then(|| (n_a + k, n_b - k)),
                ],
                GammaOps::Addition => [Some((n_a + k, n_b)), Some((n_a, n_b + k))],
            };
            if candidates
                .iter()
                .flatten()
                .any(|&(a, b)| met(self.winner_from_counts(a, b)))
            {
                return Some(k);
            }
            if ops == GammaOps::Bribery && k > n_a && k > n_b {
                return None;
            }
        }
        None
    }
}
