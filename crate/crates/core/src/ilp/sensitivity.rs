//! Largest absolute subdeterminant of an integer matrix, and the sensitivity
//! bound `n*·M(A)·(‖b‖∞ + 2)` built from it.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

/// Matrices larger than this in either dimension are refused by
/// [`sensitivity_bound`].
pub const DEFAULT_MINOR_DIM: usize = 8;

/// Number of minors [`max_subdeterminant_bounded`] evaluates before giving up.
pub const MINOR_BUDGET: u64 = 200_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SensitivityError {
    #[error("matrix is {rows}x{cols}; exact minor enumeration is limited to {limit}x{limit}")]
    TooLarge { rows: usize, cols: usize, limit: usize },
    #[error("matrix rows have different lengths")]
    Ragged,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensitivityBound {
    /// `n*·M(A)`.
    pub beta_a: u128,
    pub m_a: u128,
    pub n_star: usize,
    pub b_inf_norm: u64,
}

impl SensitivityBound {
    /// `n*·M(A)·(‖b‖∞ + 2)`.
    pub fn value(&self) -> u128 {
        self.beta_a * (self.b_inf_norm as u128 + 2)
    }
}

pub fn sensitivity_bound(
    matrix: &[Vec<i64>],
    b_inf_norm: u64,
) -> Result<SensitivityBound, SensitivityError> {
    sensitivity_bound_with_limit(matrix, b_inf_norm, DEFAULT_MINOR_DIM)
}

pub fn sensitivity_bound_with_limit(
    matrix: &[Vec<i64>],
    b_inf_norm: u64,
    limit: usize,
) -> Result<SensitivityBound, SensitivityError> {
    let cols = check_shape(matrix)?;
    if matrix.len() > limit || cols > limit {
        return Err(SensitivityError::TooLarge {
            rows: matrix.len(),
            cols,
            limit,
        });
    }
    let m_a = max_subdeterminant(matrix)?.max(1);
    Ok(SensitivityBound {
        beta_a: cols as u128 * m_a,
        m_a,
        n_star: cols,
        b_inf_norm,
    })
}

fn check_shape(matrix: &[Vec<i64>]) -> Result<usize, SensitivityError> {
    let cols = matrix.first().map_or(0, Vec::len);
    if matrix.iter().any(|r| r.len() != cols) {
        return Err(SensitivityError::Ragged);
    }
    Ok(cols)
}

/// `M(A)`: the maximum of `|det|` over all square submatrices (0 for the
/// zero matrix).
pub fn max_subdeterminant(matrix: &[Vec<i64>]) -> Result<u128, SensitivityError> {
    check_shape(matrix)?;
    Ok(max_subdeterminant_bounded(matrix, u64::MAX).expect("unbounded budget"))
}

/// Exact `M(A)` if it can be found within `budget` minors, else `None`.
pub fn max_subdeterminant_bounded(matrix: &[Vec<i64>], budget: u64) -> Option<u128> {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    let mut count: u64 = 0;
    for k in 1..=rows.min(cols) {
        count = count.saturating_add(binomial(rows, k).saturating_mul(binomial(cols, k)));
    }
    if count > budget {
        return None;
    }
    let mut best: u128 = 0;
    for k in 1..=rows.min(cols) {
        let mut overflow = false;
        for_each_combination(rows, k, |rs| {
            for_each_combination(cols, k, |cs| {
                let sub: Vec<Vec<i128>> = rs
                    .iter()
                    .map(|&r| cs.iter().map(|&c| matrix[r][c] as i128).collect())
                    .collect();
                match bareiss_det(sub) {
                    Some(d) => best = best.max(d.unsigned_abs()),
                    None => overflow = true,
                }
            });
        });
        if overflow {
            return None;
        }
    }
    Some(best)
}

/// Hadamard's inequality applied to every square submatrix at once: the
/// product of the Euclidean norms of the nonzero rows, rounded up.
pub fn hadamard_bound(matrix: &[Vec<i64>]) -> BigUint {
    let mut sq = BigUint::one();
    for row in matrix {
        let norm: BigUint = row.iter().map(|&x| BigUint::from(x.unsigned_abs()).pow(2)).sum();
        if norm > BigUint::from(0u32) {
            sq *= norm;
        }
    }
    let r = sq.sqrt();
    if &r * &r == sq {
        r
    } else {
        r + 1u32
    }
}

/// Fraction-free Gaussian elimination; `None` on `i128` overflow.
pub(crate) fn bareiss_det(mut a: Vec<Vec<i128>>) -> Option<i128> {
    let n = a.len();
    if n == 0 {
        return Some(1);
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(s) => {
                    a.swap(k, s);
                    sign = -sign;
                }
                None => return Some(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[i][j]
                    .checked_mul(a[k][k])?
                    .checked_sub(a[i][k].checked_mul(a[k][j])?)?;
                a[i][j] = num / prev;
            }
        }
        prev = a[k][k];
    }
    Some(sign * a[n - 1][n - 1])
}

fn binomial(n: usize, k: usize) -> u64 {
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
        if r > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    r.to_u64().unwrap_or(u64::MAX)
}

fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return;
    }
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
