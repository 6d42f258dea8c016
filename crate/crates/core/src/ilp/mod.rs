//! Minimum `‖v‖₁` over nonnegative integer vectors subject to integer
//! equality and `≥` rows, solved by branch and bound on an exact rational
//! simplex relaxation.

mod bnb;
mod presolve;
mod simplex;
mod sensitivity;

use std::fmt::Write as _;

use thiserror::Error;

pub use bnb::DEFAULT_NODE_LIMIT;
pub use sensitivity::{
    hadamard_bound, max_subdeterminant, max_subdeterminant_bounded, sensitivity_bound,
    sensitivity_bound_with_limit, SensitivityBound, SensitivityError, DEFAULT_MINOR_DIM,
    MINOR_BUDGET,
};
pub use simplex::{LinearProgram, LpResult, LpRow, RowKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IlpError {
    #[error("row has {got} coefficients, expected {expected}")]
    RowLength { expected: usize, got: usize },
    #[error("problem has no variables")]
    NoVariables,
    #[error("dump line {line}: {msg}")]
    Dump { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IlpProblem {
    pub t: usize,
    /// `row·v = rhs`.
    pub eq_rows: Vec<(Vec<i64>, i64)>,
    /// `row·v ≥ rhs`.
    pub ge_rows: Vec<(Vec<i64>, i64)>,
    pub upper_bounds: Option<Vec<u64>>,
    pub budget_cap: Option<u64>,
    /// A cap on `Σv` the caller has already proven sound: if any solution
    /// exists, an optimal one lies within it.
    pub implied_cap: Option<u64>,
    pub node_limit: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IlpOutcome {
    Optimal { value: u64, witness: Vec<u64> },
    Infeasible,
    UnknownAtCap(u64),
}

impl IlpOutcome {
    pub fn value(&self) -> Option<u64> {
        match self {
            IlpOutcome::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }
}

impl IlpProblem {
    pub fn new(t: usize) -> Self {
        Self {
            t,
            eq_rows: Vec::new(),
            ge_rows: Vec::new(),
            upper_bounds: None,
            budget_cap: None,
            implied_cap: None,
            node_limit: DEFAULT_NODE_LIMIT,
        }
    }

    pub fn add_eq(&mut self, row: Vec<i64>, rhs: i64) -> &mut Self {
        self.eq_rows.push((row, rhs));
        self
    }

    pub fn add_ge(&mut self, row: Vec<i64>, rhs: i64) -> &mut Self {
        self.ge_rows.push((row, rhs));
        self
    }

    pub fn validate(&self) -> Result<(), IlpError> {
        if self.t == 0 {
            return Err(IlpError::NoVariables);
        }
        for (row, _) in self.eq_rows.iter().chain(&self.ge_rows) {
            if row.len() != self.t {
                return Err(IlpError::RowLength {
                    expected: self.t,
                    got: row.len(),
                });
            }
        }
        if let Some(ub) = &self.upper_bounds {
            if ub.len() != self.t {
                return Err(IlpError::RowLength {
                    expected: self.t,
                    got: ub.len(),
                });
            }
        }
        Ok(())
    }

    pub fn num_rows(&self) -> usize {
        self.eq_rows.len() + self.ge_rows.len()
    }

    /// Checks every row and cap in exact integer arithmetic.
    pub fn is_feasible(&self, v: &[u64]) -> bool {
        if v.len() != self.t {
            return false;
        }
        let dot = |row: &[i64]| -> i128 {
            row.iter().zip(v).map(|(&a, &x)| a as i128 * x as i128).sum()
        };
        self.eq_rows.iter().all(|(r, b)| dot(r) == *b as i128)
            && self.ge_rows.iter().all(|(r, b)| dot(r) >= *b as i128)
            && self
                .upper_bounds
                .as_ref()
                .is_none_or(|ub| v.iter().zip(ub).all(|(x, u)| x <= u))
            && self
                .budget_cap
                .is_none_or(|c| v.iter().map(|&x| x as u128).sum::<u128>() <= c as u128)
    }

    /// `‖b‖∞` over all rows.
    pub fn rhs_inf_norm(&self) -> u64 {
        self.eq_rows
            .iter()
            .chain(&self.ge_rows)
            .map(|(_, b)| b.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// The constraint matrix in `A v ≤ b` form: equalities as `±` rows, `≥`
    /// rows negated, then `-I` for `v ≥ 0`.
    pub fn constraint_matrix(&self) -> (Vec<Vec<i64>>, Vec<i64>) {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (r, rhs) in &self.eq_rows {
            a.push(r.clone());
            b.push(*rhs);
            a.push(r.iter().map(|x| -x).collect());
            b.push(-rhs);
        }
        for (r, rhs) in &self.ge_rows {
            a.push(r.iter().map(|x| -x).collect());
            b.push(-rhs);
        }
        for t in 0..self.t {
            let mut row = vec![0; self.t];
            row[t] = -1;
            a.push(row);
            b.push(0);
        }
        (a, b)
    }

    /// Distinct rows up to sign, without zero rows. `M` of the full
    /// [`constraint_matrix`](Self::constraint_matrix) equals
    /// `max(1, M(reduced rows))`.
    pub fn reduced_rows(&self) -> Vec<Vec<i64>> {
        reduce_rows(self.eq_rows.iter().chain(&self.ge_rows).map(|(r, _)| r.as_slice()))
    }

    /// One constraint per line: `<coeffs> (=|>=) <rhs>`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let fmt_row = |row: &[i64]| {
            row.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        for (r, b) in &self.eq_rows {
            let _ = writeln!(out, "{} = {}", fmt_row(r), b);
        }
        for (r, b) in &self.ge_rows {
            let _ = writeln!(out, "{} >= {}", fmt_row(r), b);
        }
        out
    }

    pub fn parse_dump(text: &str) -> Result<Self, IlpError> {
        let mut t = None;
        let mut prob = IlpProblem::new(0);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| IlpError::Dump {
                line: i + 1,
                msg: msg.to_string(),
            };
            let (lhs, rhs, eq) = if let Some((l, r)) = line.split_once(">=") {
                (l, r, false)
            } else if let Some((l, r)) = line.split_once('=') {
                (l, r, true)
            } else {
                return Err(err("missing `=` or `>=`"));
            };
            let row = lhs
                .split_whitespace()
                .map(str::parse::<i64>)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| err(&e.to_string()))?;
            let rhs = rhs.trim().parse::<i64>().map_err(|e| err(&e.to_string()))?;
            match t {
                None => t = Some(row.len()),
                Some(t) if t != row.len() => return Err(err("inconsistent row length")),
                _ => {}
            }
            if eq {
                prob.eq_rows.push((row, rhs));
            } else {
                prob.ge_rows.push((row, rhs));
            }
        }
        prob.t = t.ok_or(IlpError::NoVariables)?;
        prob.validate()?;
        Ok(prob)
    }
}

pub(crate) fn reduce_rows<'a>(rows: impl Iterator<Item = &'a [i64]>) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = Vec::new();
    for r in rows {
        let Some(first) = r.iter().find(|&&x| x != 0) else {
            continue;
        };
        let canon: Vec<i64> = if *first < 0 {
            r.iter().map(|x| -x).collect()
        } else {
            r.to_vec()
        };
        if !out.contains(&canon) {
            out.push(canon);
        }
    }
    out
}

/// Upper bound on `M` of the given rows: exact when minor enumeration fits
/// in [`MINOR_BUDGET`], Hadamard otherwise. Never below 1.
pub fn subdeterminant_upper_bound(rows: &[Vec<i64>]) -> num_bigint::BigUint {
    let m = match max_subdeterminant_bounded(rows, MINOR_BUDGET) {
        Some(m) => num_bigint::BigUint::from(m),
        None => hadamard_bound(rows),
    };
    m.max(num_bigint::BigUint::from(1u32))
}

/// A sound cap on `Σv` of some optimal solution, from the sensitivity bound:
/// each coordinate is at most `n*·M·(‖b‖∞+2)` with `n* = T`.
pub fn proximity_cap(t: usize, m_bound: &num_bigint::BigUint, b_inf: u64) -> Option<u64> {
    use num_traits::ToPrimitive;
    let t = num_bigint::BigUint::from(t);
    let cap = &t * &t * m_bound * num_bigint::BigUint::from(b_inf as u128 + 2);
    cap.to_u64()
}

/// Solves the problem to proven optimality where possible.
pub fn solve(prob: &IlpProblem) -> IlpOutcome {
    bnb::branch_and_bound(prob, None).expect("no cutoff given")
}

/// Looks only for solutions with value `< cutoff`. `None` means there is
/// none (or the problem is infeasible).
pub fn solve_with_cutoff(prob: &IlpProblem, cutoff: u64) -> Option<IlpOutcome> {
    bnb::branch_and_bound(prob, Some(cutoff))
}
