//! Dense two-phase simplex over arbitrary-precision rationals, Bland's rule.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Eq,
    Ge,
    Le,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpRow {
    pub coeffs: Vec<BigRational>,
    pub kind: RowKind,
    pub rhs: BigRational,
}

/// `min objective·x` subject to `rows`, `x ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub n: usize,
    pub objective: Vec<BigRational>,
    pub rows: Vec<LpRow>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpResult {
    Optimal { value: BigRational, x: Vec<BigRational> },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            objective: vec![BigRational::zero(); n],
            rows: Vec::new(),
        }
    }

    pub fn add_row(&mut self, coeffs: Vec<BigRational>, kind: RowKind, rhs: BigRational) {
        assert_eq!(coeffs.len(), self.n, "row length must equal variable count");
        self.rows.push(LpRow { coeffs, kind, rhs });
    }

    pub fn add_int_row(&mut self, coeffs: &[i64], kind: RowKind, rhs: i64) {
        self.add_row(coeffs.iter().map(|&c| rat(c)).collect(), kind, rat(rhs));
    }

    pub fn solve(&self) -> LpResult {
        Tableau::build(self).run(&self.objective)
    }
}

pub(crate) fn rat(x: i64) -> BigRational {
    BigRational::from_integer(x.into())
}

struct Tableau {
    /// `rows × (cols + 1)`; the last column is the right-hand side.
    a: Vec<Vec<BigRational>>,
    basis: Vec<usize>,
    n_struct: usize,
    n_total: usize,
    first_artificial: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n_slack = lp.rows.iter().filter(|r| r.kind != RowKind::Eq).count();
        let m = lp.rows.len();
        let first_artificial = lp.n + n_slack;
        let mut a = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut slack = lp.n;
        let mut artificial = first_artificial;
        let mut width_rows = Vec::with_capacity(m);
        for row in &lp.rows {
            let mut coeffs = row.coeffs.clone();
            let mut rhs = row.rhs.clone();
            let mut slack_coef = match row.kind {
                RowKind::Eq => None,
                RowKind::Ge => Some(-BigRational::one()),
                RowKind::Le => Some(BigRational::one()),
            };
            if rhs.is_negative() {
                coeffs.iter_mut().for_each(|c| *c = -c.clone());
                rhs = -rhs;
                slack_coef = slack_coef.map(|s| -s);
            }
            let slack_idx = slack_coef.as_ref().map(|_| {
                slack += 1;
                slack - 1
            });
            let basic = match (&slack_coef, slack_idx) {
                (Some(s), Some(i)) if s.is_one() => i,
                _ => {
                    artificial += 1;
                    artificial - 1
                }
            };
            width_rows.push((coeffs, slack_idx.zip(slack_coef), basic, rhs));
            basis.push(basic);
        }
        let n_total = artificial;
        for (coeffs, slack, basic, rhs) in width_rows {
            let mut row = vec![BigRational::zero(); n_total + 1];
            for (j, c) in coeffs.into_iter().enumerate() {
                row[j] = c;
            }
            if let Some((i, s)) = slack {
                row[i] = s;
            }
            row[basic] = BigRational::one();
            row[n_total] = rhs;
            a.push(row);
        }
        Self {
            a,
            basis,
            n_struct: lp.n,
            n_total,
            first_artificial,
        }
    }

    fn rhs(&self, r: usize) -> &BigRational {
        &self.a[r][self.n_total]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.a[r][c].clone();
        if !p.is_one() {
            for x in self.a[r].iter_mut() {
                if !x.is_zero() {
                    *x /= &p;
                }
            }
        }
        let pivot_row = self.a[r].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Reduced costs `c_j - c_B B^-1 A_j` for the active columns.
    fn reduced_costs(&self, cost: &[BigRational], active: usize) -> Vec<BigRational> {
        let mut d: Vec<BigRational> = cost[..active].to_vec();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (j, dj) in d.iter_mut().enumerate() {
                let x = &self.a[r][j];
                if !x.is_zero() {
                    *dj -= cb * x;
                }
            }
        }
        d
    }

    /// Minimizes `cost` over columns `< active`. Returns false if unbounded.
    fn optimize(&mut self, cost: &[BigRational], active: usize) -> bool {
        loop {
            let d = self.reduced_costs(cost, active);
            let Some(enter) = (0..active).find(|&j| d[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<(usize, BigRational)> = None;
            for r in 0..self.a.len() {
                let x = &self.a[r][enter];
                if !x.is_positive() {
                    continue;
                }
                let ratio = self.rhs(r) / x;
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }

    fn run(mut self, objective: &[BigRational]) -> LpResult {
        if self.first_artificial < self.n_total {
            let mut cost = vec![BigRational::zero(); self.n_total];
            for c in cost.iter_mut().skip(self.first_artificial) {
                *c = BigRational::one();
            }
            self.optimize(&cost, self.n_total);
            let infeasibility: BigRational = self
                .basis
                .iter()
                .enumerate()
                .filter(|(_, &b)| b >= self.first_artificial)
                .map(|(r, _)| self.rhs(r).clone())
                .sum();
            if infeasibility.is_positive() {
                return LpResult::Infeasible;
            }
            // drive artificials out of the basis, dropping redundant rows
            let mut r = 0;
            while r < self.a.len() {
                if self.basis[r] >= self.first_artificial {
                    match (0..self.first_artificial).find(|&j| !self.a[r][j].is_zero()) {
                        Some(j) => self.pivot(r, j),
                        None => {
                            self.a.remove(r);
                            self.basis.remove(r);
                            continue;
                        }
                    }
                }
                r += 1;
            }
        }
        let mut cost = vec![BigRational::zero(); self.n_total];
        cost[..self.n_struct].clone_from_slice(objective);
        if !self.optimize(&cost, self.first_artificial) {
            return LpResult::Unbounded;
        }
        let mut x = vec![BigRational::zero(); self.n_struct];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.n_struct {
                x[b] = self.rhs(r).clone();
            }
        }
        let value = x.iter().zip(objective).map(|(x, c)| x * c).sum();
        LpResult::Optimal { value, x }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn fractional_optimum() {
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![rat(1)];
        lp.add_int_row(&[2], RowKind::Ge, 3);
        assert_eq!(
            lp.solve(),
            LpResult::Optimal {
                value: r(3, 2),
                x: vec![r(3, 2)]
            }
        );
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![rat(1), rat(1)];
        lp.add_int_row(&[1, 1], RowKind::Le, 1);
        lp.add_int_row(&[1, 1], RowKind::Ge, 2);
        assert_eq!(lp.solve(), LpResult::Infeasible);

        let mut lp = LinearProgram::new(2);
        lp.objective = vec![rat(-1), rat(0)];
        lp.add_int_row(&[1, -1], RowKind::Le, 1);
        assert_eq!(lp.solve(), LpResult::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        let mut lp = LinearProgram::new(3);
        lp.objective = vec![rat(1), rat(1), rat(1)];
        lp.add_int_row(&[1, -1, 0], RowKind::Eq, 2);
        lp.add_int_row(&[2, -2, 0], RowKind::Eq, 4);
        lp.add_int_row(&[0, 1, -1], RowKind::Eq, -1);
        match lp.solve() {
            LpResult::Optimal { value, x } => {
                assert_eq!(value, rat(3));
                assert_eq!(x, vec![rat(2), rat(0), rat(1)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under the largest-coefficient rule
        let mut lp = LinearProgram::new(4);
        lp.objective = vec![r(-3, 4), rat(150), r(-1, 50), rat(6)];
        lp.add_row(vec![r(1, 4), rat(-60), r(-1, 25), rat(9)], RowKind::Le, rat(0));
        lp.add_row(vec![r(1, 2), rat(-90), r(-1, 50), rat(3)], RowKind::Le, rat(0));
        lp.add_row(vec![rat(0), rat(0), rat(1), rat(0)], RowKind::Le, rat(1));
        match lp.solve() {
            LpResult::Optimal { value, .. } => assert_eq!(value, r(-1, 20)),
            other => panic!("{other:?}"),
        }
    }
}
