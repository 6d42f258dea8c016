//! Integer presolve: gcd tightening of `≥` rows and a lattice solvability
//! check of the equality system.

use num_integer::Integer;

use super::IlpProblem;

fn row_gcd(row: &[i64]) -> i64 {
    row.iter().fold(0i64, |g, &x| g.gcd(&x))
}

/// Returns the tightened problem, or `None` if it has no integer solution.
pub(super) fn presolve(prob: &IlpProblem) -> Option<IlpProblem> {
    let mut out = prob.clone();
    out.eq_rows.clear();
    out.ge_rows.clear();
    for (row, rhs) in &prob.eq_rows {
        let g = row_gcd(row);
        if g == 0 {
            if *rhs != 0 {
                return None;
            }
            continue;
        }
        if rhs % g != 0 {
            return None;
        }
        let r = (row.iter().map(|x| x / g).collect::<Vec<_>>(), rhs / g);
        if !out.eq_rows.contains(&r) {
            out.eq_rows.push(r);
        }
    }
    for (row, rhs) in &prob.ge_rows {
        let g = row_gcd(row);
        if g == 0 {
            if *rhs > 0 {
                return None;
            }
            continue;
        }
        let r = (row.iter().map(|x| x / g).collect::<Vec<_>>(), Integer::div_ceil(rhs, &g));
        if !out.ge_rows.contains(&r) {
            out.ge_rows.push(r);
        }
    }
    if !lattice_solvable(&out.eq_rows, out.t) {
        return None;
    }
    Some(out)
}

/// Whether `A x = b` has a solution in `Z^t`, ignoring signs. Column
/// operations bring `A` to echelon form, then the triangular system is
/// solved for integer values.
fn lattice_solvable(rows: &[(Vec<i64>, i64)], t: usize) -> bool {
    if rows.is_empty() {
        return true;
    }
    let mut a: Vec<Vec<i128>> = rows
        .iter()
        .map(|(r, _)| r.iter().map(|&x| x as i128).collect())
        .collect();
    let b: Vec<i128> = rows.iter().map(|&(_, b)| b as i128).collect();
    let m = a.len();
    // pivot[r] = Some(column) holding the pivot for row r
    let mut pivots: Vec<Option<usize>> = vec![None; m];
    let mut col = 0;
    for r in 0..m {
        if col >= t {
            break;
        }
        // Euclid on row r across columns col..t
        loop {
            let nonzero: Vec<usize> = (col..t).filter(|&c| a[r][c] != 0).collect();
            if nonzero.len() <= 1 {
                if let Some(&c) = nonzero.first() {
                    swap_cols(&mut a, c, col);
                    pivots[r] = Some(col);
                    col += 1;
                }
                break;
            }
            let p = *nonzero
                .iter()
                .min_by_key(|&&c| a[r][c].unsigned_abs())
                .unwrap();
            for &c in &nonzero {
                if c == p {
                    continue;
                }
                let q = a[r][c] / a[r][p];
                for row in a.iter_mut() {
                    let Some(v) = row[p].checked_mul(q).and_then(|x| row[c].checked_sub(x)) else {
                        return true; // overflow: be conservative
                    };
                    row[c] = v;
                }
            }
        }
    }
    // forward substitution: row r reads Σ_{c<col_r} a[r][c] y_c (+ pivot) = b_r
    let mut y = vec![0i128; t];
    for r in 0..m {
        let known: Option<i128> = (0..t)
            .filter(|&c| Some(c) != pivots[r])
            .try_fold(0i128, |s, c| a[r][c].checked_mul(y[c]).and_then(|x| s.checked_add(x)));
        let Some(known) = known else {
            return true;
        };
        let rest = b[r] - known;
        match pivots[r] {
            Some(c) => {
                if rest % a[r][c] != 0 {
                    return false;
                }
                y[c] = rest / a[r][c];
            }
            None => {
                if rest != 0 {
                    return false;
                }
            }
        }
    }
    true
}

fn swap_cols(a: &mut [Vec<i128>], i: usize, j: usize) {
    if i != j {
        for row in a.iter_mut() {
            row.swap(i, j);
        }
    }
}
