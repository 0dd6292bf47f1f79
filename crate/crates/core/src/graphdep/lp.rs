//! Dense tableau simplex for `max cᵀx  s.t.  Ax ≤ b, x ≥ 0` with `b ≥ 0`.
//!
//! The origin is feasible, so no phase one is needed. Bland's rule is used
//! for both entering and leaving variables, which rules out cycling. Only
//! intended for desk-scale problems (tens of rows and columns).

use crate::error::{Error, Result};

const EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub value: f64,
    pub primal: Vec<f64>,
    /// Optimal multipliers of the `Ax ≤ b` rows (solution of the dual
    /// `min bᵀy s.t. Aᵀy ≥ c, y ≥ 0`).
    pub dual: Vec<f64>,
}

pub fn maximize(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<LpSolution> {
    let rows = a.len();
    let cols = c.len();
    if b.len() != rows || a.iter().any(|r| r.len() != cols) {
        return Err(Error::Structural("constraint matrix shape mismatch".into()));
    }
    if b.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::Domain("right-hand side must be finite and nonnegative".into()));
    }

    // Columns: structural 0..cols, slacks cols..cols+rows, rhs last.
    let width = cols + rows + 1;
    let mut tab = vec![vec![0.0; width]; rows + 1];
    for (i, row) in a.iter().enumerate() {
        tab[i][..cols].copy_from_slice(row);
        tab[i][cols + i] = 1.0;
        tab[i][width - 1] = b[i];
    }
    for (j, &cj) in c.iter().enumerate() {
        tab[rows][j] = -cj;
    }
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    let max_iter = 50 * (rows + cols + 1);
    for _ in 0..max_iter {
        let Some(enter) = (0..cols + rows).find(|&j| tab[rows][j] < -EPS) else {
            let mut primal = vec![0.0; cols];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < cols {
                    primal[bv] = tab[i][width - 1];
                }
            }
            let dual = (0..rows).map(|i| tab[rows][cols + i].max(0.0)).collect();
            return Ok(LpSolution { value: tab[rows][width - 1], primal, dual });
        };

        let mut leave: Option<(usize, f64)> = None;
        for i in 0..rows {
            let coef = tab[i][enter];
            if coef > EPS {
                let ratio = tab[i][width - 1] / coef;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - EPS || (ratio <= lr + EPS && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let Some((pivot_row, _)) = leave else {
            return Err(Error::Domain("linear program is unbounded".into()));
        };

        let p = tab[pivot_row][enter];
        for v in tab[pivot_row].iter_mut() {
            *v /= p;
        }
        let pivot = tab[pivot_row].clone();
        for (i, row) in tab.iter_mut().enumerate() {
            if i == pivot_row {
                continue;
            }
            let f = row[enter];
            if f != 0.0 {
                for (x, &pv) in row.iter_mut().zip(&pivot) {
                    *x -= f * pv;
                }
            }
        }
        basis[pivot_row] = enter;
    }
    Err(Error::Domain("simplex iteration limit reached".into()))
}
