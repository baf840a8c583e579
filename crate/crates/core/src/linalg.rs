//! Dense helpers that nalgebra does not provide directly.

use nalgebra::{DMatrix, DVector};

/// Relative pivot threshold used for every rank decision in the crate.
pub const RANK_REL_TOL: f64 = 1e-10;

/// Numerical rank by Gaussian elimination with full pivoting.
///
/// A pivot counts as nonzero when it exceeds `rel_tol` times the largest
/// pivot met (the first one). A zero matrix has rank 0.
pub fn pivoted_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let mut rank = 0;
    let mut first_pivot = 0.0_f64;
    for step in 0..rows.min(cols) {
        let mut best = (step, step, 0.0_f64);
        for i in step..rows {
            for j in step..cols {
                let v = a[(i, j)].abs();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        let (pi, pj, pv) = best;
        if step == 0 {
            first_pivot = pv;
        }
        if pv == 0.0 || pv <= rel_tol * first_pivot || !pv.is_finite() {
            break;
        }
        a.swap_rows(step, pi);
        a.swap_columns(step, pj);
        let pivot = a[(step, step)];
        for i in step + 1..rows {
            let factor = a[(i, step)] / pivot;
            if factor != 0.0 {
                for j in step..cols {
                    let upd = factor * a[(step, j)];
                    a[(i, j)] -= upd;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Solves a square system after confirming full numerical rank.
///
/// Returns `Err(rank)` when the matrix is rank deficient.
pub fn solve_full_rank(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>, usize> {
    let n = a.nrows();
    if n == 0 {
        return Ok(DVector::zeros(0));
    }
    let rank = pivoted_rank(a, RANK_REL_TOL);
    if rank < n {
        return Err(rank);
    }
    a.clone().full_piv_lu().solve(b).ok_or(rank)
}

/// Largest absolute entry, 0 for empty input.
pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
