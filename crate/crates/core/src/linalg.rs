//! Dense complex helpers on top of nalgebra. Matrices act on row vectors from
//! the right (`y = x M`).

use nalgebra::DMatrix;

use crate::domain::C64;
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;

/// `x M` for a row vector `x`.
pub fn row_times(x: &[C64], m: &CMatrix) -> Vec<C64> {
    assert_eq!(x.len(), m.nrows(), "row vector length must match matrix rows");
    m.column_iter()
        .map(|col| col.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

/// `M M^H`. Time-domain channel operators are banded, so columns are scanned
/// for nonzeros and only overlapping row pairs are accumulated; dense inputs
/// go through the regular product.
pub fn gram(m: &CMatrix) -> CMatrix {
    let (rows, cols) = m.shape();
    let zero = C64::new(0.0, 0.0);
    let nnz = m.iter().filter(|v| **v != zero).count();
    if nnz * 4 > rows * cols {
        return m * m.adjoint();
    }
    let mut out = CMatrix::zeros(rows, rows);
    let mut support: Vec<(usize, C64)> = Vec::with_capacity(rows);
    for col in m.column_iter() {
        support.clear();
        support.extend(col.iter().enumerate().filter(|(_, v)| **v != zero).map(|(i, v)| (i, *v)));
        for &(i, a) in &support {
            for &(j, b) in &support {
                out[(i, j)] += a * b.conj();
            }
        }
    }
    out
}

/// Linear MMSE estimate for the row model `y = x H + v`, unit-energy symbols
/// and noise variance `n0`: `x_hat = y H^H (H H^H + n0 I)^{-1}`.
pub fn mmse_row(y: &[C64], h: &CMatrix, n0: f64) -> Result<Vec<C64>> {
    let n = h.nrows();
    let mut a = gram(h);
    for i in 0..n {
        a[(i, i)] += n0;
    }
    // z = y H^H
    let z: Vec<C64> = (0..n)
        .map(|i| (0..h.ncols()).map(|j| y[j] * h[(i, j)].conj()).sum())
        .collect();
    // x A = z with A Hermitian  <=>  A conj(x)^T = conj(z)^T
    let w = hermitian_solve(a, z.iter().map(|v| v.conj()).collect(), n0)?;
    Ok(w.iter().map(|v| v.conj()).collect())
}

fn hermitian_solve(a: CMatrix, b: Vec<C64>, n0: f64) -> Result<Vec<C64>> {
    let n = a.nrows();
    let chol = a.cholesky().ok_or(Error::SingularSystem { n0 })?;
    let l = chol.l_dirty();
    let diag_max = (0..n).map(|i| l[(i, i)].re).fold(0.0, f64::max);
    let diag_min = (0..n).map(|i| l[(i, i)].re).fold(f64::INFINITY, f64::min);
    if diag_min.is_nan() || diag_min <= 1e-10 * diag_max {
        return Err(Error::SingularSystem { n0 });
    }
    let x = chol.solve(&nalgebra::DVector::from_vec(b));
    Ok(x.iter().copied().collect())
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Singular values at or below `max(max(rows, cols) eps sigma_max, abs_floor)`
/// count as zero.
pub fn rank_threshold(sigma_max: f64, rows: usize, cols: usize, abs_floor: f64) -> f64 {
    (rows.max(cols) as f64 * f64::EPSILON * sigma_max).max(abs_floor)
}

pub fn numerical_rank(singular: &[f64], rows: usize, cols: usize, abs_floor: f64) -> usize {
    let smax = singular.iter().copied().fold(0.0, f64::max);
    let tol = rank_threshold(smax, rows, cols, abs_floor);
    singular.iter().filter(|s| **s > tol).count()
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff_matrix(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
