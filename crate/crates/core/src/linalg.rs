//! Small dense helpers shared by the solver modules.
//!
//! Every inverse of an SPD matrix goes through a Cholesky factorization.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{MiocpError, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Tolerance on negative eigenvalues accepted before clamping a matrix to PSD.
pub const PSD_CLAMP_TOL: f64 = 1e-9;

/// Minimum reciprocal condition number for a matrix to count as invertible.
pub const RCOND_MIN: f64 = 1e-12;

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

pub fn cholesky(m: &Matrix, what: &str, k: Option<usize>) -> Result<Cholesky<f64, Dyn>> {
    if !m.is_square() || m.iter().any(|v| !v.is_finite()) {
        return Err(MiocpError::NotPositiveDefinite {
            what: what.to_string(),
            k,
        });
    }
    Cholesky::new(m.clone()).ok_or_else(|| MiocpError::NotPositiveDefinite {
        what: what.to_string(),
        k,
    })
}

/// `M⁻¹ X` for SPD `M`.
pub fn spd_solve(m: &Matrix, rhs: &Matrix, what: &str, k: Option<usize>) -> Result<Matrix> {
    Ok(cholesky(m, what, k)?.solve(rhs))
}

pub fn spd_solve_vec(m: &Matrix, rhs: &Vector, what: &str, k: Option<usize>) -> Result<Vector> {
    Ok(cholesky(m, what, k)?.solve(rhs))
}

pub fn spd_inverse(m: &Matrix, what: &str, k: Option<usize>) -> Result<Matrix> {
    Ok(symmetrize(&cholesky(m, what, k)?.inverse()))
}

/// `log|M|` from the Cholesky diagonal.
pub fn log_det_chol(chol: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

pub fn min_eigenvalue(m: &Matrix) -> f64 {
    SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Symmetrizes `m`, rejects eigenvalues below `-tol` and clamps the rest at zero.
///
/// The eigendecomposition is only used to rebuild the matrix when a negative
/// eigenvalue is actually present, so PSD inputs pass through untouched apart
/// from symmetrization.
pub fn clamp_psd(m: &Matrix, tol: f64) -> Result<Matrix> {
    let sym = symmetrize(m);
    let eig = SymmetricEigen::new(sym.clone());
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -tol {
        return Err(MiocpError::NotPositiveSemidefinite {
            min_eigenvalue: min,
        });
    }
    if min >= 0.0 {
        return Ok(sym);
    }
    let clamped = eig.eigenvalues.map(|l| l.max(0.0));
    let rebuilt = &eig.eigenvectors * Matrix::from_diagonal(&clamped) * eig.eigenvectors.transpose();
    Ok(symmetrize(&rebuilt))
}

/// Reciprocal condition number in the 2-norm (σ_min / σ_max).
pub fn rcond(m: &Matrix) -> f64 {
    if m.nrows() == 0 || m.iter().any(|v| !v.is_finite()) {
        return 0.0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).amax()
}

pub fn rel_frobenius(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Option<Matrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return None;
    }
    Some(Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}
