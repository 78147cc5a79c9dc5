//! Multivariate Gaussian distributions with the closed-form operations the
//! controller needs: KL divergence, normalized products, squared
//! Wasserstein-2 distance and seeded sampling.
//!
//! A [`Gaussian`] always carries a strictly positive definite covariance. The
//! Cholesky factor computed during construction is kept around and reused for
//! log-determinants, solves and sampling.

use nalgebra::{Cholesky, Dyn, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{MiocpError, Result};
use crate::linalg::{log_det_chol, symmetrize, Matrix, Vector};

/// Eigenvalues below this are rejected by [`sqrtm_psd`].
pub const SQRTM_NEG_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Gaussian {
    mean: Vector,
    cov: Matrix,
    chol: Cholesky<f64, Dyn>,
}

impl PartialEq for Gaussian {
    fn eq(&self, other: &Self) -> bool {
        self.mean == other.mean && self.cov == other.cov
    }
}

impl Gaussian {
    /// Builds `N(mean, cov)`. The covariance is symmetrized first and must
    /// admit a Cholesky factorization.
    pub fn new(mean: Vector, cov: Matrix) -> Result<Self> {
        let d = mean.len();
        if cov.nrows() != d || cov.ncols() != d {
            return Err(MiocpError::dims(
                "Gaussian covariance",
                format!("{d}x{d}"),
                format!("{}x{}", cov.nrows(), cov.ncols()),
            ));
        }
        if d == 0 {
            return Err(MiocpError::dims("Gaussian dimension", ">= 1", 0));
        }
        let cov = symmetrize(&cov);
        let chol = crate::linalg::cholesky(&cov, "Gaussian covariance", None)?;
        Ok(Gaussian { mean, cov, chol })
    }

    pub fn standard(d: usize) -> Self {
        Gaussian::new(Vector::zeros(d), Matrix::identity(d, d))
            .expect("identity covariance is PD")
    }

    pub fn scalar(mean: f64, var: f64) -> Result<Self> {
        Gaussian::new(Vector::from_element(1, mean), Matrix::from_element(1, 1, var))
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &Vector {
        &self.mean
    }

    pub fn cov(&self) -> &Matrix {
        &self.cov
    }

    pub fn chol(&self) -> &Cholesky<f64, Dyn> {
        &self.chol
    }

    /// Lower Cholesky factor of the covariance.
    pub fn chol_lower(&self) -> Matrix {
        self.chol.l()
    }

    pub fn log_det_cov(&self) -> f64 {
        log_det_chol(&self.chol)
    }

    /// `Σ⁻¹` computed from the stored factor.
    pub fn precision(&self) -> Matrix {
        symmetrize(&self.chol.inverse())
    }

    pub fn log_pdf(&self, x: &Vector) -> f64 {
        let d = self.dim() as f64;
        let diff = x - &self.mean;
        let maha = diff.dot(&self.chol.solve(&diff));
        -0.5 * (d * (2.0 * std::f64::consts::PI).ln() + self.log_det_cov() + maha)
    }

    fn check_same_dim(&self, other: &Gaussian, context: &str) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(MiocpError::dims(context, self.dim(), other.dim()));
        }
        Ok(())
    }

    /// Draws `count` samples `μ + L z` with `z` standard normal.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<Vector> {
        let l = self.chol.l();
        (0..count).map(|_| self.sample_with(&l, rng)).collect()
    }

    pub(crate) fn sample_with<R: Rng + ?Sized>(&self, lower: &Matrix, rng: &mut R) -> Vector {
        let z = Vector::from_fn(self.dim(), |_, _| rng.sample(StandardNormal));
        &self.mean + lower * z
    }
}

/// `D_KL[p ‖ q]` in closed form.
pub fn kl_divergence(p: &Gaussian, q: &Gaussian) -> Result<f64> {
    p.check_same_dim(q, "kl_divergence")?;
    let d = p.dim() as f64;
    let diff = q.mean() - p.mean();
    let trace = q.chol().solve(p.cov()).trace();
    let maha = diff.dot(&q.chol().solve(&diff));
    let kl = 0.5 * (q.log_det_cov() - p.log_det_cov() - d + trace + maha);
    Ok(kl.max(0.0))
}

/// The normalized density proportional to `p(u) q(u)`:
/// `N(Σ_q(Σ_p+Σ_q)⁻¹μ_p + Σ_p(Σ_p+Σ_q)⁻¹μ_q, Σ_p(Σ_p+Σ_q)⁻¹Σ_q)`.
pub fn product(p: &Gaussian, q: &Gaussian) -> Result<Gaussian> {
    p.check_same_dim(q, "product")?;
    let sum = p.cov() + q.cov();
    let sum_chol = crate::linalg::cholesky(&sum, "sum of covariances", None)?;
    let mean = q.cov() * sum_chol.solve(p.mean()) + p.cov() * sum_chol.solve(q.mean());
    let cov = p.cov() * sum_chol.solve(q.cov());
    Gaussian::new(mean, cov)
}

/// Squared Wasserstein-2 distance between two Gaussians,
/// `‖μ_p−μ_q‖² + Tr(Σ_p + Σ_q − 2(Σ_q^½ Σ_p Σ_q^½)^½)`.
pub fn wasserstein2_sq(p: &Gaussian, q: &Gaussian) -> Result<f64> {
    p.check_same_dim(q, "wasserstein2_sq")?;
    let mean_term = (p.mean() - q.mean()).norm_squared();
    let root_q = sqrtm_psd(q.cov())?;
    let cross = sqrtm_psd(&symmetrize(&(&root_q * p.cov() * &root_q)))?;
    let cov_term = p.cov().trace() + q.cov().trace() - 2.0 * cross.trace();
    Ok((mean_term + cov_term).max(0.0))
}

/// Principal square root of a symmetric PSD matrix via symmetric
/// eigendecomposition, clamping roundoff-negative eigenvalues to zero.
pub fn sqrtm_psd(m: &Matrix) -> Result<Matrix> {
    if !m.is_square() {
        return Err(MiocpError::dims(
            "sqrtm_psd",
            "square matrix",
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -SQRTM_NEG_TOL {
        return Err(MiocpError::NotPositiveSemidefinite {
            min_eigenvalue: min,
        });
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let s = &eig.eigenvectors * Matrix::from_diagonal(&roots) * eig.eigenvectors.transpose();
    Ok(symmetrize(&s))
}
