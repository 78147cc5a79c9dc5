//! Optimal policy for a fixed Gaussian prior.
//!
//! The backward recursion
//!
//! ```text
//! Π_T = F
//! Π_k = A'Π_{k+1}A − A'Π_{k+1}B (R + B'Π_{k+1}B + εΣ_ρ⁻¹)⁻¹ B'Π_{k+1}A
//! r_T = μ_fin
//! r_k = A⁻¹r_{k+1} − εΠ_k⁻¹A'Π_{k+1}B (Σ_ρ(R + B'Π_{k+1}B) + εI)⁻¹ μ_ρ
//! ```
//!
//! gives the value-function curvature and center. The optimal policy is the
//! normalized product of the prior with `N(μ_Q(x), Σ_Q)` where
//! `μ_Q(x) = −(R + B'Π_{k+1}B)⁻¹B'Π_{k+1}A (x − A⁻¹r_{k+1})` and
//! `Σ_Q = ε(R + B'Π_{k+1}B)⁻¹`, which is again affine-Gaussian in `x`.
//!
//! Within a step `Π_k` is computed before `r_k`, since the center update
//! needs `Π_k⁻¹`.

use nalgebra::LU;

use crate::error::{MiocpError, Result};
use crate::gaussian::{sqrtm_psd, Gaussian};
use crate::linalg::{self, clamp_psd, symmetrize, Matrix, Vector, PSD_CLAMP_TOL};
use crate::problem::{AffinePolicy, PriorSequence, ProblemSpec, ValidatedSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiSolution {
    /// `Π_0 .. Π_T`.
    pub pi: Vec<Matrix>,
    /// `r_0 .. r_T`.
    pub r: Vec<Vector>,
    /// `Γ_0 .. Γ_{T-1}`, the curvature of the Q-function's state part.
    pub gamma: Vec<Matrix>,
}

/// Per-step Gaussian factor `N(μ_Q(x), Σ_Q)` with `μ_Q(x) = gain·x + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyGaussianPieces {
    pub mu_q: Vec<(Matrix, Vector)>,
    pub sigma_q: Vec<Matrix>,
}

/// `(R_k + B_k'Π_{k+1}B_k, B_k'Π_{k+1}A_k)` for step `k`.
fn control_blocks(spec: &ProblemSpec, k: usize, pi_next: &Matrix) -> (Matrix, Matrix) {
    let (a, b) = (&spec.a[k], &spec.b[k]);
    let bt_pi = b.transpose() * pi_next;
    let m = symmetrize(&(&spec.r[k] + &bt_pi * b));
    (m, bt_pi * a)
}

fn solve_a(spec: &ProblemSpec, k: usize, v: &Vector) -> Result<Vector> {
    LU::new(spec.a[k].clone())
        .solve(v)
        .ok_or_else(|| MiocpError::NotInvertible {
            what: "A_k".into(),
            k: Some(k),
        })
}

/// One step of the prior-regularized Riccati recursion, without PSD clamping.
pub fn riccati_step(spec: &ProblemSpec, k: usize, pi_next: &Matrix, prior: &Gaussian) -> Result<Matrix> {
    let a = &spec.a[k];
    let (m, bpa) = control_blocks(spec, k, pi_next);
    let inner = symmetrize(&(m + prior.precision() * spec.epsilon));
    let correction = bpa.transpose() * linalg::spd_solve(&inner, &bpa, "R + B'ΠB + εΣ_ρ⁻¹", Some(k))?;
    Ok(symmetrize(&(a.transpose() * pi_next * a - correction)))
}

/// The same step in Woodbury form,
/// `A'Π^½ {I + Π^½ B (εΣ_ρ⁻¹ + R)⁻¹ B'Π^½}⁻¹ Π^½ A`,
/// which stays well defined when `Π_{k+1}` is singular.
pub fn woodbury_riccati_step(
    spec: &ProblemSpec,
    k: usize,
    pi_next: &Matrix,
    prior: &Gaussian,
) -> Result<Matrix> {
    let (a, b) = (&spec.a[k], &spec.b[k]);
    let n = a.nrows();
    let root = sqrtm_psd(pi_next)?;
    let c = symmetrize(&(prior.precision() * spec.epsilon + &spec.r[k]));
    let root_b = &root * b;
    let middle = &root_b * linalg::spd_solve(&c, &root_b.transpose(), "εΣ_ρ⁻¹ + R", Some(k))?;
    let inner = symmetrize(&(Matrix::identity(n, n) + middle));
    let root_a = &root * a;
    let solved = linalg::spd_solve(&inner, &root_a, "I + Π^½B(εΣ_ρ⁻¹+R)⁻¹B'Π^½", Some(k))?;
    Ok(symmetrize(&(root_a.transpose() * solved)))
}

/// `Σ_Q = ε(R + B'ΠB)⁻¹` for a given next-step curvature.
pub fn q_covariance(spec: &ProblemSpec, k: usize, pi_next: &Matrix, epsilon: f64) -> Result<Matrix> {
    let (m, _) = control_blocks(spec, k, pi_next);
    Ok(linalg::spd_inverse(&m, "R + B'ΠB", Some(k))? * epsilon)
}

fn check_prior(spec: &ProblemSpec, prior: &PriorSequence) -> Result<()> {
    prior.check_against(spec)
}

struct BackwardPass {
    riccati: RiccatiSolution,
    pieces: PolicyGaussianPieces,
}

fn backward_pass(spec: &ValidatedSpec, prior: &PriorSequence) -> Result<BackwardPass> {
    check_prior(spec, prior)?;
    let t = spec.horizon;
    let eps = spec.epsilon;
    let mut pi = vec![Matrix::zeros(0, 0); t + 1];
    let mut r = vec![Vector::zeros(0); t + 1];
    let mut gamma = vec![Matrix::zeros(0, 0); t];
    let mut mu_q = vec![(Matrix::zeros(0, 0), Vector::zeros(0)); t];
    let mut sigma_q = vec![Matrix::zeros(0, 0); t];
    pi[t] = spec.f.clone();
    r[t] = spec.mu_fin.clone();

    for k in (0..t).rev() {
        let rho = &prior.priors[k];
        let a = &spec.a[k];
        let (m, bpa) = control_blocks(spec, k, &pi[k + 1]);
        let m_chol = linalg::cholesky(&m, "R + B'ΠB", Some(k))?;
        let gain = m_chol.solve(&bpa);
        let a_pi_a = a.transpose() * &pi[k + 1] * a;

        let pi_k = clamp_psd(&riccati_step(spec, k, &pi[k + 1], rho)?, PSD_CLAMP_TOL)?;
        gamma[k] = clamp_psd(&(&a_pi_a - bpa.transpose() * &gain), PSD_CLAMP_TOL)?;

        let sq = symmetrize(&(m_chol.inverse() * eps));
        let a_inv_r = solve_a(spec, k, &r[k + 1])?;
        // ε A'ΠB (Σ_ρ M + εI)⁻¹ μ_ρ = ε K' (Σ_ρ + Σ_Q)⁻¹ μ_ρ
        let s = symmetrize(&(rho.cov() + &sq));
        let w = linalg::spd_solve_vec(&s, rho.mean(), "Σ_ρ + Σ_Q", Some(k))?;
        let c = gain.transpose() * w * eps;
        let pi_chol = linalg::cholesky(&pi_k, "Π_k", Some(k)).map_err(|_| MiocpError::NotInvertible {
            what: "Π_k (needs invertible A_k)".into(),
            k: Some(k),
        })?;
        r[k] = &a_inv_r - pi_chol.solve(&c);
        pi[k] = pi_k;

        mu_q[k] = (-&gain, &gain * &a_inv_r);
        sigma_q[k] = sq;
    }

    Ok(BackwardPass {
        riccati: RiccatiSolution { pi, r, gamma },
        pieces: PolicyGaussianPieces { mu_q, sigma_q },
    })
}

/// Backward recursion for `Π_k`, `r_k` and `Γ_k` under the given prior.
pub fn solve_riccati(spec: &ValidatedSpec, prior: &PriorSequence) -> Result<RiccatiSolution> {
    backward_pass(spec, prior).map(|bp| bp.riccati)
}

/// The Q-function factor `N(μ_Q(x), Σ_Q)` for each step, from a Riccati solution.
pub fn policy_pieces(spec: &ValidatedSpec, riccati: &RiccatiSolution) -> Result<PolicyGaussianPieces> {
    let t = spec.horizon;
    let mut mu_q = Vec::with_capacity(t);
    let mut sigma_q = Vec::with_capacity(t);
    for k in 0..t {
        let (m, bpa) = control_blocks(spec, k, &riccati.pi[k + 1]);
        let chol = linalg::cholesky(&m, "R + B'ΠB", Some(k))?;
        let gain = chol.solve(&bpa);
        let a_inv_r = solve_a(spec, k, &riccati.r[k + 1])?;
        mu_q.push((-&gain, &gain * a_inv_r));
        sigma_q.push(symmetrize(&(chol.inverse() * spec.epsilon)));
    }
    Ok(PolicyGaussianPieces { mu_q, sigma_q })
}

/// Combines prior and Q-factor into `N(P_k x + q_k, Σ_{π_k})`:
/// `mean = Σ_Q(Σ_ρ+Σ_Q)⁻¹μ_ρ + Σ_ρ(Σ_ρ+Σ_Q)⁻¹μ_Q(x)`,
/// `Σ_π = Σ_ρ(Σ_ρ+Σ_Q)⁻¹Σ_Q`.
fn combine(prior: &PriorSequence, pieces: &PolicyGaussianPieces) -> Result<AffinePolicy> {
    let t = prior.len();
    let mut p = Vec::with_capacity(t);
    let mut q = Vec::with_capacity(t);
    let mut sigma_pi = Vec::with_capacity(t);
    for k in 0..t {
        let rho = &prior.priors[k];
        let (gain, offset) = &pieces.mu_q[k];
        let sq = &pieces.sigma_q[k];
        let s = symmetrize(&(rho.cov() + sq));
        let chol = linalg::cholesky(&s, "Σ_ρ + Σ_Q", Some(k))?;
        p.push(rho.cov() * chol.solve(gain));
        q.push(sq * chol.solve(rho.mean()) + rho.cov() * chol.solve(offset));
        let cov = symmetrize(&(rho.cov() * chol.solve(sq)));
        linalg::cholesky(&cov, "Σ_π", Some(k))?;
        sigma_pi.push(cov);
    }
    AffinePolicy::new(p, q, sigma_pi)
}

/// The optimal policy for a fixed prior. It lies in the affine-Gaussian class.
pub fn optimal_policy(spec: &ValidatedSpec, prior: &PriorSequence) -> Result<AffinePolicy> {
    let bp = backward_pass(spec, prior)?;
    combine(prior, &bp.pieces)
}

/// Plain LQR Riccati recursion `Π̂`, the limit of [`solve_riccati`] as the
/// prior flattens out.
pub fn meocp_riccati(spec: &ValidatedSpec) -> Result<Vec<Matrix>> {
    let t = spec.horizon;
    let mut pi = vec![Matrix::zeros(0, 0); t + 1];
    pi[t] = spec.f.clone();
    for k in (0..t).rev() {
        let a = &spec.a[k];
        let (m, bpa) = control_blocks(spec, k, &pi[k + 1]);
        let gain = linalg::spd_solve(&m, &bpa, "R + B'ΠB", Some(k))?;
        let raw = a.transpose() * &pi[k + 1] * a - bpa.transpose() * gain;
        pi[k] = clamp_psd(&raw, PSD_CLAMP_TOL)?;
    }
    Ok(pi)
}

/// The maximum-entropy policy `N(μ̂_Q(x), Σ̂_Q)`: the optimal policy when the
/// prior is the improper uniform distribution.
pub fn meocp_policy(spec: &ValidatedSpec) -> Result<AffinePolicy> {
    let pi = meocp_riccati(spec)?;
    let t = spec.horizon;
    let mut r_hat = spec.mu_fin.clone();
    let mut p = vec![Matrix::zeros(0, 0); t];
    let mut q = vec![Vector::zeros(0); t];
    let mut sigma_pi = vec![Matrix::zeros(0, 0); t];
    for k in (0..t).rev() {
        let (m, bpa) = control_blocks(spec, k, &pi[k + 1]);
        let chol = linalg::cholesky(&m, "R + B'ΠB", Some(k))?;
        let gain = chol.solve(&bpa);
        let a_inv_r = solve_a(spec, k, &r_hat)?;
        p[k] = -&gain;
        q[k] = &gain * &a_inv_r;
        sigma_pi[k] = symmetrize(&(chol.inverse() * spec.epsilon));
        r_hat = a_inv_r;
    }
    AffinePolicy::new(p, q, sigma_pi)
}
