//! Exact evaluation of the objective for an affine-Gaussian policy and a
//! Gaussian prior. Every expectation is taken in closed form over the
//! propagated state moments, so no sampling noise enters the solver's
//! monotonicity checks.

use serde::{Deserialize, Serialize};

use crate::error::{MiocpError, Result};
use crate::gaussian::Gaussian;
use crate::linalg::{self, symmetrize, Matrix, Vector};
use crate::prior_update::{propagate_moments, StateMoments};
use crate::problem::{AffinePolicy, PriorSequence, ProblemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepCost {
    pub quadratic: f64,
    /// Already scaled by ε.
    pub kl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    pub quadratic_cost: f64,
    pub kl_cost: f64,
    pub terminal_cost: f64,
    pub total: f64,
    pub per_step: Vec<StepCost>,
}

/// `E_x[D_KL[N(Px+q, Σ_π) ‖ N(μ_ρ, Σ_ρ)]]` for `x ~ N(μ_x, Σ_x)`:
///
/// ```text
/// ½[log(|Σ_ρ|/|Σ_π|) − m + Tr(Σ_ρ⁻¹Σ_π) + Tr(Σ_ρ⁻¹PΣ_xP') + ‖μ_ρ − (Pμ_x+q)‖²_{Σ_ρ⁻¹}]
/// ```
///
/// The `Tr(Σ_ρ⁻¹PΣ_xP')` term is the expectation of the mean mismatch
/// that varies with `x`.
pub fn expected_kl(
    p: &Matrix,
    q: &Vector,
    sigma_pi: &Matrix,
    mu_x: &Vector,
    sigma_x: &Matrix,
    prior: &Gaussian,
) -> Result<f64> {
    let m = prior.dim();
    if q.len() != m || sigma_pi.shape() != (m, m) || p.nrows() != m || p.ncols() != mu_x.len() {
        return Err(MiocpError::dims(
            "expected_kl",
            format!("input dimension {m}"),
            format!("P {:?}, q {}, sigma_pi {:?}", p.shape(), q.len(), sigma_pi.shape()),
        ));
    }
    let pi_chol = linalg::cholesky(sigma_pi, "Σ_π", None)?;
    let rho_chol = prior.chol();
    let spread = symmetrize(&(p * sigma_x * p.transpose()));
    let diff = prior.mean() - (p * mu_x + q);
    let value = 0.5
        * (prior.log_det_cov() - linalg::log_det_chol(&pi_chol) - m as f64
            + rho_chol.solve(sigma_pi).trace()
            + rho_chol.solve(&spread).trace()
            + diff.dot(&rho_chol.solve(&diff)));
    Ok(value.max(0.0))
}

/// Mutual information between `x ~ N(·, Σ_x)` and `u | x ~ N(Px + q, Σ_π)`:
/// `½ log(|Σ_π + PΣ_xP'| / |Σ_π|)`.
pub fn mutual_information(p: &Matrix, sigma_pi: &Matrix, sigma_x: &Matrix) -> Result<f64> {
    let marginal = symmetrize(&(sigma_pi + p * sigma_x * p.transpose()));
    let num = linalg::cholesky(&marginal, "Σ_π + PΣ_xP'", None)?;
    let den = linalg::cholesky(sigma_pi, "Σ_π", None)?;
    Ok((0.5 * (linalg::log_det_chol(&num) - linalg::log_det_chol(&den))).max(0.0))
}

/// `J(π, ρ)` split into its quadratic, KL and terminal parts.
pub fn evaluate_objective(
    spec: &ProblemSpec,
    policy: &AffinePolicy,
    prior: &PriorSequence,
) -> Result<ObjectiveBreakdown> {
    prior.check_against(spec)?;
    let moments = propagate_moments(spec, policy)?;
    evaluate_with_moments(spec, policy, prior, &moments)
}

pub fn evaluate_with_moments(
    spec: &ProblemSpec,
    policy: &AffinePolicy,
    prior: &PriorSequence,
    moments: &StateMoments,
) -> Result<ObjectiveBreakdown> {
    let t = spec.horizon;
    let mut per_step = Vec::with_capacity(t);
    for k in 0..t {
        let (p, q, sp) = (&policy.p[k], &policy.q[k], &policy.sigma_pi[k]);
        let (mu_x, sigma_x) = (&moments.mu_x[k], &moments.sigma_x[k]);
        let r = &spec.r[k];
        let mu_u = p * mu_x + q;
        let sigma_u = sp + p * sigma_x * p.transpose();
        let quadratic = 0.5 * (mu_u.dot(&(r * &mu_u)) + (r * sigma_u).trace());
        let kl = spec.epsilon * expected_kl(p, q, sp, mu_x, sigma_x, &prior.priors[k])?;
        per_step.push(StepCost { quadratic, kl });
    }
    let miss = &moments.mu_x[t] - &spec.mu_fin;
    let terminal_cost = 0.5 * (miss.dot(&(&spec.f * &miss)) + (&spec.f * &moments.sigma_x[t]).trace());
    let quadratic_cost = per_step.iter().map(|s| s.quadratic).sum::<f64>();
    let kl_cost = per_step.iter().map(|s| s.kl).sum::<f64>();
    Ok(ObjectiveBreakdown {
        quadratic_cost,
        kl_cost,
        terminal_cost,
        total: quadratic_cost + kl_cost + terminal_cost,
        per_step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn one_step_hand_computation() {
        let spec = ProblemSpec::time_invariant(
            1,
            Matrix::identity(2, 2),
            Matrix::identity(2, 2),
            Matrix::identity(2, 2) * 1e-12,
            Matrix::identity(2, 2),
            Matrix::identity(2, 2),
            1.0,
            Vector::zeros(2),
            Matrix::identity(2, 2) * 1e-12,
            Vector::zeros(2),
        );
        let pol = AffinePolicy::new(
            vec![Matrix::zeros(2, 2)],
            vec![Vector::zeros(2)],
            vec![Matrix::identity(2, 2)],
        )
        .unwrap();
        let prior = PriorSequence::broadcast(Gaussian::standard(2), 1);
        let j = evaluate_objective(&spec, &pol, &prior).unwrap();
        assert_abs_diff_eq!(j.quadratic_cost, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(j.kl_cost, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(j.terminal_cost, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(j.total, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn prior_matching_state_free_policy_has_no_kl() {
        let spec = ProblemSpec::benchmark_2d(2.0);
        let q = Vector::from_element(1, 0.4);
        let sp = Matrix::from_element(1, 1, 0.3);
        let pol = AffinePolicy::new(vec![Matrix::zeros(1, 2); 50], vec![q.clone(); 50], vec![sp.clone(); 50]).unwrap();
        let prior = PriorSequence::broadcast(Gaussian::new(q, sp).unwrap(), 50);
        let j = evaluate_objective(&spec, &pol, &prior).unwrap();
        assert_abs_diff_eq!(j.kl_cost, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn mutual_information_examples() {
        let z = mutual_information(&Matrix::zeros(1, 2), &Matrix::identity(1, 1), &Matrix::identity(2, 2)).unwrap();
        assert_eq!(z, 0.0);
        let mi = mutual_information(
            &Matrix::from_element(1, 1, 1.0),
            &Matrix::from_element(1, 1, 1.0),
            &Matrix::from_element(1, 1, 3.0),
        )
        .unwrap();
        assert_abs_diff_eq!(mi, 0.5 * 4.0f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(mi, 0.693147, epsilon = 1e-6);
    }

    #[test]
    fn total_is_sum_of_parts() {
        let spec = ProblemSpec::benchmark_2d(4.0).validate().unwrap();
        let prior = spec.initial_prior();
        let pol = crate::synthesis::optimal_policy(&spec, &prior).unwrap();
        let j = evaluate_objective(&spec, &pol, &prior).unwrap();
        assert!((j.total - (j.quadratic_cost + j.kl_cost + j.terminal_cost)).abs() <= 1e-10);
        assert!(j.quadratic_cost >= 0.0 && j.kl_cost >= 0.0 && j.terminal_cost >= 0.0);
        assert_eq!(j.per_step.len(), 50);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let spec = ProblemSpec::benchmark_2d(4.0);
        let pol = AffinePolicy::new(vec![Matrix::zeros(1, 2); 50], vec![Vector::zeros(1); 50], vec![Matrix::identity(1, 1); 50]).unwrap();
        let prior = PriorSequence::broadcast(Gaussian::standard(2), 50);
        assert!(evaluate_objective(&spec, &pol, &prior).is_err());
    }
}
