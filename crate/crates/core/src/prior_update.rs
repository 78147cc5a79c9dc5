//! State-moment propagation under an affine-Gaussian policy and the optimal
//! prior for a fixed policy.

use crate::error::Result;
use crate::gaussian::Gaussian;
use crate::linalg::{symmetrize, Matrix, Vector};
use crate::problem::{AffinePolicy, PriorSequence, ProblemSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct StateMoments {
    /// `μ_{x_0} .. μ_{x_T}`.
    pub mu_x: Vec<Vector>,
    /// `Σ_{x_0} .. Σ_{x_T}`.
    pub sigma_x: Vec<Matrix>,
}

/// Forward recursion
/// `μ_{k+1} = (A+BP)μ_k + Bq`,
/// `Σ_{k+1} = (A+BP)Σ_k(A+BP)' + BΣ_πB' + Σ_w`.
pub fn propagate_moments(spec: &ProblemSpec, policy: &AffinePolicy) -> Result<StateMoments> {
    policy.check_against(spec)?;
    let t = spec.horizon;
    let mut mu_x = Vec::with_capacity(t + 1);
    let mut sigma_x = Vec::with_capacity(t + 1);
    mu_x.push(spec.mu_ini.clone());
    sigma_x.push(symmetrize(&spec.sigma_ini));
    for k in 0..t {
        let b = &spec.b[k];
        let closed = &spec.a[k] + b * &policy.p[k];
        let mu = &closed * &mu_x[k] + b * &policy.q[k];
        let cov = &closed * &sigma_x[k] * closed.transpose()
            + b * &policy.sigma_pi[k] * b.transpose()
            + &spec.sigma_w[k];
        mu_x.push(mu);
        sigma_x.push(symmetrize(&cov));
    }
    Ok(StateMoments { mu_x, sigma_x })
}

/// Marginal input distribution at one step:
/// `N(P μ_x + q, Σ_π + P Σ_x P')`.
pub fn input_marginal(p: &Matrix, q: &Vector, sigma_pi: &Matrix, mu_x: &Vector, sigma_x: &Matrix) -> Result<Gaussian> {
    Gaussian::new(p * mu_x + q, symmetrize(&(sigma_pi + p * sigma_x * p.transpose())))
}

/// The optimal prior for a fixed policy: the marginal law of each `u_k`.
pub fn optimal_prior(spec: &ProblemSpec, policy: &AffinePolicy) -> Result<PriorSequence> {
    let moments = propagate_moments(spec, policy)?;
    optimal_prior_from_moments(policy, &moments)
}

pub fn optimal_prior_from_moments(policy: &AffinePolicy, moments: &StateMoments) -> Result<PriorSequence> {
    let priors = (0..policy.horizon())
        .map(|k| {
            input_marginal(
                &policy.p[k],
                &policy.q[k],
                &policy.sigma_pi[k],
                &moments.mu_x[k],
                &moments.sigma_x[k],
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PriorSequence::new(priors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn one_step_identity(sigma0: Matrix) -> ProblemSpec {
        ProblemSpec::time_invariant(
            1,
            Matrix::identity(2, 2),
            Matrix::identity(2, 2),
            Matrix::identity(2, 2) * 1e-12,
            Matrix::identity(2, 2),
            Matrix::identity(2, 2),
            1.0,
            Vector::from_vec(vec![0.3, -0.2]),
            sigma0,
            Vector::zeros(2),
        )
    }

    #[test]
    fn open_loop_identity_dynamics() {
        let sigma0 = Matrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.5]);
        let spec = one_step_identity(sigma0.clone());
        let s2 = 0.3;
        let pol = AffinePolicy::new(
            vec![Matrix::zeros(2, 2)],
            vec![Vector::zeros(2)],
            vec![Matrix::identity(2, 2) * s2],
        )
        .unwrap();
        let m = propagate_moments(&spec, &pol).unwrap();
        assert_eq!(m.mu_x[1], spec.mu_ini);
        let expect = sigma0 + Matrix::identity(2, 2) * s2;
        assert!((&m.sigma_x[1] - expect).amax() < 1e-11);
    }

    #[test]
    fn zero_gain_prior_equals_policy() {
        let spec = one_step_identity(Matrix::identity(2, 2));
        let sp = Matrix::from_row_slice(2, 2, &[0.4, 0.1, 0.1, 0.2]);
        let q = Vector::from_vec(vec![1.0, 2.0]);
        let pol = AffinePolicy::new(vec![Matrix::zeros(2, 2)], vec![q.clone()], vec![sp.clone()]).unwrap();
        let prior = optimal_prior(&spec, &pol).unwrap();
        assert_eq!(prior.priors[0].mean(), &q);
        assert!((prior.priors[0].cov() - sp).amax() < 1e-15);
    }

    #[test]
    fn scalar_marginal_substitution() {
        let g = input_marginal(
            &Matrix::from_element(1, 1, 1.0),
            &Vector::zeros(1),
            &Matrix::from_element(1, 1, 1.0),
            &Vector::from_element(1, 2.0),
            &Matrix::from_element(1, 1, 3.0),
        )
        .unwrap();
        assert_abs_diff_eq!(g.mean()[0], 2.0);
        assert_abs_diff_eq!(g.cov()[(0, 0)], 4.0);
    }

    #[test]
    fn state_covariance_dominates_noise() {
        let spec = ProblemSpec::benchmark_2d(4.0).validate().unwrap();
        let pol = crate::synthesis::optimal_policy(&spec, &spec.initial_prior()).unwrap();
        let m = propagate_moments(&spec, &pol).unwrap();
        for k in 0..spec.horizon {
            let gap = &m.sigma_x[k + 1] - &spec.sigma_w[k];
            assert!(crate::linalg::min_eigenvalue(&gap) >= -1e-12);
        }
    }
}
