//! Break the objective of a policy/prior pair into its quadratic,
//! information and terminal parts, and compare the prior against the
//! policy's own input marginal.

use miocp::evaluation::{evaluate_objective, mutual_information};
use miocp::prior_update::{optimal_prior, propagate_moments};
use miocp::synthesis::optimal_policy;
use miocp::ProblemSpec;

fn main() -> miocp::Result<()> {
    let spec = ProblemSpec::benchmark_2d(0.1).validate()?;
    let prior = spec.initial_prior();
    let policy = optimal_policy(&spec, &prior)?;

    let fixed = evaluate_objective(&spec, &policy, &prior)?;
    let marginal = optimal_prior(&spec, &policy)?;
    let better = evaluate_objective(&spec, &policy, &marginal)?;
    println!("J with N(0, I) prior      : {:.6}  (kl part {:.6})", fixed.total, fixed.kl_cost);
    println!("J with the input marginal : {:.6}  (kl part {:.6})", better.total, better.kl_cost);

    let moments = propagate_moments(&spec, &policy)?;
    let mi: f64 = (0..spec.horizon)
        .map(|k| mutual_information(&policy.p[k], &policy.sigma_pi[k], &moments.sigma_x[k]))
        .sum::<miocp::Result<f64>>()?;
    println!("ε · Σ_k I(x_k; u_k)       : {:.6}", spec.epsilon * mi);
    Ok(())
}
