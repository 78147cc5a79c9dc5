//! Backward Riccati pass for a fixed prior and the resulting affine
//! Gaussian policy `u ~ N(P x + q, Σ_π)`.

use miocp::synthesis::{optimal_policy, solve_riccati};
use miocp::ProblemSpec;

fn main() -> miocp::Result<()> {
    let spec = ProblemSpec::benchmark_2d(4.0).validate()?;
    let prior = spec.initial_prior();

    let sol = solve_riccati(&spec, &prior)?;
    let policy = optimal_policy(&spec, &prior)?;

    for k in [0, 10, 25, 40, 49] {
        println!(
            "k={k:2}  Π_k diag = [{:.4}, {:.4}]  P_k = {:?}  q_k = {:.4}  Σ_π = {:.4}",
            sol.pi[k][(0, 0)],
            sol.pi[k][(1, 1)],
            policy.p[k].as_slice(),
            policy.q[k][0],
            policy.sigma_pi[k][(0, 0)],
        );
    }
    Ok(())
}
