//! With a very flat prior the mutual-information policy collapses onto the
//! maximum-entropy one.

use miocp::synthesis::{meocp_policy, optimal_policy};
use miocp::{Gaussian, PriorSequence, ProblemSpec};

fn main() -> miocp::Result<()> {
    let spec = ProblemSpec::benchmark_2d(4.0).validate()?;
    let meocp = meocp_policy(&spec)?;
    for var in [1e0, 1e2, 1e4, 1e6] {
        let flat = PriorSequence::broadcast(Gaussian::scalar(0.0, var)?, spec.horizon);
        let policy = optimal_policy(&spec, &flat)?;
        let gap = (0..spec.horizon)
            .map(|k| {
                (&policy.p[k] - &meocp.p[k])
                    .amax()
                    .max((&policy.q[k] - &meocp.q[k]).amax())
                    .max((&policy.sigma_pi[k] - &meocp.sigma_pi[k]).amax())
            })
            .fold(0.0, f64::max);
        println!("Σ_ρ = {var:>7.0e} · I   max gap to MEOCP = {gap:.3e}");
    }
    Ok(())
}
