//! Solve to convergence, simulate closed-loop paths and fit a line
//! through the terminal states.

use miocp::montecarlo::{empirical_state_moments, rollout, terminal_regression};
use miocp::solver::{solve, SolveConfig};
use miocp::ProblemSpec;

fn main() -> miocp::Result<()> {
    for eps in [0.1, 4.0] {
        let spec = ProblemSpec::benchmark_2d(eps).validate()?;
        let trace = solve(&spec, &spec.initial_prior(), &SolveConfig::default())?;
        let batch = rollout(&spec, &trace.final_policy, 1000, 0)?;
        let (mean, cov) = empirical_state_moments(&batch, spec.horizon);
        let (slope, intercept) = terminal_regression(&batch, 0, 1)?;
        println!(
            "ε = {eps:>3}: {} iterations, terminal mean [{:.3}, {:.3}], spread {:.4}, x2 ≈ {slope:.4}·x1 + {intercept:.4}",
            trace.iterations_run,
            mean[0],
            mean[1],
            cov.trace()
        );
    }
    Ok(())
}
