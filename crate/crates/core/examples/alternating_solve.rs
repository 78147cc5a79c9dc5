//! Alternate policy and prior updates and watch the objective fall while
//! the priors settle much more slowly.

use miocp::solver::{solve, SolveConfig};
use miocp::ProblemSpec;

fn main() -> miocp::Result<()> {
    for eps in [0.1, 4.0] {
        let spec = ProblemSpec::benchmark_2d(eps).validate()?;
        let cfg = SolveConfig { trace_every: 25, ..SolveConfig::iterations(201) };
        let trace = solve(&spec, &spec.initial_prior(), &cfg)?;
        println!("ε = {eps}");
        for ((i, obj), w2) in trace.iteration.iter().zip(&trace.objective).zip(&trace.prior_step_w2) {
            println!(
                "  iter {i:4}  J = {:.6}  (quad {:.4}, kl {:.4}, terminal {:.4})  step W2² = {w2:.3e}",
                obj.total, obj.quadratic_cost, obj.kl_cost, obj.terminal_cost
            );
        }
    }
    Ok(())
}
