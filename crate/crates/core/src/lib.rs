//! Mutual-information-regularized optimal control for discrete-time
//! linear-Gaussian systems.
//!
//! The controller trades quadratic control cost against the mutual
//! information between state and input. With Gaussian policy and prior
//! classes each block of the problem has a closed-form minimizer:
//!
//! - [`synthesis::optimal_policy`]: the best affine-Gaussian policy for a fixed
//!   prior, from a prior-regularized Riccati recursion.
//! - [`prior_update::optimal_prior`]: the best prior for a fixed policy, which
//!   is the marginal law of the input.
//!
//! [`solver::solve`] alternates the two. [`evaluation`] computes the
//! objective exactly, and [`montecarlo`] simulates the closed loop.
//!
//! ```
//! use miocp::{problem::ProblemSpec, solver::{solve, SolveConfig}};
//!
//! let spec = ProblemSpec::benchmark_2d(0.1).validate().unwrap();
//! let trace = solve(&spec, &spec.initial_prior(), &SolveConfig::iterations(5)).unwrap();
//! let j = trace.totals();
//! assert!(j[4] <= j[0]);
//! ```

pub mod cli;
pub mod error;
pub mod evaluation;
pub mod gaussian;
pub mod linalg;
pub mod montecarlo;
pub mod prior_update;
pub mod problem;
pub mod solver;
pub mod synthesis;

pub use error::{MiocpError, Result};
pub use gaussian::Gaussian;
pub use problem::{AffinePolicy, PriorSequence, ProblemSpec, ValidatedSpec};
