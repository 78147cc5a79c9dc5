//! Alternating minimization over policy and prior.
//!
//! Starting from `ρ⁽⁰⁾`, each iteration computes `π⁽ⁱ⁾` as the optimal policy
//! for `ρ⁽ⁱ⁾`, records `J(π⁽ⁱ⁾, ρ⁽ⁱ⁾)`, and sets `ρ⁽ⁱ⁺¹⁾` to the optimal prior
//! for `π⁽ⁱ⁾`. Both updates are exact block minimizers, so the recorded
//! objective never increases.
//!
//! The default stopping rule watches the decision variables: the summed
//! squared W2 distance between consecutive priors. The objective flattens
//! out long before the priors settle.

use crate::error::{MiocpError, Result};
use crate::evaluation::{evaluate_with_moments, ObjectiveBreakdown};
use crate::gaussian::wasserstein2_sq;
use crate::prior_update::{optimal_prior_from_moments, propagate_moments};
use crate::problem::{AffinePolicy, PriorSequence, ValidatedSpec};
use crate::synthesis::optimal_policy;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub max_iters: usize,
    /// Stop once `Σ_k W₂²(ρ_k⁽ⁱ⁺¹⁾, ρ_k⁽ⁱ⁾)` falls below this.
    pub tol_prior_w2: f64,
    /// Stop once the objective decrease falls below this; `0` disables it.
    pub tol_objective: f64,
    /// Record every `trace_every`-th iteration (the last one is always kept).
    pub trace_every: usize,
    /// Keep `ρ⁽ⁱ⁾` for every recorded iteration.
    pub record_priors: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            max_iters: 100_000,
            tol_prior_w2: 1e-10,
            tol_objective: 0.0,
            trace_every: 1,
            record_priors: false,
        }
    }
}

impl SolveConfig {
    pub fn iterations(max_iters: usize) -> Self {
        SolveConfig {
            max_iters,
            tol_prior_w2: 0.0,
            ..SolveConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace {
    /// Iteration index of each recorded row.
    pub iteration: Vec<usize>,
    /// `J(π⁽ⁱ⁾, ρ⁽ⁱ⁾)`.
    pub objective: Vec<ObjectiveBreakdown>,
    /// `Σ_k W₂²(ρ_k⁽ⁱ⁺¹⁾, ρ_k⁽ⁱ⁾)`.
    pub prior_step_w2: Vec<f64>,
    /// `ρ⁽ⁱ⁾` per recorded row, when requested.
    pub prior_history: Vec<PriorSequence>,
    pub iterations_run: usize,
    pub converged: bool,
    /// `π⁽ⁱ⁾` of the last iteration.
    pub final_policy: AffinePolicy,
    /// `ρ⁽ⁱ⁾` of the last iteration, the prior `final_policy` was built from.
    pub final_prior: PriorSequence,
    /// `ρ⁽ⁱ⁺¹⁾`, the optimal prior for `final_policy`.
    pub next_prior: PriorSequence,
}

impl SolveTrace {
    pub fn final_objective(&self) -> &ObjectiveBreakdown {
        self.objective.last().expect("at least one iteration")
    }

    pub fn totals(&self) -> Vec<f64> {
        self.objective.iter().map(|o| o.total).collect()
    }
}

/// Summed squared W2 distance between two prior sequences.
pub fn prior_distance(a: &PriorSequence, b: &PriorSequence) -> Result<f64> {
    if a.len() != b.len() {
        return Err(MiocpError::dims("prior_distance", a.len(), b.len()));
    }
    a.priors
        .iter()
        .zip(&b.priors)
        .map(|(p, q)| wasserstein2_sq(p, q))
        .sum()
}

/// One policy/prior alternation: `(π, J(π, ρ), ρ_next)`.
pub fn alternate(
    spec: &ValidatedSpec,
    prior: &PriorSequence,
) -> Result<(AffinePolicy, ObjectiveBreakdown, PriorSequence)> {
    let policy = optimal_policy(spec, prior)?;
    let moments = propagate_moments(spec, &policy)?;
    let objective = evaluate_with_moments(spec, &policy, prior, &moments)?;
    let next = optimal_prior_from_moments(&policy, &moments)?;
    Ok((policy, objective, next))
}

pub fn solve(spec: &ValidatedSpec, initial_prior: &PriorSequence, cfg: &SolveConfig) -> Result<SolveTrace> {
    if cfg.max_iters == 0 {
        return Err(MiocpError::InvalidProblem("max_iters must be >= 1".into()));
    }
    initial_prior.check_against(spec)?;
    let every = cfg.trace_every.max(1);
    let annotate = |iteration: usize| move |e: MiocpError| MiocpError::Solver {
        iteration,
        source: Box::new(e),
    };

    let mut trace_iter = Vec::new();
    let mut objective = Vec::new();
    let mut prior_step_w2 = Vec::new();
    let mut prior_history = Vec::new();
    let mut prior = initial_prior.clone();
    let mut converged = false;
    let mut last_total = f64::INFINITY;
    let mut i = 0;

    loop {
        let (policy, obj, next) = alternate(spec, &prior).map_err(annotate(i))?;
        let step = prior_distance(&next, &prior).map_err(annotate(i))?;
        let decrease = last_total - obj.total;
        last_total = obj.total;

        if step < cfg.tol_prior_w2 || (cfg.tol_objective > 0.0 && i > 0 && decrease < cfg.tol_objective) {
            converged = true;
        }
        let last = converged || i + 1 == cfg.max_iters;
        if i % every == 0 || last {
            trace_iter.push(i);
            objective.push(obj);
            prior_step_w2.push(step);
            if cfg.record_priors {
                prior_history.push(prior.clone());
            }
        }
        if last {
            return Ok(SolveTrace {
                iteration: trace_iter,
                objective,
                prior_step_w2,
                prior_history,
                iterations_run: i + 1,
                converged,
                final_policy: policy,
                final_prior: prior,
                next_prior: next,
            });
        }
        prior = next;
        i += 1;
    }
}
