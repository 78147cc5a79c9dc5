//! Brute-force oracles on scalar instances (`n = m = 1`, `T <= 2`).
//!
//! Everything here is plain `f64` arithmetic. The expected KL over the state
//! is integrated with three-point Gauss–Hermite quadrature, which is exact
//! for the quadratic integrand, so nothing is shared with the closed-form
//! expectation used by the library.

use miocp::{AffinePolicy, Gaussian, PriorSequence, ProblemSpec};
use miocp::linalg::{Matrix, Vector};

#[derive(Debug, Clone, Copy)]
pub struct ScalarInstance {
    pub horizon: usize,
    pub a: f64,
    pub b: f64,
    pub sigma_w: f64,
    pub r: f64,
    pub f: f64,
    pub epsilon: f64,
    pub mu_ini: f64,
    pub sigma_ini: f64,
    pub mu_fin: f64,
}

/// `(P, q, Σ_π)` per step.
pub type ScalarPolicy = Vec<(f64, f64, f64)>;
/// `(μ_ρ, Σ_ρ)` per step.
pub type ScalarPrior = Vec<(f64, f64)>;

impl ScalarInstance {
    pub fn to_spec(&self) -> ProblemSpec {
        let s = |v: f64| Matrix::from_element(1, 1, v);
        ProblemSpec::time_invariant(
            self.horizon,
            s(self.a),
            s(self.b),
            s(self.sigma_w),
            s(self.r),
            s(self.f),
            self.epsilon,
            Vector::from_element(1, self.mu_ini),
            s(self.sigma_ini),
            Vector::from_element(1, self.mu_fin),
        )
    }
}

pub fn to_prior_sequence(prior: &ScalarPrior) -> PriorSequence {
    PriorSequence::new(prior.iter().map(|&(m, s)| Gaussian::scalar(m, s).unwrap()).collect())
}

pub fn from_policy(policy: &AffinePolicy) -> ScalarPolicy {
    (0..policy.horizon())
        .map(|k| (policy.p[k][(0, 0)], policy.q[k][0], policy.sigma_pi[k][(0, 0)]))
        .collect()
}

fn scalar_kl(m1: f64, s1: f64, m2: f64, s2: f64) -> f64 {
    0.5 * ((s2 / s1).ln() - 1.0 + s1 / s2 + (m1 - m2).powi(2) / s2)
}

const GH_NODES: [f64; 3] = [-1.732_050_807_568_877_2, 0.0, 1.732_050_807_568_877_2];
const GH_WEIGHTS: [f64; 3] = [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0];

/// State mean and variance at each step, `0..=T`.
pub fn scalar_moments(inst: &ScalarInstance, policy: &ScalarPolicy) -> Vec<(f64, f64)> {
    let mut out = vec![(inst.mu_ini, inst.sigma_ini)];
    let (mut mu, mut s) = (inst.mu_ini, inst.sigma_ini);
    for &(p, q, sp) in policy.iter().take(inst.horizon) {
        let cl = inst.a + inst.b * p;
        mu = cl * mu + inst.b * q;
        s = cl * cl * s + inst.b * inst.b * sp + inst.sigma_w;
        out.push((mu, s));
    }
    out
}

pub fn scalar_objective(inst: &ScalarInstance, policy: &ScalarPolicy, prior: &ScalarPrior) -> f64 {
    let moments = scalar_moments(inst, policy);
    let mut j = 0.0;
    for k in 0..inst.horizon {
        let (p, q, sp) = policy[k];
        let (mu_r, s_r) = prior[k];
        let (mu, s) = moments[k];
        let mean_u = p * mu + q;
        j += 0.5 * inst.r * (mean_u * mean_u + p * p * s + sp);
        let ekl: f64 = GH_NODES
            .iter()
            .zip(GH_WEIGHTS)
            .map(|(z, w)| {
                let x = mu + s.sqrt() * z;
                w * scalar_kl(p * x + q, sp, mu_r, s_r)
            })
            .sum();
        j += inst.epsilon * ekl;
    }
    let (mu, s) = moments[inst.horizon];
    j + 0.5 * inst.f * ((mu - inst.mu_fin).powi(2) + s)
}

#[derive(Debug, Clone, Copy)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub fn new(lo: f64, hi: f64) -> Self {
        Range { lo, hi }
    }

    fn points(&self, h: f64) -> Vec<f64> {
        let n = ((self.hi - self.lo) / h).round() as usize;
        (0..=n).map(|i| self.lo + i as f64 * h).collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PolicyBounds {
    pub p: Range,
    pub q: Range,
    pub sigma: Range,
}

#[derive(Debug, Clone, Copy)]
pub struct PriorBounds {
    pub mu: Range,
    pub sigma: Range,
}

fn on_edge(v: f64, r: &Range, h: f64) -> bool {
    (v - r.lo).abs() < 0.5 * h || (r.hi - v).abs() < 0.5 * h
}

/// A variance grid starting at or below the resolution is clipped by
/// positivity, so its lower edge does not count as a bracketing failure.
fn on_sigma_edge(v: f64, r: &Range, h: f64) -> bool {
    if r.lo <= h {
        (r.hi - v).abs() < 0.5 * h
    } else {
        on_edge(v, r, h)
    }
}

/// Cyclic block grid search over each step's `(P, q, Σ_π)`.
pub fn brute_force_policy(
    inst: &ScalarInstance,
    prior: &ScalarPrior,
    resolution: f64,
    bounds: &[PolicyBounds],
) -> Result<ScalarPolicy, String> {
    assert!(inst.horizon <= 2 && bounds.len() == inst.horizon);
    let grids: Vec<_> = bounds
        .iter()
        .map(|b| (b.p.points(resolution), b.q.points(resolution), b.sigma.points(resolution)))
        .collect();
    let size: usize = grids.iter().map(|(a, b, c)| a.len() * b.len() * c.len()).max().unwrap();
    if size > 1_000_000 {
        return Err(format!("grid of {size} points exceeds 10^6"));
    }
    let mut policy: ScalarPolicy = grids
        .iter()
        .map(|(p, q, s)| (p[p.len() / 2], q[q.len() / 2], s[s.len() / 2]))
        .collect();
    for _sweep in 0..20 {
        let before = policy.clone();
        for k in 0..inst.horizon {
            let (ps, qs, ss) = &grids[k];
            let mut best = (f64::INFINITY, policy[k]);
            for &p in ps {
                for &q in qs {
                    for &s in ss {
                        let mut trial = policy.clone();
                        trial[k] = (p, q, s);
                        let j = scalar_objective(inst, &trial, prior);
                        if j < best.0 {
                            best = (j, (p, q, s));
                        }
                    }
                }
            }
            policy[k] = best.1;
        }
        if policy == before {
            break;
        }
    }
    for (k, (&(p, q, s), b)) in policy.iter().zip(bounds).enumerate() {
        if on_edge(p, &b.p, resolution) || on_edge(q, &b.q, resolution) || on_sigma_edge(s, &b.sigma, resolution) {
            return Err(format!("minimizer ({p}, {q}, {s}) at k={k} lies on the grid boundary; widen bounds"));
        }
    }
    Ok(policy)
}

/// Grid search over each step's `(μ_ρ, Σ_ρ)` with the policy fixed.
pub fn brute_force_prior(
    inst: &ScalarInstance,
    policy: &ScalarPolicy,
    resolution: f64,
    bounds: &[PriorBounds],
) -> Result<ScalarPrior, String> {
    assert!(inst.horizon <= 2 && bounds.len() == inst.horizon);
    let mut prior: ScalarPrior = bounds
        .iter()
        .map(|b| (0.5 * (b.mu.lo + b.mu.hi), 0.5 * (b.sigma.lo + b.sigma.hi)))
        .collect();
    for k in 0..inst.horizon {
        let (mus, ss) = (bounds[k].mu.points(resolution), bounds[k].sigma.points(resolution));
        if mus.len() * ss.len() > 1_000_000 {
            return Err("grid exceeds 10^6 points".into());
        }
        let mut best = (f64::INFINITY, prior[k]);
        for &m in &mus {
            for &s in &ss {
                let mut trial = prior.clone();
                trial[k] = (m, s);
                let j = scalar_objective(inst, policy, &trial);
                if j < best.0 {
                    best = (j, (m, s));
                }
            }
        }
        prior[k] = best.1;
        let (m, s) = best.1;
        if on_edge(m, &bounds[k].mu, resolution) || on_sigma_edge(s, &bounds[k].sigma, resolution) {
            return Err(format!("minimizer ({m}, {s}) at k={k} lies on the grid boundary; widen bounds"));
        }
    }
    Ok(prior)
}

/// The single-step instance whose Riccati value is `Π_0 = 2/3`.
pub fn unit_instance() -> ScalarInstance {
    ScalarInstance {
        horizon: 1,
        a: 1.0,
        b: 1.0,
        sigma_w: 0.01,
        r: 1.0,
        f: 1.0,
        epsilon: 1.0,
        mu_ini: 0.0,
        sigma_ini: 1.0,
        mu_fin: 0.0,
    }
}
