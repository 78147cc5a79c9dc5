//! Seeded closed-loop rollouts and terminal-state regression.
//!
//! Path `p` draws from its own ChaCha stream (`seed`, stream `p`), so a batch
//! is bit-identical no matter how many threads simulate it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{MiocpError, Result};
use crate::gaussian::Gaussian;
use crate::linalg::{self, Matrix, Vector};
use crate::problem::{AffinePolicy, ProblemSpec};

/// State and input trajectories stored row-major:
/// `paths[(p * (T+1) + k) * n + i]`, `inputs[(p * T + k) * m + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutBatch {
    pub num_paths: usize,
    pub horizon: usize,
    pub state_dim: usize,
    pub input_dim: usize,
    pub paths: Vec<f64>,
    pub inputs: Vec<f64>,
    pub seed: u64,
}

impl RolloutBatch {
    pub fn state(&self, path: usize, k: usize) -> &[f64] {
        let n = self.state_dim;
        let start = (path * (self.horizon + 1) + k) * n;
        &self.paths[start..start + n]
    }

    pub fn input(&self, path: usize, k: usize) -> &[f64] {
        let m = self.input_dim;
        let start = (path * self.horizon + k) * m;
        &self.inputs[start..start + m]
    }

    pub fn terminal(&self, path: usize) -> &[f64] {
        self.state(path, self.horizon)
    }

    /// Builds a batch holding only terminal states (`T = 0`), for regression.
    pub fn from_terminal_states(states: &[Vec<f64>]) -> Self {
        let n = states.first().map_or(0, Vec::len);
        RolloutBatch {
            num_paths: states.len(),
            horizon: 0,
            state_dim: n,
            input_dim: 0,
            paths: states.iter().flatten().copied().collect(),
            inputs: Vec::new(),
            seed: 0,
        }
    }
}

/// RNG for path `path` of a batch seeded with `seed`.
pub fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

/// Simulates `num_paths` independent closed-loop trajectories.
pub fn rollout(spec: &ProblemSpec, policy: &AffinePolicy, num_paths: usize, seed: u64) -> Result<RolloutBatch> {
    policy.check_against(spec)?;
    if num_paths == 0 {
        return Err(MiocpError::InvalidProblem("num_paths must be >= 1".into()));
    }
    let (t, n, m) = (spec.horizon, spec.state_dim(), spec.input_dim());
    let x0 = Gaussian::new(spec.mu_ini.clone(), spec.sigma_ini.clone())?;
    let x0_lower = x0.chol_lower();
    let input_noise = policy
        .sigma_pi
        .iter()
        .map(|s| Gaussian::new(Vector::zeros(m), s.clone()))
        .collect::<Result<Vec<_>>>()?;
    let process_noise = spec
        .sigma_w
        .iter()
        .map(|s| Gaussian::new(Vector::zeros(n), s.clone()))
        .collect::<Result<Vec<_>>>()?;
    let input_lower: Vec<Matrix> = input_noise.iter().map(Gaussian::chol_lower).collect();
    let process_lower: Vec<Matrix> = process_noise.iter().map(Gaussian::chol_lower).collect();

    let per_path: Vec<(Vec<f64>, Vec<f64>)> = (0..num_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(seed, p);
            let mut xs = Vec::with_capacity((t + 1) * n);
            let mut us = Vec::with_capacity(t * m);
            let mut x = x0.sample_with(&x0_lower, &mut rng);
            xs.extend(x.iter());
            for k in 0..t {
                let u = &policy.p[k] * &x + &policy.q[k] + input_noise[k].sample_with(&input_lower[k], &mut rng);
                let w = process_noise[k].sample_with(&process_lower[k], &mut rng);
                x = &spec.a[k] * &x + &spec.b[k] * &u + w;
                us.extend(u.iter());
                xs.extend(x.iter());
            }
            (xs, us)
        })
        .collect();

    let mut paths = Vec::with_capacity(num_paths * (t + 1) * n);
    let mut inputs = Vec::with_capacity(num_paths * t * m);
    for (xs, us) in per_path {
        paths.extend(xs);
        inputs.extend(us);
    }
    Ok(RolloutBatch {
        num_paths,
        horizon: t,
        state_dim: n,
        input_dim: m,
        paths,
        inputs,
        seed,
    })
}

/// Ordinary least squares of terminal coordinate `coord_y` on `coord_x`.
/// Returns `(slope, intercept)`.
pub fn terminal_regression(batch: &RolloutBatch, coord_x: usize, coord_y: usize) -> Result<(f64, f64)> {
    if batch.num_paths == 0 {
        return Err(MiocpError::Regression("empty batch".into()));
    }
    if coord_x >= batch.state_dim || coord_y >= batch.state_dim {
        return Err(MiocpError::Regression(format!(
            "coordinates ({coord_x}, {coord_y}) out of range for state dimension {}",
            batch.state_dim
        )));
    }
    let n = batch.num_paths as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = (0..batch.num_paths)
        .map(|p| {
            let x = batch.terminal(p);
            (x[coord_x], x[coord_y])
        })
        .unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(MiocpError::Regression(format!(
            "regressor coordinate {coord_x} has zero variance across {} path(s)",
            batch.num_paths
        )));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Sample mean and (unbiased) covariance of the states at step `k`.
pub fn empirical_state_moments(batch: &RolloutBatch, k: usize) -> (Vector, Matrix) {
    let rows: Vec<&[f64]> = (0..batch.num_paths).map(|p| batch.state(p, k)).collect();
    empirical_moments(&rows)
}

/// Sample mean and (unbiased) covariance of the inputs at step `k`.
pub fn empirical_input_moments(batch: &RolloutBatch, k: usize) -> (Vector, Matrix) {
    let rows: Vec<&[f64]> = (0..batch.num_paths).map(|p| batch.input(p, k)).collect();
    empirical_moments(&rows)
}

fn empirical_moments(rows: &[&[f64]]) -> (Vector, Matrix) {
    let d = rows.first().map_or(0, |r| r.len());
    let n = rows.len() as f64;
    let mut mean = Vector::zeros(d);
    for r in rows {
        mean += Vector::from_row_slice(r);
    }
    mean /= n;
    let mut cov = Matrix::zeros(d, d);
    for r in rows {
        let c = Vector::from_row_slice(r) - &mean;
        cov += &c * c.transpose();
    }
    cov /= (n - 1.0).max(1.0);
    (mean, linalg::symmetrize(&cov))
}
