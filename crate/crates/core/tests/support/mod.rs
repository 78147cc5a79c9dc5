#![allow(dead_code)]

pub mod oracles;

use miocp::linalg::{Matrix, Vector};
use miocp::{AffinePolicy, Gaussian, PriorSequence, ProblemSpec, ValidatedSpec};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, scale: f64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-scale..scale))
}

pub fn random_vector(rng: &mut impl Rng, d: usize, scale: f64) -> Vector {
    Vector::from_fn(d, |_, _| rng.random_range(-scale..scale))
}

/// `G G' + floor·I` with `G` uniform in `[-1, 1]`.
pub fn random_spd(rng: &mut impl Rng, d: usize, floor: f64) -> Matrix {
    let g = random_matrix(rng, d, d, 1.0);
    &g * g.transpose() + Matrix::identity(d, d) * floor
}

pub fn random_gaussian(rng: &mut impl Rng, d: usize) -> Gaussian {
    let mean = random_vector(rng, d, 2.0);
    Gaussian::new(mean, random_spd(rng, d, 0.2)).unwrap()
}

/// Random time-varying problem with well-conditioned invertible `A_k`.
pub fn random_spec(rng: &mut impl Rng, n: usize, m: usize, horizon: usize) -> ValidatedSpec {
    let a = (0..horizon)
        .map(|_| Matrix::identity(n, n) + random_matrix(rng, n, n, 0.3))
        .collect::<Vec<_>>();
    let spec = ProblemSpec {
        horizon,
        a,
        b: (0..horizon).map(|_| random_matrix(rng, n, m, 1.0)).collect(),
        sigma_w: (0..horizon).map(|_| random_spd(rng, n, 0.01) * 0.05).collect(),
        r: (0..horizon).map(|_| random_spd(rng, m, 0.3)).collect(),
        f: random_spd(rng, n, 0.5),
        epsilon: rng.random_range(0.1..3.0),
        mu_ini: random_vector(rng, n, 1.0),
        sigma_ini: random_spd(rng, n, 0.2),
        mu_fin: random_vector(rng, n, 2.0),
        prior_init: None,
    };
    spec.validate().expect("random spec is valid")
}

pub fn random_prior(rng: &mut impl Rng, m: usize, horizon: usize) -> PriorSequence {
    PriorSequence::new((0..horizon).map(|_| random_gaussian(rng, m)).collect())
}

pub fn random_policy(rng: &mut impl Rng, n: usize, m: usize, horizon: usize) -> AffinePolicy {
    AffinePolicy::new(
        (0..horizon).map(|_| random_matrix(rng, m, n, 0.5)).collect(),
        (0..horizon).map(|_| random_vector(rng, m, 0.5)).collect(),
        (0..horizon).map(|_| random_spd(rng, m, 0.1) * 0.5).collect(),
    )
    .unwrap()
}

/// Standard error of the sample covariance entry `(i, j)` under Gaussianity.
pub fn cov_se(cov: &Matrix, i: usize, j: usize, n: usize) -> f64 {
    ((cov[(i, i)] * cov[(j, j)] + cov[(i, j)].powi(2)) / n as f64).sqrt()
}

pub fn mean_se(cov: &Matrix, i: usize, n: usize) -> f64 {
    (cov[(i, i)] / n as f64).sqrt()
}
