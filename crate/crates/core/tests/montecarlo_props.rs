mod support;

use miocp::montecarlo::{empirical_input_moments, empirical_state_moments, rollout, terminal_regression};
use miocp::prior_update::{optimal_prior, propagate_moments};
use miocp::synthesis::optimal_policy;
use miocp::linalg::Matrix;
use miocp::ProblemSpec;

fn assert_moments_within(
    label: &str,
    emp: &(miocp::linalg::Vector, Matrix),
    mean: &miocp::linalg::Vector,
    cov: &Matrix,
    n: usize,
    z: f64,
) {
    let d = mean.len();
    for i in 0..d {
        let se = support::mean_se(cov, i, n);
        assert!((emp.0[i] - mean[i]).abs() <= z * se, "{label} mean[{i}]: {} vs {}", emp.0[i], mean[i]);
        for j in 0..d {
            let se = support::cov_se(cov, i, j, n);
            assert!(
                (emp.1[(i, j)] - cov[(i, j)]).abs() <= z * se,
                "{label} cov[{i},{j}]: {} vs {}",
                emp.1[(i, j)],
                cov[(i, j)]
            );
        }
    }
}

#[test]
fn state_moments_match_rollouts() {
    let mut rng = support::rng(31);
    let spec = support::random_spec(&mut rng, 2, 2, 5);
    let pol = support::random_policy(&mut rng, 2, 2, 5);
    let n = 100_000;
    let batch = rollout(&spec, &pol, n, 3).unwrap();
    let moments = propagate_moments(&spec, &pol).unwrap();
    for k in 0..=5 {
        let emp = empirical_state_moments(&batch, k);
        assert_moments_within(&format!("x_{k}"), &emp, &moments.mu_x[k], &moments.sigma_x[k], n, 4.0);
    }
}

#[test]
fn input_moments_match_marginal_prior() {
    let mut rng = support::rng(32);
    let spec = support::random_spec(&mut rng, 2, 2, 4);
    let pol = support::random_policy(&mut rng, 2, 2, 4);
    let n = 100_000;
    let batch = rollout(&spec, &pol, n, 4).unwrap();
    let prior = optimal_prior(&spec, &pol).unwrap();
    for k in 0..4 {
        let emp = empirical_input_moments(&batch, k);
        assert_moments_within(&format!("u_{k}"), &emp, prior.priors[k].mean(), prior.priors[k].cov(), n, 4.0);
    }
}

#[test]
fn rollout_is_independent_of_thread_count() {
    let mut rng = support::rng(33);
    let spec = support::random_spec(&mut rng, 3, 2, 6);
    let pol = support::random_policy(&mut rng, 3, 2, 6);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| rollout(&spec, &pol, 2000, 77).unwrap())
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one.paths, four.paths);
    assert_eq!(one.inputs, four.inputs);
    assert_eq!(rollout(&spec, &pol, 2000, 77).unwrap().paths, one.paths);
    assert_ne!(rollout(&spec, &pol, 2000, 78).unwrap().paths, one.paths);
}

#[test]
fn near_deterministic_limit_collapses_paths() {
    let tiny = 1e-14;
    let s = |v: f64| Matrix::identity(2, 2) * v;
    let mut spec = ProblemSpec::benchmark_2d(1.0);
    spec.sigma_w = vec![s(tiny); 50];
    spec.sigma_ini = s(tiny);
    spec.mu_ini = miocp::linalg::Vector::from_vec(vec![0.5, -0.5]);
    let spec = spec.validate().unwrap();
    let mut pol = optimal_policy(&spec, &spec.initial_prior()).unwrap();
    for sp in &mut pol.sigma_pi {
        *sp = Matrix::identity(1, 1) * tiny;
    }
    let batch = rollout(&spec, &pol, 50, 1).unwrap();
    let moments = propagate_moments(&spec, &pol).unwrap();
    for p in 0..50 {
        for k in 0..=50 {
            let x = batch.state(p, k);
            for i in 0..2 {
                assert!((x[i] - moments.mu_x[k][i]).abs() <= 1e-4);
            }
        }
    }
}

#[test]
fn terminal_mean_of_converged_policy() {
    let spec = ProblemSpec::benchmark_2d(4.0).validate().unwrap();
    let trace = miocp::solver::solve(&spec, &spec.initial_prior(), &miocp::solver::SolveConfig::iterations(30)).unwrap();
    let batch = rollout(&spec, &trace.final_policy, 1000, 0).unwrap();
    let moments = propagate_moments(&spec, &trace.final_policy).unwrap();
    let (mean, _) = empirical_state_moments(&batch, 50);
    for i in 0..2 {
        let sd = moments.sigma_x[50][(i, i)].sqrt();
        assert!((mean[i] - moments.mu_x[50][i]).abs() <= 4.0 * sd / 1000f64.sqrt());
    }
}

#[test]
fn regression_recovers_linear_relation() {
    let pts: Vec<Vec<f64>> = (0..100).map(|i| {
        let x = i as f64 / 10.0;
        vec![x, 1.5 * x - 0.25]
    }).collect();
    let batch = miocp::montecarlo::RolloutBatch::from_terminal_states(&pts);
    let (slope, intercept) = terminal_regression(&batch, 0, 1).unwrap();
    assert!((slope - 1.5).abs() < 1e-12 && (intercept + 0.25).abs() < 1e-12);
}

#[test]
fn optimal_policy_rollout_inputs_match_optimal_prior_scalar() {
    let spec = support::oracles::unit_instance().to_spec().validate().unwrap();
    let pol = optimal_policy(&spec, &spec.initial_prior()).unwrap();
    let batch = rollout(&spec, &pol, 100_000, 9).unwrap();
    let prior = optimal_prior(&spec, &pol).unwrap();
    let emp = empirical_input_moments(&batch, 0);
    assert_moments_within("u_0", &emp, prior.priors[0].mean(), prior.priors[0].cov(), 100_000, 4.0);
}
