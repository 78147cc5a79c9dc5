//! File-level drivers behind the `miocp` binary: solve, simulate, evaluate
//! and sweep, each reading a JSON problem config and writing CSV series and
//! JSON dumps into an output directory.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::error::{MiocpError, Result};
use crate::evaluation::{evaluate_objective, ObjectiveBreakdown};
use crate::montecarlo::{empirical_state_moments, rollout, terminal_regression, RolloutBatch};
use crate::problem::{load_spec, AffinePolicy, PriorSequence, ProblemSpec, ValidatedSpec};
use crate::solver::{alternate, prior_distance, solve, SolveConfig, SolveTrace};

pub const TRACE_HEADER: [&str; 6] = ["iter", "J_total", "J_quadratic", "J_kl", "J_terminal", "prior_step_w2"];
pub const PRIOR_DISTANCE_HEADER: [&str; 2] = ["iter", "w2_to_final"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Simulate,
    Evaluate,
    Sweep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub spec_path: PathBuf,
    pub command: Command,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub num_paths: usize,
    pub max_iters: Option<usize>,
    pub tol_w2: Option<f64>,
    /// One value overrides the config's ε; `sweep` runs each value.
    pub epsilons: Vec<f64>,
    pub policy_path: Option<PathBuf>,
    pub prior_path: Option<PathBuf>,
}

impl RunManifest {
    pub fn new(command: Command, spec_path: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        RunManifest {
            spec_path: spec_path.into(),
            command,
            output_dir: output_dir.into(),
            seed: 0,
            num_paths: 1000,
            max_iters: None,
            tol_w2: None,
            epsilons: Vec::new(),
            policy_path: None,
            prior_path: None,
        }
    }

    pub fn solve_config(&self) -> SolveConfig {
        let mut cfg = SolveConfig::default();
        if let Some(n) = self.max_iters {
            cfg.max_iters = n;
        }
        if let Some(tol) = self.tol_w2 {
            cfg.tol_prior_w2 = tol;
        }
        cfg
    }

    fn load(&self) -> Result<ValidatedSpec> {
        let mut spec = load_spec(&self.spec_path)?;
        match self.epsilons.as_slice() {
            [] => {}
            [eps] => spec.epsilon = *eps,
            many if self.command != Command::Sweep => {
                return Err(MiocpError::InvalidProblem(format!(
                    "{} epsilon values given; only `sweep` accepts a list",
                    many.len()
                )))
            }
            _ => {}
        }
        spec.validate()
    }

    fn check(&self) -> Result<()> {
        if self.command == Command::Sweep && self.epsilons.is_empty() {
            return Err(MiocpError::InvalidProblem("sweep needs --epsilon X,Y,...".into()));
        }
        if matches!(self.command, Command::Simulate | Command::Sweep) && self.num_paths == 0 {
            return Err(MiocpError::InvalidProblem("--paths must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub epsilon: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_j: f64,
    pub final_prior_step_w2: f64,
    pub final_breakdown: ObjectiveBreakdown,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegressionSummary {
    pub coord_x: usize,
    pub coord_y: usize,
    pub slope: f64,
    pub intercept: f64,
    pub num_paths: usize,
    pub seed: u64,
}

/// What `cmd_simulate` produced. `regression` is absent for one-dimensional states.
#[derive(Debug, Clone)]
pub struct SimulateOutcome {
    pub batch: RolloutBatch,
    pub regression: Option<RegressionSummary>,
    /// Trace of the empirical terminal covariance.
    pub terminal_spread: f64,
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| MiocpError::io(dir, e))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| MiocpError::io(path, e))
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| MiocpError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| MiocpError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => MiocpError::io(path, io),
        other => MiocpError::InvalidProblem(format!("{other:?}")),
    })
}

pub fn write_trace_csv(path: &Path, trace: &SolveTrace) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(TRACE_HEADER)?;
    for ((i, obj), step) in trace.iteration.iter().zip(&trace.objective).zip(&trace.prior_step_w2) {
        w.write_record([
            i.to_string(),
            fmt_f64(obj.total),
            fmt_f64(obj.quadratic_cost),
            fmt_f64(obj.kl_cost),
            fmt_f64(obj.terminal_cost),
            fmt_f64(*step),
        ])?;
    }
    w.flush().map_err(|e| MiocpError::io(path, e))
}

/// `Σ_k W₂²(ρ⁽ⁱ⁾, ρ_final)` for `i = 0..iterations`, recomputed by replaying
/// the (deterministic) alternation so no prior history has to be stored.
pub fn distance_to_final(
    spec: &ValidatedSpec,
    initial_prior: &PriorSequence,
    final_prior: &PriorSequence,
    iterations: usize,
) -> Result<Vec<f64>> {
    let mut prior = initial_prior.clone();
    let mut out = Vec::with_capacity(iterations);
    for i in 0..iterations {
        out.push(prior_distance(&prior, final_prior)?);
        if i + 1 < iterations {
            prior = alternate(spec, &prior)?.2;
        }
    }
    Ok(out)
}

pub fn cmd_solve(manifest: &RunManifest) -> Result<SolveTrace> {
    manifest.check()?;
    let spec = manifest.load()?;
    solve_into(&spec, &manifest.solve_config(), &manifest.output_dir)
}

fn solve_into(spec: &ValidatedSpec, cfg: &SolveConfig, out: &Path) -> Result<SolveTrace> {
    create_dir(out)?;
    let initial = spec.initial_prior();
    let trace = solve(spec, &initial, cfg)?;
    write_trace_csv(&out.join("trace.csv"), &trace)?;

    let dist = distance_to_final(spec, &initial, &trace.final_prior, trace.iterations_run)?;
    let path = out.join("prior_distance.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(PRIOR_DISTANCE_HEADER)?;
    for (i, d) in dist.iter().enumerate() {
        w.write_record([i.to_string(), fmt_f64(*d)])?;
    }
    w.flush().map_err(|e| MiocpError::io(&path, e))?;

    write_json(&out.join("policy.json"), &trace.final_policy.to_json_value())?;
    write_json(&out.join("prior.json"), &trace.final_prior.to_json_value())?;
    let last = trace.final_objective().clone();
    write_json(
        &out.join("summary.json"),
        &SolveSummary {
            epsilon: spec.epsilon,
            iterations: trace.iterations_run,
            converged: trace.converged,
            final_j: last.total,
            final_prior_step_w2: *trace.prior_step_w2.last().unwrap(),
            final_breakdown: last,
        },
    )?;
    Ok(trace)
}

pub fn load_policy(path: &Path) -> Result<AffinePolicy> {
    AffinePolicy::from_json_value(read_json(path)?)
}

pub fn load_prior(path: &Path) -> Result<PriorSequence> {
    PriorSequence::from_json_value(read_json(path)?)
}

pub fn cmd_simulate(manifest: &RunManifest) -> Result<SimulateOutcome> {
    manifest.check()?;
    let spec = manifest.load()?;
    let out = &manifest.output_dir;
    create_dir(out)?;
    let policy_path = manifest
        .policy_path
        .clone()
        .unwrap_or_else(|| out.join("policy.json"));
    let policy = if policy_path.exists() {
        load_policy(&policy_path)?
    } else {
        solve_into(&spec, &manifest.solve_config(), out)?.final_policy
    };
    simulate_into(&spec, &policy, manifest.num_paths, manifest.seed, out)
}

fn simulate_into(
    spec: &ProblemSpec,
    policy: &AffinePolicy,
    num_paths: usize,
    seed: u64,
    out: &Path,
) -> Result<SimulateOutcome> {
    let batch = rollout(spec, policy, num_paths, seed)?;
    let (n, m, t) = (batch.state_dim, batch.input_dim, batch.horizon);

    let path = out.join("paths.csv");
    let mut w = csv_writer(&path)?;
    let mut header = vec!["path_id".to_string(), "k".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend((1..=m).map(|j| format!("u{j}")));
    w.write_record(&header)?;
    for p in 0..batch.num_paths {
        for k in 0..=t {
            let mut row = vec![p.to_string(), k.to_string()];
            row.extend(batch.state(p, k).iter().map(|v| fmt_f64(*v)));
            if k < t {
                row.extend(batch.input(p, k).iter().map(|v| fmt_f64(*v)));
            } else {
                row.extend(std::iter::repeat_n(String::new(), m));
            }
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(|e| MiocpError::io(&path, e))?;

    let path = out.join("terminal_scatter.csv");
    let mut w = csv_writer(&path)?;
    let mut header = vec!["path_id".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    for p in 0..batch.num_paths {
        let mut row = vec![p.to_string()];
        row.extend(batch.terminal(p).iter().map(|v| fmt_f64(*v)));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| MiocpError::io(&path, e))?;

    let terminal_spread = empirical_state_moments(&batch, t).1.trace();
    let regression = if n >= 2 {
        let (slope, intercept) = terminal_regression(&batch, 0, 1)?;
        let summary = RegressionSummary {
            coord_x: 0,
            coord_y: 1,
            slope,
            intercept,
            num_paths,
            seed,
        };
        write_json(&out.join("terminal_regression.json"), &summary)?;
        Some(summary)
    } else {
        None
    };
    Ok(SimulateOutcome {
        batch,
        regression,
        terminal_spread,
    })
}

pub fn cmd_evaluate(manifest: &RunManifest) -> Result<ObjectiveBreakdown> {
    manifest.check()?;
    let spec = manifest.load()?;
    let out = &manifest.output_dir;
    let policy_path = manifest
        .policy_path
        .clone()
        .unwrap_or_else(|| out.join("policy.json"));
    let prior_path = manifest
        .prior_path
        .clone()
        .unwrap_or_else(|| out.join("prior.json"));
    let policy = load_policy(&policy_path)?;
    let prior = load_prior(&prior_path)?;
    let obj = evaluate_objective(&spec, &policy, &prior)?;
    create_dir(out)?;
    write_json(&out.join("objective.json"), &obj)?;
    Ok(obj)
}

/// Per-ε output directory name used by `sweep`.
pub fn sweep_dir_name(eps: f64) -> String {
    format!("eps_{eps}")
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub epsilon: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_j: f64,
    pub terminal_spread: f64,
    pub slope: Option<f64>,
}

pub fn cmd_sweep(manifest: &RunManifest) -> Result<Vec<SweepEntry>> {
    manifest.check()?;
    let base = manifest.load()?.into_inner();
    let cfg = manifest.solve_config();
    create_dir(&manifest.output_dir)?;
    let entries = manifest
        .epsilons
        .par_iter()
        .map(|&eps| {
            let spec = base.clone().with_epsilon(eps).validate()?;
            let dir = manifest.output_dir.join(sweep_dir_name(eps));
            let trace = solve_into(&spec, &cfg, &dir)?;
            let sim = simulate_into(&spec, &trace.final_policy, manifest.num_paths, manifest.seed, &dir)?;
            Ok(SweepEntry {
                epsilon: eps,
                iterations: trace.iterations_run,
                converged: trace.converged,
                final_j: trace.final_objective().total,
                terminal_spread: sim.terminal_spread,
                slope: sim.regression.map(|r| r.slope),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_json(&manifest.output_dir.join("sweep_summary.json"), &entries)?;
    Ok(entries)
}

pub fn run(manifest: &RunManifest) -> Result<()> {
    match manifest.command {
        Command::Solve => cmd_solve(manifest).map(|_| ()),
        Command::Simulate => cmd_simulate(manifest).map(|_| ()),
        Command::Evaluate => cmd_evaluate(manifest).map(|_| ()),
        Command::Sweep => cmd_sweep(manifest).map(|_| ()),
    }
}
