use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use miocp::cli::{run, Command, RunManifest};

#[derive(Parser)]
#[command(name = "miocp", about = "Mutual-information optimal control experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run alternating minimization and write trace.csv, policy.json, prior.json, summary.json
    Solve(Args),
    /// Roll out the solved policy and write paths.csv, terminal_scatter.csv, terminal_regression.json
    Simulate(Args),
    /// Evaluate a stored policy/prior pair and write objective.json
    Evaluate(Args),
    /// Solve and simulate each ε in --epsilon, one subdirectory per value
    Sweep(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    paths: usize,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long = "tol-w2")]
    tol_w2: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    epsilon: Vec<f64>,
    /// Policy file for evaluate/simulate (default: <out>/policy.json)
    #[arg(long)]
    policy: Option<PathBuf>,
    /// Prior file for evaluate (default: <out>/prior.json)
    #[arg(long)]
    prior: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = std::env::var("MIOCP_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let (command, args) = match cli.command {
        Cmd::Solve(a) => (Command::Solve, a),
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Evaluate(a) => (Command::Evaluate, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
    };
    let manifest = RunManifest {
        spec_path: args.spec,
        command,
        output_dir: args.out,
        seed: args.seed,
        num_paths: args.paths,
        max_iters: args.max_iters,
        tol_w2: args.tol_w2,
        epsilons: args.epsilon,
        policy_path: args.policy,
        prior_path: args.prior,
    };
    match run(&manifest) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
