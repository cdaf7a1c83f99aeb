//! Experiment runner for metamodel-based global sensitivity analysis.
//!
//! Subcommands: `fit` (one model + index CSV), `quality` (sample-based error
//! bounds, proposed method next to the bootstrap), `risk-sweep` (empirical
//! risks against the theoretical bounds over a parameter grid) and
//! `selfcheck` (fast deterministic invariant suite).
//!
//! Exit codes: 0 success, 2 config error, 3 numerical failure.

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(msg) | CliError::Numerical(msg) => msg,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "gsa",
    about = "Metamodel-based Sobol index estimation with error and risk bounds",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Experiment configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cap on worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one metamodel and write it with its index report.
    Fit(RunArgs),
    /// Sample-based error bounds (proposed method and bootstrap) over a
    /// sweep of sample sizes.
    Quality(RunArgs),
    /// Empirical index risks and theoretical bounds over a parameter grid.
    RiskSweep(RunArgs),
    /// Run the deterministic invariant suite and report pass/fail.
    Selfcheck {
        /// Cap on worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn init_jobs(jobs: Option<usize>) {
    if let Some(jobs) = jobs {
        // Ignore failure: the global pool may already exist in tests.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => {
            init_jobs(args.jobs);
            commands::fit::run(&args)
        }
        Command::Quality(args) => {
            init_jobs(args.jobs);
            commands::quality::run(&args)
        }
        Command::RiskSweep(args) => {
            init_jobs(args.jobs);
            commands::risk_sweep::run(&args)
        }
        Command::Selfcheck { jobs } => {
            init_jobs(jobs);
            commands::selfcheck::run()
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            // Human-readable line plus a machine-readable record.
            eprintln!("gsa: {err}");
            let record = serde_json::json!({
                "tool": "gsa",
                "error": err.kind(),
                "message": err.message(),
                "exit_code": err.exit_code(),
            });
            eprintln!("{record}");
            ExitCode::from(err.exit_code())
        }
    }
}
