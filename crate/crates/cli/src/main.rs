//! `mrb`: design, simulate and analyze mirror randomized benchmarking campaigns.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation failure, 3 runtime error.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{AnalyzeArgs, DesignArgs, EpsilonArgs, RunArgs, SimulateArgs, SweepArgs, ValidateArgs};

#[derive(Debug, Parser)]
#[command(name = "mrb", version, about = "Mirror randomized benchmarking")]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Log progress to stderr
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a design and write one circuit file per (depth, k)
    Design(DesignArgs),
    /// Simulate a design's circuits under an error model
    Simulate(SimulateArgs),
    /// Fit the decay of a results file (simulated or hardware counts)
    Analyze(AnalyzeArgs),
    /// Estimate the average layer infidelity of a design under a model
    Epsilon(EpsilonArgs),
    /// Design, simulate, estimate epsilon and analyze in one go
    Run(RunArgs),
    /// Run the exact-oracle validation checks
    Validate(ValidateArgs),
    /// Run a scaled lattice sweep (fig2a: random models, fig2b: crosstalk models)
    Sweep(SweepArgs),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Runtime(mrb::Error),
}

impl From<mrb::Error> for CliError {
    fn from(e: mrb::Error) -> Self {
        use mrb::Error::*;
        match e {
            InvalidDesign(_) | InvalidSampler(_) | InvalidArgument(_) | InvalidGraph(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Runtime(other),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Validation(m) => f.write_str(m),
            CliError::Runtime(e) => write!(f, "{e}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .init();
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(1);
        }
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global().expect("thread pool set once");
    }
    let result = match cli.command {
        Command::Design(a) => commands::design(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Epsilon(a) => commands::epsilon(a),
        Command::Run(a) => commands::run(a),
        Command::Validate(a) => commands::validate(a),
        Command::Sweep(a) => commands::sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
