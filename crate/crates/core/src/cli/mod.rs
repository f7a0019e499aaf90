//! Command-line front end: TOML run configs, subcommands and result files.

mod commands;
mod config;
mod record;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{
    cmd_check, cmd_demo_inconsistency, cmd_fountain, cmd_sequence, cmd_solve, cmd_sweep, write_outputs, CommandOutput,
    EXIT_INCONCLUSIVE, EXIT_OK, EXIT_PARTIAL, EXIT_REFUTED, EXIT_USAGE,
};
pub use config::{
    NonlinearityConfig, OutputConfig, ProblemConfig, RunConfig, SolveMethod, StartConfig, TaskConfig,
};
pub use record::{fmt_f64, FountainTable, ResultRecord, SolutionRecord, SCHEMA_VERSION};

use crate::error::Error;

#[derive(Debug, Parser)]
#[command(name = "homoclinic", version, about = "Homoclinic solutions of discrete p-Laplacian equations")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides `solver.seed` and `task.fountain.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Sample every hypothesis on the configured nonlinearity.
    Check,
    /// One critical point from the configured start.
    Solve,
    /// Nontrivial solutions with strictly increasing energy.
    Sequence,
    /// Embedding constants, radii and the two sphere conditions.
    Fountain,
    /// Continuation of one solution over `task.lambdas`.
    Sweep,
    /// Partial sums showing (H3') fails under uniform superlinearity.
    DemoInconsistency,
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let Some(path) = &cli.config else {
        eprintln!("error: --config PATH is required");
        return EXIT_USAGE;
    };
    let mut cfg = match RunConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(dir) = &cli.out {
        cfg.output.dir = dir.clone();
    }
    let result = match cli.command {
        Command::Check => cmd_check(&cfg),
        Command::Solve => cmd_solve(&cfg),
        Command::Sequence => cmd_sequence(&cfg),
        Command::Fountain => cmd_fountain(&cfg),
        Command::Sweep => cmd_sweep(&cfg),
        Command::DemoInconsistency => cmd_demo_inconsistency(&cfg),
    };
    let out = match result {
        Ok(o) => o,
        Err(e @ (Error::Config(_) | Error::Usage(_))) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_PARTIAL;
        }
    };
    if let Err(e) = write_outputs(&out, &cfg.output.dir) {
        eprintln!("error: {e}");
        return EXIT_PARTIAL;
    }
    if !cli.quiet {
        for line in &out.summary {
            println!("{line}");
        }
        println!("results in {}", cfg.output.dir.display());
    }
    out.code()
}
