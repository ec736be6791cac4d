//! Command-line front end: problem files, traces and command drivers.

pub mod commands;
pub mod error;
pub mod file;
pub mod trace;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use subproj_core::{SelectionStrategy, SolveStatus};

pub use commands::{Analysis, AnalyzeParams, Family};
pub use error::{CliError, CliResult};
pub use file::ProblemFile;

#[derive(Debug, Parser)]
#[command(name = "subproj", version, about = "Subgradient projections and relaxed projection solves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Problem file (JSON).
    #[arg(long, global = true)]
    pub file: Option<PathBuf>,
    /// Subgradient selection: least-index, centroid or endpoint:K.
    #[arg(long, global = true, default_value = "least-index", value_parser = commands::parse_strategy)]
    pub strategy: SelectionStrategy,
    /// Seed for randomized diagnostics.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Project one point with the file's single function.
    Project {
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Run the feasibility solver.
    Solve {
        /// Where to write the CSV trace.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Regularity diagnostics for the file's single function.
    Analyze {
        #[arg(value_enum)]
        what: Analysis,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, value_enum, default_value = "scale")]
        family: Family,
    },
}

/// What a successful run printed and the exit code it maps to.
pub struct Outcome {
    pub stdout: String,
    pub exit_code: i32,
}

pub fn run(cli: Cli) -> CliResult<Outcome> {
    let path = cli.file.clone().ok_or_else(|| CliError::Schema("--file is required".into()))?;
    let file = ProblemFile::load(&path)?;
    let ok = |stdout| Outcome { stdout, exit_code: 0 };
    match cli.command {
        Command::Project { point } => commands::project(&file, &commands::parse_point(&point)?, cli.strategy).map(ok),
        Command::Solve { trace } => {
            let r = commands::solve(&file, trace.as_deref(), cli.strategy)?;
            let exit_code = if r.status == SolveStatus::Converged { 0 } else { 1 };
            Ok(Outcome { stdout: r.text, exit_code })
        }
        Command::Analyze { what, point, pairs, samples, radius, beta, n, family } => {
            let params = AnalyzeParams {
                point: commands::parse_point(&point)?,
                strategy: cli.strategy,
                seed: cli.seed,
                pairs,
                samples,
                radius,
                beta,
                horizon: n,
                family,
            };
            commands::analyze(&file, what, &params).map(ok)
        }
    }
}
