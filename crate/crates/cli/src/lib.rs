//! `blowup` command line: closed forms, trajectories, Monte Carlo
//! ensembles, the convergence classifier, the regime barometer and figure
//! data, written as CSV and JSON.
//!
//! Time is measured in periods (years) throughout.

mod commands;
mod error;
mod output;
mod params;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use error::{CliError, CliResult};
pub use output::{Cell, Format, Sink, Table};
pub use params::{DslSource, ModelFlags};

#[derive(Debug, Parser)]
#[command(
    name = "blowup",
    version,
    about = "Finite-time singularity models of machine intelligence growth"
)]
pub struct Cli {
    /// Write every artifact into this directory instead of printing the main one
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Table format
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,

    /// Master seed of stochastic commands
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a closed-form solution on a uniform time grid
    Solve(commands::solve::SolveArgs),
    /// Integrate a model numerically and locate any blow-up
    Simulate(commands::simulate::SimulateArgs),
    /// Run a Monte Carlo ensemble of stochastic paths
    Ensemble(commands::ensemble::EnsembleArgs),
    /// Decide whether dA = F(A) dt blows up in finite time
    Classify(commands::classify::ClassifyArgs),
    /// Test a (t, A) series for superexponential curvature
    Barometer(commands::barometer::BarometerArgs),
    /// Regenerate figure data and headline numbers
    Reproduce(commands::reproduce::ReproduceArgs),
}

/// Runs a parsed command line, writing to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> CliResult {
    let mut sink = Sink::new(cli.out.clone(), cli.format, stdout)?;
    match &cli.command {
        Command::Solve(args) => commands::solve::run(args, &mut sink),
        Command::Simulate(args) => commands::simulate::run(args, &mut sink),
        Command::Ensemble(args) => commands::ensemble::run(args, cli.seed, &mut sink),
        Command::Classify(args) => commands::classify::run(args, &mut sink),
        Command::Barometer(args) => commands::barometer::run(args, &mut sink),
        Command::Reproduce(args) => commands::reproduce::run(args, cli.seed, cli.out.is_some(), &mut sink),
    }
}

/// Parses `args`, runs the command and returns the process exit code:
/// 0 on success, 2 on usage errors, 3 on model or domain errors.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    2
                }
            };
        }
    };
    match run(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
