//! `wavetrack`: run front-tracking simulations, control synthesis and checks
//! from a TOML configuration.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Failure of a subcommand; each kind has its own exit status.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Solver(wavetrack::Error),
    /// A requested check did not pass.
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Solver(wavetrack::Error::Config(_)) => 2,
            CliError::Solver(_) => 3,
            CliError::Check(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Solver(e) => write!(f, "solver error: {e}"),
            CliError::Check(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<wavetrack::Error> for CliError {
    fn from(e: wavetrack::Error) -> Self {
        CliError::Solver(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Environment variable that replaces the default output base directory.
pub const OUT_DIR_VAR: &str = "WAVETRACK_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "wavetrack", version, about = "Wavefront tracking for balance laws on a strip")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Configuration file.
    config: PathBuf,
    /// Run directory; defaults to `<base>/<config stem>-<command>` where the
    /// base is `$WAVETRACK_OUT_DIR` or `runs`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Front-tracking run in the configured mode and orientation.
    Simulate(Common),
    /// Forward splitting run, swapped to the rightward reading and audited.
    SwapCheck(Common),
    /// Pair of runs with the first jump shifted; reports the L¹ stability ratio.
    Stability(Common),
    /// Null-control synthesis and independent verification.
    Control {
        #[command(flatten)]
        common: Common,
        /// Exit with status 4 if the verified state is not null within the tolerance.
        #[arg(long)]
        strict: bool,
    },
    /// Runs every `(ε, h)` level of `run.levels` and tabulates convergence.
    Converge(Common),
    /// Measures the calibration constants of the configured system.
    Calibrate(Common),
    /// Samples the structural assumptions and speed bounds of the system.
    CheckSystem(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(c) => commands::simulate(c.config.as_path(), c.out.as_deref()),
        Command::SwapCheck(c) => commands::swap_check(c.config.as_path(), c.out.as_deref()),
        Command::Stability(c) => commands::stability(c.config.as_path(), c.out.as_deref()),
        Command::Control { common, strict } => commands::control(common.config.as_path(), common.out.as_deref(), *strict),
        Command::Converge(c) => commands::converge(c.config.as_path(), c.out.as_deref()),
        Command::Calibrate(c) => commands::calibrate(c.config.as_path(), c.out.as_deref()),
        Command::CheckSystem(c) => commands::check_system(c.config.as_path(), c.out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wavetrack: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
