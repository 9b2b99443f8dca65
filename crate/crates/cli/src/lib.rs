//! Batch front end for the `avwtc` toolkit.
//!
//! Every command prints a JSON [`ResultRecord`] on stdout. Exit codes: 0 on
//! success, 1 on a numeric or feasibility failure, 2 on bad input.

pub mod args;
pub mod commands;
pub mod record;
pub mod spec;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

pub use record::ResultRecord;

/// Environment variable holding the default worker thread count.
pub const THREADS_ENV: &str = "AVWTC_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Numeric(_) => 1,
            Self::Input(_) => 2,
        }
    }
}

impl From<avwtc::Error> for CliError {
    fn from(e: avwtc::Error) -> Self {
        match e {
            avwtc::Error::Infeasible(_) | avwtc::Error::SizeLimit { .. } => Self::Numeric(e.to_string()),
            _ => Self::Input(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "avwtc", version, about = "Secrecy capacity, bounds, soft covering and coupling experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Also write the result record to this file.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Secrecy capacity for a fixed state type.
    Capacity(commands::CapacityArgs),
    /// BS-BE capacity along a parameter grid, as CSV.
    BsbeCurve(commands::CurveArgs),
    /// Lower and upper bounds over a constraint set.
    Bounds(commands::BoundsArgs),
    /// Soft-covering exponent and Monte Carlo.
    #[command(subcommand)]
    Softcover(commands::SoftcoverCommand),
    /// Repair random state sequences into a target type class.
    Coupling(commands::CouplingArgs),
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Input(format!("{THREADS_ENV}={v}: expected a positive integer")))?;
    // A second call in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs one parsed invocation and returns its record.
pub fn run(cli: Cli) -> Result<ResultRecord, CliError> {
    configure_threads()?;
    let start = Instant::now();
    let mut record = match cli.command {
        Command::Capacity(a) => commands::capacity(&a)?,
        Command::BsbeCurve(a) => commands::bsbe_curve(&a)?,
        Command::Bounds(a) => commands::bounds(&a)?,
        Command::Softcover(c) => commands::softcover(&c)?,
        Command::Coupling(a) => commands::coupling(&a)?,
    };
    record.wall_time_secs = start.elapsed().as_secs_f64();
    if let Some(path) = &cli.json {
        record::write_atomic(path, &record.to_json())?;
    }
    Ok(record)
}
