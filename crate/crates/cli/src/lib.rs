//! Command-line driver: ground states, trapped minimizers, concentration
//! sweeps, reports and the verification battery.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod plot;
pub mod table;
pub mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::run;
pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("solver failure in {run}: {source}")]
    Solver {
        run: String,
        #[source]
        source: hartree::Error,
    },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Solver { .. } | Self::Io(_) => 2,
            Self::Verification(_) => 3,
        }
    }

    pub fn solver(run: impl Into<String>) -> impl FnOnce(hartree::Error) -> Self {
        let run = run.into();
        move |source| Self::Solver { run, source }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "hartree", version, about = "Hartree ground states, trapped minimizers and γ → 2 concentration sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Radial ground states Q_γ; rows go to groundstates.csv.
    Ground {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ground: GroundArgs,
    },
    /// Constrained minimizers with a trapping potential; rows go to trapped.csv.
    Trapped {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        trapped: TrappedArgs,
    },
    /// Trapped solves over the γ list followed by a report.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        trapped: TrappedArgs,
    },
    /// Scaling report and plots from groundstates.csv, trapped.csv and checkpoints.
    Report {
        #[command(flatten)]
        common: Common,
    },
    /// Invariant battery on small grids; exit code 3 on any failure.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Seed for the random test fields.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Args, Default)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Output directory (default `out`).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Kernel and ground-state cache directory.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    pub plots: bool,
}

#[derive(Debug, Args, Default)]
pub struct GroundArgs {
    /// Riesz exponent; repeat for several.
    #[arg(long = "gamma")]
    pub gammas: Vec<f64>,
    /// Space dimension N.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Radial nodes.
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Residual tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Initial profile: a checkpoint or an `r,u` CSV.
    #[arg(long)]
    pub warm_start: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct TrappedArgs {
    /// Riesz exponent; repeat for several.
    #[arg(long = "gamma")]
    pub gammas: Vec<f64>,
    /// Coupling, absolute or as a multiple of a* (`1.5a*`).
    #[arg(long)]
    pub a: Option<String>,
    /// `harmonic[:scale]`, `wells:x,y,z^p;…` or `table:<file>`.
    #[arg(long)]
    pub potential: Option<String>,
    /// `radial` or `cartesian`.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Cartesian nodes per axis.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Residual tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
}
