use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod files;
mod output;

/// Exit codes: 0 success or verified, 1 verification failure, 2 usage or
/// input error, 3 budget or convergence error.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Budget(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

impl From<hypervis::Error> for CliError {
    fn from(e: hypervis::Error) -> Self {
        use hypervis::Error::*;
        match e {
            BudgetExceeded { .. } | NotConverged { .. } | DifferenceCapExceeded { .. } => {
                CliError::Budget(e.to_string())
            }
            GapTooSmall(_) | InvalidDimension { .. } | LayerOutOfRange { .. } => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Budget(m) => write!(f, "budget error: {m}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Machine,
}

#[derive(Debug, Parser)]
#[command(
    name = "hypervis",
    version,
    about = "Mutual-visibility colorings of hypercubes"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,

    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub jobs: u32,

    /// Lift the desk-scale size limits.
    #[arg(long, global = true)]
    pub unsafe_budgets: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a coloring of Q_n with at most g*q mutual-visibility classes.
    Color {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        g: usize,
        /// Colors per layer; the resampling construction uses two.
        #[arg(long, default_value_t = 2)]
        q: usize,
        /// Master seed (default 0; required with --format machine).
        #[arg(long)]
        seed: Option<u64>,
        /// Resampling cap per layer (default 1000 per block).
        #[arg(long)]
        max_rounds: Option<u64>,
        /// Where to write the coloring file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write one layer coloring file per layer into this directory.
        #[arg(long)]
        layer_dir: Option<PathBuf>,
    },
    /// Check that every class of a coloring file is a mutual-visibility set.
    /// Layer coloring files are checked for the block escape property instead.
    Verify {
        file: PathBuf,
        /// Gap used when checking a layer coloring file.
        #[arg(long, default_value_t = 3)]
        g: usize,
    },
    /// Exact small-cube values of mu(Q_n) or chi_mu(Q_n).
    Exact {
        kind: ExactKind,
        #[arg(long)]
        n: usize,
        /// Results directory used as a cache.
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Stop mu search after this many nodes and report the incumbent.
        #[arg(long)]
        node_limit: Option<u64>,
    },
    /// Local lemma arithmetic for every middle layer.
    LllReport {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        g: usize,
    },
    /// Search a set file for three full layers of an interval subcube.
    Obstruct {
        file: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        max_dim: usize,
    },
    /// List a layer of Q_n in colex order.
    Layers {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Check whether a set file is a mutual-visibility set.
    CheckSet {
        file: PathBuf,
        #[arg(long)]
        n: usize,
        /// Certify one pair: source vertex.
        #[arg(long, requires = "to")]
        from: Option<String>,
        /// Certify one pair: target vertex.
        #[arg(long, requires = "from")]
        to: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExactKind {
    Mu,
    Chi,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs as usize)
        .build()
        .expect("thread pool");
    match pool.install(|| commands::run(&cli)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("hypervis: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
