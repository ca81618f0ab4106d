//! Command-line frontend for periodic-set invariants: invariant matrices,
//! pairwise comparisons, novelty distances, near-duplicate pipelines, 1D
//! reconstruction, and asymptotic-curve data.
//!
//! Data goes to standard output or files; progress and timing lines go to
//! standard error. Exit codes: 0 success, 1 computation error, 2 usage or
//! input error.

mod commands;
mod inputs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use perinv_core::metrics::{GroundMetric, InvariantKind};

#[derive(Debug, Parser)]
#[command(name = "perinv", version, about = "Isometry invariants of periodic point sets")]
struct Cli {
    /// Worker threads (default: all cores; PERINV_THREADS as fallback).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed reserved for randomized steps; current commands are
    /// deterministic and ignore it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InvariantChoice {
    Pdd,
    Pda,
}

impl From<InvariantChoice> for InvariantKind {
    fn from(c: InvariantChoice) -> Self {
        match c {
            InvariantChoice::Pdd => InvariantKind::Pdd,
            InvariantChoice::Pda => InvariantKind::Pda,
        }
    }
}

fn parse_ground(s: &str) -> Result<GroundMetric, String> {
    s.parse().map_err(|_| {
        format!("unknown ground metric {s:?}; expected linf, l1, l2, rms, or q:<r>")
    })
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute invariant matrices (orders 1..h concatenated) per input.
    Invariant {
        /// Structure files (.cif or .json) or directories of them.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Highest order h.
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Neighbor count k.
        #[arg(short = 'k', long, default_value_t = 100)]
        neighbors: usize,
        /// Invariant family: raw distances (pdd) or deviations (pda).
        #[arg(long, value_enum, default_value_t = InvariantChoice::Pda)]
        invariant: InvariantChoice,
        /// Emit the t-moments matrix instead of the distribution.
        #[arg(long)]
        moments: Option<usize>,
        /// Merge equal rows into weighted rows.
        #[arg(long)]
        collapse: bool,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        /// Directory for per-input files; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// All configured distances between the structures of two files.
    Compare {
        file_a: PathBuf,
        file_b: PathBuf,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(short = 'k', long, default_value_t = 100)]
        neighbors: usize,
        /// Ground metric: linf, l1, l2, rms, or q:<r>.
        #[arg(long, default_value = "linf", value_parser = parse_ground)]
        ground: GroundMetric,
        #[arg(long, value_enum, default_value_t = InvariantChoice::Pda)]
        invariant: InvariantChoice,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Local novelty distance of a query against a corpus.
    Nn {
        /// Query structure file (first structure is used).
        #[arg(long)]
        query: PathBuf,
        /// Corpus files or directories.
        #[arg(long, required = true, num_args = 1..)]
        corpus: Vec<PathBuf>,
        /// How many nearest entries to report.
        #[arg(long, default_value_t = 3)]
        top: usize,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(short = 'k', long, default_value_t = 100)]
        neighbors: usize,
        #[arg(long, default_value = "linf", value_parser = parse_ground)]
        ground: GroundMetric,
        #[arg(long, value_enum, default_value_t = InvariantChoice::Pda)]
        invariant: InvariantChoice,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Hierarchical near-duplicate detection over one or two datasets.
    Dedup {
        /// Dataset files or directories.
        #[arg(long, required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        /// Second dataset for cross-comparison.
        #[arg(long, num_args = 1..)]
        inputs_b: Option<Vec<PathBuf>>,
        /// Distance thresholds in Angstroms; a ladder from 1e-10 to
        /// 1e-2 when omitted.
        #[arg(long, num_args = 1..)]
        thresholds: Option<Vec<f64>>,
        #[arg(short = 'k', long, default_value_t = 100)]
        neighbors: usize,
        #[arg(long, default_value = "linf", value_parser = parse_ground)]
        ground: GroundMetric,
        /// Directory for report and pair CSV files.
        #[arg(long, default_value = ".")]
        output: PathBuf,
    },
    /// Rebuild a 1D sequence from a shift-distribution CSV.
    Reconstruct1d {
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Per-k asymptotic curve data for plotting.
    Asymptote {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(short = 'k', long, default_value_t = 100)]
        neighbors: usize,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Failures split by exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Computation(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    fn computation(msg: impl Into<String>) -> Self {
        CliError::Computation(msg.into())
    }
}

fn configure_threads(requested: Option<usize>) {
    let n = requested.or_else(|| {
        std::env::var("PERINV_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
        {
            eprintln!("warning: thread pool already configured: {e}");
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads(cli.threads);
    let result = match cli.command {
        Command::Invariant {
            inputs,
            order,
            neighbors,
            invariant,
            moments,
            collapse,
            format,
            output,
        } => commands::invariant(
            &inputs,
            order,
            neighbors,
            invariant.into(),
            moments,
            collapse,
            format,
            output.as_deref(),
        ),
        Command::Compare {
            file_a,
            file_b,
            order,
            neighbors,
            ground,
            invariant,
            format,
            output,
        } => commands::compare(
            &file_a,
            &file_b,
            order,
            neighbors,
            ground,
            invariant.into(),
            format,
            output.as_deref(),
        ),
        Command::Nn {
            query,
            corpus,
            top,
            order,
            neighbors,
            ground,
            invariant,
            format,
            output,
        } => commands::nn(
            &query,
            &corpus,
            top,
            order,
            neighbors,
            ground,
            invariant.into(),
            format,
            output.as_deref(),
        ),
        Command::Dedup {
            inputs,
            inputs_b,
            thresholds,
            neighbors,
            ground,
            output,
        } => commands::dedup(
            &inputs,
            inputs_b.as_deref(),
            thresholds,
            neighbors,
            ground,
            &output,
        ),
        Command::Reconstruct1d { input, output } => {
            commands::reconstruct_1d(&input, output.as_deref())
        }
        Command::Asymptote {
            inputs,
            order,
            neighbors,
            format,
            output,
        } => commands::asymptote(&inputs, order, neighbors, format, output.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Computation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
