//! Command-line runner for the annealed Ising library.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Format;

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "ANNEALED_ISING_THREADS";

#[derive(Debug, Parser)]
#[command(name = "annealed-ising", version, about = "Annealed Ising models on random graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads (default from ANNEALED_ISING_THREADS, else all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print a weight sequence.
    Weights(ModelArgs),
    /// Sample a random graph (GRG edge list or CM line/torus decomposition).
    Generate(ModelArgs),
    /// Exact annealed partition function by enumeration.
    Exact(ModelArgs),
    /// Limiting pressure, magnetization and susceptibility.
    Thermo {
        #[arg(value_enum, id = "MODEL")]
        model: ModelKind,
        #[command(flatten)]
        args: ModelArgs,
    },
    /// Run an MCMC chain and record S_N per sample.
    Sample {
        #[command(flatten)]
        args: ModelArgs,
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// Compare sampled S_N/sqrt(N) with its predicted Gaussian limit.
    Clt {
        #[command(flatten)]
        args: ModelArgs,
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// Thermodynamics over a (beta, B) grid.
    Sweep {
        #[command(flatten)]
        args: ModelArgs,
        /// Inclusive linear grid, e.g. `beta=0.1:1:10,B=0:0.5:6`.
        #[arg(long)]
        grid: String,
    },
    /// Run the oracle cross-check suite.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::Small)]
        suite: SuiteArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Grg,
    Cm2,
    Cm12,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Small,
    Full,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long = "B", default_value_t = 0.0, allow_negative_numbers = true)]
    pub b: f64,
    /// Fraction of degree-2 vertices in CM(1,2).
    #[arg(long)]
    pub p: Option<f64>,
    /// Power-law exponent of GRG weights.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Constant GRG weight.
    #[arg(long)]
    pub w: Option<f64>,
    /// Scale of power-law weights.
    #[arg(long = "w-min", default_value_t = 1.0)]
    pub w_min: f64,
    /// GRG weights, one per line.
    #[arg(long = "weights-file")]
    pub weights_file: Option<PathBuf>,
    #[arg(long = "N")]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ChainArgs {
    /// Recorded samples.
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    #[arg(long = "burn-in", default_value_t = 100)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    /// Pairing switches per sweep (configuration models).
    #[arg(long)]
    pub switches: Option<usize>,
}

/// Failure with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }
}

fn configure_threads(requested: Option<usize>) -> Result<(), CliError> {
    let threads = match requested {
        Some(t) => Some(t),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(
                v.parse()
                    .map_err(|_| CliError::usage(format!("{THREADS_ENV}={v} is not a thread count")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::usage("thread count must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::numeric(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = configure_threads(cli.threads).and_then(|()| commands::run(&cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
