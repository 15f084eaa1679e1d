//! The `laplab` batch front-end.
//!
//! Every command reads one strict JSON [`ExperimentConfig`], and all
//! randomness flows from its top-level seed. Exit codes: 0 success, 1 failed
//! verification or numerical failure, 2 configuration, 3 degenerate degree,
//! 4 ill-posed window, 5 I/O.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};

pub use commands::{cmd_constants, cmd_gc, cmd_matrices, cmd_rates, cmd_spectrum, cmd_verify, Outcome};
pub use config::{ExperimentConfig, GcConfig, MatricesConfig, RatesConfig, ReferenceConfig, SpectrumConfig, VerifyConfig};

/// Environment variable consulted when `--threads` is absent.
pub const THREADS_ENV: &str = "LAPLAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "laplab", version, about = "Graph Laplacian spectral convergence experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Export K, D, M, both Laplacians and the classical graph Laplacians.
    Matrices(Common),
    /// Empirical spectrum, optionally matched against the reference spectrum.
    Spectrum(Common),
    /// Eigenprojection error along an n ladder.
    Rates(Common),
    /// Constants of the rate theorem, printed as JSON.
    Constants(Common),
    /// Uniform deviation of P_n g from P_μ g.
    Gc(Common),
    /// Check the kernel against the declared measure class.
    Verify(Common),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    #[arg(long, value_name = "DIR", default_value = "laplab-out")]
    pub out: PathBuf,
    /// Replaces the seed of the configuration.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads; 0 lets the pool decide.
    #[arg(long, value_name = "N", env = THREADS_ENV)]
    pub threads: Option<usize>,
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Matrices(c)
            | Command::Spectrum(c)
            | Command::Rates(c)
            | Command::Constants(c)
            | Command::Gc(c)
            | Command::Verify(c) => c,
        }
    }
}

/// Process exit code for an error.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Config(_) | Error::Json(_) | Error::Domain(_) | Error::Unsupported(_) => 2,
        Error::DegenerateDegree(_) => 3,
        Error::IllPosedWindow(_) | Error::EssentialSpectrum(_) => 4,
        Error::Io(_) => 5,
        Error::Divergent(_) | Error::LinearAlgebra(_) => 1,
    }
}

/// Loads the configuration, applies the seed override and runs the command
/// on a pool of the requested size.
pub fn run(command: &Command) -> Result<Outcome> {
    let common = command.common();
    let mut config = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    let out = common.out.as_path();
    pool.install(|| match command {
        Command::Matrices(_) => cmd_matrices(&config, out),
        Command::Spectrum(_) => cmd_spectrum(&config, out),
        Command::Rates(_) => cmd_rates(&config, out),
        Command::Constants(_) => cmd_constants(&config),
        Command::Gc(_) => cmd_gc(&config, out),
        Command::Verify(_) => cmd_verify(&config),
    })
}
