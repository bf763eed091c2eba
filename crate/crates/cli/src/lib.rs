//! Command-line front end for the demand-curve exchange engine.
//!
//! Five subcommands wire the core library into reproducible, machine-
//! readable experiments: `simulate` (event scripts against a mechanism),
//! `approx` (best cone approximation of a target curve), `tradeoff`
//! (complexity vs. approximation-error sweeps), `lowerbound` (adversarial
//! probes), and `arbitrage` (price tracking along an external price path).
//!
//! Exit codes double as CI verdicts: 0 success, 1 property breach
//! (insolvency), 2 input error.

pub mod commands;
pub mod formats;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

/// Error type carrying the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: unreadable/unparsable files, invalid parameters. Exit 2.
    #[error("{0}")]
    Input(String),
    /// A property the run was supposed to maintain failed. Exit 1.
    #[error("{0}")]
    Breach(String),
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError::Input(message.into())
    }

    pub fn breach(message: impl Into<String>) -> Self {
        CliError::Breach(message.into())
    }

    pub fn from_core(error: demex_core::Error) -> Self {
        CliError::Input(error.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Breach(_) => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "demex", version, about = "Demand-curve exchange toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized components (overrides config seeds).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker limit for parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Norm exponent for distances, 1 or 2 (overrides config).
    #[arg(long, global = true)]
    pub p: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run an event script against a mechanism; emits a ledger CSV.
    Simulate {
        /// Events file, one JSON object per line.
        #[arg(long)]
        events: PathBuf,
        /// Mechanism JSON (provides the price domain).
        #[arg(long)]
        mechanism: PathBuf,
        /// Initial pool price (default: geometric midpoint of the domain).
        #[arg(long)]
        p0: Option<f64>,
    },
    /// Best approximation of a target curve within a mechanism's cone.
    Approx {
        /// Target curve JSON.
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        mechanism: PathBuf,
        /// Weight function JSON.
        #[arg(long)]
        weight: PathBuf,
        /// Grid cells for the discretized solver.
        #[arg(long, default_value_t = 192)]
        grid: usize,
    },
    /// Complexity / approximation-error sweep over an epsilon grid.
    Tradeoff {
        /// Experiment config JSON.
        #[arg(long)]
        config: PathBuf,
    },
    /// Adversarial lower-bound probe against a mechanism.
    Lowerbound {
        #[arg(long)]
        mechanism: PathBuf,
        #[arg(long)]
        weight: PathBuf,
        /// Target class lower bound.
        #[arg(long, default_value_t = 0.0)]
        fmin: f64,
        /// Target class upper bound.
        #[arg(long, default_value_t = 1.0)]
        fmax: f64,
        /// Adversary family size (default: mechanism complexity + 1, the
        /// smallest size with a guaranteed-hard member).
        #[arg(long)]
        adversaries: Option<usize>,
    },
    /// Arbitrage best responses along an external price path; emits a
    /// ledger CSV with profit columns.
    Arbitrage {
        #[arg(long)]
        mechanism: PathBuf,
        /// Price path file: one price per line.
        #[arg(long)]
        prices: PathBuf,
        /// Initial pool price (default: geometric midpoint of the domain).
        #[arg(long)]
        p0: Option<f64>,
        /// Comma-separated basis coefficients seeding the pool
        /// (default: 1 for every basis element).
        #[arg(long)]
        coeffs: Option<String>,
    },
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate { events, mechanism, p0 } => {
            commands::simulate(&cli, events, mechanism, *p0)
        }
        Command::Approx { curve, mechanism, weight, grid } => {
            commands::approx(&cli, curve, mechanism, weight, *grid)
        }
        Command::Tradeoff { config } => commands::tradeoff(&cli, config),
        Command::Lowerbound { mechanism, weight, fmin, fmax, adversaries } => {
            commands::lowerbound(&cli, mechanism, weight, *fmin, *fmax, *adversaries)
        }
        Command::Arbitrage { mechanism, prices, p0, coeffs } => {
            commands::arbitrage(&cli, mechanism, prices, *p0, coeffs.as_deref())
        }
    }
}

pub(crate) fn read_file(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub(crate) fn parse_json<T: serde::de::DeserializeOwned>(
    path: &PathBuf,
    text: &str,
) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub(crate) fn write_output(cli: &Cli, content: &str) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
