//! Command-line front end: configuration parsing, experiment orchestration,
//! CSV/JSON emission, and static SVG plots.
//!
//! Exit codes: 0 success, 1 domain or configuration error, 2 numerical
//! failure.

mod commands;
mod config;
mod csv_out;
mod svg_out;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }
}

impl From<billiards::Error> for CliError {
    fn from(err: billiards::Error) -> Self {
        let code = match err {
            billiards::Error::Domain(_) => 1,
            _ => 2,
        };
        CliError { code, message: err.to_string() }
    }
}

#[derive(Parser)]
#[command(
    name = "billiards",
    about = "Open billiards in R^n: periodic orbits, curvature fronts, and Lyapunov exponents",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct CommonArgs {
    /// Path to the JSON experiment configuration.
    config: PathBuf,
    /// Override the configured number of bounces.
    #[arg(long)]
    bounces: Option<usize>,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured CSV output path.
    #[arg(long)]
    csv: Option<String>,
    /// Override the configured SVG output path.
    #[arg(long)]
    svg: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the scene: disjointness, the no-eclipse condition, bounds.
    Check(CommonArgs),
    /// Solve the periodic orbit for the configured coding.
    Orbit(CommonArgs),
    /// Iterate the billiard map from the orbit start and print the bounces.
    Trace(CommonArgs),
    /// Estimate the largest Lyapunov exponent with bracket and oracle check.
    Lyapunov(CommonArgs),
    /// Sweep the deformation parameter and emit CSV/SVG.
    Sweep(CommonArgs),
    /// Finite-difference derivative study at alpha = 0.
    Derivative(CommonArgs),
    /// Run the property-test battery against this configuration.
    Verify(CommonArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(args) => commands::check(&args),
        Command::Orbit(args) => commands::orbit(&args),
        Command::Trace(args) => commands::trace(&args),
        Command::Lyapunov(args) => commands::lyapunov(&args),
        Command::Sweep(args) => commands::sweep(&args),
        Command::Derivative(args) => commands::derivative(&args),
        Command::Verify(args) => commands::verify(&args),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message);
        std::process::exit(e.code);
    }
}

use crate::config::ExperimentConfig;

impl CommonArgs {
    fn load(&self) -> Result<ExperimentConfig, CliError> {
        let mut config = ExperimentConfig::load(&self.config)?;
        if let Some(bounces) = self.bounces {
            config.bounces = bounces;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(csv) = &self.csv {
            config.output.csv = Some(csv.clone());
        }
        if let Some(svg) = &self.svg {
            config.output.svg = Some(svg.clone());
        }
        config.validate()?;
        Ok(config)
    }
}
