//! Command-line front end and file formats for elastic functional
//! regression.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod model_file;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{ConfigFile, GradientName, MethodName};
pub use error::{CliError, CliResult};
pub use model_file::{BasisName, Model, ModeName};

#[derive(Debug, Parser)]
#[command(name = "efrm", version, about = "Elastic functional regression")]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    /// TOML file with defaults for any long option.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a simulated dataset with its ground truth.
    Simulate(SimulateArgs),
    /// Fit a model and write it with a fit report.
    Fit(FitArgs),
    /// Predict responses for new predictors.
    Predict(PredictArgs),
    /// Compare models by k-fold cross-validated RMSE.
    Crossval(CrossvalArgs),
    /// Test R² of a linear model under growing phase contamination.
    Decay(DecayArgs),
    /// Groupwise alignment of predictors.
    Align(AlignArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct DataArgs {
    /// Predictor CSV, one function per row.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Response CSV, one value per row.
    #[arg(long)]
    pub responses: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub basis: Option<BasisName>,
    /// Number of basis elements.
    #[arg(long = "J")]
    pub j: Option<usize>,
    /// Degree of the index polynomial h.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=3))]
    pub h_degree: Option<u64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeName>,
    /// Gradient used by the quasi-Newton inner fit.
    #[arg(long, value_enum)]
    pub gradient: Option<GradientName>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    /// Simulation family: 1 (Fourier) or 2 (B-spline).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub sim: Option<u8>,
    #[arg(long)]
    pub n_samples: Option<usize>,
    #[arg(long)]
    pub grid_size: Option<usize>,
    #[arg(long)]
    pub warp_amplitude: Option<f64>,
    #[arg(long)]
    pub noise_sd: Option<f64>,
    #[arg(long, value_enum)]
    pub basis: Option<BasisName>,
    #[arg(long = "J")]
    pub j: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model_args: ModelArgs,
    #[arg(long, value_enum)]
    pub method: Option<MethodName>,
    /// Where the model file is written.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Also report k-fold CV RMSE against the linear model.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report file; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Prediction CSV; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CrossvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model_args: ModelArgs,
    /// Comma-separated subset of efrm-1, efrm-2, efrm-3, flm, paflm, np-l2, np-shape.
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<String>>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Table CSV; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DecayArgs {
    /// Comma-separated warp amplitudes.
    #[arg(long, value_delimiter = ',')]
    pub a_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub n_samples: Option<usize>,
    #[arg(long)]
    pub grid_size: Option<usize>,
    #[arg(long)]
    pub noise_sd: Option<f64>,
    #[arg(long, value_enum)]
    pub basis: Option<BasisName>,
    #[arg(long = "J")]
    pub j: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Table CSV; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct AlignArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output directory for amplitudes.csv and phases.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> CliResult<()> {
    let config = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Simulate(a) => commands::simulate(&a, &config),
        Command::Fit(a) => commands::fit(&a, &config),
        Command::Predict(a) => commands::predict(&a, &config),
        Command::Crossval(a) => commands::crossval(&a, &config),
        Command::Decay(a) => commands::decay(&a, &config),
        Command::Align(a) => commands::align(&a, &config),
    }
}
