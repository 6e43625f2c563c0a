//! Command-line surface. Flags override values from `--config`; config
//! values override built-in defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "fairgroups",
    version,
    about = "Group a continuous sensitive attribute by observed discrimination and repair scores"
)]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Random seed (generation and splits).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory for artifacts and the run manifest.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads for exhaustive search.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a synthetic benchmark dataset to CSV.
    Generate(GenerateArgs),
    /// Fit a partition of the sensitive space and write it as JSON.
    Partition(PartitionArgs),
    /// Evaluate a partition on a dataset, or compare two partitions.
    Evaluate(EvaluateArgs),
    /// Apply a fitted partition to a new dataset and re-evaluate it.
    Transfer(TransferArgs),
    /// Fit and evaluate score repair across repair strengths.
    Debias(DebiasArgs),
    /// Per-group statistics table (JSON plus CSV for plotting).
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// `paper-uniform` or `paper-truncnormal`.
    #[arg(long)]
    pub preset: Option<String>,

    /// Number of samples.
    #[arg(long)]
    pub n: Option<usize>,

    /// Attach the planted-bias synthetic scorer (adds score and y_hat).
    #[arg(long)]
    pub scored: bool,

    /// Noise level of the synthetic scorer.
    #[arg(long)]
    pub noise_sd: Option<f64>,

    /// Output CSV path (default `<output>/dataset.csv`).
    #[arg(long)]
    pub out_data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    /// Input dataset CSV.
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// `fairgroups`, `kmeans` or `fixed`.
    #[arg(long)]
    pub method: Option<String>,

    /// Number of groups.
    #[arg(long)]
    pub k: Option<usize>,

    /// Grid bins on the first axis.
    #[arg(long)]
    pub m: Option<usize>,

    /// Grid bins on the second axis (2-D data).
    #[arg(long)]
    pub m2: Option<usize>,

    /// Grid bounds (default: data range).
    #[arg(long)]
    pub lo: Option<f64>,
    #[arg(long)]
    pub hi: Option<f64>,
    #[arg(long)]
    pub lo2: Option<f64>,
    #[arg(long)]
    pub hi2: Option<f64>,

    /// Target column: `y`, `y_hat` or `score`.
    #[arg(long)]
    pub target: Option<String>,

    /// Positivity threshold when the target is `score`.
    #[arg(long)]
    pub score_threshold: Option<f64>,

    /// Comma-separated thresholds for the fixed method.
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Option<Vec<f64>>,

    /// Named fixed scheme: `fitzpatrick-ita`, `l60` or `default-2d`.
    #[arg(long)]
    pub scheme: Option<String>,

    /// Force raw exhaustive enumeration instead of the fast path.
    #[arg(long)]
    pub exhaustive: bool,

    /// Output partition path (default `<output>/partition.json`).
    #[arg(long)]
    pub out_partition: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Input dataset CSV.
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Partition to evaluate.
    #[arg(long)]
    pub partition: PathBuf,

    /// Second partition; when given, reports their Rand index on the data.
    #[arg(long)]
    pub against: Option<PathBuf>,

    /// Target column: `y`, `y_hat` or `score`.
    #[arg(long)]
    pub target: Option<String>,

    /// Positivity threshold when the target is `score`.
    #[arg(long)]
    pub score_threshold: Option<f64>,

    /// Confidence level of the per-group intervals.
    #[arg(long)]
    pub level: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TransferArgs {
    /// Dataset to re-evaluate on (samples outside the fitted cover are
    /// clamped into the boundary groups).
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Fitted partition to transfer.
    #[arg(long)]
    pub partition: PathBuf,

    /// Target column: `y`, `y_hat` or `score`.
    #[arg(long)]
    pub target: Option<String>,

    /// Positivity threshold when the target is `score`.
    #[arg(long)]
    pub score_threshold: Option<f64>,

    /// Confidence level of the per-group intervals.
    #[arg(long)]
    pub level: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DebiasArgs {
    /// Input dataset CSV (must carry a `score` column).
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Partition defining the groups.
    #[arg(long)]
    pub partition: PathBuf,

    /// Comma-separated repair strengths to evaluate.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,

    /// Quantile-grid resolution of the transport maps.
    #[arg(long)]
    pub resolution: Option<usize>,

    /// Also fit a transport map on the full dataset at this strength and
    /// write it as JSON for later application.
    #[arg(long)]
    pub fit_alpha: Option<f64>,

    /// Transport output path (default `<output>/transport.json`).
    #[arg(long)]
    pub out_transport: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Input dataset CSV.
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Partition defining the groups.
    #[arg(long)]
    pub partition: PathBuf,

    /// Target column: `y`, `y_hat` or `score`.
    #[arg(long)]
    pub target: Option<String>,

    /// Positivity threshold when the target is `score`.
    #[arg(long)]
    pub score_threshold: Option<f64>,

    /// Confidence level of the per-group intervals.
    #[arg(long)]
    pub level: Option<f64>,

    /// Add outcome-vs-prediction amplification columns (needs `y_hat`).
    #[arg(long)]
    pub amplification: bool,
}
