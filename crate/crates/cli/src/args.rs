use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use pdcov::{EstimatorKind, KernelFamily};

#[derive(Debug, Parser)]
#[command(name = "pdcov", version, about = "Positive definite regression and covariance function estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Noisy samples of a reference regression function.
    SimulateRegression(SimulateRegression),
    /// A Gaussian-process realization at random planar locations.
    SimulateGp(SimulateGp),
    /// Fit an estimator to regression data.
    Fit(Fit),
    /// Cross-validate (h, m) on regression data.
    Cv(Cv),
    /// Estimate a covariance function from a spatial field.
    EstimateCov(EstimateCov),
    /// Evaluate a saved fit on a grid of distances.
    Eval(Eval),
    /// Plot a fitted curve, optionally with the truth and observations.
    Plot(Plot),
    /// Plot objective and KL series from a trace file.
    PlotTrace(PlotTrace),
}

#[derive(Debug, Args)]
pub struct SimulateRegression {
    /// wave, spherical, or any named reference function.
    #[arg(long)]
    pub truth: String,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Input interval as `low:high`.
    #[arg(long, default_value = "0:10")]
    pub domain: String,
    #[arg(long, default_value_t = 0.2)]
    pub noise_sd: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateGp {
    /// wave, exp, or any named reference function.
    #[arg(long)]
    pub truth: String,
    #[arg(long, default_value_t = 200)]
    pub w: usize,
    /// `low:high` for both axes or `x_low:x_high,y_low:y_high`; defaults to
    /// the square with diagonal 10.
    #[arg(long)]
    pub domain: Option<String>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EstimatorArgs {
    #[arg(long, value_parser = parse_kind)]
    pub kind: EstimatorKind,
    #[arg(long, value_parser = parse_family, default_value = "gaussian")]
    pub kernel: KernelFamily,
}

#[derive(Debug, Args)]
pub struct IdeaArgs {
    /// Population size; defaults to 10m.
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub tau: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub kl_threshold: f64,
    #[arg(long, default_value_t = 5)]
    pub kl_patience: usize,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
}

#[derive(Debug, Args)]
pub struct Fit {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[arg(long)]
    pub h: f64,
    #[arg(long)]
    pub m: usize,
    /// Diagonal bandwidth for the general kind, comma separated.
    #[arg(long)]
    pub bandwidth: Option<String>,
    #[command(flatten)]
    pub idea: IdeaArgs,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Cv {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Comma-separated bandwidths.
    #[arg(long, default_value = "0.01,0.02,0.05,0.1,0.16,0.2,0.5,1")]
    pub h_grid: String,
    /// Comma-separated sizes or a range `a..b` (inclusive).
    #[arg(long, default_value = "1..10")]
    pub m_grid: String,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub replications: usize,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EstimateCov {
    #[arg(long)]
    pub field: PathBuf,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[arg(long)]
    pub h: f64,
    #[arg(long)]
    pub m: usize,
    /// Average the point estimates over distance bins of this width.
    #[arg(long)]
    pub bin_width: Option<f64>,
    /// Scale distances so the largest equals this value.
    #[arg(long)]
    pub rescale_distances: Option<f64>,
    #[arg(long, default_value_t = pdcov::covpipe::DEFAULT_OUTER_ITERS)]
    pub outer_iters: usize,
    #[command(flatten)]
    pub idea: IdeaArgs,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Also write the point estimates used for fitting.
    #[arg(long)]
    pub points: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Eval {
    #[arg(long)]
    pub fit: PathBuf,
    /// Reference function written as a `truth` column.
    #[arg(long)]
    pub truth: Option<String>,
    /// `start:end:step`.
    #[arg(long, default_value = "0:10:0.01")]
    pub grid: String,
    /// Print the RMS difference to the truth over the grid.
    #[arg(long, requires = "truth")]
    pub rmspe: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct Plot {
    #[arg(long)]
    pub curve: PathBuf,
    /// Regression data or covariance point estimates drawn as gray points.
    #[arg(long)]
    pub points: Option<PathBuf>,
    #[arg(long, default_value = "")]
    pub title: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotTrace {
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_kind(s: &str) -> Result<EstimatorKind, String> {
    s.parse().map_err(|e: pdcov::Error| e.to_string())
}

fn parse_family(s: &str) -> Result<KernelFamily, String> {
    s.parse().map_err(|e: pdcov::Error| e.to_string())
}
