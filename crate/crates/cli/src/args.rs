use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "impred", version, about = "Plausibility functions and prediction intervals for future observations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plausibility curve of the future quantity.
    Plaus(AnalysisArgs),
    /// Prediction plausibility region at level alpha.
    Interval(AnalysisArgs),
    /// PIT study of G_Y(Ỹ) under a true model.
    Pit(SimArgs),
    /// Coverage study of prediction regions; a single scenario or a bundled grid.
    Coverage(SimArgs),
    /// List the bundled datasets.
    Datasets(DatasetsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    GammaMatched,
    Normal,
    McBisection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Grid {
    Lognormal,
    Gamma,
    Binomial,
}

#[derive(Debug, Args)]
pub struct Common {
    /// normal, lognormal, gamma, binomial or poisson_process.
    #[arg(long)]
    pub model: Option<String>,
    /// next, kth-of-m:M:K, mean-of-m:M, max-of-m:M, arrival:K or count-of-m:M.
    #[arg(long)]
    pub target: Option<String>,
    /// right, left or singleton.
    #[arg(long, default_value = "singleton")]
    pub assertion: String,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Monte Carlo draws for the predictive distribution.
    #[arg(long, default_value_t = impred::plaus::DEFAULT_MC_DRAWS)]
    pub mc_draws: usize,
    #[arg(long, env = "IMPRED_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Root finder for the gamma model.
    #[arg(long, value_enum, default_value_t = Method::GammaMatched)]
    pub method: Method,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalysisArgs {
    #[command(flatten)]
    pub common: Common,
    /// Bundled dataset name or a path to a data file.
    #[arg(long, conflicts_with_all = ["input", "count", "arrival"])]
    pub data: Option<String>,
    /// Data file: one value per line or a single-column CSV.
    #[arg(long, conflicts_with_all = ["count", "arrival"])]
    pub input: Option<PathBuf>,
    /// Binomial count as Y/N.
    #[arg(long, conflicts_with = "arrival")]
    pub count: Option<String>,
    /// Number of future binomial trials; shorthand for --target count-of-m:M.
    #[arg(long)]
    pub future_trials: Option<u64>,
    /// Poisson-process arrival as T/N: the N-th arrival happened at time T.
    #[arg(long)]
    pub arrival: Option<String>,
    /// Binomial only: use the modified sampler instead of endpoint percentiles.
    #[arg(long)]
    pub modified: bool,
    /// Grid points for plausibility curves.
    #[arg(long, default_value_t = impred::plaus::DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub common: Common,
    /// Run a bundled coverage grid instead of a single scenario.
    #[arg(long, value_enum, conflicts_with = "model")]
    pub grid: Option<Grid>,
    /// Full-size grid and replication counts.
    #[arg(long, requires = "grid")]
    pub long_run: bool,
    /// Sample size (number of trials for binomial, arrival index for Poisson).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1_000)]
    pub reps: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Variance of ln Y for the log-normal model.
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long)]
    pub shape: Option<f64>,
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub rate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DatasetsArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}
