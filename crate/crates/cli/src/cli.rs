use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "wmmd-pu", version, about = "Positive-unlabeled classification with the closed-form WMMD classifier")]
#[command(args_override_self = true)]
pub struct Cli {
    /// JSON file of flag values (keys are long flag names); explicit flags win
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads [default: available parallelism]; WMMD_PU_THREADS overrides
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Log progress to stderr (repeat for more detail)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a synthetic dataset and write it in LIBSVM format
    Generate(GenerateArgs),
    /// Fit a model on a PU training file (+1 = positive, 0 = unlabeled)
    Train(TrainArgs),
    /// Score a LIBSVM test file with a saved model
    Predict(PredictArgs),
    /// Estimate the class prior of a PU training file (density-based)
    EstimatePrior(EstimatePriorArgs),
    /// Run replicated experiments or parameter sweeps
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Gaussian,
    TwoMoons,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Wmmd,
    Log,
    Dh,
    Tadj,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Gaussian,
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    #[value(name = "n_u")]
    NU,
    #[value(name = "pi_plus")]
    PiPlus,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    pub kind: Kind,
    /// Number of points (unlabeled points when --n-p is given)
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    /// Positive class probability
    #[arg(long, default_value_t = 0.5)]
    pub pi_plus: f64,
    /// Also draw this many labeled positives and write a PU training file
    /// (labels +1 and 0) instead of a +-1 labeled file
    #[arg(long)]
    pub n_p: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SelectionArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    pub kernel: KernelArg,
    /// Kernel widths searched on the holdout split
    #[arg(long, value_delimiter = ',', default_value = "1,0.4,0.2,0.1,0.05")]
    pub gamma_grid: Vec<f64>,
    /// Fraction of positives and of unlabeled points used for fitting
    #[arg(long, default_value_t = 0.8)]
    pub split_fraction: f64,
    /// Quantile level of the density-based prior estimator
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// LIBSVM training file; label +1 marks positives, 0 unlabeled points
    #[arg(long, value_name = "PATH")]
    pub train: PathBuf,
    #[arg(long, value_enum, default_value = "wmmd")]
    pub method: MethodArg,
    /// Known class prior
    #[arg(long, conflicts_with = "estimate_prior")]
    pub pi_plus: Option<f64>,
    /// Estimate the class prior with the density-based method
    #[arg(long)]
    pub estimate_prior: bool,
    #[command(flatten)]
    pub selection: SelectionArgs,
    /// Regularization strengths for LOG/DH
    #[arg(long, value_delimiter = ',', default_value = "1,0.4,0.2,0.1,0.05")]
    pub lambda_grid: Vec<f64>,
    /// Gradient-descent step size for LOG/DH
    #[arg(long, default_value_t = 0.1)]
    pub learning_rate: f64,
    /// Maximum gradient-descent epochs for LOG/DH
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    /// Early-stopping patience (epochs without validation improvement)
    #[arg(long, default_value_t = 10)]
    pub patience: usize,
    /// Refit the selected WMMD model on training + validation rows
    #[arg(long)]
    pub refit_full: bool,
    /// Store the training file path in a WMMD model instead of the samples
    #[arg(long)]
    pub reference_train_file: bool,
    #[arg(long, value_name = "PATH")]
    pub model_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    /// LIBSVM test file (labels are ignored)
    #[arg(long, value_name = "PATH")]
    pub test: PathBuf,
    /// Output CSV with columns score,prediction
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EstimatePriorArgs {
    #[arg(long, value_name = "PATH")]
    pub train: PathBuf,
    #[command(flatten)]
    pub selection: SelectionArgs,
    /// Write the estimate as JSON here as well as to stdout
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Sweep axis; without it each method runs once on the fixed plan
    #[arg(long, value_enum)]
    pub sweep: Option<AxisArg>,
    /// Sweep values [default: 40..500 step 20 for n_u, 0.05..0.95 step 0.05 for pi_plus]
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "wmmd")]
    pub methods: Vec<MethodArg>,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Synthetic generator (ignored with --dataset)
    #[arg(long, value_enum, default_value = "gaussian")]
    pub generator: Kind,
    /// LIBSVM dataset to resample instead of a generator
    #[arg(long, value_name = "PATH")]
    pub dataset: Option<PathBuf>,
    /// Take n_p, n_u, n_te and pi_plus from a named dataset protocol
    #[arg(long, value_name = "NAME")]
    pub protocol: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub n_p: usize,
    #[arg(long, default_value_t = 400)]
    pub n_u: usize,
    #[arg(long, default_value_t = 1000)]
    pub n_te: usize,
    #[arg(long, default_value_t = 0.5)]
    pub pi_plus: f64,
    /// Treat the prior as unknown and estimate it in every replication
    #[arg(long)]
    pub estimate_prior: bool,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub kernel: KernelArg,
    #[arg(long, value_delimiter = ',', default_value = "1,0.4,0.2,0.1,0.05")]
    pub gamma_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,0.4,0.2,0.1,0.05")]
    pub lambda_grid: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// Output CSV
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Also write the full reports as JSON (single-plan runs only)
    #[arg(long, value_name = "PATH")]
    pub json_out: Option<PathBuf>,
}
