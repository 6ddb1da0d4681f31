use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fedsched_core::fl_sim::NonIidType;

#[derive(Debug, Parser)]
#[command(name = "fedsched", version, about = "Client pool selection and round scheduling for federated learning")]
pub struct Cli {
    /// Root seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate or select client pools.
    Pool {
        #[command(subcommand)]
        command: PoolCommand,
    },
    /// Split a client pool into per-round subsets.
    Subsets(SubsetsArgs),
    /// Train with scheduled and random client selection and compare.
    Simulate(SimulateArgs),
    /// Summarize a schedule or a simulation run.
    Report(ReportArgs),
}

#[derive(Debug, Subcommand)]
pub enum PoolCommand {
    /// Write a synthetic non-iid client file.
    Generate(GenerateArgs),
    /// Choose a pool within a cost budget.
    Select(SelectArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PoolType {
    OneLabel,
    TwoLabels,
    ThreeLabels,
}

impl From<PoolType> for NonIidType {
    fn from(t: PoolType) -> Self {
        match t {
            PoolType::OneLabel => NonIidType::OneLabel,
            PoolType::TwoLabels => NonIidType::TwoLabels,
            PoolType::ThreeLabels => NonIidType::ThreeLabels,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long = "type", value_enum)]
    pub kind: PoolType,
    #[arg(long, default_value_t = 100)]
    pub clients: usize,
    #[arg(long, default_value_t = 10)]
    pub classes: usize,
    #[arg(long, default_value_t = 60)]
    pub samples: u64,
    /// Cost slope.
    #[arg(long, default_value_t = 2.0)]
    pub a: f64,
    /// Cost intercept.
    #[arg(long, default_value_t = 5.0)]
    pub b: f64,
    /// Output file; stdout if omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Dp,
    Greedy,
    Random,
    All,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    /// Client file (JSON).
    #[arg(long)]
    pub clients: PathBuf,
    #[arg(long)]
    pub budget: u64,
    #[arg(long, value_enum, default_value_t = MethodArg::Greedy)]
    pub method: MethodArg,
    /// Minimum pool size the budget must always afford.
    #[arg(long, default_value_t = 0)]
    pub min_clients: usize,
    /// Eleven comma-separated per-criterion thresholds.
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Option<Vec<f64>>,
    /// Eleven comma-separated criterion weights.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    /// Replay this comma-separated id order as the random selection.
    #[arg(long, value_delimiter = ',')]
    pub order: Option<Vec<String>>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BaselineArg {
    Random,
}

#[derive(Debug, Args)]
pub struct SubsetsArgs {
    #[arg(long)]
    pub clients: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub delta: usize,
    #[arg(long = "x-star", default_value_t = 3)]
    pub x_star: u32,
    /// Fixed class-knapsack capacity.
    #[arg(long)]
    pub capacity: Option<u64>,
    /// Also emit size-matched random subsets.
    #[arg(long, value_enum)]
    pub baseline: Option<BaselineArg>,
    /// Directory for schedule.json and stacked.csv; schedule JSON goes to
    /// stdout if omitted.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Override the period limit.
    #[arg(long)]
    pub periods: Option<usize>,
    /// Schedule only: no training, no random arm.
    #[arg(long)]
    pub no_train: bool,
    /// Accuracy used for the rounds-to-target statistic.
    #[arg(long, default_value_t = 0.5)]
    pub target: f64,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Schedule JSON written by `subsets`.
    #[arg(long, conflicts_with = "run", required_unless_present = "run")]
    pub schedule: Option<PathBuf>,
    /// Output directory of `simulate`.
    #[arg(long)]
    pub run: Option<PathBuf>,
}
