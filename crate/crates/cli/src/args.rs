use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use focalpoint::{ActivationMode, GeneratorKind};

#[derive(Debug, Parser)]
#[command(name = "focalpoint", version, about = "Private synthesizers, shadow modelling and membership inference")]
pub struct Cli {
    /// TOML (or JSON) configuration with [budget], [mst], [privbayes],
    /// [shadow], [attack] and [experiment] sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "FOCALPOINT_WORKERS")]
    pub workers: Option<usize>,

    /// Root seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the seeded desk dataset and its schema.
    GenDeskData(GenDeskArgs),
    /// Fit a generator and sample synthetic records.
    Synth(SynthArgs),
    /// Estimate focal-point weights by shadow modelling.
    Shadow(ShadowArgs),
    /// Score candidate households against synthetic data.
    Attack(AttackArgs),
    /// Membership advantage and AUC of household predictions.
    Eval(EvalArgs),
    /// Run the full repeated experiment.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenArg {
    Mst,
    #[value(alias = "pb")]
    Privbayes,
}

impl From<GenArg> for GeneratorKind {
    fn from(g: GenArg) -> Self {
        match g {
            GenArg::Mst => GeneratorKind::Mst,
            GenArg::Privbayes => GeneratorKind::PrivBayes,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ActivationArg {
    Sigmoid,
    Root,
}

impl From<ActivationArg> for ActivationMode {
    fn from(a: ActivationArg) -> Self {
        match a {
            ActivationArg::Sigmoid => ActivationMode::Sigmoid,
            ActivationArg::Root => ActivationMode::Root,
        }
    }
}

#[derive(Debug, Args)]
pub struct OutDir {
    /// Directory for the outputs and manifest.json.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    /// Privacy budget ε.
    #[arg(long)]
    pub eps: f64,

    /// Share of ε spent on structure selection.
    #[arg(long)]
    pub selection_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GenDeskArgs {
    #[arg(long)]
    pub records: Option<usize>,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Training CSV.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long = "gen", value_enum)]
    pub generator: GenArg,
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// Synthetic rows to sample.
    #[arg(long, default_value_t = 10_000)]
    pub rows: usize,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Args)]
pub struct ShadowArgs {
    /// Auxiliary CSV the shadow models train on.
    #[arg(long)]
    pub aux: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long = "gen", value_enum)]
    pub generator: GenArg,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[arg(long)]
    pub runs: Option<usize>,
    /// Rows per shadow training sample (default: min(10,000, aux rows)).
    #[arg(long)]
    pub train_size: Option<usize>,
    /// Reuse one training sample for every run.
    #[arg(long)]
    pub fixed_sample: bool,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[arg(long)]
    pub synth: PathBuf,
    #[arg(long)]
    pub aux: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// Focal-point weights from `shadow`.
    #[arg(long)]
    pub weights: PathBuf,
    /// Candidate records with a household_id column.
    #[arg(long)]
    pub candidates: PathBuf,
    #[arg(long, value_enum)]
    pub activation: Option<ActivationArg>,
    /// Activation confidence.
    #[arg(long)]
    pub c: Option<f64>,
    /// Sigmoid center on the ln Λ scale (default: median).
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<f64>,
    #[arg(long)]
    pub smoothing: Option<f64>,
    /// Drop focal-points selected in fewer than this share of shadow runs.
    #[arg(long)]
    pub min_weight: Option<f64>,
    /// Reject candidate households smaller than this.
    #[arg(long)]
    pub min_household_size: Option<usize>,
    /// Also write per-record Λ and probabilities.
    #[arg(long)]
    pub dump_records: bool,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// CSV with household_id,probability.
    #[arg(long)]
    pub predictions: PathBuf,
    /// CSV with household_id,member (member is 0/1 or true/false).
    #[arg(long)]
    pub truth: PathBuf,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Auxiliary CSV with household ids; the desk dataset is generated when absent.
    #[arg(long, requires = "schema")]
    pub aux: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Desk dataset size when no --aux is given.
    #[arg(long)]
    pub desk_records: Option<usize>,
    #[arg(long = "gen", value_enum, value_delimiter = ',')]
    pub generators: Vec<GenArg>,
    #[arg(long = "eps", value_delimiter = ',')]
    pub epsilons: Vec<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub shadow_runs: Option<usize>,
    #[arg(long)]
    pub n_candidates: Option<usize>,
    #[arg(long)]
    pub n_members: Option<usize>,
    #[arg(long)]
    pub train_fill_size: Option<usize>,
    #[arg(long)]
    pub synth_rows: Option<usize>,
    #[command(flatten)]
    pub out: OutDir,
}
