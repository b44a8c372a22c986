use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hitr_core::analysis::CorrelationRadius;
use hitr_core::metrics::MissingPolicy;
use hitr_core::radii::{
    Aggregation, MuGrid, RadiusScope, DEFAULT_MU_MAX, DEFAULT_MU_MIN, DEFAULT_MU_STEPS,
};
use hitr_core::simulate::DEFAULT_ANNOTATORS;
use hitr_core::synth::DEFAULT_DEMO_SEED;

/// Label-noise-aware landmark hit rate evaluation for image registration.
#[derive(Debug, Parser)]
#[command(name = "hitr", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate predictions against multi-rater annotations.
    Eval(EvalArgs),
    /// Simulate a cohort of virtual annotators.
    Simulate(SimulateArgs),
    /// Rank algorithms from a curves table at a radius threshold.
    Rank(RankArgs),
    /// Write a small synthetic dataset.
    Demo(DemoArgs),
}

fn existing_file(s: &str) -> Result<PathBuf, String> {
    let p = PathBuf::from(s);
    if p.is_file() {
        Ok(p)
    } else {
        Err(format!("no such file: {s}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    Global,
    Image,
}

impl From<ScopeArg> for RadiusScope {
    fn from(s: ScopeArg) -> Self {
        match s {
            ScopeArg::Global => RadiusScope::Global,
            ScopeArg::Image => RadiusScope::Image,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Miss,
    Strict,
}

impl From<PolicyArg> for MissingPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Miss => MissingPolicy::Miss,
            PolicyArg::Strict => MissingPolicy::Strict,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AggregationArg {
    ImageMean,
    LandmarkPooled,
}

impl From<AggregationArg> for Aggregation {
    fn from(a: AggregationArg) -> Self {
        match a {
            AggregationArg::ImageMean => Aggregation::ImageMean,
            AggregationArg::LandmarkPooled => Aggregation::LandmarkPooled,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Smallest MAD multiplier.
    #[arg(long, default_value_t = DEFAULT_MU_MIN, allow_negative_numbers = true)]
    pub mu_min: f64,
    /// Largest MAD multiplier.
    #[arg(long, default_value_t = DEFAULT_MU_MAX, allow_negative_numbers = true)]
    pub mu_max: f64,
    /// Number of intervals between mu-min and mu-max.
    #[arg(long, default_value_t = DEFAULT_MU_STEPS)]
    pub mu_steps: usize,
}

impl GridArgs {
    pub fn mu_grid(&self) -> MuGrid {
        MuGrid {
            mu_min: self.mu_min,
            mu_max: self.mu_max,
            steps: self.mu_steps,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Annotations CSV (image_id,landmark_id,annotator_id,x_mm,y_mm,z_mm).
    #[arg(long, value_parser = existing_file)]
    pub annotations: PathBuf,
    /// Predictions CSV (algorithm_id,image_id,landmark_id,x_mm,y_mm,z_mm).
    #[arg(long, value_parser = existing_file)]
    pub predictions: PathBuf,
    /// Reliability weights CSV (annotator_id,lambda).
    #[arg(long, value_parser = existing_file)]
    pub weights: Option<PathBuf>,
    /// Runtimes CSV (algorithm_id,seconds); overrides a runtimes.csv next to the predictions.
    #[arg(long, value_parser = existing_file)]
    pub runtimes: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Pool distances over the whole dataset or per image.
    #[arg(long, value_enum, default_value_t = ScopeArg::Global)]
    pub scope: ScopeArg,
    /// Count absent predictions as misses, or fail.
    #[arg(long, value_enum, default_value_t = PolicyArg::Miss)]
    pub missing_policy: PolicyArg,
    /// Combine per-image hit rates with equal image weight, or pool landmarks.
    #[arg(long, value_enum, default_value_t = AggregationArg::ImageMean)]
    pub aggregation: AggregationArg,
    /// Classify hits for the TRE correlation at this fixed radius (mm) instead
    /// of each annotator's own distance.
    #[arg(long)]
    pub correlation_radius: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "hitr-out")]
    pub out: PathBuf,
}

impl EvalArgs {
    pub fn correlation_radius(&self) -> CorrelationRadius {
        self.correlation_radius
            .map_or(CorrelationRadius::PerAnnotator, CorrelationRadius::Fixed)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Annotations whose consensus is the reference to perturb.
    #[arg(long, value_parser = existing_file)]
    pub reference: PathBuf,
    /// Multi-rater annotations to take inter-rater distances from; defaults to the reference.
    #[arg(long, value_parser = existing_file)]
    pub distances: Option<PathBuf>,
    /// Number of virtual annotators.
    #[arg(long, default_value_t = DEFAULT_ANNOTATORS)]
    pub annotators: usize,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Divide per-axis offsets by sqrt(3).
    #[arg(long)]
    pub normalize_sqrt3: bool,
    /// Output directory.
    #[arg(long, default_value = "hitr-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RankArgs {
    /// Curves CSV (algorithm_id,mu,radius_mm,hit_rate).
    #[arg(long, value_parser = existing_file)]
    pub curves: PathBuf,
    /// Radius threshold in mm.
    #[arg(long)]
    pub threshold: f64,
    /// Runtimes CSV (algorithm_id,seconds) used to break ties and shown alongside.
    #[arg(long, value_parser = existing_file)]
    pub runtimes: Option<PathBuf>,
    /// Also write ranking.csv into this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DemoArgs {
    /// Output directory.
    #[arg(long, default_value = "hitr-demo")]
    pub out: PathBuf,
    /// Generator seed.
    #[arg(long, default_value_t = DEFAULT_DEMO_SEED)]
    pub seed: u64,
}
