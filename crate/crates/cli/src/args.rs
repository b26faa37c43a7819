use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fcforest::preset::{Preset, RunConfig};
use fcforest::{ColumnSelector, CriterionKind, DepthFormula, WeightScope};

#[derive(Debug, Parser)]
#[command(
    name = "fcforest",
    version,
    about = "Isolation forests with fair-cut and gain-based splits"
)]
pub struct Cli {
    /// Worker threads (default: available cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a forest on a CSV and write the model file.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "last")]
        label_col: String,
        #[command(flatten)]
        forest: ForestArgs,
    },
    /// Score every row of a CSV with a saved model; writes row_index,score.
    Score {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "last")]
        label_col: String,
    },
    /// Fit and score over consecutive seeds and report mean ROC/PR/time.
    Bench {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        #[arg(long, default_value = "last")]
        label_col: String,
        /// Also write the result as JSON ("-" for stdout).
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        forest: ForestArgs,
    },
    /// Generate a synthetic labeled dataset as CSV.
    Synth {
        #[arg(long, value_enum, default_value_t = SynthKind::Bimodal)]
        kind: SynthKind,
        /// Points per cluster.
        #[arg(long, default_value_t = 500)]
        size: usize,
        /// Planted outlier for `blob`, as x,y.
        #[arg(long, value_delimiter = ',', default_values_t = [10.0, -10.0], allow_hyphen_values = true)]
        outlier: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a regular lattice with a 2-column model; writes x,y,score.
    Grid {
        #[arg(long)]
        model: PathBuf,
        /// Box as x0,x1,y0,y1.
        #[arg(long, value_delimiter = ',', default_values_t = [-5.0, 15.0, -5.0, 15.0], allow_hyphen_values = true)]
        bounds: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        resolution: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SynthKind {
    Bimodal,
    Blob,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PresetArg {
    Iforest,
    Fcf,
    SciforestLike,
    Custom,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CriterionArg {
    Uniform,
    Pooled,
    Averaged,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ColSelectArg {
    Uniform,
    Kurtosis,
    Range,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WeightScopeArg {
    Node,
    Global,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DepthFormulaArg {
    Harmonic,
    Averaged,
    Pooled,
}

#[derive(Debug, Clone, Args)]
pub struct ForestArgs {
    #[arg(long, value_enum, default_value_t = PresetArg::Fcf)]
    pub preset: PresetArg,
    #[arg(long, value_enum)]
    pub criterion: Option<CriterionArg>,
    #[arg(long, value_enum)]
    pub col_select: Option<ColSelectArg>,
    /// Where weighted column selection computes its weights.
    #[arg(long, value_enum)]
    pub weight_scope: Option<WeightScopeArg>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub sample_size: Option<usize>,
    /// Columns per hyperplane.
    #[arg(long)]
    pub ndim: Option<usize>,
    /// Candidate hyperplanes per node (gain criteria).
    #[arg(long)]
    pub ntry: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub gain_threshold: Option<f64>,
    #[arg(long)]
    pub full_isolation: bool,
    #[arg(long, value_enum)]
    pub depth_formula: Option<DepthFormulaArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample rows with replacement.
    #[arg(long)]
    pub replacement: bool,
}

impl ForestArgs {
    pub fn run_config(&self, threads: Option<usize>) -> RunConfig {
        RunConfig {
            preset: match self.preset {
                PresetArg::Iforest => Preset::Iforest,
                PresetArg::Fcf => Preset::Fcf,
                PresetArg::SciforestLike => Preset::SciforestLike,
                PresetArg::Custom => Preset::Custom,
            },
            criterion: self.criterion.map(|c| match c {
                CriterionArg::Uniform => CriterionKind::UniformRandom,
                CriterionArg::Pooled => CriterionKind::PooledGain,
                CriterionArg::Averaged => CriterionKind::AveragedGain,
            }),
            col_select: self.col_select.map(|c| match c {
                ColSelectArg::Uniform => ColumnSelector::Uniform,
                ColSelectArg::Kurtosis => ColumnSelector::KurtosisWeighted,
                ColSelectArg::Range => ColumnSelector::RangeWeighted,
            }),
            weight_scope: self.weight_scope.map(|w| match w {
                WeightScopeArg::Node => WeightScope::PerNode,
                WeightScopeArg::Global => WeightScope::Global,
            }),
            trees: self.trees,
            sample_size: self.sample_size,
            ndim: self.ndim,
            ntry: self.ntry,
            max_depth: self.max_depth,
            gain_threshold: self.gain_threshold,
            full_isolation: self.full_isolation,
            depth_formula: self.depth_formula.map(|d| match d {
                DepthFormulaArg::Harmonic => DepthFormula::Harmonic,
                DepthFormulaArg::Averaged => DepthFormula::AveragedGainOptimal,
                DepthFormulaArg::Pooled => DepthFormula::PooledGainOptimal,
            }),
            seed: self.seed,
            threads,
            replacement: self.replacement,
        }
    }

    /// Label used in bench output.
    pub fn label(&self) -> String {
        self.preset
            .to_possible_value()
            .map_or_else(String::new, |v| v.get_name().to_string())
    }
}
