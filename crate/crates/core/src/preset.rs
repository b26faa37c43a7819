//! Named hyperparameter presets and flag overrides on top of them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::depth::DepthFormula;
use crate::error::{Error, Result};
use crate::forest::{DepthLimit, ForestConfig};
use crate::split::{ColumnSelector, CriterionKind, SplitCriterion, WeightScope};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Iforest,
    #[default]
    Fcf,
    SciforestLike,
    /// Starts from the iforest values; meant to be shaped entirely by flags.
    Custom,
}

impl Preset {
    pub fn base(self) -> ForestConfig {
        match self {
            Preset::Iforest | Preset::Custom => ForestConfig::iforest(),
            Preset::Fcf => ForestConfig::fcf(),
            Preset::SciforestLike => ForestConfig::sciforest_like(),
        }
    }

    pub const ALL: [Preset; 4] = [Preset::Iforest, Preset::Fcf, Preset::SciforestLike, Preset::Custom];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Iforest => "iforest",
            Preset::Fcf => "fcf",
            Preset::SciforestLike => "sciforest-like",
            Preset::Custom => "custom",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown preset '{s}'")))
    }
}

/// A preset plus explicit overrides; `None` keeps the preset's value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub preset: Preset,
    pub criterion: Option<CriterionKind>,
    pub col_select: Option<ColumnSelector>,
    pub weight_scope: Option<WeightScope>,
    pub trees: Option<usize>,
    pub sample_size: Option<usize>,
    pub ndim: Option<usize>,
    pub ntry: Option<usize>,
    pub max_depth: Option<usize>,
    pub gain_threshold: Option<f64>,
    pub full_isolation: bool,
    pub depth_formula: Option<DepthFormula>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub replacement: bool,
}

impl RunConfig {
    pub fn new(preset: Preset) -> Self {
        Self {
            preset,
            ..Self::default()
        }
    }

    /// Expands the preset, applies the overrides, then validates.
    pub fn resolve(&self) -> Result<ForestConfig> {
        if self.full_isolation && (self.max_depth.is_some() || self.gain_threshold.is_some()) {
            return Err(Error::Config(
                "full isolation conflicts with a depth cap or gain threshold".into(),
            ));
        }
        let mut c = self.preset.base();
        if let Some(kind) = self.criterion {
            // a gain criterion inherits the preset's trials; uniform always has one
            c.criterion = SplitCriterion::new(kind, c.criterion.trials()).map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Some(ntry) = self.ntry {
            c.criterion = SplitCriterion::new(c.criterion.kind(), ntry).map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Some(sel) = self.col_select {
            c.column_selector = sel;
        }
        if let Some(scope) = self.weight_scope {
            c.weight_scope = scope;
        }
        if let Some(t) = self.trees {
            c.n_trees = t;
        }
        if let Some(s) = self.sample_size {
            c.sample_size = s;
        }
        if let Some(p) = self.ndim {
            c.ndim = p;
        }
        if self.full_isolation {
            c.max_depth = DepthLimit::Unlimited;
            c.gain_threshold = None;
        }
        if let Some(d) = self.max_depth {
            c.max_depth = DepthLimit::Fixed(d);
        }
        if let Some(g) = self.gain_threshold {
            if c.criterion.kind() == CriterionKind::UniformRandom {
                return Err(Error::Config("a gain threshold needs a gain criterion".into()));
            }
            c.gain_threshold = Some(g);
        }
        if self.depth_formula.is_some() {
            c.depth_formula = self.depth_formula;
        }
        c.seed = self.seed;
        c.with_replacement = self.replacement;
        c.validate()?;
        Ok(c)
    }
}
