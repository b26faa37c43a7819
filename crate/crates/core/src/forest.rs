//! Ensemble fitting and anomaly scoring.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::ColumnMatrix;
use crate::depth::{expected_depth, DepthFormula};
use crate::error::{Error, Result};
use crate::rng::{derive_stream, GENERATOR_VERSION};
use crate::scalar::Scalar;
use crate::split::{ColumnSampler, ColumnSelector, SplitCriterion, WeightScope};
use crate::tree::{build_tree, IsolationTree, TerminationPolicy, TreeParams};

/// Depth cap of a forest's trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepthLimit {
    Unlimited,
    Fixed(usize),
    /// `ceil(log2(sample size))`, resolved against the effective sample size.
    Log2SampleSize,
}

impl DepthLimit {
    pub fn resolve(self, sample_size: usize) -> Option<usize> {
        match self {
            DepthLimit::Unlimited => None,
            DepthLimit::Fixed(d) => Some(d),
            DepthLimit::Log2SampleSize => Some(ceil_log2(sample_size)),
        }
    }
}

fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Full hyperparameter record of a forest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Rows drawn per tree; clamped to the dataset size at fit time.
    pub sample_size: usize,
    /// Draw each tree's rows with replacement instead of without.
    pub with_replacement: bool,
    /// Columns per hyperplane.
    pub ndim: usize,
    pub column_selector: ColumnSelector,
    pub weight_scope: WeightScope,
    pub criterion: SplitCriterion,
    pub max_depth: DepthLimit,
    pub gain_threshold: Option<f64>,
    /// `None` picks the formula matching the criterion.
    pub depth_formula: Option<DepthFormula>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self::iforest()
    }
}

impl ForestConfig {
    /// Pooled gain, 200 trees grown to full isolation, hyperplanes on 2
    /// columns, one trial per node, 256 rows per tree.
    pub fn fcf() -> Self {
        Self {
            n_trees: 200,
            sample_size: 256,
            with_replacement: false,
            ndim: 2,
            column_selector: ColumnSelector::Uniform,
            weight_scope: WeightScope::PerNode,
            criterion: SplitCriterion::pooled(1).expect("positive trials"),
            max_depth: DepthLimit::Unlimited,
            gain_threshold: None,
            depth_formula: None,
            seed: 0,
        }
    }

    /// Classic isolation forest: 100 trees, 256 rows, axis-parallel uniform
    /// splits, depth capped at `ceil(log2 256) = 8`.
    pub fn iforest() -> Self {
        Self {
            n_trees: 100,
            sample_size: 256,
            with_replacement: false,
            ndim: 1,
            column_selector: ColumnSelector::Uniform,
            weight_scope: WeightScope::PerNode,
            criterion: SplitCriterion::uniform(),
            max_depth: DepthLimit::Log2SampleSize,
            gain_threshold: None,
            depth_formula: None,
            seed: 0,
        }
    }

    /// Averaged gain on 2-column hyperplanes with 10 trials per node and the
    /// isolation-forest tree budget.
    pub fn sciforest_like() -> Self {
        Self {
            ndim: 2,
            criterion: SplitCriterion::averaged(10).expect("positive trials"),
            ..Self::iforest()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("at least one tree is required".into()));
        }
        if self.sample_size < 2 {
            return Err(Error::Config(format!("sample size {} is below 2", self.sample_size)));
        }
        if self.ndim == 0 {
            return Err(Error::Config("hyperplanes need at least one column".into()));
        }
        if self.criterion.trials() == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        self.termination(self.sample_size).validate()
    }

    pub fn resolved_depth_formula(&self) -> DepthFormula {
        self.depth_formula
            .unwrap_or_else(|| DepthFormula::matching(self.criterion.kind()))
    }

    pub fn termination(&self, sample_size: usize) -> TerminationPolicy {
        TerminationPolicy {
            max_depth: self.max_depth.resolve(sample_size),
            gain_threshold: self.gain_threshold,
        }
    }

    /// Sample size actually used on a dataset of `rows` rows.
    pub fn effective_sample_size(&self, rows: usize) -> usize {
        self.sample_size.min(rows)
    }
}

/// Fitted ensemble: trees, normalizer `q` and the configuration that made them.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel<F> {
    pub(crate) trees: Vec<IsolationTree<F>>,
    pub(crate) normalizer: f64,
    pub(crate) config: ForestConfig,
    pub(crate) n_cols: usize,
    pub(crate) sample_size: usize,
    pub(crate) generator_version: String,
}

impl<F: Scalar> ForestModel<F> {
    pub fn trees(&self) -> &[IsolationTree<F>] {
        &self.trees
    }

    /// Expected depth `q` in the score exponent.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Rows per tree after clamping to the training set.
    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    pub fn base_seed(&self) -> u64 {
        self.config.seed
    }

    pub fn generator_version(&self) -> &str {
        &self.generator_version
    }

    pub fn total_nodes(&self) -> usize {
        self.trees.iter().map(IsolationTree::node_count).sum()
    }

    /// Arithmetic mean of the terminal depths reached in every tree.
    pub fn mean_depth(&self, point: &[F]) -> Result<f64> {
        if point.len() != self.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols,
                got: point.len(),
            });
        }
        let mut depths = Vec::with_capacity(self.trees.len());
        Ok(self.mean_depth_with(point, &mut depths))
    }

    fn mean_depth_with(&self, point: &[F], depths: &mut Vec<f64>) -> f64 {
        depths.clear();
        depths.extend(self.trees.iter().map(|t| t.route(point).as_f64()));
        pairwise_sum(depths) / self.trees.len() as f64
    }

    /// `2^(-mean depth / q)`, in `(0, 1]`; higher is more anomalous.
    pub fn score(&self, point: &[F]) -> Result<F> {
        Ok(F::of(self.normalize(self.mean_depth(point)?)))
    }

    fn normalize(&self, mean_depth: f64) -> f64 {
        (-mean_depth / self.normalizer).exp2()
    }
}

/// Sum in a fixed binary-tree order; independent of thread scheduling.
fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Fits `config.n_trees` trees, tree `i` on its own stream `(seed, i)`.
///
/// Trees are built in parallel on the current rayon pool; the result does not
/// depend on the pool size.
pub fn fit_forest<F: Scalar>(matrix: &ColumnMatrix<F>, config: &ForestConfig) -> Result<ForestModel<F>> {
    config.validate()?;
    let all_constant = (0..matrix.cols()).all(|j| {
        let col = matrix.column(j);
        col.iter().all(|v| *v == col[0])
    });
    if all_constant {
        return Err(Error::NothingToSplit);
    }
    let sample_size = config.effective_sample_size(matrix.rows());
    let sampler = ColumnSampler::new(config.column_selector, config.weight_scope, matrix)?;
    let depth_formula = config.resolved_depth_formula();
    let params = TreeParams {
        ndim: config.ndim,
        sampler,
        criterion: config.criterion,
        termination: config.termination(sample_size),
        depth_formula,
    };
    let trees = (0..config.n_trees as u64)
        .into_par_iter()
        .map(|i| {
            let mut stream = derive_stream(config.seed, i);
            let rows = if config.with_replacement {
                stream.sample_with_replacement(matrix.rows(), sample_size)?
            } else {
                stream.sample_without_replacement(matrix.rows(), sample_size)?
            };
            build_tree(matrix, &rows, &params, &mut stream)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ForestModel {
        trees,
        normalizer: expected_depth(depth_formula, sample_size)?,
        config: config.clone(),
        n_cols: matrix.cols(),
        sample_size,
        generator_version: GENERATOR_VERSION.to_string(),
    })
}

/// Terminal depth reached by `point` in `tree`.
pub fn tree_score<F: Scalar>(point: &[F], tree: &IsolationTree<F>) -> F {
    tree.route(point)
}

pub fn score_point<F: Scalar>(point: &[F], model: &ForestModel<F>) -> Result<F> {
    model.score(point)
}

/// Scores every row of `matrix`, in row order, in parallel.
pub fn score_matrix<F: Scalar>(matrix: &ColumnMatrix<F>, model: &ForestModel<F>) -> Result<Vec<F>> {
    if matrix.cols() != model.n_cols {
        return Err(Error::DimensionMismatch {
            expected: model.n_cols,
            got: matrix.cols(),
        });
    }
    Ok((0..matrix.rows())
        .into_par_iter()
        .map_init(
            || (Vec::with_capacity(matrix.cols()), Vec::with_capacity(model.trees.len())),
            |(row, depths), i| {
                matrix.copy_row_into(i, row);
                F::of(model.normalize(model.mean_depth_with(row, depths)))
            },
        )
        .collect())
}
