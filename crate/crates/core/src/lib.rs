//! Isolation forests with pluggable split heuristics.
//!
//! Trees split on random linear combinations of standardized columns. The
//! threshold is either drawn uniformly at random (classic isolation forest),
//! placed at the optimum of the averaged standard-deviation gain
//! (SCiForest-style), or placed at the optimum of the pooled standard-deviation
//! gain (fair-cut forest). Anomaly scores are `2^(-mean depth / q)` where `q`
//! is the expected isolation depth under the matching depth model.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`.
//!
//! ```
//! use fcforest::{fit_forest, score_matrix, ColumnMatrix, ForestConfig};
//!
//! let mut rows: Vec<Vec<f64>> = (0..200)
//!     .map(|i| vec![(i % 20) as f64 * 0.1, (i / 20) as f64 * 0.1])
//!     .collect();
//! rows.push(vec![25.0, -25.0]);
//! let matrix = ColumnMatrix::from_rows(&rows).unwrap();
//!
//! let model = fit_forest(&matrix, &ForestConfig::fcf()).unwrap();
//! let scores = score_matrix(&matrix, &model).unwrap();
//! let top = scores
//!     .iter()
//!     .enumerate()
//!     .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
//!     .unwrap()
//!     .0;
//! assert_eq!(top, 200);
//! ```

pub mod bench;
pub mod data;
pub mod depth;
pub mod error;
pub mod forest;
pub mod io;
pub mod metrics;
pub mod model_file;
pub mod preset;
pub mod rng;
pub mod scalar;
pub mod split;
pub mod tree;

pub use data::{column_stats, kurtosis, ColumnStats, RowSubset, RunningMoments};
pub use depth::{expected_depth, DepthFormula};
pub use error::{Error, Result};
pub use forest::{fit_forest, score_matrix, score_point, tree_score, DepthLimit, ForestConfig};
pub use metrics::{aupr, auroc, LabeledScores};
pub use rng::{derive_stream, RngStream, GENERATOR_VERSION};
pub use scalar::Scalar;
pub use split::{
    averaged_gain, best_split, build_hyperplane, choose_split, pooled_gain, pooled_objective, ColumnSampler,
    ColumnSelector, CriterionKind, SplitCriterion, SplitPoint, WeightScope,
};
pub use tree::{build_tree, count_nodes, TerminationPolicy, TreeParams};

pub type ColumnMatrix<F = f64> = data::ColumnMatrix<F>;
pub type ForestModel<F = f64> = forest::ForestModel<F>;
pub type IsolationTree<F = f64> = tree::IsolationTree<F>;
pub type TreeNode<F = f64> = tree::TreeNode<F>;
pub type Hyperplane<F = f64> = split::Hyperplane<F>;
pub type Projection<F = f64> = split::Projection<F>;
pub type SplitResult<F = f64> = split::SplitResult<F>;
pub type LabeledDataset<F = f64> = io::LabeledDataset<F>;

pub type ColumnMatrix32 = data::ColumnMatrix<f32>;
pub type ForestModel32 = forest::ForestModel<f32>;
pub type LabeledDataset32 = io::LabeledDataset<f32>;
