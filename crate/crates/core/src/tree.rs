//! Construction of a single isolation tree.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::data::{ColumnMatrix, RowSubset};
use crate::depth::{expected_depth, DepthFormula};
use crate::error::{contract, Error, Result};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::split::{choose_split, ColumnSampler, Hyperplane, SplitCriterion};

/// When a node stops splitting, besides holding a single row.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TerminationPolicy {
    /// Nodes at this depth become terminal.
    pub max_depth: Option<usize>,
    /// Nodes whose best gain falls below this become terminal (gain criteria only).
    pub gain_threshold: Option<f64>,
}

impl TerminationPolicy {
    pub fn full_isolation() -> Self {
        Self::default()
    }

    pub fn depth(max_depth: usize) -> Self {
        Self {
            max_depth: Some(max_depth),
            gain_threshold: None,
        }
    }

    pub fn gain(threshold: f64) -> Self {
        Self {
            max_depth: None,
            gain_threshold: Some(threshold),
        }
    }

    pub fn is_full_isolation(&self) -> bool {
        self.max_depth.is_none() && self.gain_threshold.is_none()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(g) = self.gain_threshold {
            if !(0.0..1.0).contains(&g) {
                return Err(Error::Config(format!("gain threshold {g} outside [0, 1)")));
            }
        }
        Ok(())
    }
}

/// Everything a tree needs besides its rows and random stream.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeParams {
    /// Columns per hyperplane.
    pub ndim: usize,
    pub sampler: ColumnSampler,
    pub criterion: SplitCriterion,
    pub termination: TerminationPolicy,
    /// Source of the remainder added to terminal nodes holding several rows.
    pub depth_formula: DepthFormula,
}

/// Arena node; children are indices into [`IsolationTree::nodes`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", bound = "F: Scalar")]
pub enum TreeNode<F> {
    Internal {
        hyperplane: Hyperplane<F>,
        left: usize,
        right: usize,
    },
    /// Depth of the node plus the extrapolated remainder for its rows.
    Terminal { depth: F },
}

/// One tree, stored in pre-order with the root at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct IsolationTree<F> {
    nodes: Vec<TreeNode<F>>,
    sample_size: usize,
}

impl<F: Scalar> IsolationTree<F> {
    pub fn nodes(&self) -> &[TreeNode<F>] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    /// Depth value of the terminal node reached by `point`.
    pub fn route(&self, point: &[F]) -> F {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                TreeNode::Terminal { depth } => return *depth,
                TreeNode::Internal {
                    hyperplane,
                    left,
                    right,
                } => {
                    idx = if hyperplane.goes_left(point) { *left } else { *right };
                }
            }
        }
    }

    /// Index of the terminal node reached by `point`.
    pub fn terminal_index(&self, point: &[F]) -> usize {
        let mut idx = 0;
        while let TreeNode::Internal {
            hyperplane,
            left,
            right,
        } = &self.nodes[idx]
        {
            idx = if hyperplane.goes_left(point) { *left } else { *right };
        }
        idx
    }

    /// Checks child indices, reachability and payload invariants of a tree
    /// read from outside.
    pub fn validate(&self, n_cols: usize) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::Format("tree without nodes".into()));
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            if i >= self.nodes.len() || seen[i] {
                return Err(Error::Format(format!("node {i} missing or reached twice")));
            }
            seen[i] = true;
            match &self.nodes[i] {
                TreeNode::Terminal { depth } => {
                    if !depth.is_finite() || *depth < F::zero() {
                        return Err(Error::Format(format!("terminal {i} has depth {depth}")));
                    }
                }
                TreeNode::Internal {
                    hyperplane,
                    left,
                    right,
                } => {
                    hyperplane.check().map_err(|e| Error::Format(e.to_string()))?;
                    if hyperplane.projection.columns.iter().any(|&c| c >= n_cols) {
                        return Err(Error::Format(format!("node {i} references a column beyond {n_cols}")));
                    }
                    stack.push(*right);
                    stack.push(*left);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Format("tree holds unreachable nodes".into()));
        }
        Ok(())
    }
}

/// Nodes reachable from the root, counted by traversal.
pub fn count_nodes<F: Scalar>(tree: &IsolationTree<F>) -> usize {
    let mut count = 0;
    let mut stack = vec![0usize];
    while let Some(i) = stack.pop() {
        count += 1;
        if let TreeNode::Internal { left, right, .. } = &tree.nodes[i] {
            stack.push(*right);
            stack.push(*left);
        }
    }
    count
}

struct Pending {
    rows: Vec<usize>,
    depth: usize,
    parent: Option<(usize, bool)>,
}

/// Grows one tree over `subset`.
///
/// A node becomes terminal with depth `d` when it holds one row, and with
/// depth `d + E[depth(m)]` when every column is constant on its `m` rows, the
/// depth cap is reached, or the best gain is below the gain threshold.
/// Otherwise it splits and both sides recurse at depth `d + 1`. The recursion
/// runs on an explicit stack, so tree height is bounded only by memory.
pub fn build_tree<F: Scalar>(
    matrix: &ColumnMatrix<F>,
    subset: &RowSubset,
    params: &TreeParams,
    stream: &mut RngStream,
) -> Result<IsolationTree<F>> {
    if subset.is_empty() {
        return contract("a tree needs at least one row");
    }
    params.termination.validate()?;
    let mut remainders: HashMap<usize, f64> = HashMap::new();
    let mut remainder = |m: usize| -> Result<f64> {
        if let Some(&r) = remainders.get(&m) {
            return Ok(r);
        }
        let r = expected_depth(params.depth_formula, m)?;
        remainders.insert(m, r);
        Ok(r)
    };

    let mut nodes: Vec<TreeNode<F>> = Vec::new();
    let mut stack = vec![Pending {
        rows: subset.as_slice().to_vec(),
        depth: 0,
        parent: None,
    }];
    while let Some(Pending { rows, depth, parent }) = stack.pop() {
        let idx = nodes.len();
        if let Some((p, is_left)) = parent {
            if let TreeNode::Internal { left, right, .. } = &mut nodes[p] {
                if is_left {
                    *left = idx;
                } else {
                    *right = idx;
                }
            }
        }
        let m = rows.len();
        let terminal = |extra: f64| TreeNode::Terminal {
            depth: F::of(depth as f64 + extra),
        };
        if m == 1 {
            nodes.push(terminal(0.0));
            continue;
        }
        if params.termination.max_depth.is_some_and(|cap| depth >= cap) {
            nodes.push(terminal(remainder(m)?));
            continue;
        }
        let split = match choose_split(matrix, &rows, params.ndim, &params.sampler, params.criterion, stream) {
            Ok(split) => split,
            Err(Error::AllColumnsConstant | Error::ConstantProjection) => {
                nodes.push(terminal(remainder(m)?));
                continue;
            }
            Err(e) => return Err(e),
        };
        if let (Some(threshold), Some(gain)) = (params.termination.gain_threshold, split.gain) {
            if gain < threshold {
                nodes.push(terminal(remainder(m)?));
                continue;
            }
        }
        nodes.push(TreeNode::Internal {
            hyperplane: split.hyperplane,
            left: usize::MAX,
            right: usize::MAX,
        });
        stack.push(Pending {
            rows: split.right_rows.into_vec(),
            depth: depth + 1,
            parent: Some((idx, false)),
        });
        stack.push(Pending {
            rows: split.left_rows.into_vec(),
            depth: depth + 1,
            parent: Some((idx, true)),
        });
    }
    Ok(IsolationTree {
        nodes,
        sample_size: subset.len(),
    })
}
