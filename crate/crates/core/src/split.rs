//! Split selection at a single node: which columns enter the random linear
//! combination, how the combination is standardized, and where the threshold
//! goes (uniformly at random, or at the optimum of the pooled or averaged
//! standard-deviation gain).

// NaN must fail these comparisons, so they stay negated.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::data::{column_stats, kurtosis_of, ColumnMatrix, ColumnStats, RowSubset, RunningMoments};
use crate::error::{contract, Error, Result};
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// Gains closer than this to the best one count as ties.
const GAIN_TIE_TOLERANCE: f64 = 1e-12;

/// Redraws of a uniform threshold that rounded onto the maximum.
const UNIFORM_REDRAWS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionKind {
    /// Threshold uniformly at random within the projected range.
    UniformRandom,
    /// Maximize `1 - (n_l σ_l + n_r σ_r) / (n σ_all)`.
    PooledGain,
    /// Maximize `1 - (σ_l + σ_r) / (2 σ_all)`.
    AveragedGain,
}

/// Threshold rule plus the number of candidate hyperplanes tried per node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCriterion {
    kind: CriterionKind,
    trials: usize,
}

impl SplitCriterion {
    /// `trials` is forced to 1 for [`CriterionKind::UniformRandom`], which has
    /// no score to compare candidates by.
    pub fn new(kind: CriterionKind, trials: usize) -> Result<Self> {
        if trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        let trials = if kind == CriterionKind::UniformRandom {
            1
        } else {
            trials
        };
        Ok(Self { kind, trials })
    }

    pub fn uniform() -> Self {
        Self {
            kind: CriterionKind::UniformRandom,
            trials: 1,
        }
    }

    pub fn pooled(trials: usize) -> Result<Self> {
        Self::new(CriterionKind::PooledGain, trials)
    }

    pub fn averaged(trials: usize) -> Result<Self> {
        Self::new(CriterionKind::AveragedGain, trials)
    }

    pub fn kind(&self) -> CriterionKind {
        self.kind
    }

    pub fn trials(&self) -> usize {
        self.trials
    }
}

/// How the columns of a hyperplane are drawn among the eligible ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnSelector {
    Uniform,
    /// Probability proportional to raw kurtosis.
    KurtosisWeighted,
    /// Probability proportional to `max - min`.
    RangeWeighted,
}

/// Whether selector weights come from the node's rows or from the full dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightScope {
    #[default]
    PerNode,
    Global,
}

/// Column selector with any precomputed global weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSampler {
    kind: ColumnSelector,
    global_weights: Option<Vec<f64>>,
}

impl ColumnSampler {
    pub fn per_node(kind: ColumnSelector) -> Self {
        Self {
            kind,
            global_weights: None,
        }
    }

    /// Weights fixed once from every row of `matrix`; node eligibility still applies.
    pub fn global<F: Scalar>(kind: ColumnSelector, matrix: &ColumnMatrix<F>) -> Result<Self> {
        if kind == ColumnSelector::Uniform {
            return Ok(Self::per_node(kind));
        }
        let all = RowSubset::full(matrix.rows());
        let weights = (0..matrix.cols())
            .map(|j| column_weight(kind, matrix, all.as_slice(), j))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kind,
            global_weights: Some(weights),
        })
    }

    pub fn new<F: Scalar>(kind: ColumnSelector, scope: WeightScope, matrix: &ColumnMatrix<F>) -> Result<Self> {
        match scope {
            WeightScope::PerNode => Ok(Self::per_node(kind)),
            WeightScope::Global => Self::global(kind, matrix),
        }
    }

    pub fn kind(&self) -> ColumnSelector {
        self.kind
    }
}

fn column_weight<F: Scalar>(kind: ColumnSelector, matrix: &ColumnMatrix<F>, rows: &[usize], col: usize) -> Result<f64> {
    let column = matrix.column(col);
    Ok(match kind {
        ColumnSelector::Uniform => 1.0,
        ColumnSelector::KurtosisWeighted => kurtosis_of(rows.iter().map(|&i| column[i].as_f64())).unwrap_or(0.0),
        ColumnSelector::RangeWeighted => column_stats(matrix, rows, col)?.range().as_f64(),
    })
}

/// Per-node column drawing state, shared by all trials at that node.
struct ColumnPicker<'a, F> {
    matrix: &'a ColumnMatrix<F>,
    rows: &'a [usize],
    stats: Vec<Option<ColumnStats<F>>>,
    mode: PickMode,
}

enum PickMode {
    /// Columns not yet found constant; shrinks as constant ones are discovered.
    Lazy(Vec<usize>),
    Weighted(Vec<f64>),
}

impl<'a, F: Scalar> ColumnPicker<'a, F> {
    fn new(matrix: &'a ColumnMatrix<F>, rows: &'a [usize], sampler: &ColumnSampler) -> Result<Self> {
        let n = matrix.cols();
        let mut stats = vec![None; n];
        let mode = match sampler.kind {
            ColumnSelector::Uniform => PickMode::Lazy((0..n).collect()),
            kind => {
                let mut weights = Vec::with_capacity(n);
                for j in 0..n {
                    let s = column_stats(matrix, rows, j)?;
                    let w = if !s.distinct_gt1 {
                        0.0
                    } else if let Some(global) = &sampler.global_weights {
                        global[j]
                    } else {
                        column_weight(kind, matrix, rows, j)?
                    };
                    stats[j] = Some(s);
                    weights.push(w);
                }
                PickMode::Weighted(weights)
            }
        };
        Ok(Self {
            matrix,
            rows,
            stats,
            mode,
        })
    }

    fn stats(&mut self, col: usize) -> Result<ColumnStats<F>> {
        if let Some(s) = self.stats[col] {
            return Ok(s);
        }
        let s = column_stats(self.matrix, self.rows, col)?;
        self.stats[col] = Some(s);
        Ok(s)
    }

    /// Draws one eligible column, or reports that none exists.
    fn pick(&mut self, stream: &mut RngStream) -> Result<(usize, ColumnStats<F>)> {
        if let PickMode::Weighted(weights) = &self.mode {
            let col = stream.draw_weighted_index(weights).map_err(|e| match e {
                Error::NoEligibleColumn => Error::AllColumnsConstant,
                other => other,
            })?;
            return Ok((col, self.stats(col)?));
        }
        loop {
            let PickMode::Lazy(candidates) = &self.mode else {
                unreachable!()
            };
            if candidates.is_empty() {
                return Err(Error::AllColumnsConstant);
            }
            let slot = stream.draw_uniform_index(candidates.len())?;
            let col = candidates[slot];
            let s = self.stats(col)?;
            if s.distinct_gt1 {
                return Ok((col, s));
            }
            if let PickMode::Lazy(candidates) = &mut self.mode {
                candidates.swap_remove(slot);
            }
        }
    }
}

/// Random linear combination of standardized columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct Projection<F> {
    pub columns: Vec<usize>,
    pub coeffs: Vec<F>,
    pub means: Vec<F>,
    pub sdevs: Vec<F>,
}

#[inline(always)]
fn term<F: Scalar>(coeff: F, x: F, mean: F, sdev: F) -> F {
    coeff * (x - mean) / sdev
}

impl<F: Scalar> Projection<F> {
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// `Σ_v c_v (x_v - mean_v) / sdev_v`, summed in term order.
    #[inline]
    pub fn project_row(&self, row: &[F]) -> F {
        let mut z = F::zero();
        for k in 0..self.columns.len() {
            z = z + term(self.coeffs[k], row[self.columns[k]], self.means[k], self.sdevs[k]);
        }
        z
    }

    /// Projection of each listed matrix row; bit-identical to [`Self::project_row`].
    pub fn project_rows(&self, matrix: &ColumnMatrix<F>, rows: &[usize]) -> Vec<F> {
        let mut z = vec![F::zero(); rows.len()];
        for k in 0..self.columns.len() {
            let column = matrix.column(self.columns[k]);
            let (c, mean, sdev) = (self.coeffs[k], self.means[k], self.sdevs[k]);
            for (zi, &r) in z.iter_mut().zip(rows) {
                *zi = *zi + term(c, column[r], mean, sdev);
            }
        }
        z
    }

    fn validate(&self) -> Result<()> {
        let p = self.columns.len();
        if p == 0 || self.coeffs.len() != p || self.means.len() != p || self.sdevs.len() != p {
            return contract("projection term lists must be nonempty and of equal length");
        }
        if self.sdevs.iter().any(|s| !(*s > F::zero())) {
            return contract("projection standard deviations must be positive");
        }
        Ok(())
    }
}

/// Projection plus threshold: rows with `z <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct Hyperplane<F> {
    pub projection: Projection<F>,
    pub threshold: F,
}

impl<F: Scalar> Hyperplane<F> {
    pub fn new(projection: Projection<F>, threshold: F) -> Result<Self> {
        projection.validate()?;
        if !threshold.is_finite() {
            return contract("threshold must be finite");
        }
        Ok(Self { projection, threshold })
    }

    #[inline]
    pub fn goes_left(&self, row: &[F]) -> bool {
        self.projection.project_row(row) <= self.threshold
    }

    pub(crate) fn check(&self) -> Result<()> {
        self.projection.validate()
    }
}

/// Chosen threshold and, for gain criteria, its gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitPoint<F> {
    pub threshold: F,
    pub gain: Option<f64>,
}

/// Outcome of [`choose_split`].
#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult<F> {
    pub hyperplane: Hyperplane<F>,
    /// `None` for the uniform-random criterion.
    pub gain: Option<f64>,
    pub left_rows: RowSubset,
    pub right_rows: RowSubset,
}

fn draw_projection<F: Scalar>(
    picker: &mut ColumnPicker<'_, F>,
    p: usize,
    stream: &mut RngStream,
) -> Result<Projection<F>> {
    let mut proj = Projection {
        columns: Vec::with_capacity(p),
        coeffs: Vec::with_capacity(p),
        means: Vec::with_capacity(p),
        sdevs: Vec::with_capacity(p),
    };
    for _ in 0..p {
        let (col, stats) = picker.pick(stream)?;
        let coeff = F::of(stream.draw_standard_normal());
        proj.columns.push(col);
        proj.coeffs.push(coeff);
        proj.means.push(stats.mean);
        proj.sdevs.push(stats.sdev);
    }
    Ok(proj)
}

/// Draws a random standardized linear combination of `p` eligible columns and
/// projects the subset's rows onto it.
///
/// Fails with [`Error::AllColumnsConstant`] when no column varies over `subset`.
pub fn build_hyperplane<F: Scalar>(
    matrix: &ColumnMatrix<F>,
    subset: &[usize],
    p: usize,
    sampler: &ColumnSampler,
    stream: &mut RngStream,
) -> Result<(Projection<F>, Vec<F>)> {
    if subset.len() < 2 {
        return contract("a hyperplane needs at least 2 rows");
    }
    if p == 0 {
        return contract("a hyperplane needs at least 1 column");
    }
    let mut picker = ColumnPicker::new(matrix, subset, sampler)?;
    let proj = draw_projection(&mut picker, p, stream)?;
    let z = proj.project_rows(matrix, subset);
    Ok((proj, z))
}

fn side_sdevs(projections: &[f64], split_value: f64) -> Result<(usize, f64, usize, f64, f64)> {
    let mut left = RunningMoments::new();
    let mut right = RunningMoments::new();
    for &z in projections {
        if z <= split_value {
            left.push(z);
        } else {
            right.push(z);
        }
    }
    if left.count() == 0 || right.count() == 0 {
        return contract("split leaves one side empty");
    }
    let all = left.merge(&right);
    Ok((left.count(), left.sdev(), right.count(), right.sdev(), all.sdev()))
}

fn to_f64<F: Scalar>(values: &[F]) -> Vec<f64> {
    values.iter().map(|v| v.as_f64()).collect()
}

/// Count-weighted mean of the two side standard deviations.
pub fn pooled_objective<F: Scalar>(projections: &[F], split_value: F) -> Result<f64> {
    let (nl, sl, nr, sr, _) = side_sdevs(&to_f64(projections), split_value.as_f64())?;
    Ok(pooled_mix(nl, sl, nr, sr))
}

/// Relative reduction of the standard deviation by the count-weighted side mix.
pub fn pooled_gain<F: Scalar>(projections: &[F], split_value: F) -> Result<f64> {
    gain_at(projections, split_value, CriterionKind::PooledGain)
}

/// Relative reduction of the standard deviation by the plain mean of the sides.
pub fn averaged_gain<F: Scalar>(projections: &[F], split_value: F) -> Result<f64> {
    gain_at(projections, split_value, CriterionKind::AveragedGain)
}

fn gain_at<F: Scalar>(projections: &[F], split_value: F, kind: CriterionKind) -> Result<f64> {
    let z = to_f64(projections);
    let (lo, hi) = z
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !(lo < hi) {
        return Err(Error::ConstantProjection);
    }
    let (nl, sl, nr, sr, sall) = side_sdevs(&z, split_value.as_f64())?;
    if sall <= 0.0 {
        return Err(Error::ConstantProjection);
    }
    Ok(gain_formula(kind, nl, sl, nr, sr, sall))
}

#[inline]
fn pooled_mix(nl: usize, sl: f64, nr: usize, sr: f64) -> f64 {
    (nl as f64 * sl + nr as f64 * sr) / (nl + nr) as f64
}

#[inline]
fn gain_formula(kind: CriterionKind, nl: usize, sl: f64, nr: usize, sr: f64, sall: f64) -> f64 {
    let mixed = match kind {
        CriterionKind::AveragedGain => (sl + sr) / 2.0,
        _ => pooled_mix(nl, sl, nr, sr),
    };
    (sall - mixed) / sall
}

/// Midpoint of `lo < hi` that still sorts strictly below `hi`.
fn midpoint<F: Scalar>(lo: F, hi: F) -> F {
    let mid = lo + (hi - lo) / (F::one() + F::one());
    if mid < hi && mid >= lo {
        mid
    } else {
        lo
    }
}

fn sorted_copy<F: Scalar>(projections: &[F]) -> Vec<F> {
    let mut sorted = projections.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    sorted
}

/// Gain at every boundary between positions `i` and `i+1` of `sorted`
/// (`None` where the two values are equal), in one forward and one backward
/// Welford pass.
fn boundary_gains<F: Scalar>(sorted: &[F], kind: CriterionKind) -> (f64, Vec<Option<f64>>) {
    let m = sorted.len();
    let values = to_f64(sorted);
    let mut left_sd = Vec::with_capacity(m);
    let mut acc = RunningMoments::new();
    for &v in &values {
        acc.push(v);
        left_sd.push(acc.sdev());
    }
    let sall = acc.sdev();
    let mut right_sd = vec![0.0; m];
    let mut acc = RunningMoments::new();
    for i in (1..m).rev() {
        acc.push(values[i]);
        right_sd[i - 1] = acc.sdev();
    }
    let gains = (0..m.saturating_sub(1))
        .map(|i| {
            (sorted[i] < sorted[i + 1]).then(|| gain_formula(kind, i + 1, left_sd[i], m - i - 1, right_sd[i], sall))
        })
        .collect();
    (sall, gains)
}

/// Index of the best gain; among gains within the tie tolerance of the
/// maximum the lowest index wins.
pub(crate) fn pick_best_boundary(gains: &[Option<f64>]) -> Option<usize> {
    let best = gains.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return None;
    }
    gains
        .iter()
        .position(|g| matches!(g, Some(g) if *g >= best - GAIN_TIE_TOLERANCE))
}

/// Threshold for one projection vector under `kind`.
///
/// Gain criteria scan every boundary between consecutive distinct sorted
/// values and place the threshold at the midpoint of the winning pair. The
/// uniform criterion draws from `[min, max)`, which always leaves the minimum
/// on the left and the maximum on the right.
pub fn best_split<F: Scalar>(projections: &[F], kind: CriterionKind, stream: &mut RngStream) -> Result<SplitPoint<F>> {
    let (lo, hi) = projections
        .iter()
        .fold((F::infinity(), F::neg_infinity()), |(a, b), &v| (a.min(v), b.max(v)));
    if !(lo < hi) {
        return Err(Error::ConstantProjection);
    }
    match kind {
        CriterionKind::UniformRandom => {
            for _ in 0..UNIFORM_REDRAWS {
                let t = lo + (hi - lo) * F::of(stream.draw_unit());
                if t < hi {
                    return Ok(SplitPoint {
                        threshold: t.max(lo),
                        gain: None,
                    });
                }
            }
            Ok(SplitPoint {
                threshold: lo,
                gain: None,
            })
        }
        _ => {
            let sorted = sorted_copy(projections);
            let (sall, gains) = boundary_gains(&sorted, kind);
            if !(sall > 0.0) {
                return Err(Error::ConstantProjection);
            }
            let i = pick_best_boundary(&gains).ok_or(Error::ConstantProjection)?;
            Ok(SplitPoint {
                threshold: midpoint(sorted[i], sorted[i + 1]),
                gain: gains[i],
            })
        }
    }
}

/// Runs `criterion.trials()` hyperplane constructions at one node, keeps the
/// one with the highest gain (the first on ties) and partitions the rows.
pub fn choose_split<F: Scalar>(
    matrix: &ColumnMatrix<F>,
    subset: &[usize],
    p: usize,
    sampler: &ColumnSampler,
    criterion: SplitCriterion,
    stream: &mut RngStream,
) -> Result<SplitResult<F>> {
    if subset.len() < 2 {
        return contract("a split needs at least 2 rows");
    }
    if p == 0 {
        return contract("a hyperplane needs at least 1 column");
    }
    let mut picker = ColumnPicker::new(matrix, subset, sampler)?;
    let mut best: Option<(Projection<F>, SplitPoint<F>, Vec<F>)> = None;
    for _ in 0..criterion.trials() {
        let proj = draw_projection(&mut picker, p, stream)?;
        let z = proj.project_rows(matrix, subset);
        let point = match best_split(&z, criterion.kind(), stream) {
            Ok(point) => point,
            Err(Error::ConstantProjection) => continue,
            Err(e) => return Err(e),
        };
        let better = match &best {
            None => true,
            Some((_, current, _)) => {
                point.gain.unwrap_or(f64::NEG_INFINITY) > current.gain.unwrap_or(f64::NEG_INFINITY)
            }
        };
        if better {
            best = Some((proj, point, z));
        }
    }
    let (projection, point, z) = best.ok_or(Error::ConstantProjection)?;
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (&row, &zi) in subset.iter().zip(&z) {
        if zi <= point.threshold {
            left.push(row);
        } else {
            right.push(row);
        }
    }
    debug_assert!(!left.is_empty() && !right.is_empty());
    Ok(SplitResult {
        hyperplane: Hyperplane {
            projection,
            threshold: point.threshold,
        },
        gain: point.gain,
        left_rows: RowSubset::from_vec_unchecked(left),
        right_rows: RowSubset::from_vec_unchecked(right),
    })
}
