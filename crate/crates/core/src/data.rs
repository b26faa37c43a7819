//! Column-major numeric datasets and the per-column statistics every split
//! heuristic is built from.

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::scalar::Scalar;

/// Immutable `rows × cols` matrix stored column by column.
///
/// Every value is finite; construction rejects NaN and infinities.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMatrix<F> {
    rows: usize,
    cols: usize,
    values: Vec<F>,
}

impl<F: Scalar> ColumnMatrix<F> {
    /// Builds a matrix from column-contiguous storage.
    pub fn from_column_major(rows: usize, cols: usize, values: Vec<F>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return contract(format!("matrix must be at least 1x1, got {rows}x{cols}"));
        }
        if values.len() != rows * cols {
            return contract(format!(
                "expected {} values for a {rows}x{cols} matrix, got {}",
                rows * cols,
                values.len()
            ));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData {
                row: pos % rows,
                column: (pos / rows).to_string(),
                reason: format!("non-finite value {}", values[pos]),
            });
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_columns(columns: Vec<Vec<F>>) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return contract("columns have differing lengths");
        }
        Self::from_column_major(rows, cols, columns.into_iter().flatten().collect())
    }

    /// Convenience constructor from row vectors (transposes into column order).
    pub fn from_rows(rows: &[Vec<F>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return contract("rows have differing lengths");
        }
        let mut values = Vec::with_capacity(m * n);
        for j in 0..n {
            values.extend(rows.iter().map(|r| r[j]));
        }
        Self::from_column_major(m, n, values)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn column(&self, col: usize) -> &[F] {
        &self.values[col * self.rows..(col + 1) * self.rows]
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> F {
        self.values[col * self.rows + row]
    }

    pub fn row(&self, row: usize) -> Vec<F> {
        (0..self.cols).map(|j| self.get(row, j)).collect()
    }

    pub fn copy_row_into(&self, row: usize, buf: &mut Vec<F>) {
        buf.clear();
        buf.extend((0..self.cols).map(|j| self.get(row, j)));
    }

    pub fn column_major(&self) -> &[F] {
        &self.values
    }
}

/// Ordered row indices into a [`ColumnMatrix`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowSubset(Vec<usize>);

impl RowSubset {
    /// Wraps `indices`, checking each one lies in `[0, population)`.
    pub fn new(indices: Vec<usize>, population: usize) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= population) {
            return contract(format!("row index {bad} out of range for {population} rows"));
        }
        Ok(Self(indices))
    }

    pub fn full(population: usize) -> Self {
        Self((0..population).collect())
    }

    pub(crate) fn from_vec_unchecked(indices: Vec<usize>) -> Self {
        Self(indices)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn is_distinct(&self) -> bool {
        let mut sorted = self.0.clone();
        sorted.sort_unstable();
        sorted.windows(2).all(|w| w[0] != w[1])
    }
}

/// Population summary of one column over a set of rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnStats<F> {
    pub mean: F,
    pub sdev: F,
    pub min: F,
    pub max: F,
    /// More than one distinct value; equivalently `min < max`.
    pub distinct_gt1: bool,
}

impl<F: Scalar> ColumnStats<F> {
    /// Statistics of an arbitrary slice of values.
    pub fn of_values(values: impl Iterator<Item = F> + Clone) -> Result<Self> {
        let mut count = 0usize;
        let mut sum = F::zero();
        let mut min = F::infinity();
        let mut max = F::neg_infinity();
        for v in values.clone() {
            count += 1;
            sum = sum + v;
            min = min.min(v);
            max = max.max(v);
        }
        if count == 0 {
            return contract("statistics of an empty row subset");
        }
        let n = F::of_usize(count);
        let distinct_gt1 = min < max;
        if !distinct_gt1 {
            return Ok(Self {
                mean: min,
                sdev: F::zero(),
                min,
                max,
                distinct_gt1,
            });
        }
        // corrected two-pass: the second sum removes the rounding error left in the mean
        let mean = sum / n;
        let mut ss = F::zero();
        let mut comp = F::zero();
        for v in values {
            let d = v - mean;
            ss = ss + d * d;
            comp = comp + d;
        }
        let var = ((ss - comp * comp / n) / n).max(F::zero());
        Ok(Self {
            mean,
            sdev: var.sqrt(),
            min,
            max,
            distinct_gt1,
        })
    }

    pub fn range(&self) -> F {
        self.max - self.min
    }
}

/// Population mean, standard deviation and range of `col` over `subset`.
pub fn column_stats<F: Scalar>(matrix: &ColumnMatrix<F>, subset: &[usize], col: usize) -> Result<ColumnStats<F>> {
    if col >= matrix.cols() {
        return contract(format!("column {col} out of range for {} columns", matrix.cols()));
    }
    let column = matrix.column(col);
    ColumnStats::of_values(subset.iter().map(|&i| column[i]))
}

/// Raw (non-excess) kurtosis `E[(x-μ)^4] / σ^4` of `col` over `subset`.
///
/// Returns `None` for a constant column, which selectors treat as "no signal".
pub fn kurtosis<F: Scalar>(matrix: &ColumnMatrix<F>, subset: &[usize], col: usize) -> Result<Option<f64>> {
    if subset.len() < 2 {
        return contract("kurtosis needs at least 2 rows");
    }
    if col >= matrix.cols() {
        return contract(format!("column {col} out of range for {} columns", matrix.cols()));
    }
    let column = matrix.column(col);
    Ok(kurtosis_of(subset.iter().map(|&i| column[i].as_f64())))
}

pub(crate) fn kurtosis_of(values: impl Iterator<Item = f64> + Clone) -> Option<f64> {
    let mut n = 0usize;
    let mut sum = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for v in values.clone() {
        n += 1;
        sum += v;
        min = min.min(v);
        max = max.max(v);
    }
    if n < 2 || min >= max {
        return None;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let (mut m2, mut m4) = (0.0, 0.0);
    for v in values {
        let d2 = (v - mean) * (v - mean);
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m4 /= nf;
    if m2 <= 0.0 {
        return None;
    }
    let k = m4 / (m2 * m2);
    k.is_finite().then_some(k)
}

/// Welford accumulator for count, mean and second central moment.
///
/// Two accumulators over disjoint data merge exactly as if fed sequentially
/// (Chan et al. pairwise update).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunningMoments {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Default for RunningMoments {
    fn default() -> Self {
        Self::new()
    }
}

impl RunningMoments {
    pub fn new() -> Self {
        Self {
            count: 0,
            mean: 0.0,
            m2: 0.0,
        }
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let count = self.count + other.count;
        let (na, nb, n) = (self.count as f64, other.count as f64, count as f64);
        let delta = other.mean - self.mean;
        Self {
            count,
            mean: self.mean + delta * nb / n,
            m2: self.m2 + other.m2 + delta * delta * na * nb / n,
        }
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population variance (divides by the count).
    #[inline]
    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.m2 / self.count as f64).max(0.0)
        }
    }

    #[inline]
    pub fn sdev(&self) -> f64 {
        self.variance().sqrt()
    }
}
