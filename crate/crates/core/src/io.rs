//! CSV ingestion and export, synthetic cluster generators and score grids.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::ColumnMatrix;
use crate::error::{contract, Error, Result};
use crate::forest::ForestModel;
use crate::rng::derive_stream;
use crate::scalar::Scalar;

/// Feature matrix plus optional outlier labels (`true` = outlier).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset<F> {
    pub matrix: ColumnMatrix<F>,
    pub labels: Option<Vec<bool>>,
    pub column_names: Vec<String>,
    pub name: String,
}

impl<F: Scalar> LabeledDataset<F> {
    pub fn n_outliers(&self) -> usize {
        self.labels.as_ref().map_or(0, |l| l.iter().filter(|&&x| x).count())
    }

    /// Both classes present, so ranking metrics are defined.
    pub fn has_both_classes(&self) -> bool {
        match &self.labels {
            Some(l) => l.iter().any(|&x| x) && l.iter().any(|&x| !x),
            None => false,
        }
    }
}

/// Which CSV column holds the labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Last,
    Name(String),
    /// Every column is a feature.
    None,
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "last" => LabelColumn::Last,
            "none" => LabelColumn::None,
            other => LabelColumn::Name(other.to_string()),
        })
    }
}

pub fn load_csv<F: Scalar>(path: impl AsRef<Path>, label: &LabelColumn) -> Result<LabeledDataset<F>> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    read_csv(File::open(path)?, label, name)
}

/// Parses a headed CSV; rows are numbered from 1 (the first data line) in errors.
pub fn read_csv<F: Scalar, R: Read>(reader: R, label: &LabelColumn, name: String) -> Result<LabeledDataset<F>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if headers.is_empty() {
        return Err(Error::InvalidData {
            row: 0,
            column: String::new(),
            reason: "missing header".into(),
        });
    }
    let label_idx = match label {
        LabelColumn::Last => Some(headers.len() - 1),
        LabelColumn::None => None,
        LabelColumn::Name(n) => Some(headers.iter().position(|h| h == n).ok_or_else(|| Error::InvalidData {
            row: 0,
            column: n.clone(),
            reason: "label column not found in header".into(),
        })?),
    };
    let feature_idx: Vec<usize> = (0..headers.len()).filter(|&j| Some(j) != label_idx).collect();
    if feature_idx.is_empty() {
        return Err(Error::InvalidData {
            row: 0,
            column: String::new(),
            reason: "no feature columns".into(),
        });
    }
    let mut columns: Vec<Vec<F>> = vec![Vec::new(); feature_idx.len()];
    let mut labels = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if record.len() != headers.len() {
            return Err(Error::InvalidData {
                row,
                column: String::new(),
                reason: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        for (col, &j) in columns.iter_mut().zip(&feature_idx) {
            col.push(parse_cell(&record[j], row, &headers[j])?);
        }
        if let Some(j) = label_idx {
            labels.push(parse_label(&record[j], row, &headers[j])?);
        }
    }
    if columns[0].is_empty() {
        return Err(Error::InvalidData {
            row: 0,
            column: String::new(),
            reason: "no data rows".into(),
        });
    }
    Ok(LabeledDataset {
        matrix: ColumnMatrix::from_columns(columns)?,
        labels: label_idx.map(|_| labels),
        column_names: feature_idx.iter().map(|&j| headers[j].clone()).collect(),
        name,
    })
}

fn parse_cell<F: Scalar>(cell: &str, row: usize, column: &str) -> Result<F> {
    let bad = |reason: String| Error::InvalidData {
        row,
        column: column.to_string(),
        reason,
    };
    if cell.is_empty() {
        return Err(bad("missing value".into()));
    }
    let value: F = cell.parse().map_err(|_| bad(format!("not a number: '{cell}'")))?;
    if !value.is_finite() {
        return Err(bad(format!("non-finite value '{cell}'")));
    }
    Ok(value)
}

fn parse_label(cell: &str, row: usize, column: &str) -> Result<bool> {
    match cell.parse::<f64>() {
        Ok(0.0) => Ok(false),
        Ok(1.0) => Ok(true),
        _ => Err(Error::InvalidData {
            row,
            column: column.to_string(),
            reason: format!("label must be 0 or 1, got '{cell}'"),
        }),
    }
}

/// Writes the dataset with a trailing `label` column when labels are present.
///
/// Values use the shortest decimal that parses back to the same float.
pub fn write_csv<F: Scalar, W: Write>(dataset: &LabeledDataset<F>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = dataset.column_names.clone();
    if dataset.labels.is_some() {
        header.push("label".into());
    }
    w.write_record(&header)?;
    let m = &dataset.matrix;
    let mut record = Vec::with_capacity(header.len());
    for i in 0..m.rows() {
        record.clear();
        record.extend((0..m.cols()).map(|j| m.get(i, j).to_string()));
        if let Some(labels) = &dataset.labels {
            record.push(if labels[i] { "1" } else { "0" }.to_string());
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv<F: Scalar>(dataset: &LabeledDataset<F>, path: impl AsRef<Path>) -> Result<()> {
    write_csv(dataset, File::create(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    BimodalGaussian,
    BlobWithPlantedOutlier,
}

/// Isotropic Gaussian cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub center: Vec<f64>,
    pub sdev: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub clusters: Vec<Cluster>,
    /// Fixed points appended after the clusters and labeled as outliers.
    pub planted: Vec<Vec<f64>>,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Two unit-sdev clusters of `size` points at (0,0) and (10,10).
    pub fn bimodal(size: usize, seed: u64) -> Self {
        Self {
            kind: SyntheticKind::BimodalGaussian,
            clusters: vec![
                Cluster {
                    center: vec![0.0, 0.0],
                    sdev: 1.0,
                    size,
                },
                Cluster {
                    center: vec![10.0, 10.0],
                    sdev: 1.0,
                    size,
                },
            ],
            planted: Vec::new(),
            seed,
        }
    }

    /// Unit-sdev blob of `size` points at the origin plus one planted point.
    pub fn blob_with_outlier(size: usize, outlier: Vec<f64>, seed: u64) -> Self {
        Self {
            kind: SyntheticKind::BlobWithPlantedOutlier,
            clusters: vec![Cluster {
                center: vec![0.0; outlier.len()],
                sdev: 1.0,
                size,
            }],
            planted: vec![outlier],
            seed,
        }
    }

    pub fn dims(&self) -> usize {
        self.clusters.first().map_or(0, |c| c.center.len())
    }

    pub fn validate(&self) -> Result<()> {
        let dims = self.dims();
        if self.clusters.is_empty() || dims == 0 {
            return Err(Error::Config(
                "synthetic data needs at least one cluster of dimension ≥ 1".into(),
            ));
        }
        for c in &self.clusters {
            if c.center.len() != dims || !(c.sdev > 0.0 && c.sdev.is_finite()) || c.size == 0 {
                return Err(Error::Config(format!(
                    "invalid cluster: {} dims, sdev {}, size {}",
                    c.center.len(),
                    c.sdev,
                    c.size
                )));
            }
        }
        if self.planted.iter().any(|p| p.len() != dims) {
            return Err(Error::Config("planted point dimension differs from clusters".into()));
        }
        Ok(())
    }
}

/// Draws the clusters (labels 0) then appends the planted points (labels 1).
pub fn gen_synthetic<F: Scalar>(spec: &SyntheticSpec) -> Result<LabeledDataset<F>> {
    spec.validate()?;
    let mut rows = Vec::new();
    for (k, cluster) in spec.clusters.iter().enumerate() {
        let mut stream = derive_stream(spec.seed, k as u64);
        for _ in 0..cluster.size {
            rows.push(
                cluster
                    .center
                    .iter()
                    .map(|&c| F::of(c + cluster.sdev * stream.draw_standard_normal()))
                    .collect::<Vec<F>>(),
            );
        }
    }
    let inliers = rows.len();
    rows.extend(spec.planted.iter().map(|p| p.iter().map(|&v| F::of(v)).collect()));
    let mut labels = vec![false; inliers];
    labels.resize(rows.len(), true);
    Ok(LabeledDataset {
        matrix: ColumnMatrix::from_rows(&rows)?,
        labels: Some(labels),
        column_names: (0..spec.dims()).map(|j| format!("x{j}")).collect(),
        name: match spec.kind {
            SyntheticKind::BimodalGaussian => "bimodal".into(),
            SyntheticKind::BlobWithPlantedOutlier => "blob".into(),
        },
    })
}

/// Axis-aligned box `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridBounds {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub x: f64,
    pub y: f64,
    pub score: f64,
}

fn lattice(range: (f64, f64), resolution: usize, i: usize) -> f64 {
    if resolution == 1 {
        range.0
    } else {
        range.0 + (range.1 - range.0) * i as f64 / (resolution - 1) as f64
    }
}

/// Scores a `resolution × resolution` lattice spanning `bounds`, corners included.
/// Points run along x fastest.
pub fn score_grid<F: Scalar>(model: &ForestModel<F>, bounds: GridBounds, resolution: usize) -> Result<Vec<GridPoint>> {
    if model.n_cols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: model.n_cols(),
        });
    }
    if resolution == 0 {
        return contract("grid resolution must be at least 1");
    }
    if ![bounds.x.0, bounds.x.1, bounds.y.0, bounds.y.1]
        .iter()
        .all(|v| v.is_finite())
    {
        return Err(Error::Config("grid bounds must be finite".into()));
    }
    (0..resolution * resolution)
        .into_par_iter()
        .map(|k| {
            let x = lattice(bounds.x, resolution, k % resolution);
            let y = lattice(bounds.y, resolution, k / resolution);
            let score = model.score(&[F::of(x), F::of(y)])?.as_f64();
            Ok(GridPoint { x, y, score })
        })
        .collect()
}

pub fn write_grid_csv<W: Write>(grid: &[GridPoint], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "y", "score"])?;
    for p in grid {
        w.write_record([p.x.to_string(), p.y.to_string(), p.score.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
