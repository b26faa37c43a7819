//! Repeated fit-and-score runs over consecutive seeds with ranking metrics.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{fit_forest, score_matrix, ForestConfig};
use crate::io::LabeledDataset;
use crate::metrics::{aupr, auroc, LabeledScores};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub auroc: f64,
    pub aupr: f64,
    /// Wall time of fitting plus scoring every row.
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub dataset: String,
    pub model: String,
    pub config: ForestConfig,
    pub seeds: Vec<u64>,
    pub runs: Vec<SeedRun>,
    pub mean_auroc: f64,
    pub mean_aupr: f64,
    pub mean_seconds: f64,
}

/// Runs seeds `config.seed .. config.seed + runs` on the current rayon pool.
pub fn run_bench<F: Scalar>(
    dataset: &LabeledDataset<F>,
    model: &str,
    config: &ForestConfig,
    runs: usize,
) -> Result<BenchResult> {
    if runs == 0 {
        return Err(Error::Config("at least one run is required".into()));
    }
    let labels = dataset.labels.as_deref().ok_or(Error::SingleClass)?;
    if !dataset.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let seeds: Vec<u64> = (0..runs as u64).map(|r| config.seed.wrapping_add(r)).collect();
    let mut records = Vec::with_capacity(runs);
    for &seed in &seeds {
        let cfg = config.clone().with_seed(seed);
        let start = Instant::now();
        let fitted = fit_forest(&dataset.matrix, &cfg)?;
        let scores = score_matrix(&dataset.matrix, &fitted)?;
        let seconds = start.elapsed().as_secs_f64();
        let ls = LabeledScores::from_scalars(&scores, labels)?;
        records.push(SeedRun {
            seed,
            auroc: auroc(&ls),
            aupr: aupr(&ls),
            seconds,
        });
    }
    let mean = |f: fn(&SeedRun) -> f64| records.iter().map(f).sum::<f64>() / runs as f64;
    Ok(BenchResult {
        dataset: dataset.name.clone(),
        model: model.to_string(),
        config: config.clone(),
        seeds,
        mean_auroc: mean(|r| r.auroc),
        mean_aupr: mean(|r| r.aupr),
        mean_seconds: mean(|r| r.seconds),
        runs: records,
    })
}

impl BenchResult {
    /// Plain-text table, metrics to 4 decimals.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "dataset: {}  model: {}", self.dataset, self.model);
        let _ = writeln!(out, "{:>20}  {:>6}  {:>6}  {:>8}", "seed", "ROC", "PR", "Time");
        for r in &self.runs {
            let _ = writeln!(out, "{:>20}  {:.4}  {:.4}  {:>8.4}", r.seed, r.auroc, r.aupr, r.seconds);
        }
        let _ = writeln!(
            out,
            "{:>20}  {:.4}  {:.4}  {:>8.4}",
            "mean", self.mean_auroc, self.mean_aupr, self.mean_seconds
        );
        out
    }
}
