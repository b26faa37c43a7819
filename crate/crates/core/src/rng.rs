//! Reproducible random streams, one per tree.
//!
//! Each stream is a ChaCha8 generator keyed by the base seed and positioned on
//! its own 64-bit stream id (the tree index), so the draws a tree sees do not
//! depend on how many threads build the forest or in which order.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::RowSubset;
use crate::error::{contract, Error, Result};

/// Identifier of the generator and derivation scheme, stored in model files.
pub const GENERATOR_VERSION: &str = "chacha8-stream/rand0.9/v1";

/// Single-owner deterministic random source.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
    base_seed: u64,
    tree_index: u64,
}

/// Stream for tree `tree_index` of a forest seeded with `base_seed`.
pub fn derive_stream(base_seed: u64, tree_index: u64) -> RngStream {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(tree_index);
    RngStream {
        rng,
        base_seed,
        tree_index,
    }
}

impl RngStream {
    pub fn origin(&self) -> (u64, u64) {
        (self.base_seed, self.tree_index)
    }

    /// Uniform index in `[0, upper)`.
    pub fn draw_uniform_index(&mut self, upper: usize) -> Result<usize> {
        if upper == 0 {
            return contract("uniform index over an empty range");
        }
        Ok(self.rng.random_range(0..upper))
    }

    /// Index `i` with probability `weights[i] / Σ weights`.
    ///
    /// Inverse CDF over the cumulative weights; a draw landing exactly on a
    /// cumulative boundary resolves to the lower index.
    pub fn draw_weighted_index(&mut self, weights: &[f64]) -> Result<usize> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return contract("weights must be finite and nonnegative");
        }
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut total = 0.0;
        for w in weights {
            total += w;
            cumulative.push(total);
        }
        if total <= 0.0 {
            return Err(Error::NoEligibleColumn);
        }
        let u = self.rng.random::<f64>() * total;
        let pos = cumulative.partition_point(|&c| c <= u);
        // u < total up to rounding; fall back to the last positive weight
        Ok(if pos < weights.len() {
            pos
        } else {
            weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
        })
    }

    pub fn draw_standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform real in `[0, 1)`.
    pub fn draw_unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// `k` distinct indices from `[0, population)`, all subsets equally likely.
    pub fn sample_without_replacement(&mut self, population: usize, k: usize) -> Result<RowSubset> {
        if k > population {
            return contract(format!("cannot draw {k} distinct rows from {population}"));
        }
        let picked = index::sample(&mut self.rng, population, k).into_vec();
        Ok(RowSubset::from_vec_unchecked(picked))
    }

    /// `k` independent uniform indices from `[0, population)`.
    pub fn sample_with_replacement(&mut self, population: usize, k: usize) -> Result<RowSubset> {
        if population == 0 && k > 0 {
            return contract("cannot draw rows from an empty population");
        }
        let picked = (0..k).map(|_| self.rng.random_range(0..population)).collect();
        Ok(RowSubset::from_vec_unchecked(picked))
    }
}
