//! Expected isolation depth of `m` uniformly distributed points under each
//! threshold rule. Used both as the remainder added to non-isolated terminal
//! nodes and as the score normalizer `q`.

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::split::CriterionKind;

const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

/// Above this the harmonic number comes from its asymptotic expansion.
const HARMONIC_EXACT_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepthFormula {
    /// `2 (H_m - 1)`: uniformly random thresholds.
    Harmonic,
    /// `(m(m+1)/2 - 1) / m`: every split peels off a single point.
    AveragedGainOptimal,
    /// Halving recursion; `log2 m` at powers of two.
    PooledGainOptimal,
}

impl DepthFormula {
    /// The formula whose split model matches `kind`.
    pub fn matching(kind: CriterionKind) -> Self {
        match kind {
            CriterionKind::UniformRandom => Self::Harmonic,
            CriterionKind::AveragedGain => Self::AveragedGainOptimal,
            CriterionKind::PooledGain => Self::PooledGainOptimal,
        }
    }
}

pub fn harmonic_number(m: usize) -> f64 {
    if m <= HARMONIC_EXACT_LIMIT {
        // smallest terms first
        (1..=m).rev().map(|i| 1.0 / i as f64).sum()
    } else {
        let x = m as f64;
        let inv2 = 1.0 / (x * x);
        x.ln() + EULER_MASCHERONI + 0.5 / x - inv2 / 12.0 + inv2 * inv2 / 120.0
    }
}

/// `E(m) = 1 + (⌊m/2⌋/m) E(⌊m/2⌋) + (⌈m/2⌉/m) E(⌈m/2⌉)`, `E(1) = 0`.
///
/// Every level of the recursion holds at most two consecutive sizes, so it is
/// evaluated bottom-up over `O(log m)` pairs.
fn pooled_depth(m: usize) -> f64 {
    let mut sizes = Vec::new();
    let mut k = m;
    while k > 1 {
        sizes.push(k);
        k /= 2;
    }
    // (lower, E(lower), E(lower + 1)), starting from E(1) = 0, E(2) = 1
    let (mut lower, mut e_lo, mut e_hi) = (1usize, 0.0, 1.0);
    for &size in sizes.iter().rev() {
        let eval = |n: usize| -> f64 {
            let a = n / 2;
            let b = n - a;
            let pick = |h: usize| if h == lower { e_lo } else { e_hi };
            1.0 + (a as f64 / n as f64) * pick(a) + (b as f64 / n as f64) * pick(b)
        };
        let (next_lo, next_hi) = (eval(size), eval(size + 1));
        lower = size;
        e_lo = next_lo;
        e_hi = next_hi;
    }
    e_lo
}

/// Expected isolation depth of `m ≥ 1` points under `formula`.
pub fn expected_depth(formula: DepthFormula, m: usize) -> Result<f64> {
    if m == 0 {
        return contract("expected depth of zero points");
    }
    Ok(match formula {
        DepthFormula::Harmonic => 2.0 * (harmonic_number(m) - 1.0),
        DepthFormula::AveragedGainOptimal => {
            let m = m as f64;
            (m * (m + 1.0) / 2.0 - 1.0) / m
        }
        DepthFormula::PooledGainOptimal => pooled_depth(m),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::collections::HashMap;

    fn pooled_oracle(m: usize, memo: &mut HashMap<usize, f64>) -> f64 {
        if m <= 1 {
            return 0.0;
        }
        if let Some(&v) = memo.get(&m) {
            return v;
        }
        let (a, b) = (m / 2, m - m / 2);
        let v = 1.0 + (a as f64 / m as f64) * pooled_oracle(a, memo) + (b as f64 / m as f64) * pooled_oracle(b, memo);
        memo.insert(m, v);
        v
    }

    #[test]
    fn one_point_has_zero_depth() {
        for f in [
            DepthFormula::Harmonic,
            DepthFormula::AveragedGainOptimal,
            DepthFormula::PooledGainOptimal,
        ] {
            assert_eq!(expected_depth(f, 1).unwrap(), 0.0);
        }
        assert!(expected_depth(DepthFormula::Harmonic, 0).is_err());
    }

    #[test]
    fn small_examples() {
        assert_eq!(expected_depth(DepthFormula::Harmonic, 2).unwrap(), 1.0);
        assert_eq!(expected_depth(DepthFormula::AveragedGainOptimal, 4).unwrap(), 2.25);
        assert_eq!(expected_depth(DepthFormula::PooledGainOptimal, 4).unwrap(), 2.0);
        assert_relative_eq!(
            expected_depth(DepthFormula::PooledGainOptimal, 5).unwrap(),
            2.4,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            expected_depth(DepthFormula::PooledGainOptimal, 3).unwrap(),
            5.0 / 3.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn pooled_matches_recursion_oracle() {
        let mut memo = HashMap::new();
        for m in 1..3000 {
            let got = expected_depth(DepthFormula::PooledGainOptimal, m).unwrap();
            assert_relative_eq!(got, pooled_oracle(m, &mut memo), epsilon = 1e-12);
        }
    }

    #[test]
    fn pooled_is_log2_at_powers_of_two() {
        for k in 0..=20 {
            assert_eq!(
                expected_depth(DepthFormula::PooledGainOptimal, 1 << k).unwrap(),
                k as f64
            );
        }
    }

    #[test]
    fn harmonic_asymptotic_branch_is_continuous() {
        let exact: f64 = (1..=HARMONIC_EXACT_LIMIT + 1).rev().map(|i| 1.0 / i as f64).sum();
        assert_relative_eq!(harmonic_number(HARMONIC_EXACT_LIMIT + 1), exact, epsilon = 1e-13);
    }

    #[test]
    fn depth_models_order_beyond_three() {
        for m in 4..500 {
            let pooled = expected_depth(DepthFormula::PooledGainOptimal, m).unwrap();
            let harmonic = expected_depth(DepthFormula::Harmonic, m).unwrap();
            let averaged = expected_depth(DepthFormula::AveragedGainOptimal, m).unwrap();
            assert!(pooled < harmonic, "m={m}");
            assert!(harmonic < averaged, "m={m}");
        }
    }
}
