//! Ranking metrics: area under the ROC curve and average precision.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Scores paired with binary labels (`true` = outlier), both classes present.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledScores {
    scores: Vec<f64>,
    labels: Vec<bool>,
    n_pos: usize,
}

impl LabeledScores {
    pub fn new(scores: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                got: scores.len(),
            });
        }
        if let Some(row) = scores.iter().position(|s| s.is_nan()) {
            return Err(Error::InvalidData {
                row,
                column: "score".into(),
                reason: "NaN score".into(),
            });
        }
        let n_pos = labels.iter().filter(|&&l| l).count();
        if n_pos == 0 || n_pos == labels.len() {
            return Err(Error::SingleClass);
        }
        Ok(Self { scores, labels, n_pos })
    }

    pub fn from_scalars<F: crate::Scalar>(scores: &[F], labels: &[bool]) -> Result<Self> {
        Self::new(scores.iter().map(|s| s.as_f64()).collect(), labels.to_vec())
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn n_pos(&self) -> usize {
        self.n_pos
    }

    pub fn n_neg(&self) -> usize {
        self.len() - self.n_pos
    }

    /// Groups of tied scores in descending score order, as (positives, negatives).
    fn tie_groups_descending(&self) -> Vec<(usize, usize)> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.scores[b].partial_cmp(&self.scores[a]).unwrap_or(Ordering::Equal));
        let mut groups = Vec::new();
        let mut i = 0;
        while i < order.len() {
            let value = self.scores[order[i]];
            let (mut pos, mut neg) = (0, 0);
            while i < order.len() && self.scores[order[i]] == value {
                if self.labels[order[i]] {
                    pos += 1;
                } else {
                    neg += 1;
                }
                i += 1;
            }
            groups.push((pos, neg));
        }
        groups
    }
}

/// Probability that a random positive outscores a random negative, ties ½.
pub fn auroc(data: &LabeledScores) -> f64 {
    // Walking from the top: each positive beats every negative below its group
    // and ties with the negatives inside it.
    let mut negatives_below = data.n_neg() as f64;
    let mut wins = 0.0;
    for (pos, neg) in data.tie_groups_descending() {
        negatives_below -= neg as f64;
        wins += pos as f64 * (negatives_below + 0.5 * neg as f64);
    }
    wins / (data.n_pos() as f64 * data.n_neg() as f64)
}

/// Average precision: sum over distinct thresholds of precision times the
/// recall increment, tied scores sharing one threshold.
pub fn aupr(data: &LabeledScores) -> f64 {
    let n_pos = data.n_pos() as f64;
    let (mut tp, mut seen) = (0usize, 0usize);
    let mut total = 0.0;
    for (pos, neg) in data.tie_groups_descending() {
        tp += pos;
        seen += pos + neg;
        if pos > 0 {
            total += (tp as f64 / seen as f64) * (pos as f64 / n_pos);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ls(scores: &[f64], labels: &[u8]) -> LabeledScores {
        LabeledScores::new(scores.to_vec(), labels.iter().map(|&l| l == 1).collect()).unwrap()
    }

    fn pairwise_auroc(scores: &[f64], labels: &[bool]) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (i, &li) in labels.iter().enumerate() {
            for (j, &lj) in labels.iter().enumerate() {
                if li && !lj {
                    den += 1.0;
                    num += match scores[i].partial_cmp(&scores[j]).unwrap() {
                        Ordering::Greater => 1.0,
                        Ordering::Equal => 0.5,
                        Ordering::Less => 0.0,
                    };
                }
            }
        }
        num / den
    }

    fn threshold_aupr(scores: &[f64], labels: &[bool]) -> f64 {
        let mut thresholds = scores.to_vec();
        thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
        thresholds.dedup();
        let n_pos = labels.iter().filter(|&&l| l).count() as f64;
        let mut prev_recall = 0.0;
        let mut total = 0.0;
        for t in thresholds {
            let flagged: Vec<bool> = scores.iter().map(|&s| s >= t).collect();
            let tp = flagged.iter().zip(labels).filter(|(&f, &l)| f && l).count() as f64;
            let fp = flagged.iter().zip(labels).filter(|(&f, &l)| f && !l).count() as f64;
            let recall = tp / n_pos;
            total += (recall - prev_recall) * tp / (tp + fp);
            prev_recall = recall;
        }
        total
    }

    #[test]
    fn worked_example() {
        let d = ls(&[0.9, 0.8, 0.7, 0.1], &[1, 0, 1, 0]);
        assert_eq!(auroc(&d), 0.75);
        assert_relative_eq!(aupr(&d), 5.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn perfect_ranking() {
        let d = ls(&[5.0, 4.0, 1.0, 0.0], &[1, 1, 0, 0]);
        assert_eq!(auroc(&d), 1.0);
        assert_eq!(aupr(&d), 1.0);
    }

    #[test]
    fn all_ties() {
        let d = ls(&[0.3; 5], &[1, 0, 0, 1, 0]);
        assert_eq!(auroc(&d), 0.5);
        assert_relative_eq!(aupr(&d), 0.4, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            LabeledScores::new(vec![1.0, 2.0], vec![true, true]),
            Err(Error::SingleClass)
        ));
        assert!(matches!(
            LabeledScores::new(vec![1.0, 2.0], vec![false, false]),
            Err(Error::SingleClass)
        ));
        assert!(LabeledScores::new(vec![1.0], vec![true, false]).is_err());
        assert!(LabeledScores::new(vec![f64::NAN, 1.0], vec![true, false]).is_err());
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
        (2usize..=12)
            .prop_flat_map(|n| {
                (
                    prop::collection::vec(0u8..5, n).prop_map(|v| v.into_iter().map(f64::from).collect()),
                    prop::collection::vec(any::<bool>(), n),
                )
            })
            .prop_filter("both classes", |(_, l)| l.iter().any(|&x| x) && l.iter().any(|&x| !x))
    }

    proptest! {
        #[test]
        fn matches_oracles((scores, labels) in instance()) {
            let d = LabeledScores::new(scores.clone(), labels.clone()).unwrap();
            prop_assert!((auroc(&d) - pairwise_auroc(&scores, &labels)).abs() < 1e-12);
            prop_assert!((aupr(&d) - threshold_aupr(&scores, &labels)).abs() < 1e-12);
        }

        #[test]
        fn invariant_under_increasing_maps((scores, labels) in instance()) {
            let base = LabeledScores::new(scores.clone(), labels.clone()).unwrap();
            for f in [|x: f64| 2.0 * x + 1.0, |x: f64| x.exp()] {
                let mapped = LabeledScores::new(scores.iter().map(|&x| f(x)).collect(), labels.clone()).unwrap();
                prop_assert_eq!(auroc(&mapped), auroc(&base));
                prop_assert_eq!(aupr(&mapped), aupr(&base));
            }
        }

        #[test]
        fn negation_complements_auroc(
            (scores, labels) in instance(),
            jitter in prop::collection::vec(0.0f64..1e-3, 12),
        ) {
            // tie-free: distinct integer ranks plus tiny jitter
            let distinct: Vec<f64> = scores.iter().enumerate().map(|(i, &s)| s * 100.0 + i as f64 + jitter[i]).collect();
            let pos = LabeledScores::new(distinct.clone(), labels.clone()).unwrap();
            let neg = LabeledScores::new(distinct.iter().map(|x| -x).collect(), labels).unwrap();
            prop_assert!((auroc(&pos) + auroc(&neg) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn permutation_invariant((scores, labels) in instance(), rot in 0usize..12) {
            let n = scores.len();
            let k = rot % n;
            let mut s2 = scores.clone();
            let mut l2 = labels.clone();
            s2.rotate_left(k);
            l2.rotate_left(k);
            let a = LabeledScores::new(scores, labels).unwrap();
            let b = LabeledScores::new(s2, l2).unwrap();
            prop_assert_eq!(auroc(&a), auroc(&b));
            prop_assert_eq!(aupr(&a), aupr(&b));
        }
    }
}
