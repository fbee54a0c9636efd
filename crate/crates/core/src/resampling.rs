//! SMOTE: synthetic minority points on segments between minority
//! neighbours.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::squared_distance;
use crate::Label;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmoteError {
    #[error("k = {k} needs more than {k} minority points, have {n}")]
    InsufficientMinority { k: usize, n: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("point {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("index {index} out of range for {n} points")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("target minority fraction {0} must lie strictly between 0 and 1")]
    BadFraction(f64),
    #[error("a target fraction needs the majority size; use `rebalance`")]
    FractionWithoutMajority,
    #[error("training rows must contain both classes")]
    SingleClass,
    #[error("features ({features}) and labels ({labels}) differ in length")]
    LengthMismatch { features: usize, labels: usize },
}

/// How many synthetic points to make.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoteAmount {
    Points(usize),
    /// Minority share of the rebalanced set, e.g. 0.5 for parity.
    MinorityFraction(f64),
}

impl SmoteAmount {
    /// Synthetic count for a minority of `minority` against `majority`
    /// rows. A fraction already met needs no points.
    pub fn resolve(self, minority: usize, majority: Option<usize>) -> Result<usize, SmoteError> {
        match self {
            SmoteAmount::Points(n) => Ok(n),
            SmoteAmount::MinorityFraction(f) => {
                if !(f > 0.0 && f < 1.0) {
                    return Err(SmoteError::BadFraction(f));
                }
                let majority = majority.ok_or(SmoteError::FractionWithoutMajority)?;
                let target = f * majority as f64 / (1.0 - f);
                let needed = libm::ceil(target - minority as f64 - 1e-9);
                Ok(if needed > 0.0 { needed as usize } else { 0 })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoteConfig {
    pub k: usize,
    pub amount: SmoteAmount,
    pub seed: u64,
    /// Measure neighbour distances on per-feature min-max scaled values.
    /// Interpolation always happens on the raw values.
    pub min_max_scaling: bool,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        Self {
            k: 4,
            amount: SmoteAmount::MinorityFraction(0.5),
            seed: 0,
            min_max_scaling: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticPoint {
    pub features: Vec<f64>,
    pub parent_index: usize,
    pub neighbour_index: usize,
    pub lambda: f64,
}

/// `parent + lambda * (neighbour - parent)`, componentwise, clamped to the
/// segment so rounding cannot step past an endpoint.
pub fn interpolate(parent: &[f64], neighbour: &[f64], lambda: f64) -> Vec<f64> {
    parent
        .iter()
        .zip(neighbour)
        .map(|(p, q)| (p + lambda * (q - p)).clamp(p.min(*q), p.max(*q)))
        .collect()
}

fn check_dimensions(points: &[Vec<f64>]) -> Result<(), SmoteError> {
    let Some(first) = points.first() else {
        return Ok(());
    };
    let expected = first.len();
    for (index, p) in points.iter().enumerate() {
        if p.len() != expected {
            return Err(SmoteError::DimensionMismatch {
                index,
                expected,
                found: p.len(),
            });
        }
    }
    Ok(())
}

fn nearest(points: &[Vec<f64>], index: usize, k: usize) -> Vec<usize> {
    let target = &points[index];
    let mut candidates: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != index)
        .map(|(i, p)| (squared_distance(target, p), i))
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    candidates.truncate(k);
    candidates.into_iter().map(|(_, i)| i).collect()
}

/// The `k` points closest to `points[index]` by Euclidean distance, the
/// point itself excluded; equal distances prefer the lower index.
pub fn k_nearest_minority(points: &[Vec<f64>], index: usize, k: usize) -> Result<Vec<usize>, SmoteError> {
    if k == 0 {
        return Err(SmoteError::ZeroK);
    }
    if k >= points.len() {
        return Err(SmoteError::InsufficientMinority { k, n: points.len() });
    }
    if index >= points.len() {
        return Err(SmoteError::IndexOutOfRange { index, n: points.len() });
    }
    check_dimensions(points)?;
    Ok(nearest(points, index, k))
}

/// Rescale every feature to [0, 1] over the given points; constant
/// features map to 0.
pub fn min_max_scale(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let Some(first) = points.first() else {
        return Vec::new();
    };
    let dim = first.len();
    let mut lo = alloc::vec![f64::INFINITY; dim];
    let mut hi = alloc::vec![f64::NEG_INFINITY; dim];
    for p in points {
        for (j, v) in p.iter().enumerate() {
            lo[j] = lo[j].min(*v);
            hi[j] = hi[j].max(*v);
        }
    }
    points
        .iter()
        .map(|p| {
            p.iter()
                .enumerate()
                .map(|(j, v)| {
                    let span = hi[j] - lo[j];
                    if span > 0.0 {
                        (v - lo[j]) / span
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Generate `count` synthetic points from the minority set.
pub fn smote_points(
    minority: &[Vec<f64>],
    count: usize,
    config: &SmoteConfig,
) -> Result<Vec<SyntheticPoint>, SmoteError> {
    if config.k == 0 {
        return Err(SmoteError::ZeroK);
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    if minority.len() <= config.k {
        return Err(SmoteError::InsufficientMinority {
            k: config.k,
            n: minority.len(),
        });
    }
    check_dimensions(minority)?;

    let scaled;
    let metric_space = if config.min_max_scaling {
        scaled = min_max_scale(minority);
        &scaled
    } else {
        minority
    };
    let mut neighbours: Vec<Option<Vec<usize>>> = alloc::vec![None; minority.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let parent = rng.random_range(0..minority.len());
        let knn = neighbours[parent].get_or_insert_with(|| nearest(metric_space, parent, config.k));
        let neighbour = knn[rng.random_range(0..knn.len())];
        let lambda: f64 = rng.random();
        out.push(SyntheticPoint {
            features: interpolate(&minority[parent], &minority[neighbour], lambda),
            parent_index: parent,
            neighbour_index: neighbour,
            lambda,
        });
    }
    Ok(out)
}

/// [`smote_points`] with the count taken from `config.amount`, which must be
/// an explicit point count here.
pub fn smote(minority: &[Vec<f64>], config: &SmoteConfig) -> Result<Vec<SyntheticPoint>, SmoteError> {
    let count = config.amount.resolve(minority.len(), None)?;
    smote_points(minority, count, config)
}

/// Training rows with SMOTE points appended. Rows at `original_len..` are
/// synthetic; `synthetic[i]` describes row `original_len + i`, with parent
/// and neighbour given as indices into the input rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Rebalanced {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
    pub original_len: usize,
    pub synthetic: Vec<SyntheticPoint>,
}

/// Append bankrupt SMOTE points built from the bankrupt training rows.
pub fn rebalance(features: &[Vec<f64>], labels: &[Label], config: &SmoteConfig) -> Result<Rebalanced, SmoteError> {
    if features.len() != labels.len() {
        return Err(SmoteError::LengthMismatch {
            features: features.len(),
            labels: labels.len(),
        });
    }
    let minority_rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i].is_bankrupt()).collect();
    let majority = labels.len() - minority_rows.len();
    if minority_rows.is_empty() || majority == 0 {
        return Err(SmoteError::SingleClass);
    }
    let count = config.amount.resolve(minority_rows.len(), Some(majority))?;
    let minority: Vec<Vec<f64>> = minority_rows.iter().map(|&i| features[i].clone()).collect();
    let mut synthetic = smote_points(&minority, count, config)?;
    for p in &mut synthetic {
        p.parent_index = minority_rows[p.parent_index];
        p.neighbour_index = minority_rows[p.neighbour_index];
    }

    let mut out_features = features.to_vec();
    let mut out_labels = labels.to_vec();
    out_features.extend(synthetic.iter().map(|p| p.features.clone()));
    out_labels.extend(core::iter::repeat_n(Label::Bankrupt, synthetic.len()));
    Ok(Rebalanced {
        features: out_features,
        labels: out_labels,
        original_len: features.len(),
        synthetic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn line(values: &[f64]) -> Vec<Vec<f64>> {
        values.iter().map(|v| vec![*v]).collect()
    }

    #[test]
    fn nearest_by_inspection() {
        let pts = line(&[0.0, 1.0, 2.0]);
        assert_eq!(k_nearest_minority(&pts, 0, 1).unwrap(), vec![1]);
        assert_eq!(k_nearest_minority(&pts, 1, 2).unwrap(), vec![0, 2]);
        // equal distances: lower index first
        let pts = line(&[5.0, 4.0, 6.0, 3.0]);
        assert_eq!(k_nearest_minority(&pts, 0, 2).unwrap(), vec![1, 2]);
    }

    #[test]
    fn knn_errors() {
        let pts = line(&[0.0, 1.0]);
        assert!(matches!(
            k_nearest_minority(&pts, 0, 2),
            Err(SmoteError::InsufficientMinority { .. })
        ));
        let ragged = vec![vec![0.0], vec![1.0, 2.0], vec![3.0]];
        assert!(matches!(
            k_nearest_minority(&ragged, 0, 1),
            Err(SmoteError::DimensionMismatch { index: 1, .. })
        ));
    }

    #[test]
    fn forced_midpoint() {
        assert_eq!(interpolate(&[0.0], &[1.0], 0.5), vec![0.5]);
        let pts = line(&[0.0, 1.0]);
        let cfg = SmoteConfig {
            k: 1,
            amount: SmoteAmount::Points(10),
            seed: 5,
            min_max_scaling: false,
        };
        for p in smote(&pts, &cfg).unwrap() {
            assert_eq!(p.neighbour_index, 1 - p.parent_index);
            assert!(
                (p.features[0] - interpolate(&pts[p.parent_index], &pts[p.neighbour_index], p.lambda)[0]).abs() == 0.0
            );
        }
    }

    #[test]
    fn zero_amount_and_small_minority() {
        let pts = line(&[0.0, 1.0, 2.0]);
        let cfg = SmoteConfig {
            k: 4,
            amount: SmoteAmount::Points(0),
            seed: 0,
            min_max_scaling: false,
        };
        assert!(smote(&pts, &cfg).unwrap().is_empty());
        let cfg = SmoteConfig {
            amount: SmoteAmount::Points(3),
            ..cfg
        };
        assert_eq!(smote(&pts, &cfg), Err(SmoteError::InsufficientMinority { k: 4, n: 3 }));
        let cfg = SmoteConfig {
            amount: SmoteAmount::MinorityFraction(0.5),
            ..cfg
        };
        assert_eq!(smote(&pts, &cfg), Err(SmoteError::FractionWithoutMajority));
    }

    #[test]
    fn fraction_resolution() {
        assert_eq!(SmoteAmount::MinorityFraction(0.5).resolve(5, Some(95)), Ok(90));
        assert_eq!(SmoteAmount::MinorityFraction(0.5).resolve(60, Some(40)), Ok(0));
        assert_eq!(SmoteAmount::MinorityFraction(0.25).resolve(10, Some(90)), Ok(20));
        assert_eq!(
            SmoteAmount::MinorityFraction(1.0).resolve(1, Some(1)),
            Err(SmoteError::BadFraction(1.0))
        );
    }

    fn imbalanced(n: usize, minority: usize) -> (Vec<Vec<f64>>, Vec<Label>) {
        let features = (0..n).map(|i| vec![i as f64, (i * i % 7) as f64]).collect();
        let labels = (0..n)
            .map(|i| {
                if i % (n / minority) == 0 && i / (n / minority) < minority {
                    Label::Bankrupt
                } else {
                    Label::NonBankrupt
                }
            })
            .collect();
        (features, labels)
    }

    #[test]
    fn rebalance_to_parity() {
        let (x, y) = imbalanced(100, 5);
        assert_eq!(y.iter().filter(|l| l.is_bankrupt()).count(), 5);
        let out = rebalance(&x, &y, &SmoteConfig::default()).unwrap();
        assert_eq!(out.features.len(), 190);
        assert_eq!(out.synthetic.len(), 90);
        assert_eq!(out.labels.iter().filter(|l| l.is_bankrupt()).count(), 95);
        assert_eq!(&out.features[..100], &x[..]);
        for p in &out.synthetic {
            assert!(y[p.parent_index].is_bankrupt() && y[p.neighbour_index].is_bankrupt());
        }
    }

    #[test]
    fn rebalance_identity_and_errors() {
        let (x, y) = imbalanced(100, 5);
        let cfg = SmoteConfig {
            amount: SmoteAmount::Points(0),
            ..SmoteConfig::default()
        };
        let out = rebalance(&x, &y, &cfg).unwrap();
        assert_eq!((out.features, out.labels), (x.clone(), y.clone()));

        let (x1, y1) = imbalanced(100, 1);
        assert_eq!(
            rebalance(&x1, &y1, &SmoteConfig::default()),
            Err(SmoteError::InsufficientMinority { k: 4, n: 1 })
        );
        let all_majority = vec![Label::NonBankrupt; 100];
        assert_eq!(
            rebalance(&x, &all_majority, &SmoteConfig::default()),
            Err(SmoteError::SingleClass)
        );
    }

    #[test]
    fn seeds_change_output() {
        let pts: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, (i * 3 % 5) as f64]).collect();
        let cfg = SmoteConfig {
            k: 4,
            amount: SmoteAmount::Points(20),
            seed: 1,
            min_max_scaling: false,
        };
        let a = smote(&pts, &cfg).unwrap();
        let b = smote(&pts, &cfg).unwrap();
        let c = smote(&pts, &SmoteConfig { seed: 2, ..cfg }).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn scaling_changes_neighbours_not_segments() {
        // feature 0 dominates raw distances; scaled, feature 1 matters too
        let pts = vec![
            vec![0.0, 0.0],
            vec![100.0, 0.0],
            vec![0.0, 1.0],
            vec![300.0, 1.0],
            vec![200.0, 0.5],
        ];
        let raw = k_nearest_minority(&pts, 0, 1).unwrap();
        assert_eq!(raw, vec![2]);
        let scaled = min_max_scale(&pts);
        assert_eq!(k_nearest_minority(&scaled, 0, 1).unwrap(), vec![1]);
        let cfg = SmoteConfig {
            k: 1,
            amount: SmoteAmount::Points(50),
            seed: 9,
            min_max_scaling: true,
        };
        for p in smote(&pts, &cfg).unwrap() {
            assert_eq!(
                p.neighbour_index,
                k_nearest_minority(&scaled, p.parent_index, 1).unwrap()[0]
            );
        }
    }

    proptest! {
        #[test]
        fn synthetic_points_lie_on_segments(seed: u64, n in 5usize..25, count in 1usize..60,
                                            raw in proptest::collection::vec(-100.0..100.0f64, 75)) {
            let pts: Vec<Vec<f64>> = (0..n).map(|i| raw[3 * i..3 * i + 3].to_vec()).collect();
            let cfg = SmoteConfig { k: 4, amount: SmoteAmount::Points(count), seed, min_max_scaling: false };
            let out = smote(&pts, &cfg).unwrap();
            prop_assert_eq!(out.len(), count);
            for p in &out {
                prop_assert!((0.0..=1.0).contains(&p.lambda));
                let knn = k_nearest_minority(&pts, p.parent_index, 4).unwrap();
                prop_assert!(knn.contains(&p.neighbour_index));
                for (j, v) in p.features.iter().enumerate() {
                    let (a, b) = (pts[p.parent_index][j], pts[p.neighbour_index][j]);
                    prop_assert!(*v >= a.min(b) && *v <= a.max(b));
                }
            }
        }
    }
}
