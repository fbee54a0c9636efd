//! Gradient-boosted regression trees on log-loss.
//!
//! Each stage fits a depth-limited least-squares tree to the residuals
//! `y - p`, then replaces every leaf value with the Newton step
//! `sum(y - p) / sum(p (1 - p))` over the rows in that leaf. Predictions
//! accumulate `learning_rate * leaf`. If a stage would raise the training
//! loss, its leaf values are halved until it does not, so the recorded
//! stage losses never increase.

use alloc::boxed::Box;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{validate_rows, ModelError, TrainingConfig};
use crate::math::{bce_with_logit, probability, sigmoid};
use crate::Label;

const MIN_GAIN: f64 = 1e-12;
const MIN_HESSIAN: f64 = 1e-12;
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        /// Rows with `x[feature] <= threshold`.
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    fn scale(&mut self, factor: f64) {
        match self {
            TreeNode::Leaf { value } => *value *= factor,
            TreeNode::Split { left, right, .. } => {
                left.scale(factor);
                right.scale(factor);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn thresholds_finite(&self) -> bool {
        match self {
            TreeNode::Leaf { value } => value.is_finite(),
            TreeNode::Split {
                threshold, left, right, ..
            } => threshold.is_finite() && left.thresholds_finite() && right.thresholds_finite(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmModel {
    pub trees: Vec<TreeNode>,
    pub learning_rate: f64,
    /// Log-odds of the training bankrupt rate.
    pub base_score: f64,
    pub input_dimension: usize,
    /// Training log-loss after 0, 1, …, `trees.len()` stages.
    pub stage_losses: Vec<f64>,
}

impl GbmModel {
    /// Raw log-odds using the first `stages` trees.
    pub fn decision_function(&self, x: &[f64], stages: usize) -> f64 {
        self.base_score
            + self
                .trees
                .iter()
                .take(stages)
                .map(|t| self.learning_rate * t.predict(x))
                .sum::<f64>()
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> f64 {
        probability(self.decision_function(x, self.trees.len()))
    }
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    residual: &'a [f64],
    hessian: &'a [f64],
    max_depth: usize,
    min_leaf: usize,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl TreeBuilder<'_> {
    fn leaf(&self, rows: &[usize]) -> TreeNode {
        let num: f64 = rows.iter().map(|&i| self.residual[i]).sum();
        let den: f64 = rows.iter().map(|&i| self.hessian[i]).sum();
        let value = if den > MIN_HESSIAN { num / den } else { 0.0 };
        TreeNode::Leaf { value }
    }

    fn best_split(&self, rows: &[usize]) -> Option<BestSplit> {
        let n = rows.len();
        if n < 2 * self.min_leaf {
            return None;
        }
        let total: f64 = rows.iter().map(|&i| self.residual[i]).sum();
        let parent_score = total * total / n as f64;
        let dim = self.x[rows[0]].len();
        let mut best: Option<BestSplit> = None;
        let mut order = rows.to_vec();
        for feature in 0..dim {
            order.sort_by(|&a, &b| self.x[a][feature].total_cmp(&self.x[b][feature]).then(a.cmp(&b)));
            let mut left_sum = 0.0;
            for pos in 0..n - 1 {
                left_sum += self.residual[order[pos]];
                let n_left = pos + 1;
                let n_right = n - n_left;
                let here = self.x[order[pos]][feature];
                let next = self.x[order[pos + 1]][feature];
                if here == next || n_left < self.min_leaf || n_right < self.min_leaf {
                    continue;
                }
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / n_left as f64 + right_sum * right_sum / n_right as f64 - parent_score;
                if gain > MIN_GAIN && best.as_ref().is_none_or(|b| gain > b.gain) {
                    let mut threshold = here + (next - here) / 2.0;
                    if !threshold.is_finite() || threshold >= next {
                        threshold = here;
                    }
                    best = Some(BestSplit {
                        feature,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }

    fn build(&self, rows: &[usize], depth: usize) -> TreeNode {
        if depth >= self.max_depth {
            return self.leaf(rows);
        }
        let Some(split) = self.best_split(rows) else {
            return self.leaf(rows);
        };
        let (left, right): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&i| self.x[i][split.feature] <= split.threshold);
        TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: Box::new(self.build(&left, depth + 1)),
            right: Box::new(self.build(&right, depth + 1)),
        }
    }
}

fn mean_log_loss(margins: &[f64], targets: &[f64]) -> f64 {
    margins
        .iter()
        .zip(targets)
        .map(|(z, y)| bce_with_logit(*z, *y))
        .sum::<f64>()
        / margins.len() as f64
}

/// Boost `config.gbm.stages` trees. Features are used as given: trees are
/// unaffected by per-feature affine rescaling.
pub fn train_gbm(features: &[Vec<f64>], labels: &[Label], config: &TrainingConfig) -> Result<GbmModel, ModelError> {
    config.validate()?;
    let dim = validate_rows(features, labels)?;
    let cfg = config.gbm;
    let targets: Vec<f64> = labels.iter().map(|l| l.target()).collect();
    let positive_rate = targets.iter().sum::<f64>() / targets.len() as f64;
    let base_score = libm::log(positive_rate / (1.0 - positive_rate));

    let mut margins = alloc::vec![base_score; features.len()];
    let mut loss = mean_log_loss(&margins, &targets);
    let mut stage_losses = alloc::vec![loss];
    let mut trees = Vec::with_capacity(cfg.stages);
    let all_rows: Vec<usize> = (0..features.len()).collect();

    for _ in 0..cfg.stages {
        let p: Vec<f64> = margins.iter().map(|z| sigmoid(*z)).collect();
        let residual: Vec<f64> = targets.iter().zip(&p).map(|(y, p)| y - p).collect();
        let hessian: Vec<f64> = p.iter().map(|p| p * (1.0 - p)).collect();
        let builder = TreeBuilder {
            x: features,
            residual: &residual,
            hessian: &hessian,
            max_depth: cfg.max_depth,
            min_leaf: cfg.min_leaf,
        };
        let mut tree = builder.build(&all_rows, 0);
        let step: Vec<f64> = features.iter().map(|x| tree.predict(x)).collect();

        let mut factor = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let candidate: Vec<f64> = margins
                .iter()
                .zip(&step)
                .map(|(m, s)| m + cfg.learning_rate * factor * s)
                .collect();
            let candidate_loss = mean_log_loss(&candidate, &targets);
            if candidate_loss.is_finite() && candidate_loss <= loss {
                accepted = Some((candidate, candidate_loss));
                break;
            }
            factor *= 0.5;
        }
        match accepted {
            Some((candidate, candidate_loss)) => {
                if factor != 1.0 {
                    tree.scale(factor);
                }
                margins = candidate;
                loss = candidate_loss;
            }
            None => tree.scale(0.0),
        }
        if !loss.is_finite() {
            return Err(ModelError::Diverged {
                learning_rate: cfg.learning_rate,
            });
        }
        stage_losses.push(loss);
        trees.push(tree);
    }

    Ok(GbmModel {
        trees,
        learning_rate: cfg.learning_rate,
        base_score,
        input_dimension: dim,
        stage_losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::fixtures::*;
    use crate::models::{GbmConfig, Model};
    use alloc::vec;

    fn recomputed_losses(m: &GbmModel, x: &[Vec<f64>], y: &[Label]) -> Vec<f64> {
        (0..=m.trees.len())
            .map(|t| {
                x.iter()
                    .zip(y)
                    .map(|(r, l)| {
                        let p = 1.0 / (1.0 + libm::exp(-m.decision_function(r, t)));
                        let t = l.target();
                        -(t * libm::log(p) + (1.0 - t) * libm::log(1.0 - p))
                    })
                    .sum::<f64>()
                    / x.len() as f64
            })
            .collect()
    }

    #[test]
    fn default_config_grows_one_hundred_trees() {
        let (x, y) = small_mixed(4);
        let m = train_gbm(&x, &y, &TrainingConfig::default()).unwrap();
        assert_eq!(m.trees.len(), 100);
        assert_eq!(m.learning_rate, 0.2);
        assert!(m.trees.iter().all(|t| t.thresholds_finite() && t.depth() <= 3));
    }

    #[test]
    fn stage_losses_never_increase_and_match_recomputation() {
        for seed in 0..5 {
            let (x, y) = small_mixed(seed);
            let m = train_gbm(&x, &y, &TrainingConfig::default()).unwrap();
            let oracle = recomputed_losses(&m, &x, &y);
            for (a, b) in m.stage_losses.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
            for w in oracle.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "{:?}", w);
            }
        }
    }

    #[test]
    fn zero_trees_predict_base_rate() {
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        let y: Vec<Label> = (0..8)
            .map(|i| if i < 2 { Label::Bankrupt } else { Label::NonBankrupt })
            .collect();
        let cfg = TrainingConfig {
            gbm: GbmConfig {
                stages: 0,
                ..GbmConfig::default()
            },
            ..TrainingConfig::default()
        };
        let m = train_gbm(&x, &y, &cfg).unwrap();
        assert!((m.base_score - libm::log(0.25 / 0.75)).abs() < 1e-15);
        let p = Model::Gbm(m).predict_proba(&[3.0]).unwrap();
        assert!((p - 0.25).abs() < 1e-12);
    }

    #[test]
    fn separable_blobs_are_learned() {
        let (x, y) = separable_blobs(7, 50);
        let m = Model::Gbm(train_gbm(&x, &y, &TrainingConfig::default()).unwrap());
        assert_eq!(accuracy(&m, &x, &y), 1.0);
    }

    #[test]
    fn newton_leaf_on_a_single_split() {
        // one stage, depth 1: rows split at x = 1.5, each side gets
        // sum(y - p) / sum(p (1 - p)) with p the base rate 0.5
        let x = vec![vec![1.0], vec![1.0], vec![2.0], vec![2.0]];
        let y = vec![Label::Bankrupt, Label::Bankrupt, Label::NonBankrupt, Label::Bankrupt];
        let cfg = TrainingConfig {
            gbm: GbmConfig {
                stages: 1,
                max_depth: 1,
                learning_rate: 0.2,
                min_leaf: 1,
            },
            ..TrainingConfig::default()
        };
        let m = train_gbm(&x, &y, &cfg).unwrap();
        let p0 = 0.75;
        let left = (2.0 * (1.0 - p0)) / (2.0 * p0 * (1.0 - p0));
        let right = ((1.0 - p0) + (0.0 - p0)) / (2.0 * p0 * (1.0 - p0));
        match &m.trees[0] {
            TreeNode::Split {
                threshold,
                left: l,
                right: r,
                ..
            } => {
                assert_eq!(*threshold, 1.5);
                assert!((l.predict(&[1.0]) - left).abs() < 1e-12);
                assert!((r.predict(&[2.0]) - right).abs() < 1e-12);
            }
            other => panic!("expected a split, got {other:?}"),
        }
    }

    #[test]
    fn deterministic() {
        let (x, y) = small_mixed(9);
        assert_eq!(
            train_gbm(&x, &y, &TrainingConfig::default()).unwrap(),
            train_gbm(&x, &y, &TrainingConfig::default()).unwrap()
        );
    }
}
