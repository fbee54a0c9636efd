use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{validate_rows, ModelError, Standardizer, TrainingConfig};
use crate::math::{bce_with_logit, dot, norm, probability, sigmoid};
use crate::Label;

/// Class-weighted logistic regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Year → bankrupt weight the model was trained with.
    #[serde(with = "super::year_keys")]
    pub class_weights: BTreeMap<i32, f64>,
    pub standardizer: Option<Standardizer>,
    pub epochs_run: usize,
}

impl LogisticModel {
    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> f64 {
        let z = match &self.standardizer {
            Some(s) => dot(&self.weights, &s.transform(x)),
            None => dot(&self.weights, x),
        };
        probability(z + self.bias)
    }
}

/// Weighted mean binary cross-entropy and its gradient:
/// returns `(loss, d loss / d weights, d loss / d bias)`.
pub fn logistic_loss_and_gradient(
    weights: &[f64],
    bias: f64,
    features: &[Vec<f64>],
    labels: &[Label],
    sample_weights: &[f64],
) -> (f64, Vec<f64>, f64) {
    let total_weight: f64 = sample_weights.iter().sum();
    let mut loss = 0.0;
    let mut grad = alloc::vec![0.0; weights.len()];
    let mut grad_bias = 0.0;
    for ((x, y), w) in features.iter().zip(labels).zip(sample_weights) {
        let z = dot(weights, x) + bias;
        let t = y.target();
        loss += w * bce_with_logit(z, t);
        let residual = w * (sigmoid(z) - t);
        for (g, v) in grad.iter_mut().zip(x) {
            *g += residual * v;
        }
        grad_bias += residual;
    }
    grad.iter_mut().for_each(|g| *g /= total_weight);
    (loss / total_weight, grad, grad_bias / total_weight)
}

/// Full-batch gradient descent from zero weights. `sample_weights` gives
/// each row's loss weight (see [`TrainingConfig::sample_weights`]); `None`
/// weighs every row 1.
pub fn train_logistic(
    features: &[Vec<f64>],
    labels: &[Label],
    sample_weights: Option<&[f64]>,
    config: &TrainingConfig,
) -> Result<LogisticModel, ModelError> {
    config.validate()?;
    let dim = validate_rows(features, labels)?;
    let unit;
    let weights_in = match sample_weights {
        Some(w) if w.len() != labels.len() => {
            return Err(ModelError::LengthMismatch {
                features: labels.len(),
                labels: w.len(),
            })
        }
        Some(w) if !w.iter().all(|v| v.is_finite() && *v > 0.0) => {
            return Err(ModelError::InvalidConfig("sample weights must be positive"))
        }
        Some(w) => w,
        None => {
            unit = alloc::vec![1.0; labels.len()];
            &unit
        }
    };

    let standardizer = config.standardize.then(|| Standardizer::fit(features));
    let transformed;
    let x = match &standardizer {
        Some(s) => {
            transformed = s.transform_all(features);
            &transformed
        }
        None => features,
    };

    let cfg = config.logistic;
    let mut weights = alloc::vec![0.0; dim];
    let mut bias = 0.0;
    let mut epochs_run = 0;
    for _ in 0..cfg.epochs {
        let (loss, grad, grad_bias) = logistic_loss_and_gradient(&weights, bias, x, labels, weights_in);
        if !loss.is_finite() {
            return Err(ModelError::Diverged {
                learning_rate: cfg.learning_rate,
            });
        }
        let gnorm = libm::sqrt(norm(&grad) * norm(&grad) + grad_bias * grad_bias);
        if gnorm < cfg.tolerance {
            break;
        }
        for (w, g) in weights.iter_mut().zip(&grad) {
            *w -= cfg.learning_rate * g;
        }
        bias -= cfg.learning_rate * grad_bias;
        epochs_run += 1;
    }
    if !weights.iter().all(|w| w.is_finite()) || !bias.is_finite() {
        return Err(ModelError::Diverged {
            learning_rate: cfg.learning_rate,
        });
    }

    Ok(LogisticModel {
        weights,
        bias,
        class_weights: config.class_weights.clone(),
        standardizer,
        epochs_run,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::fixtures::*;
    use crate::models::{LogisticConfig, Model};
    use alloc::vec;

    fn cfg(epochs: usize) -> TrainingConfig {
        TrainingConfig {
            logistic: LogisticConfig {
                epochs,
                ..LogisticConfig::default()
            },
            ..TrainingConfig::default()
        }
    }

    #[test]
    fn zero_epochs_predicts_one_half() {
        let (x, y) = separable_blobs(7, 30);
        let m = train_logistic(&x, &y, None, &cfg(0)).unwrap();
        assert!(m.weights.iter().all(|w| *w == 0.0));
        assert_eq!(m.bias, 0.0);
        for p in &x {
            assert_eq!(m.predict_unchecked(p), 0.5);
        }
    }

    #[test]
    fn unit_class_weights_match_unweighted_training() {
        let (x, y) = small_mixed(3);
        let mut ones = TrainingConfig::default();
        ones.class_weights.values_mut().for_each(|w| *w = 1.0);
        let weights = ones.sample_weights(&y, &vec![2015; y.len()]);
        let weighted = train_logistic(&x, &y, Some(&weights), &ones).unwrap();
        let plain = train_logistic(&x, &y, None, &ones).unwrap();
        assert_eq!(weighted.weights, plain.weights);
        assert_eq!(weighted.bias, plain.bias);
    }

    #[test]
    fn separable_blobs_are_learned() {
        let (x, y) = separable_blobs(7, 50);
        assert_eq!(separating_line_accuracy(&x, &y), 1.0);
        let m = Model::Logistic(train_logistic(&x, &y, None, &TrainingConfig::default()).unwrap());
        assert_eq!(accuracy(&m, &x, &y), 1.0);
    }

    #[test]
    fn divergence_names_the_learning_rate() {
        let x = vec![vec![1e200], vec![-1e200], vec![3e200]];
        let y = vec![Label::Bankrupt, Label::NonBankrupt, Label::NonBankrupt];
        let mut c = cfg(50);
        c.standardize = false;
        c.logistic.learning_rate = 1e10;
        assert_eq!(
            train_logistic(&x, &y, None, &c),
            Err(ModelError::Diverged { learning_rate: 1e10 })
        );
    }

    #[test]
    fn constant_feature_gradient_is_weighted_mean_residual() {
        // feature 0 is constant 1; at w = (0.3, -0.2), b = 0.1 its gradient
        // is sum(w_i (p_i - y_i)) / sum(w_i)
        let (mut x, y) = small_mixed(5);
        for r in &mut x {
            r.truncate(2);
            r[0] = 1.0;
        }
        let sw: Vec<f64> = y.iter().map(|l| if l.is_bankrupt() { 9.78 } else { 1.0 }).collect();
        let (w, b) = ([0.3, -0.2], 0.1);
        let (_, grad, gb) = logistic_loss_and_gradient(&w, b, &x, &y, &sw);
        let mut num = 0.0;
        let mut den = 0.0;
        for ((r, l), s) in x.iter().zip(&y).zip(&sw) {
            let p = 1.0 / (1.0 + libm::exp(-(w[0] * r[0] + w[1] * r[1] + b)));
            num += s * (p - l.target());
            den += s;
        }
        assert!((grad[0] - num / den).abs() < 1e-14);
        assert!((gb - num / den).abs() < 1e-14);
    }

    #[test]
    fn scaling_all_class_weights_keeps_ranking() {
        let (x, y) = small_mixed(11);
        let base: Vec<f64> = y.iter().map(|l| if l.is_bankrupt() { 9.78 } else { 1.0 }).collect();
        let scaled: Vec<f64> = base.iter().map(|w| w * 3.5).collect();
        let c = TrainingConfig::default();
        let m1 = Model::Logistic(train_logistic(&x, &y, Some(&base), &c).unwrap());
        let m2 = Model::Logistic(train_logistic(&x, &y, Some(&scaled), &c).unwrap());
        let rank = |m: &Model| {
            let p = m.predict_many(&x).unwrap();
            let mut idx: Vec<usize> = (0..p.len()).collect();
            idx.sort_by(|a, b| p[*a].total_cmp(&p[*b]));
            idx
        };
        assert_eq!(rank(&m1), rank(&m2));
    }

    #[test]
    fn training_is_deterministic() {
        let (x, y) = small_mixed(2);
        let a = train_logistic(&x, &y, None, &TrainingConfig::default()).unwrap();
        let b = train_logistic(&x, &y, None, &TrainingConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
