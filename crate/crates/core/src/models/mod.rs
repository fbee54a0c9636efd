//! The three classifiers, trained from scratch with full-batch optimizers.
//!
//! All trainers share the same contract: non-empty rows, both classes
//! present, finite features of one dimension, deterministic given the
//! config seed. Probabilities are always strictly inside (0, 1).

mod gbm;
mod gradcheck;
mod logistic;
mod mlp;
mod standardize;
mod year_keys;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Label;

pub use gbm::{train_gbm, GbmModel, TreeNode};
pub use gradcheck::{numeric_gradient_check, GradCheckTarget, FINITE_DIFFERENCE_STEP};
pub use logistic::{logistic_loss_and_gradient, train_logistic, LogisticModel};
pub use mlp::{train_mlp, DenseLayer, MlpModel, HIDDEN_WIDTHS};
pub use standardize::Standardizer;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("no training rows")]
    Empty,
    #[error("training rows contain a single class")]
    SingleClass,
    #[error("features ({features}) and labels ({labels}) differ in length")]
    LengthMismatch { features: usize, labels: usize },
    #[error("row {row} has dimension {found}, expected {expected}")]
    DimensionMismatch { row: usize, expected: usize, found: usize },
    #[error("row {0} has a non-finite feature")]
    NonFinite(usize),
    #[error("training diverged (non-finite loss) at learning rate {learning_rate}")]
    Diverged { learning_rate: f64 },
    #[error("invalid training config: {0}")]
    InvalidConfig(&'static str),
    #[error("unknown model kind {0:?}")]
    UnknownKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Logistic,
    Gbm,
    Mlp,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Logistic, ModelKind::Gbm, ModelKind::Mlp];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Logistic => "logistic",
            ModelKind::Gbm => "gbm",
            ModelKind::Mlp => "mlp",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ModelError::UnknownKind(s.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Stop once the gradient norm falls below this.
    pub tolerance: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 500,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbmConfig {
    pub learning_rate: f64,
    pub stages: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for GbmConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.2,
            stages: 100,
            max_depth: 3,
            min_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            epochs: 500,
        }
    }
}

/// Per-year bankrupt-class weights for the class-weighted logistic model.
pub fn default_class_weights() -> BTreeMap<i32, f64> {
    [(2013, 9.78), (2014, 9.78), (2015, 20.0), (2016, 14.0)]
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    /// Year → weight of a bankrupt example; non-bankrupt examples weigh 1.
    pub class_weights: BTreeMap<i32, f64>,
    pub logistic: LogisticConfig,
    pub gbm: GbmConfig,
    pub mlp: MlpConfig,
    pub seed: u64,
    /// Standardize features with training mean/deviation (logistic, MLP).
    pub standardize: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            class_weights: default_class_weights(),
            logistic: LogisticConfig::default(),
            gbm: GbmConfig::default(),
            mlp: MlpConfig::default(),
            seed: 0,
            standardize: true,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !self.class_weights.values().all(|w| positive(*w)) {
            return Err(ModelError::InvalidConfig("class weights must be positive"));
        }
        if !positive(self.logistic.learning_rate)
            || !positive(self.gbm.learning_rate)
            || !positive(self.mlp.learning_rate)
        {
            return Err(ModelError::InvalidConfig("learning rates must be positive"));
        }
        if self.logistic.tolerance.is_nan() || self.logistic.tolerance < 0.0 {
            return Err(ModelError::InvalidConfig("tolerance must be non-negative"));
        }
        if self.gbm.max_depth == 0 || self.gbm.min_leaf == 0 {
            return Err(ModelError::InvalidConfig("tree depth and leaf size must be at least 1"));
        }
        Ok(())
    }

    /// Bankrupt-example weight for a year; 1 when the year is not configured.
    pub fn bankrupt_weight(&self, year: i32) -> f64 {
        self.class_weights.get(&year).copied().unwrap_or(1.0)
    }

    /// One weight per row: the row year's bankrupt weight, or 1.
    pub fn sample_weights(&self, labels: &[Label], years: &[i32]) -> Vec<f64> {
        labels
            .iter()
            .zip(years)
            .map(|(l, y)| if l.is_bankrupt() { self.bankrupt_weight(*y) } else { 1.0 })
            .collect()
    }
}

/// A trained classifier of any of the three kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Logistic(LogisticModel),
    Gbm(GbmModel),
    Mlp(MlpModel),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Logistic(_) => ModelKind::Logistic,
            Model::Gbm(_) => ModelKind::Gbm,
            Model::Mlp(_) => ModelKind::Mlp,
        }
    }

    pub fn input_dimension(&self) -> usize {
        match self {
            Model::Logistic(m) => m.weights.len(),
            Model::Gbm(m) => m.input_dimension,
            Model::Mlp(m) => m.layers[0].fan_in,
        }
    }

    /// Bankruptcy probability for one feature vector.
    pub fn predict_proba(&self, features: &[f64]) -> Result<f64, ModelError> {
        let expected = self.input_dimension();
        if features.len() != expected {
            return Err(ModelError::DimensionMismatch {
                row: 0,
                expected,
                found: features.len(),
            });
        }
        Ok(match self {
            Model::Logistic(m) => m.predict_unchecked(features),
            Model::Gbm(m) => m.predict_unchecked(features),
            Model::Mlp(m) => m.predict_unchecked(features),
        })
    }

    pub fn predict_many(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
        rows.iter()
            .enumerate()
            .map(|(row, x)| {
                self.predict_proba(x).map_err(|e| match e {
                    ModelError::DimensionMismatch { expected, found, .. } => {
                        ModelError::DimensionMismatch { row, expected, found }
                    }
                    other => other,
                })
            })
            .collect()
    }
}

/// Train one kind without any imbalance treatment beyond optional sample
/// weights (used by the logistic model only).
pub fn train(
    kind: ModelKind,
    features: &[Vec<f64>],
    labels: &[Label],
    sample_weights: Option<&[f64]>,
    config: &TrainingConfig,
) -> Result<Model, ModelError> {
    Ok(match kind {
        ModelKind::Logistic => Model::Logistic(train_logistic(features, labels, sample_weights, config)?),
        ModelKind::Gbm => Model::Gbm(train_gbm(features, labels, config)?),
        ModelKind::Mlp => Model::Mlp(train_mlp(features, labels, config)?),
    })
}

/// Shared precondition check; returns the feature dimension.
pub(crate) fn validate_rows(features: &[Vec<f64>], labels: &[Label]) -> Result<usize, ModelError> {
    if features.len() != labels.len() {
        return Err(ModelError::LengthMismatch {
            features: features.len(),
            labels: labels.len(),
        });
    }
    let first = features.first().ok_or(ModelError::Empty)?;
    let dim = first.len();
    for (row, x) in features.iter().enumerate() {
        if x.len() != dim {
            return Err(ModelError::DimensionMismatch {
                row,
                expected: dim,
                found: x.len(),
            });
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(ModelError::NonFinite(row));
        }
    }
    let positives = labels.iter().filter(|l| l.is_bankrupt()).count();
    if positives == 0 || positives == labels.len() {
        return Err(ModelError::SingleClass);
    }
    Ok(dim)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Two well separated 2-D blobs: bankrupt around (-3, -3), the rest
    /// around (3, 3), both with unit spread clipped to ±1.5. The line
    /// x + y = 0 separates them exactly.
    pub fn separable_blobs(seed: u64, n_per_class: usize) -> (Vec<Vec<f64>>, Vec<Label>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (center, label) in [(-3.0, Label::Bankrupt), (3.0, Label::NonBankrupt)] {
            for _ in 0..n_per_class {
                let dx: f64 = rng.random_range(-1.5..1.5);
                let dy: f64 = rng.random_range(-1.5..1.5);
                x.push(vec![center + dx, center + dy]);
                y.push(label);
            }
        }
        (x, y)
    }

    pub fn separating_line_accuracy(x: &[Vec<f64>], y: &[Label]) -> f64 {
        let correct = x
            .iter()
            .zip(y)
            .filter(|(p, l)| (p[0] + p[1] < 0.0) == l.is_bankrupt())
            .count();
        correct as f64 / x.len() as f64
    }

    pub fn accuracy(model: &Model, x: &[Vec<f64>], y: &[Label]) -> f64 {
        let correct = x
            .iter()
            .zip(y)
            .filter(|(p, l)| (model.predict_proba(p).unwrap() > 0.5) == l.is_bankrupt())
            .count();
        correct as f64 / x.len() as f64
    }

    /// Ten mixed rows in three dimensions for gradient checks.
    pub fn small_mixed(seed: u64) -> (Vec<Vec<f64>>, Vec<Label>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..10)
            .map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let y = (0..10)
            .map(|i| {
                if i % 3 == 0 {
                    Label::Bankrupt
                } else {
                    Label::NonBankrupt
                }
            })
            .collect();
        (x, y)
    }
}
