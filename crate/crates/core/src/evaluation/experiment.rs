use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{accuracy, confusion, false_alarm_rate, type_i_error, ConfusionMatrix, MetricError, GRID_THRESHOLD};
use crate::dataset::{split_cross_year, split_train_test, Dataset, DatasetError, FeatureSet, Split};
use crate::math::derive_seed;
use crate::models::{train, Model, ModelError, ModelKind, TrainingConfig};
use crate::resampling::{rebalance, SmoteConfig, SmoteError};
use crate::Label;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Smote(#[from] SmoteError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("synthetic training row built from test row {0}")]
    Leakage(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub years: Vec<i32>,
    pub models: Vec<ModelKind>,
    pub feature_sets: Vec<FeatureSet>,
    pub train_fraction: f64,
    pub seed: u64,
    pub smote: SmoteConfig,
    pub training: TrainingConfig,
    /// Hard-classification threshold for the confusion counts.
    pub threshold: f64,
    /// Extra (train year, test year) cells.
    pub cross_year: Vec<(i32, i32)>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            years: (2013..=2016).collect(),
            models: ModelKind::ALL.to_vec(),
            feature_sets: alloc::vec![FeatureSet::AllSentiment],
            train_fraction: 0.7,
            seed: 0,
            smote: SmoteConfig::default(),
            training: TrainingConfig::default(),
            threshold: GRID_THRESHOLD,
            cross_year: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    /// Every (year, model, feature set) cell in report order.
    pub fn cells(&self) -> Vec<(i32, ModelKind, FeatureSet)> {
        let mut out = Vec::new();
        for &year in &self.years {
            for &kind in &self.models {
                for &set in &self.feature_sets {
                    out.push((year, kind, set));
                }
            }
        }
        out
    }

    /// Seeds for one cell, independent of which other cells are configured.
    fn cell_config(&self, salt: u64, kind: ModelKind, set: FeatureSet) -> (TrainingConfig, SmoteConfig) {
        let kind_ix = ModelKind::ALL.iter().position(|k| *k == kind).unwrap_or(0) as u64;
        let set_ix = FeatureSet::ALL.iter().position(|s| *s == set).unwrap_or(0) as u64;
        let cell_seed = derive_seed(derive_seed(self.seed, salt), (kind_ix << 8) | set_ix);
        let mut training = self.training.clone();
        training.seed = cell_seed;
        let mut smote = self.smote;
        smote.seed = derive_seed(cell_seed, 1);
        (training, smote)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMetrics {
    pub accuracy: f64,
    /// Absent when the test partition has no bankrupt rows.
    pub type_i_error: Option<f64>,
    /// Absent when the test partition has no non-bankrupt rows.
    pub false_alarm_rate: Option<f64>,
    pub confusion: ConfusionMatrix,
    pub train_rows: usize,
    pub synthetic_rows: usize,
    pub test_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CellOutcome {
    Completed(CellMetrics),
    Failed { error: String },
}

impl CellOutcome {
    pub fn metrics(&self) -> Option<&CellMetrics> {
        match self {
            CellOutcome::Completed(m) => Some(m),
            CellOutcome::Failed { .. } => None,
        }
    }
}

impl From<Result<CellMetrics, ExperimentError>> for CellOutcome {
    fn from(r: Result<CellMetrics, ExperimentError>) -> Self {
        match r {
            Ok(m) => CellOutcome::Completed(m),
            Err(e) => CellOutcome::Failed { error: e.to_string() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub year: i32,
    pub model: ModelKind,
    pub feature_set: FeatureSet,
    pub outcome: CellOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossYearResult {
    pub train_year: i32,
    pub test_year: i32,
    pub model: ModelKind,
    pub feature_set: FeatureSet,
    pub outcome: CellOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub seed: u64,
    /// Ordered by (year, model, feature set) as configured.
    pub cells: Vec<CellResult>,
    pub cross_year: Vec<CrossYearResult>,
}

impl ExperimentReport {
    /// Assemble cells computed elsewhere (possibly concurrently) into report
    /// order.
    pub fn from_cells(config: ExperimentConfig, mut cells: Vec<CellResult>, cross_year: Vec<CrossYearResult>) -> Self {
        let order = config.cells();
        let rank = |c: &CellResult| {
            order
                .iter()
                .position(|k| *k == (c.year, c.model, c.feature_set))
                .unwrap_or(usize::MAX)
        };
        cells.sort_by_key(rank);
        Self {
            seed: config.seed,
            config,
            cells,
            cross_year,
        }
    }

    pub fn cell(&self, year: i32, model: ModelKind, set: FeatureSet) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.year == year && c.model == model && c.feature_set == set)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CellResult> {
        self.cells.iter().filter(|c| c.outcome.metrics().is_none())
    }
}

/// A model trained under its imbalance treatment: class weights for the
/// logistic model, SMOTE on the training rows for the other two.
#[derive(Debug, Clone, PartialEq)]
pub struct TreatedModel {
    pub model: Model,
    /// Training-row indices used as SMOTE parents or neighbours.
    pub synthetic_sources: BTreeSet<usize>,
    pub synthetic_rows: usize,
}

pub fn train_with_imbalance_treatment(
    kind: ModelKind,
    features: &[Vec<f64>],
    labels: &[Label],
    years: &[i32],
    training: &TrainingConfig,
    smote: &SmoteConfig,
) -> Result<TreatedModel, ExperimentError> {
    match kind {
        ModelKind::Logistic => {
            let weights = training.sample_weights(labels, years);
            Ok(TreatedModel {
                model: train(kind, features, labels, Some(&weights), training)?,
                synthetic_sources: BTreeSet::new(),
                synthetic_rows: 0,
            })
        }
        ModelKind::Gbm | ModelKind::Mlp => {
            let balanced = rebalance(features, labels, smote)?;
            let synthetic_sources = balanced
                .synthetic
                .iter()
                .flat_map(|p| [p.parent_index, p.neighbour_index])
                .collect();
            Ok(TreatedModel {
                model: train(kind, &balanced.features, &balanced.labels, None, training)?,
                synthetic_sources,
                synthetic_rows: balanced.synthetic.len(),
            })
        }
    }
}

fn evaluate_split(
    dataset: &Dataset,
    split: &Split,
    kind: ModelKind,
    set: FeatureSet,
    training: &TrainingConfig,
    smote: &SmoteConfig,
    threshold: f64,
) -> Result<CellMetrics, ExperimentError> {
    let rows = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<Label>, Vec<i32>) {
        let r = idx.iter().map(|&i| &dataset.rows[i]);
        (
            r.clone().map(|row| row.features(set)).collect(),
            r.clone().map(|row| row.label).collect(),
            r.map(|row| row.year).collect(),
        )
    };
    let (train_x, train_y, train_years) = rows(&split.train);
    let (test_x, test_y, _) = rows(&split.test);

    let treated = train_with_imbalance_treatment(kind, &train_x, &train_y, &train_years, training, smote)?;

    // Leakage guard: synthetic rows come only from training rows, and the
    // partitions are disjoint.
    let test_set: BTreeSet<usize> = split.test.iter().copied().collect();
    for &i in &treated.synthetic_sources {
        let dataset_index = split.train[i];
        if test_set.contains(&dataset_index) {
            return Err(ExperimentError::Leakage(dataset_index));
        }
    }
    if let Some(&i) = split.train.iter().find(|i| test_set.contains(i)) {
        return Err(ExperimentError::Leakage(i));
    }

    let probabilities = treated.model.predict_many(&test_x)?;
    let cm = confusion(&test_y, &probabilities, threshold)?;
    Ok(CellMetrics {
        accuracy: accuracy(&cm)?,
        type_i_error: type_i_error(&cm).ok(),
        false_alarm_rate: false_alarm_rate(&cm).ok(),
        confusion: cm,
        train_rows: split.train.len(),
        synthetic_rows: treated.synthetic_rows,
        test_rows: split.test.len(),
    })
}

/// Split one year, train one model on one feature set, evaluate on the
/// untouched test rows.
pub fn run_cell(
    dataset: &Dataset,
    config: &ExperimentConfig,
    year: i32,
    kind: ModelKind,
    set: FeatureSet,
) -> CellResult {
    let (training, smote) = config.cell_config(year as u64, kind, set);
    let outcome = split_train_test(dataset, year, config.train_fraction, config.seed)
        .map_err(ExperimentError::from)
        .and_then(|split| evaluate_split(dataset, &split, kind, set, &training, &smote, config.threshold));
    CellResult {
        year,
        model: kind,
        feature_set: set,
        outcome: outcome.into(),
    }
}

/// Train on every row of one year and test on every row of another.
pub fn run_cross_year_cell(
    dataset: &Dataset,
    config: &ExperimentConfig,
    train_year: i32,
    test_year: i32,
    kind: ModelKind,
    set: FeatureSet,
) -> CrossYearResult {
    let (training, smote) = config.cell_config(derive_seed(train_year as u64, test_year as u64), kind, set);
    let outcome = split_cross_year(dataset, train_year, test_year)
        .map_err(ExperimentError::from)
        .and_then(|split| evaluate_split(dataset, &split, kind, set, &training, &smote, config.threshold));
    CrossYearResult {
        train_year,
        test_year,
        model: kind,
        feature_set: set,
        outcome: outcome.into(),
    }
}

/// Run every configured cell in order. Failed cells are kept with their
/// error.
pub fn run_experiment(dataset: &Dataset, config: &ExperimentConfig) -> ExperimentReport {
    let cells = config
        .cells()
        .into_iter()
        .map(|(year, kind, set)| run_cell(dataset, config, year, kind, set))
        .collect();
    let mut cross_year = Vec::new();
    for &(train_year, test_year) in &config.cross_year {
        for &kind in &config.models {
            for &set in &config.feature_sets {
                cross_year.push(run_cross_year_cell(dataset, config, train_year, test_year, kind, set));
            }
        }
    }
    ExperimentReport::from_cells(config.clone(), cells, cross_year)
}
