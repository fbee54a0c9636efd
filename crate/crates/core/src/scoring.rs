//! Per-company bankruptcy probabilities and the at-risk flag.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, FeatureSet};
use crate::models::{Model, ModelError};

/// Probabilities strictly above this are flagged.
pub const DEFAULT_FLAG_THRESHOLD: f64 = 0.98;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoringError {
    #[error("model expects {model} features, feature set {set} has {set_dimension}")]
    DimensionMismatch {
        model: usize,
        set: FeatureSet,
        set_dimension: usize,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("duplicate entry for company {company_id} in {year}")]
    Duplicate { company_id: String, year: i32 },
    #[error("threshold {0} must lie in [0, 1]")]
    BadThreshold(f64),
}

/// Which rows a table was scored over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    /// Every dataset row, training rows included.
    Full,
    /// Only rows the model never saw during training.
    HeldOut,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub company_id: String,
    pub year: i32,
    pub sector: String,
    pub z: f64,
    pub z_prime: f64,
    pub negative_pct: f64,
    pub positive_pct: f64,
    pub pos_to_neg: f64,
    pub probability: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub entries: Vec<ScoreEntry>,
    pub model_version: String,
    pub threshold: f64,
    pub partition: Partition,
}

pub fn is_flagged(probability: f64, threshold: f64) -> bool {
    probability > threshold
}

/// Score the dataset rows at `indices` (all rows when `None`).
pub fn score_companies(
    model: &Model,
    dataset: &Dataset,
    feature_set: FeatureSet,
    threshold: f64,
    model_version: &str,
    indices: Option<&[usize]>,
) -> Result<ScoreTable, ScoringError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(ScoringError::BadThreshold(threshold));
    }
    if model.input_dimension() != feature_set.dimension() {
        return Err(ScoringError::DimensionMismatch {
            model: model.input_dimension(),
            set: feature_set,
            set_dimension: feature_set.dimension(),
        });
    }
    let all: Vec<usize>;
    let (idx, partition) = match indices {
        Some(i) => (i, Partition::HeldOut),
        None => {
            all = (0..dataset.rows.len()).collect();
            (&all[..], Partition::Full)
        }
    };
    let mut seen = BTreeSet::new();
    let mut entries = Vec::with_capacity(idx.len());
    for &i in idx {
        let row = &dataset.rows[i];
        if !seen.insert((row.company_id.as_str(), row.year)) {
            return Err(ScoringError::Duplicate {
                company_id: row.company_id.clone(),
                year: row.year,
            });
        }
        let probability = model.predict_proba(&row.features(feature_set))?;
        entries.push(ScoreEntry {
            company_id: row.company_id.clone(),
            year: row.year,
            sector: row.sector.clone(),
            z: row.z,
            z_prime: row.z_prime,
            negative_pct: row.negative_pct,
            positive_pct: row.positive_pct,
            pos_to_neg: row.pos_to_neg,
            probability,
            flagged: is_flagged(probability, threshold),
        });
    }
    Ok(ScoreTable {
        entries,
        model_version: model_version.into(),
        threshold,
        partition,
    })
}
