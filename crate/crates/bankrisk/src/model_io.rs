//! Trained models as versioned JSON documents.

use std::fs;
use std::path::{Path, PathBuf};

use bankrisk_core::dataset::{split_train_test, DatasetError};
use bankrisk_core::evaluation::{train_with_imbalance_treatment, ExperimentError};
use bankrisk_core::{Dataset, FeatureSet, Label, Model, ModelKind, SmoteConfig, TrainingConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} is not a model document: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error("{path} has format version {found}, this build reads {MODEL_FORMAT_VERSION}")]
    UnsupportedVersion { path: PathBuf, found: u32 },
    #[error(transparent)]
    Split(#[from] DatasetError),
    #[error(transparent)]
    Training(#[from] ExperimentError),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RowKey {
    pub company_id: String,
    pub year: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    /// Kind, feature set and a digest of the parameters.
    pub model_version: String,
    pub feature_set: FeatureSet,
    pub seed: u64,
    pub train_fraction: f64,
    pub training: TrainingConfig,
    /// Present for the kinds trained on SMOTE-rebalanced rows.
    pub smote: Option<SmoteConfig>,
    pub train_rows: usize,
    pub synthetic_rows: usize,
    /// Rows held out from training, for held-out scoring.
    pub holdout: Vec<RowKey>,
    pub model: Model,
}

impl ModelDocument {
    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }
}

pub fn model_version(model: &Model, set: FeatureSet) -> String {
    let json = serde_json::to_vec(model).expect("model serializes");
    let digest = Sha256::digest(&json);
    let short: String = digest[..4].iter().map(|b| format!("{b:02x}")).collect();
    format!("{}-{}-{short}", model.kind(), set)
}

/// Train on the union of every year's stratified training partition; the
/// test partitions become the holdout.
pub fn train_document(
    dataset: &Dataset,
    kind: ModelKind,
    set: FeatureSet,
    training: &TrainingConfig,
    smote: &SmoteConfig,
    train_fraction: f64,
    seed: u64,
) -> Result<ModelDocument, ModelIoError> {
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for year in dataset.years() {
        let split = split_train_test(dataset, year, train_fraction, seed)?;
        train_idx.extend(split.train);
        test_idx.extend(split.test);
    }
    let rows: Vec<_> = train_idx.iter().map(|&i| &dataset.rows[i]).collect();
    let x: Vec<Vec<f64>> = rows.iter().map(|r| r.features(set)).collect();
    let y: Vec<Label> = rows.iter().map(|r| r.label).collect();
    let years: Vec<i32> = rows.iter().map(|r| r.year).collect();

    let mut training = training.clone();
    training.seed = seed;
    let mut smote = *smote;
    smote.seed = seed;
    let treated = train_with_imbalance_treatment(kind, &x, &y, &years, &training, &smote)?;

    let mut holdout: Vec<RowKey> = test_idx
        .iter()
        .map(|&i| RowKey {
            company_id: dataset.rows[i].company_id.clone(),
            year: dataset.rows[i].year,
        })
        .collect();
    holdout.sort();
    Ok(ModelDocument {
        format_version: MODEL_FORMAT_VERSION,
        model_version: model_version(&treated.model, set),
        feature_set: set,
        seed,
        train_fraction,
        training,
        smote: (kind != ModelKind::Logistic).then_some(smote),
        train_rows: x.len(),
        synthetic_rows: treated.synthetic_rows,
        holdout,
        model: treated.model,
    })
}

pub fn save_model(path: &Path, doc: &ModelDocument) -> Result<(), ModelIoError> {
    let json = serde_json::to_string_pretty(doc).expect("model document serializes");
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| ModelIoError::Io {
            path: parent.into(),
            source,
        })?;
    }
    fs::write(path, json).map_err(|source| ModelIoError::Io {
        path: path.into(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<ModelDocument, ModelIoError> {
    let text = fs::read_to_string(path).map_err(|source| ModelIoError::Io {
        path: path.into(),
        source,
    })?;
    let malformed = |message: String| ModelIoError::Malformed {
        path: path.into(),
        message,
    };
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| malformed(e.to_string()))?;
    let found = value
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| malformed("missing format_version".into()))?;
    if found != u64::from(MODEL_FORMAT_VERSION) {
        return Err(ModelIoError::UnsupportedVersion {
            path: path.into(),
            found: found as u32,
        });
    }
    serde_json::from_str(&text).map_err(|e| malformed(e.to_string()))
}
