//! Bankruptcy-risk pipeline primitives.
//!
//! Everything in this crate is pure computation over in-memory values and
//! builds without `std`: Altman Z/Z′ ratios, news-text normalization and
//! lexicon scoring, the financial + sentiment feature join, SMOTE, the three
//! classifiers (class-weighted logistic regression, gradient-boosted trees,
//! a two-hidden-layer perceptron), metrics and the per-year experiment grid.
//!
//! File formats, corpus acquisition, the HTTP API and the command line live
//! in the companion `bankrisk` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dataset;
pub mod evaluation;
pub mod models;
pub mod ratios;
pub mod resampling;
pub mod scoring;
pub mod text;

mod math;

use serde::{Deserialize, Serialize};

pub use dataset::{Dataset, FeatureRow, FeatureSet, SectorMapping};
pub use evaluation::{ConfusionMatrix, ExperimentConfig, ExperimentReport};
pub use models::{Model, ModelKind, TrainingConfig};
pub use ratios::{FinancialRecord, RatioVector, ZScoreResult, Zone};
pub use resampling::{SmoteConfig, SyntheticPoint};
pub use scoring::{ScoreEntry, ScoreTable};
pub use text::{Lexicon, SentimentScore, TermList, TextNormalizer};

/// Company status; `Bankrupt` is the class of interest throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Bankrupt,
    NonBankrupt,
}

impl Label {
    pub fn is_bankrupt(self) -> bool {
        matches!(self, Label::Bankrupt)
    }

    /// 1.0 for bankrupt, 0.0 otherwise.
    pub fn target(self) -> f64 {
        if self.is_bankrupt() {
            1.0
        } else {
            0.0
        }
    }
}
