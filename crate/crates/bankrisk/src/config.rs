//! TOML configuration and the artifact layout under the data root.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use bankrisk_core::dataset::DEFAULT_KEYWORDS;
use bankrisk_core::scoring::DEFAULT_FLAG_THRESHOLD;
use bankrisk_core::{ExperimentConfig, FeatureSet, ModelKind, SmoteConfig, TrainingConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Boilerplate;

/// Overrides `data_root` from the file; `--data-root` overrides both.
pub const DATA_ROOT_ENV: &str = "BANKRISK_DATA_ROOT";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FetcherKind {
    Directory,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FetcherConfig {
    pub kind: FetcherKind,
    /// Article tree for the directory fetcher, relative to the data root.
    pub directory: PathBuf,
    /// URL with `{keyword}` and `{year}` placeholders for the HTTP fetcher.
    pub url_template: String,
    pub delay_ms: u64,
    pub max_retries: u32,
    pub parallelism: usize,
    pub keywords: Vec<String>,
    pub years: Vec<i32>,
}

impl Default for FetcherConfig {
    fn default() -> Self {
        Self {
            kind: FetcherKind::Directory,
            directory: "articles".into(),
            url_template: String::new(),
            delay_ms: 1000,
            max_retries: 2,
            parallelism: 4,
            keywords: DEFAULT_KEYWORDS.iter().map(|k| k.to_string()).collect(),
            years: (2013..=2016).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusConfig {
    pub boilerplate: Boilerplate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InputsConfig {
    /// Financial records CSV, relative to the data root.
    pub records: PathBuf,
    /// Sentiment word list, relative to the data root.
    pub lexicon: PathBuf,
}

impl Default for InputsConfig {
    fn default() -> Self {
        Self {
            records: "records.csv".into(),
            lexicon: "lexicon.csv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct MappingConfig {
    /// Keywords paired with the sector codes; the fetcher keywords when empty.
    pub keywords: Vec<String>,
    /// Sector code → keyword. Replaces the seeded random pairing when set.
    pub explicit: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSection {
    pub years: Vec<i32>,
    pub models: Vec<ModelKind>,
    pub feature_sets: Vec<FeatureSet>,
    pub train_fraction: f64,
    pub threshold: f64,
    pub cross_year: Vec<(i32, i32)>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        let d = ExperimentConfig::default();
        Self {
            years: d.years,
            models: d.models,
            feature_sets: d.feature_sets,
            train_fraction: d.train_fraction,
            threshold: d.threshold,
            cross_year: d.cross_year,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoringConfig {
    pub model: ModelKind,
    pub feature_set: FeatureSet,
    pub threshold: f64,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Mlp,
            feature_set: FeatureSet::AllSentiment,
            threshold: DEFAULT_FLAG_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServerConfig {
    pub host: String,
    pub port: u16,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            host: "127.0.0.1".into(),
            port: 8080,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub data_root: PathBuf,
    pub seed: u64,
    pub fetcher: FetcherConfig,
    pub corpus: CorpusConfig,
    pub inputs: InputsConfig,
    pub mapping: MappingConfig,
    pub training: TrainingConfig,
    pub smote: SmoteConfig,
    pub experiment: ExperimentSection,
    pub scoring: ScoringConfig,
    pub server: ServerConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            data_root: "data".into(),
            seed: 0,
            fetcher: FetcherConfig::default(),
            corpus: CorpusConfig::default(),
            inputs: InputsConfig::default(),
            mapping: MappingConfig::default(),
            training: TrainingConfig::default(),
            smote: SmoteConfig::default(),
            experiment: ExperimentSection::default(),
            scoring: ScoringConfig::default(),
            server: ServerConfig::default(),
        }
    }
}

impl Config {
    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.into(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.into(),
            source,
        })?;
        Self::parse(&text, path)
    }

    /// Apply the environment override for the data root.
    pub fn with_env(mut self) -> Self {
        if let Some(root) = std::env::var_os(DATA_ROOT_ENV).filter(|v| !v.is_empty()) {
            self.data_root = root.into();
        }
        self
    }

    pub fn layout(&self) -> Layout {
        Layout::new(&self.data_root)
    }

    pub fn mapping_keywords(&self) -> Vec<String> {
        if self.mapping.keywords.is_empty() {
            self.fetcher.keywords.clone()
        } else {
            self.mapping.keywords.clone()
        }
    }

    pub fn experiment_config(&self) -> ExperimentConfig {
        let e = &self.experiment;
        ExperimentConfig {
            years: e.years.clone(),
            models: e.models.clone(),
            feature_sets: e.feature_sets.clone(),
            train_fraction: e.train_fraction,
            seed: self.seed,
            smote: self.smote,
            training: self.training.clone(),
            threshold: e.threshold,
            cross_year: e.cross_year.clone(),
        }
    }

    pub fn records_path(&self) -> PathBuf {
        self.data_root.join(&self.inputs.records)
    }

    pub fn lexicon_path(&self) -> PathBuf {
        self.data_root.join(&self.inputs.lexicon)
    }

    pub fn article_dir(&self) -> PathBuf {
        self.data_root.join(&self.fetcher.directory)
    }
}

/// Where each stage reads and writes, all under one data root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn corpus(&self) -> PathBuf {
        self.root.join("corpus")
    }

    pub fn sentiment(&self) -> PathBuf {
        self.root.join("sentiment.csv")
    }

    pub fn ratios(&self) -> PathBuf {
        self.root.join("ratios.csv")
    }

    pub fn mapping(&self) -> PathBuf {
        self.root.join("mapping.json")
    }

    pub fn dataset(&self) -> PathBuf {
        self.root.join("dataset.csv")
    }

    pub fn model(&self) -> PathBuf {
        self.root.join("model.json")
    }

    pub fn report_json(&self) -> PathBuf {
        self.root.join("report.json")
    }

    pub fn report_text(&self) -> PathBuf {
        self.root.join("report.txt")
    }

    pub fn scores_full(&self) -> PathBuf {
        self.root.join("scores_full.json")
    }

    pub fn scores_held_out(&self) -> PathBuf {
        self.root.join("scores_held_out.json")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use bankrisk_core::resampling::SmoteAmount;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(Config::parse("", Path::new("x.toml")).unwrap(), Config::default());
    }

    #[test]
    fn sections_parse() {
        let text = r#"
data_root = "/srv/bankrisk"
seed = 7

[fetcher]
kind = "http"
url_template = "http://news.example/?q={keyword}&y={year}"
delay_ms = 0

[corpus.boilerplate]
fraction = 0.8
min_group = 5

[mapping.explicit]
S1 = "Aviation"
S2 = "Tourism"
S3 = "iGaming"
S4 = "Pharmaceuticals"

[training.class_weights]
2013 = 5.0

[training.mlp]
epochs = 50

[smote]
amount = { points = 30 }

[experiment]
models = ["logistic", "gbm"]
feature_sets = ["no_sentiment", "all_sentiment"]
cross_year = [[2013, 2014]]

[scoring]
model = "gbm"
threshold = 0.9

[server]
port = 9000
"#;
        let c = Config::parse(text, Path::new("x.toml")).unwrap();
        assert_eq!(c.data_root, PathBuf::from("/srv/bankrisk"));
        assert_eq!(c.fetcher.kind, FetcherKind::Http);
        assert_eq!(c.fetcher.max_retries, 2);
        assert_eq!(c.corpus.boilerplate.min_group, 5);
        assert_eq!(c.mapping.explicit.as_ref().unwrap()["S3"], "iGaming");
        assert_eq!(c.training.class_weights.get(&2013), Some(&5.0));
        assert_eq!(c.training.mlp.epochs, 50);
        assert_eq!(c.training.mlp.learning_rate, 0.01);
        assert_eq!(c.smote.amount, SmoteAmount::Points(30));
        assert_eq!(c.smote.k, 4);
        let e = c.experiment_config();
        assert_eq!(e.seed, 7);
        assert_eq!(e.cells().len(), 4 * 2 * 2);
        assert_eq!(e.cross_year, vec![(2013, 2014)]);
        assert_eq!(c.scoring.model, ModelKind::Gbm);
        assert_eq!(c.server.port, 9000);
        assert_eq!(c.layout().model(), PathBuf::from("/srv/bankrisk/model.json"));
    }

    #[test]
    fn unknown_model_is_a_parse_error() {
        let err = Config::parse("[scoring]\nmodel = \"svm\"\n", Path::new("x.toml")).unwrap_err();
        assert!(err.to_string().contains("x.toml"));
    }
}
