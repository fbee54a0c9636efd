//! The command-line stages. Each reads its inputs from the data root,
//! writes its artifact back there and returns a serializable summary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use bankrisk_core::dataset::{
    build_from_records, map_sectors, sector_frequencies, DatasetError, DropCounts, Imbalance,
};
use bankrisk_core::evaluation::{run_cell, run_cross_year_cell};
use bankrisk_core::scoring::{score_companies, ScoringError};
use bankrisk_core::{Dataset, ExperimentReport, FeatureSet, ModelKind, ScoreTable, SectorMapping, TextNormalizer};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{Config, FetcherKind};
use crate::corpus::{
    acquire_grid, load_corpus, store_articles, store_provenance, ArticleSource, CorpusError, DirectoryFetcher,
    FetchError, FetchWarning, HttpFetcher,
};
use crate::lexicon::{load_lexicon, LexiconLoadError};
use crate::model_io::{load_model, save_model, train_document, ModelIoError, RowKey};
use crate::records::{load_records, ratio_table, write_ratio_table, zone_counts, RecordsError};
use crate::report::render_text;
use crate::tables::{
    load_dataset, load_sentiment, save_dataset, save_sentiment, score_groups, TableError, UnscoredGroup,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Lexicon(#[from] LexiconLoadError),
    #[error(transparent)]
    Records(#[from] RecordsError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Model(#[from] ModelIoError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error("held-out row {company_id}/{year} is not in the dataset")]
    MissingHoldout { company_id: String, year: i32 },
    #[error("fetcher kind http needs a url_template")]
    NoUrlTemplate,
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| PipelineError::Io {
            path: parent.into(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| PipelineError::Io {
        path: path.into(),
        source,
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), PipelineError> {
    write_file(path, serde_json::to_string_pretty(value).expect("artifact serializes"))
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupCount {
    pub sector: String,
    pub year: i32,
    pub articles: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct IngestSummary {
    pub fetcher: String,
    pub corpus: PathBuf,
    pub articles: usize,
    pub groups: Vec<GroupCount>,
    pub warnings: Vec<FetchWarning>,
    pub errors: Vec<String>,
}

pub fn fetcher_for(config: &Config) -> Result<Box<dyn ArticleSource>, PipelineError> {
    let f = &config.fetcher;
    Ok(match f.kind {
        FetcherKind::Directory => Box::new(DirectoryFetcher::new(config.article_dir())),
        FetcherKind::Http => {
            if f.url_template.is_empty() {
                return Err(PipelineError::NoUrlTemplate);
            }
            Box::new(HttpFetcher::new(
                f.url_template.clone(),
                Duration::from_millis(f.delay_ms),
                f.max_retries,
            ))
        }
    })
}

/// Acquire every keyword × year pair and store what arrived. Pairs that
/// failed are listed in the summary and contribute nothing.
pub fn ingest(config: &Config, source: &dyn ArticleSource) -> Result<IngestSummary, PipelineError> {
    let retrieved_at = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let outcome = acquire_grid(
        source,
        &config.fetcher.keywords,
        &config.fetcher.years,
        config.fetcher.parallelism,
        retrieved_at,
    );
    let root = config.layout().corpus();
    let articles: Vec<_> = outcome.corpus.articles().cloned().collect();
    store_articles(&root, &articles)?;
    if let Some(p) = &outcome.corpus.provenance {
        store_provenance(&root, p)?;
    }
    Ok(IngestSummary {
        fetcher: source.name().into(),
        corpus: root,
        articles: articles.len(),
        groups: outcome
            .corpus
            .groups
            .iter()
            .map(|(k, v)| GroupCount {
                sector: k.sector.clone(),
                year: k.year,
                articles: v.len(),
            })
            .collect(),
        warnings: outcome.warnings,
        errors: outcome.errors.iter().map(FetchError::to_string).collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SentimentSummary {
    pub output: PathBuf,
    pub lexicon_terms: usize,
    pub lexicon_skipped: usize,
    pub scored_groups: usize,
    pub unscored: Vec<UnscoredGroup>,
}

pub fn sentiment(config: &Config) -> Result<SentimentSummary, PipelineError> {
    let normalizer = TextNormalizer::bundled();
    let lexicon = load_lexicon(&config.lexicon_path(), &normalizer)?;
    let corpus = load_corpus(&config.layout().corpus(), config.corpus.boilerplate)?;
    let (scores, unscored) = score_groups(&corpus, &normalizer, &lexicon);
    let output = config.layout().sentiment();
    save_sentiment(&output, &scores)?;
    Ok(SentimentSummary {
        output,
        lexicon_terms: lexicon.len(),
        lexicon_skipped: lexicon.skipped(),
        scored_groups: scores.len(),
        unscored,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RatiosSummary {
    pub output: PathBuf,
    pub records: usize,
    pub scored: usize,
    pub excluded: BTreeMap<String, usize>,
    pub zones: BTreeMap<String, usize>,
}

pub fn ratios(config: &Config) -> Result<RatiosSummary, PipelineError> {
    let records = load_records(&config.records_path())?;
    let table = ratio_table(&records);
    let mut excluded = BTreeMap::new();
    for (row, _) in &table {
        if let Some(reason) = &row.excluded {
            *excluded.entry(reason.clone()).or_insert(0) += 1;
        }
    }
    let zones = zone_counts(table.iter().filter_map(|(_, s)| s.as_ref().map(|(_, z)| z)))
        .into_iter()
        .map(|(zone, n)| (zone.to_string(), n))
        .collect();
    let rows: Vec<_> = table.iter().map(|(r, _)| r.clone()).collect();
    let mut buf = Vec::new();
    write_ratio_table(&rows, &mut buf)?;
    let output = config.layout().ratios();
    write_file(&output, buf)?;
    Ok(RatiosSummary {
        output,
        records: records.len(),
        scored: table.iter().filter(|(_, s)| s.is_some()).count(),
        excluded,
        zones,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BuildSummary {
    pub output: PathBuf,
    pub rows: usize,
    pub excluded_records: usize,
    pub dropped: DropCounts,
    pub imbalance: BTreeMap<i32, Imbalance>,
    pub mapping: SectorMapping,
}

pub fn build(config: &Config) -> Result<BuildSummary, PipelineError> {
    let records = load_records(&config.records_path())?;
    let sentiment = load_sentiment(&config.layout().sentiment())?;
    let mapping = map_sectors(
        &sector_frequencies(&records),
        &config.mapping_keywords(),
        config.seed,
        config.mapping.explicit.as_ref(),
    )?;
    let dataset = build_from_records(&records, &mapping, &sentiment)?;
    let layout = config.layout();
    write_json(&layout.mapping(), &mapping)?;
    save_dataset(&layout.dataset(), &dataset)?;
    Ok(BuildSummary {
        output: layout.dataset(),
        rows: dataset.rows.len(),
        excluded_records: dataset.exclusion_count,
        dropped: dataset.dropped,
        imbalance: dataset.imbalance,
        mapping,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainSummary {
    pub output: PathBuf,
    pub model_version: String,
    pub model: ModelKind,
    pub feature_set: FeatureSet,
    pub train_rows: usize,
    pub synthetic_rows: usize,
    pub holdout_rows: usize,
}

pub fn train(config: &Config, kind: ModelKind, set: FeatureSet) -> Result<TrainSummary, PipelineError> {
    let dataset = load_dataset(&config.layout().dataset())?;
    let doc = train_document(
        &dataset,
        kind,
        set,
        &config.training,
        &config.smote,
        config.experiment.train_fraction,
        config.seed,
    )?;
    let output = config.layout().model();
    save_model(&output, &doc)?;
    Ok(TrainSummary {
        output,
        model_version: doc.model_version,
        model: kind,
        feature_set: set,
        train_rows: doc.train_rows,
        synthetic_rows: doc.synthetic_rows,
        holdout_rows: doc.holdout.len(),
    })
}

/// Run the grid with cells in parallel. The report is identical to a
/// sequential run.
pub fn run_grid(dataset: &Dataset, config: &Config) -> ExperimentReport {
    let exp = config.experiment_config();
    let cells = exp
        .cells()
        .into_par_iter()
        .map(|(year, kind, set)| run_cell(dataset, &exp, year, kind, set))
        .collect();
    let mut cross = Vec::new();
    for &(tr, te) in &exp.cross_year {
        for &k in &exp.models {
            for &s in &exp.feature_sets {
                cross.push((tr, te, k, s));
            }
        }
    }
    let cross_year = cross
        .into_par_iter()
        .map(|(tr, te, k, s)| run_cross_year_cell(dataset, &exp, tr, te, k, s))
        .collect();
    ExperimentReport::from_cells(exp, cells, cross_year)
}

pub fn evaluate(config: &Config) -> Result<ExperimentReport, PipelineError> {
    let dataset = load_dataset(&config.layout().dataset())?;
    let report = run_grid(&dataset, config);
    let layout = config.layout();
    write_json(&layout.report_json(), &report)?;
    write_file(&layout.report_text(), render_text(&report))?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoreSummary {
    pub model_version: String,
    pub threshold: f64,
    pub full: PathBuf,
    pub full_rows: usize,
    pub full_flagged: usize,
    pub held_out: PathBuf,
    pub held_out_rows: usize,
    pub held_out_flagged: usize,
}

/// Score every dataset row and, separately, only the rows held out from
/// training.
pub fn score(config: &Config) -> Result<ScoreSummary, PipelineError> {
    let layout = config.layout();
    let doc = load_model(&layout.model())?;
    let dataset = load_dataset(&layout.dataset())?;
    let threshold = config.scoring.threshold;
    let full = score_companies(
        &doc.model,
        &dataset,
        doc.feature_set,
        threshold,
        &doc.model_version,
        None,
    )?;

    let index: BTreeMap<(&str, i32), usize> = dataset
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| ((r.company_id.as_str(), r.year), i))
        .collect();
    let held: Vec<usize> = doc
        .holdout
        .iter()
        .map(|RowKey { company_id, year }| {
            index
                .get(&(company_id.as_str(), *year))
                .copied()
                .ok_or_else(|| PipelineError::MissingHoldout {
                    company_id: company_id.clone(),
                    year: *year,
                })
        })
        .collect::<Result<_, _>>()?;
    let held_out = score_companies(
        &doc.model,
        &dataset,
        doc.feature_set,
        threshold,
        &doc.model_version,
        Some(&held),
    )?;

    write_json(&layout.scores_full(), &full)?;
    write_json(&layout.scores_held_out(), &held_out)?;
    let flagged = |t: &ScoreTable| t.entries.iter().filter(|e| e.flagged).count();
    Ok(ScoreSummary {
        model_version: doc.model_version.clone(),
        threshold,
        full: layout.scores_full(),
        full_rows: full.entries.len(),
        full_flagged: flagged(&full),
        held_out: layout.scores_held_out(),
        held_out_rows: held_out.entries.len(),
        held_out_flagged: flagged(&held_out),
    })
}
