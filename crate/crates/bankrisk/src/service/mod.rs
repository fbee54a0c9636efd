//! Read-only JSON API over an immutable snapshot of the scoring artifacts.
//!
//! Every endpoint takes the filters `sector`, `year`, `flagged` and
//! `company_id`, applied conjunctively, plus `partition=full|held_out` to
//! choose between scores over every row and scores over rows the model never
//! trained on. The full table is the default.

mod filter;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use bankrisk_core::scoring::Partition;
use bankrisk_core::{Dataset, FeatureRow, ScoreEntry, ScoreTable, SentimentScore};
use serde::Serialize;
use thiserror::Error;

pub use filter::Filter;

use crate::config::Layout;
use crate::tables::{load_dataset, load_sentiment, TableError};

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("missing artifact {0}; run the pipeline stages that produce it first")]
    Missing(PathBuf),
    #[error("unreadable artifact {path}: {message}")]
    Unreadable { path: PathBuf, message: String },
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("{path} holds a {found:?} table, expected {expected:?}")]
    WrongPartition {
        path: PathBuf,
        expected: Partition,
        found: Partition,
    },
}

/// Everything the service answers from, loaded once at startup.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub scores_full: ScoreTable,
    pub scores_held_out: ScoreTable,
    pub sentiment: Vec<SentimentScore>,
    pub dataset: Dataset,
    sectors: BTreeSet<String>,
    years: BTreeSet<i32>,
    companies: BTreeSet<String>,
}

impl Snapshot {
    pub fn new(
        scores_full: ScoreTable,
        scores_held_out: ScoreTable,
        sentiment: Vec<SentimentScore>,
        dataset: Dataset,
    ) -> Self {
        let (mut sectors, mut years, companies) = filter::domain(
            scores_full.entries.iter().chain(&scores_held_out.entries),
            &sentiment,
            dataset.rows.iter().map(|r| r.company_id.as_str()),
        );
        sectors.extend(dataset.rows.iter().map(|r| r.sector.clone()));
        years.extend(dataset.rows.iter().map(|r| r.year));
        Self {
            scores_full,
            scores_held_out,
            sentiment,
            dataset,
            sectors,
            years,
            companies,
        }
    }

    pub fn load(layout: &Layout) -> Result<Self, SnapshotError> {
        let paths = [
            layout.scores_full(),
            layout.scores_held_out(),
            layout.sentiment(),
            layout.dataset(),
        ];
        if let Some(missing) = paths.iter().find(|p| !p.is_file()) {
            return Err(SnapshotError::Missing(missing.clone()));
        }
        let full = read_table(&paths[0], Partition::Full)?;
        let held = read_table(&paths[1], Partition::HeldOut)?;
        Ok(Self::new(
            full,
            held,
            load_sentiment(&paths[2])?,
            load_dataset(&paths[3])?,
        ))
    }

    fn table(&self, partition: Partition) -> &ScoreTable {
        match partition {
            Partition::Full => &self.scores_full,
            Partition::HeldOut => &self.scores_held_out,
        }
    }
}

fn read_table(path: &std::path::Path, expected: Partition) -> Result<ScoreTable, SnapshotError> {
    let unreadable = |message: String| SnapshotError::Unreadable {
        path: path.into(),
        message,
    };
    let text = std::fs::read_to_string(path).map_err(|e| unreadable(e.to_string()))?;
    let table: ScoreTable = serde_json::from_str(&text).map_err(|e| unreadable(e.to_string()))?;
    if table.partition != expected {
        return Err(SnapshotError::WrongPartition {
            path: path.into(),
            expected,
            found: table.partition,
        });
    }
    Ok(table)
}

#[derive(Debug)]
pub enum ApiError {
    BadRequest(String),
    NotFound(String),
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, error) = match self {
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, m),
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, m),
        };
        (status, Json(ErrorBody { error })).into_response()
    }
}

type Shared = Arc<Snapshot>;
type Params = Query<HashMap<String, String>>;

fn filter(params: &HashMap<String, String>, s: &Snapshot) -> Result<Filter, ApiError> {
    Filter::parse(params, s).map_err(ApiError::BadRequest)
}

fn entries<'a>(s: &'a Snapshot, f: &'a Filter) -> impl Iterator<Item = &'a ScoreEntry> {
    s.table(f.partition())
        .entries
        .iter()
        .filter(move |e| f.entry_matches(e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Company {
    #[serde(flatten)]
    pub row: FeatureRow,
    /// Absent when the chosen partition did not score this row.
    pub probability: Option<f64>,
    pub flagged: Option<bool>,
}

fn companies_matching(s: &Snapshot, f: &Filter) -> Vec<Company> {
    let table = s.table(f.partition());
    let scores: BTreeMap<(&str, i32), &ScoreEntry> = table
        .entries
        .iter()
        .map(|e| ((e.company_id.as_str(), e.year), e))
        .collect();
    s.dataset
        .rows
        .iter()
        .filter(|r| f.sector.as_deref().is_none_or(|x| x == r.sector))
        .filter(|r| f.year.is_none_or(|y| y == r.year))
        .filter(|r| f.company_id.as_deref().is_none_or(|c| c == r.company_id))
        .filter_map(|r| {
            let score = scores.get(&(r.company_id.as_str(), r.year));
            let flagged = score.map(|e| e.flagged);
            if f.flagged.is_some() && flagged != f.flagged {
                return None;
            }
            Some(Company {
                row: r.clone(),
                probability: score.map(|e| e.probability),
                flagged,
            })
        })
        .collect()
}

async fn companies(State(s): State<Shared>, Query(q): Params) -> Result<Json<Vec<Company>>, ApiError> {
    let f = filter(&q, &s)?;
    Ok(Json(companies_matching(&s, &f)))
}

async fn company(
    State(s): State<Shared>,
    Path(id): Path<String>,
    Query(q): Params,
) -> Result<Json<Vec<Company>>, ApiError> {
    if !s.companies.contains(&id) {
        return Err(ApiError::NotFound(format!("unknown company {id:?}")));
    }
    let mut f = filter(&q, &s)?;
    if f.company_id.as_ref().is_some_and(|c| *c != id) {
        return Ok(Json(Vec::new()));
    }
    f.company_id = Some(id);
    Ok(Json(companies_matching(&s, &f)))
}

#[derive(Debug, Serialize)]
struct ScoresBody<'a> {
    model_version: &'a str,
    threshold: f64,
    partition: Partition,
    entries: Vec<&'a ScoreEntry>,
}

fn scores_body<'a>(s: &'a Snapshot, f: &'a Filter, only_flagged: bool) -> ScoresBody<'a> {
    let t = s.table(f.partition());
    ScoresBody {
        model_version: &t.model_version,
        threshold: t.threshold,
        partition: t.partition,
        entries: entries(s, f).filter(|e| !only_flagged || e.flagged).collect(),
    }
}

async fn scores(State(s): State<Shared>, Query(q): Params) -> Result<Response, ApiError> {
    let f = filter(&q, &s)?;
    Ok(Json(scores_body(&s, &f, false)).into_response())
}

async fn flags(State(s): State<Shared>, Query(q): Params) -> Result<Response, ApiError> {
    let f = filter(&q, &s)?;
    Ok(Json(scores_body(&s, &f, true)).into_response())
}

async fn sentiment(State(s): State<Shared>, Query(q): Params) -> Result<Json<Vec<SentimentScore>>, ApiError> {
    let f = filter(&q, &s)?;
    let table = &s.table(f.partition()).entries;
    Ok(Json(
        s.sentiment
            .iter()
            .filter(|g| f.sentiment_matches(g, table))
            .cloned()
            .collect(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YearProbability {
    pub year: i32,
    pub mean_probability: f64,
    pub count: usize,
}

async fn bankruptcy_by_year(State(s): State<Shared>, Query(q): Params) -> Result<Json<Vec<YearProbability>>, ApiError> {
    let f = filter(&q, &s)?;
    let mut sums: BTreeMap<i32, (f64, usize)> = BTreeMap::new();
    for e in entries(&s, &f) {
        let slot = sums.entry(e.year).or_default();
        slot.0 += e.probability;
        slot.1 += 1;
    }
    Ok(Json(
        sums.into_iter()
            .map(|(year, (sum, count))| YearProbability {
                year,
                mean_probability: sum / count as f64,
                count,
            })
            .collect(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YearSentiment {
    pub year: i32,
    pub groups: usize,
    pub mean_positive_pct: f64,
    pub mean_negative_pct: f64,
    /// Mean over the groups that have a ratio; absent when none do.
    pub mean_pos_to_neg: Option<f64>,
}

async fn sentiment_by_year(State(s): State<Shared>, Query(q): Params) -> Result<Json<Vec<YearSentiment>>, ApiError> {
    let f = filter(&q, &s)?;
    let table = &s.table(f.partition()).entries;
    let mut by_year: BTreeMap<i32, Vec<&SentimentScore>> = BTreeMap::new();
    for g in s.sentiment.iter().filter(|g| f.sentiment_matches(g, table)) {
        by_year.entry(g.year).or_default().push(g);
    }
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    Ok(Json(
        by_year
            .into_iter()
            .map(|(year, gs)| {
                let pos: Vec<f64> = gs.iter().map(|g| g.positive_pct).collect();
                let neg: Vec<f64> = gs.iter().map(|g| g.negative_pct).collect();
                let ratio: Vec<f64> = gs.iter().filter_map(|g| g.pos_to_neg).collect();
                YearSentiment {
                    year,
                    groups: gs.len(),
                    mean_positive_pct: mean(&pos).unwrap_or(0.0),
                    mean_negative_pct: mean(&neg).unwrap_or(0.0),
                    mean_pos_to_neg: mean(&ratio),
                }
            })
            .collect(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlagCount {
    pub sector: String,
    pub year: i32,
    pub flagged: usize,
    pub scored: usize,
}

async fn flag_counts(State(s): State<Shared>, Query(q): Params) -> Result<Json<Vec<FlagCount>>, ApiError> {
    let f = filter(&q, &s)?;
    let mut counts: BTreeMap<(&str, i32), (usize, usize)> = BTreeMap::new();
    for e in entries(&s, &f) {
        let slot = counts.entry((e.sector.as_str(), e.year)).or_default();
        slot.0 += usize::from(e.flagged);
        slot.1 += 1;
    }
    Ok(Json(
        counts
            .into_iter()
            .map(|((sector, year), (flagged, scored))| FlagCount {
                sector: sector.into(),
                year,
                flagged,
                scored,
            })
            .collect(),
    ))
}

pub fn router(snapshot: Snapshot) -> Router {
    Router::new()
        .route("/api/companies", get(companies))
        .route("/api/companies/{id}", get(company))
        .route("/api/scores", get(scores))
        .route("/api/sentiment", get(sentiment))
        .route("/api/flags", get(flags))
        .route("/api/aggregates/bankruptcy-by-year", get(bankruptcy_by_year))
        .route("/api/aggregates/sentiment-by-year", get(sentiment_by_year))
        .route("/api/aggregates/flags", get(flag_counts))
        .with_state(Arc::new(snapshot))
}

pub async fn serve(snapshot: Snapshot, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(snapshot)).await
}
