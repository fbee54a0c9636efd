mod common;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use bankrisk::config::Layout;
use bankrisk::service::{router, Snapshot, SnapshotError};
use bankrisk::tables::{save_dataset, save_sentiment};
use bankrisk_core::dataset::DropCounts;
use bankrisk_core::scoring::{is_flagged, Partition, ScoreEntry, ScoreTable};
use bankrisk_core::{Dataset, FeatureRow, Label};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

use common::{published_sentiment_scores, records_dataset};

const THRESHOLD: f64 = 0.98;

fn entry(row: &FeatureRow, probability: f64) -> ScoreEntry {
    ScoreEntry {
        company_id: row.company_id.clone(),
        year: row.year,
        sector: row.sector.clone(),
        z: row.z,
        z_prime: row.z_prime,
        negative_pct: row.negative_pct,
        positive_pct: row.positive_pct,
        pos_to_neg: row.pos_to_neg,
        probability,
        flagged: is_flagged(probability, THRESHOLD),
    }
}

fn table(entries: Vec<ScoreEntry>, partition: Partition) -> ScoreTable {
    ScoreTable {
        entries,
        model_version: "mlp-all_sentiment-test".into(),
        threshold: THRESHOLD,
        partition,
    }
}

/// Deterministic probabilities spread over [0, 1], bankrupt rows pushed high.
fn fake_probability(i: usize, row: &FeatureRow) -> f64 {
    let base = (i * 37 % 100) as f64 / 100.0;
    if row.label == Label::Bankrupt {
        0.95 + base * 0.05
    } else {
        base * 0.99
    }
}

fn snapshot() -> Snapshot {
    let dataset = records_dataset();
    let full: Vec<ScoreEntry> = dataset
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| entry(r, fake_probability(i, r)))
        .collect();
    let held: Vec<ScoreEntry> = full.iter().step_by(3).cloned().collect();
    Snapshot::new(
        table(full, Partition::Full),
        table(held, Partition::HeldOut),
        published_sentiment_scores(),
        dataset,
    )
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    let response = app
        .clone()
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

async fn ok(app: &Router, uri: &str) -> Value {
    let (status, body) = get(app, uri).await;
    assert_eq!(status, StatusCode::OK, "{uri}: {body}");
    body
}

fn keys(entries: &Value) -> Vec<(String, i64)> {
    entries
        .as_array()
        .unwrap()
        .iter()
        .map(|e| {
            (
                e["company_id"].as_str().unwrap().to_string(),
                e["year"].as_i64().unwrap(),
            )
        })
        .collect()
}

#[tokio::test]
async fn year_and_flag_filters_select_the_expected_subset() {
    let snap = snapshot();
    let expected: Vec<(String, i64)> = snap
        .scores_full
        .entries
        .iter()
        .filter(|e| e.year == 2015 && e.flagged)
        .map(|e| (e.company_id.clone(), 2015))
        .collect();
    assert!(!expected.is_empty());
    let app = router(snap);

    let body = ok(&app, "/api/scores?year=2015&flagged=true").await;
    assert_eq!(body["partition"], "full");
    assert_eq!(body["threshold"], THRESHOLD);
    assert_eq!(keys(&body["entries"]), expected);

    let flags = ok(&app, "/api/flags?year=2015").await;
    assert_eq!(keys(&flags["entries"]), expected);

    let companies = ok(&app, "/api/companies?year=2015&flagged=true").await;
    assert_eq!(keys(&companies), expected);
    assert!(companies.as_array().unwrap().iter().all(|c| c["flagged"] == true));
}

#[tokio::test]
async fn sector_filter_on_sentiment_returns_one_record_per_year() {
    let app = router(snapshot());
    let body = ok(&app, "/api/sentiment?sector=Aviation").await;
    let records = body.as_array().unwrap();
    assert_eq!(records.len(), 4);
    assert!(records.iter().all(|r| r["sector"] == "Aviation"));
    let years: Vec<i64> = records.iter().map(|r| r["year"].as_i64().unwrap()).collect();
    assert_eq!(years, vec![2013, 2014, 2015, 2016]);
}

#[tokio::test]
async fn bankruptcy_by_year_is_the_plain_mean() {
    let rows: Vec<FeatureRow> = records_dataset().rows.into_iter().take(3).collect();
    let probabilities = [0.2, 0.5, 0.995];
    let entries: Vec<ScoreEntry> = rows.iter().zip(probabilities).map(|(r, p)| entry(r, p)).collect();
    let year = rows[0].year;
    assert!(rows.iter().all(|r| r.year == year));
    let snap = Snapshot::new(
        table(entries.clone(), Partition::Full),
        table(entries, Partition::HeldOut),
        published_sentiment_scores(),
        Dataset::from_rows(rows, 0, DropCounts::default()),
    );
    let app = router(snap);
    let body = ok(&app, "/api/aggregates/bankruptcy-by-year").await;
    let groups = body.as_array().unwrap();
    assert_eq!(groups.len(), 1);
    assert_eq!(groups[0]["year"], year);
    assert_eq!(groups[0]["count"], 3);
    let mean = groups[0]["mean_probability"].as_f64().unwrap();
    assert!((mean - (0.2 + 0.5 + 0.995) / 3.0).abs() < 1e-12);

    let flags = ok(&app, "/api/aggregates/flags").await;
    let flagged: u64 = flags
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["flagged"].as_u64().unwrap())
        .sum();
    assert_eq!(flagged, 1);
}

#[tokio::test]
async fn sentiment_by_year_averages_groups() {
    let app = router(snapshot());
    let body = ok(&app, "/api/aggregates/sentiment-by-year").await;
    let rows = body.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let year = row["year"].as_i64().unwrap() as i32;
        let groups: Vec<_> = published_sentiment_scores()
            .into_iter()
            .filter(|g| g.year == year)
            .collect();
        assert_eq!(row["groups"], groups.len());
        let mean = groups.iter().map(|g| g.negative_pct).sum::<f64>() / groups.len() as f64;
        assert!((row["mean_negative_pct"].as_f64().unwrap() - mean).abs() < 1e-12);
    }
}

#[tokio::test]
async fn unknown_filter_values_are_bad_requests() {
    let app = router(snapshot());
    for uri in [
        "/api/scores?year=1999",
        "/api/scores?year=soon",
        "/api/companies?sector=Mining",
        "/api/flags?flagged=maybe",
        "/api/sentiment?company_id=NOPE",
        "/api/scores?partition=training",
        "/api/aggregates/flags?year=2012",
    ] {
        let (status, body) = get(&app, uri).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{uri}");
        assert!(body["error"].is_string(), "{uri}");
    }
    let (status, body) = get(&app, "/api/companies/NOPE").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(body["error"].as_str().unwrap().contains("NOPE"));
}

#[tokio::test]
async fn company_lookup_returns_every_year_of_that_company() {
    let snap = snapshot();
    let id = snap.dataset.rows[0].company_id.clone();
    let n = snap.dataset.rows.iter().filter(|r| r.company_id == id).count();
    let app = router(snap);
    let body = ok(&app, &format!("/api/companies/{id}")).await;
    let rows = body.as_array().unwrap();
    assert_eq!(rows.len(), n);
    assert!(rows
        .iter()
        .all(|r| r["company_id"] == id.as_str() && r["probability"].is_number()));
}

#[tokio::test]
async fn held_out_partition_only_lists_held_out_rows() {
    let snap = snapshot();
    let held = snap.scores_held_out.entries.len();
    let app = router(snap);
    let body = ok(&app, "/api/scores?partition=held_out").await;
    assert_eq!(body["partition"], "held_out");
    assert_eq!(body["entries"].as_array().unwrap().len(), held);
    let companies = ok(&app, "/api/companies?partition=held_out").await;
    let scored = companies
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["probability"].is_number())
        .count();
    assert_eq!(scored, held);
}

#[tokio::test]
async fn filters_narrow_and_commute() {
    let app = router(snapshot());
    let all = keys(&ok(&app, "/api/scores").await["entries"]);
    let sector = keys(&ok(&app, "/api/scores?sector=Tourism").await["entries"]);
    let both = keys(&ok(&app, "/api/scores?sector=Tourism&year=2014").await["entries"]);
    let swapped = keys(&ok(&app, "/api/scores?year=2014&sector=Tourism").await["entries"]);
    assert!(!both.is_empty());
    assert!(sector.iter().all(|k| all.contains(k)));
    assert!(both.iter().all(|k| sector.contains(k)));
    assert_eq!(both, swapped);
}

#[tokio::test]
async fn flag_counts_match_a_direct_count() {
    let snap = snapshot();
    let direct_flagged = snap.scores_full.entries.iter().filter(|e| e.flagged).count() as u64;
    let direct_scored = snap.scores_full.entries.len() as u64;
    let app = router(snap);
    let body = ok(&app, "/api/aggregates/flags").await;
    let rows = body.as_array().unwrap();
    let flagged: u64 = rows.iter().map(|r| r["flagged"].as_u64().unwrap()).sum();
    let scored: u64 = rows.iter().map(|r| r["scored"].as_u64().unwrap()).sum();
    assert_eq!((flagged, scored), (direct_flagged, direct_scored));
    assert!(rows.iter().all(|r| r["flagged"].as_u64() <= r["scored"].as_u64()));
}

#[tokio::test]
async fn repeated_requests_are_identical() {
    let app = router(snapshot());
    for uri in [
        "/api/companies",
        "/api/scores?sector=iGaming",
        "/api/aggregates/sentiment-by-year",
        "/api/aggregates/bankruptcy-by-year?partition=held_out",
    ] {
        let first = ok(&app, uri).await;
        let second = ok(&app, uri).await;
        assert_eq!(first, second, "{uri}");
    }
}

#[test]
fn snapshot_load_names_the_missing_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let layout = Layout::new(dir.path());
    match Snapshot::load(&layout) {
        Err(SnapshotError::Missing(p)) => assert_eq!(p, layout.scores_full()),
        other => panic!("expected Missing, got {other:?}"),
    }

    let snap = snapshot();
    std::fs::write(layout.scores_full(), serde_json::to_string(&snap.scores_full).unwrap()).unwrap();
    std::fs::write(
        layout.scores_held_out(),
        serde_json::to_string(&snap.scores_full).unwrap(),
    )
    .unwrap();
    save_sentiment(&layout.sentiment(), &snap.sentiment).unwrap();
    save_dataset(&layout.dataset(), &snap.dataset).unwrap();
    assert!(matches!(
        Snapshot::load(&layout),
        Err(SnapshotError::WrongPartition { .. })
    ));

    std::fs::write(
        layout.scores_held_out(),
        serde_json::to_string(&snap.scores_held_out).unwrap(),
    )
    .unwrap();
    let loaded = Snapshot::load(&layout).unwrap();
    assert_eq!(loaded.scores_full, snap.scores_full);
    assert_eq!(loaded.dataset.rows.len(), snap.dataset.rows.len());
}
