mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use common::fixture;

const CONFIG: &str = r#"
seed = 7

[training.mlp]
epochs = 60

[training.gbm]
stages = 20

[experiment]
models = ["logistic", "mlp"]
feature_sets = ["no_sentiment", "all_sentiment"]
"#;

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            fs::copy(entry.path(), target).unwrap();
        }
    }
}

fn data_root() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(fixture("records.csv"), dir.path().join("records.csv")).unwrap();
    fs::copy(fixture("toy_lexicon.csv"), dir.path().join("lexicon.csv")).unwrap();
    copy_dir(&fixture("toy_corpus"), &dir.path().join("articles"));
    fs::write(dir.path().join("bankrisk.toml"), CONFIG).unwrap();
    dir
}

fn bankrisk(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bankrisk"))
        .arg("--config")
        .arg(root.join("bankrisk.toml"))
        .arg("--data-root")
        .arg(root)
        .args(args)
        .env_remove("BANKRISK_DATA_ROOT")
        .output()
        .unwrap()
}

fn json(output: &Output) -> Value {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).unwrap()
}

#[test]
fn full_pipeline_produces_every_artifact() {
    let dir = data_root();
    let root = dir.path();

    let ingest = json(&bankrisk(root, &["ingest"]));
    assert_eq!(ingest["articles"], 50);
    assert_eq!(ingest["groups"].as_array().unwrap().len(), 16);
    assert!(ingest["errors"].as_array().unwrap().is_empty());
    assert!(root.join("corpus").join("provenance.json").is_file());

    let sentiment = json(&bankrisk(root, &["sentiment"]));
    assert_eq!(sentiment["scored_groups"], 16);
    assert_eq!(sentiment["lexicon_terms"], 20);

    let ratios = json(&bankrisk(root, &["ratios"]));
    assert_eq!(ratios["records"], 241);
    assert_eq!(ratios["scored"], 240);
    assert!(root.join("ratios.csv").is_file());

    let build = json(&bankrisk(root, &["build"]));
    assert_eq!(build["rows"], 231);
    assert!(root.join("mapping.json").is_file());

    let train = json(&bankrisk(
        root,
        &["train", "--model", "logistic", "--feature-set", "pos_to_neg"],
    ));
    assert_eq!(train["model"], "logistic");
    assert_eq!(train["feature_set"], "pos_to_neg");
    let train = json(&bankrisk(root, &["train"]));
    assert_eq!(train["model"], "mlp");
    let version = train["model_version"].as_str().unwrap().to_string();
    assert!(version.starts_with("mlp-all_sentiment-"));
    assert_eq!(
        train["train_rows"].as_u64().unwrap() + train["holdout_rows"].as_u64().unwrap(),
        231
    );

    let report = json(&bankrisk(root, &["evaluate"]));
    assert_eq!(report["cells"].as_array().unwrap().len(), 4 * 2 * 2);
    assert!(root.join("report.json").is_file());
    let text = bankrisk(root, &["evaluate", "--format", "text"]);
    assert!(text.status.success());
    let text = String::from_utf8(text.stdout).unwrap();
    assert_eq!(text, fs::read_to_string(root.join("report.txt")).unwrap());
    assert!(text.contains("2015"));

    let score = json(&bankrisk(root, &["score", "--threshold", "0.5"]));
    assert_eq!(score["model_version"], version.as_str());
    assert_eq!(score["full_rows"], 231);
    assert_eq!(score["threshold"], 0.5);
    let full: Value = serde_json::from_str(&fs::read_to_string(root.join("scores_full.json")).unwrap()).unwrap();
    assert_eq!(full["partition"], "full");
    let flagged = full["entries"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["flagged"] == true)
        .count();
    assert_eq!(score["full_flagged"], flagged);
    let held: Value = serde_json::from_str(&fs::read_to_string(root.join("scores_held_out.json")).unwrap()).unwrap();
    assert_eq!(
        held["entries"].as_array().unwrap().len() as u64,
        train["holdout_rows"].as_u64().unwrap()
    );
}

#[test]
fn identical_seeds_give_identical_reports() {
    let dir = data_root();
    let root = dir.path();
    for stage in ["ingest", "sentiment", "build"] {
        json(&bankrisk(root, &[stage]));
    }
    let first = json(&bankrisk(root, &["evaluate"]));
    let second = json(&bankrisk(root, &["evaluate"]));
    assert_eq!(first, second);
}

#[test]
fn data_root_can_come_from_the_environment() {
    let dir = data_root();
    let output = Command::new(env!("CARGO_BIN_EXE_bankrisk"))
        .arg("ratios")
        .env("BANKRISK_DATA_ROOT", dir.path())
        .output()
        .unwrap();
    let summary = json(&output);
    assert_eq!(summary["records"], 241);
    assert!(dir.path().join("ratios.csv").is_file());
}

#[test]
fn stages_report_missing_inputs_and_bad_arguments() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path();
    fs::write(empty.join("bankrisk.toml"), "").unwrap();

    let out = bankrisk(empty, &["build"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let out = bankrisk(empty, &["train", "--model", "forest"]);
    assert!(!out.status.success());

    let out = bankrisk(empty, &["serve", "--port", "0"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("scores_full.json"));

    fs::write(empty.join("bankrisk.toml"), "seed = \"seven\"").unwrap();
    let out = bankrisk(empty, &["ratios"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bankrisk.toml"));
}

#[test]
fn ingest_fails_when_the_article_source_is_unreachable() {
    let dir = data_root();
    let root = dir.path();
    fs::write(
        root.join("bankrisk.toml"),
        r#"
[fetcher]
kind = "http"
url_template = "http://127.0.0.1:1/?q={keyword}&y={year}"
delay_ms = 0
max_retries = 0
keywords = ["Aviation"]
years = [2013]
"#,
    )
    .unwrap();
    let out = bankrisk(root, &["ingest"]);
    assert!(!out.status.success());
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["errors"].as_array().unwrap().len(), 1);
}
