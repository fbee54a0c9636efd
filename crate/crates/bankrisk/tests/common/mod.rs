#![allow(dead_code)]

use std::path::PathBuf;

use bankrisk::records::load_records;
use bankrisk_core::dataset::{build_from_records, map_sectors, sector_frequencies, DropCounts};
use bankrisk_core::{Dataset, FeatureRow, Label, SentimentScore};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

#[derive(Debug, serde::Deserialize)]
pub struct PublishedRow {
    pub sector: String,
    pub year: i32,
    pub positive_pct: f64,
    pub negative_pct: f64,
    pub pos_to_neg: f64,
}

pub fn published_sentiment() -> Vec<PublishedRow> {
    let mut rdr = csv::Reader::from_path(fixture("published_sentiment.csv")).unwrap();
    rdr.deserialize().collect::<Result<_, _>>().unwrap()
}

/// Published percentages as sentiment scores over 10,000 terms per group.
pub fn published_sentiment_scores() -> Vec<SentimentScore> {
    published_sentiment()
        .into_iter()
        .map(|r| {
            let positive = (r.positive_pct * 100.0).round() as u64;
            let negative = (r.negative_pct * 100.0).round() as u64;
            SentimentScore {
                sector: r.sector,
                year: r.year,
                positive_pct: r.positive_pct,
                negative_pct: r.negative_pct,
                pos_to_neg: Some(positive as f64 / negative as f64),
                total_terms: 10_000,
                positive_count: positive,
                negative_count: negative,
                uncertainty_count: 0,
                litigious_count: 0,
            }
        })
        .collect()
}

pub fn keywords() -> Vec<String> {
    ["iGaming", "Pharmaceuticals", "Aviation", "Tourism"]
        .map(String::from)
        .to_vec()
}

/// The bundled records joined with the published sentiment.
pub fn records_dataset() -> Dataset {
    let records = load_records(&fixture("records.csv")).unwrap();
    let mapping = map_sectors(&sector_frequencies(&records), &keywords(), 0, None).unwrap();
    build_from_records(&records, &mapping, &published_sentiment_scores()).unwrap()
}

/// `n` rows, a `bankrupt_share` of them bankrupt, drawn from two isotropic
/// unit-variance Gaussians in eight dimensions whose means are
/// `separation` standard deviations apart.
pub fn two_gaussians(seed: u64, n: usize, bankrupt_share: f64, separation: f64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let shift = separation / 8f64.sqrt();
    let n_bankrupt = (n as f64 * bankrupt_share).round() as usize;
    let rows = (0..n)
        .map(|i| {
            let label = if i < n_bankrupt {
                Label::Bankrupt
            } else {
                Label::NonBankrupt
            };
            let mean = if label.is_bankrupt() { shift } else { 0.0 };
            let mut f = [0.0; 8];
            for v in &mut f {
                *v = mean + noise.sample(&mut rng);
            }
            FeatureRow {
                company_id: format!("G{i:04}"),
                year: 2013,
                sector: "Aviation".into(),
                a: f[0],
                b: f[1],
                c: f[2],
                d: f[3],
                d_prime: f[4],
                e: f[5],
                z: f[6],
                z_prime: f[7],
                negative_pct: 1.41,
                positive_pct: 0.92,
                pos_to_neg: 0.653,
                label,
            }
        })
        .collect();
    Dataset::from_rows(rows, 0, DropCounts::default())
}

/// Assign each test row to the closer class centroid of the training rows.
pub fn nearest_centroid(train: &[(Vec<f64>, Label)], test: &[Vec<f64>]) -> Vec<Label> {
    let centroid = |want: Label| {
        let members: Vec<&Vec<f64>> = train.iter().filter(|(_, l)| *l == want).map(|(x, _)| x).collect();
        let dim = members[0].len();
        (0..dim)
            .map(|j| members.iter().map(|x| x[j]).sum::<f64>() / members.len() as f64)
            .collect::<Vec<f64>>()
    };
    let (cb, cn) = (centroid(Label::Bankrupt), centroid(Label::NonBankrupt));
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
    test.iter()
        .map(|x| {
            if dist(x, &cb) < dist(x, &cn) {
                Label::Bankrupt
            } else {
                Label::NonBankrupt
            }
        })
        .collect()
}
