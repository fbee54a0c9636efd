//! Sector mapping, the financial + sentiment feature join, class imbalance
//! and stratified splits.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ratios::{self, Exclusion, FinancialRecord, RatioVector};
use crate::text::SentimentScore;
use crate::Label;

/// The four sector keywords searched for news, in canonical order.
pub const DEFAULT_KEYWORDS: [&str; 4] = ["iGaming", "Pharmaceuticals", "Aviation", "Tourism"];

/// Number of sectors carried through the join.
pub const SECTOR_COUNT: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("need at least {SECTOR_COUNT} distinct sector codes, found {0}")]
    TooFewSectors(usize),
    #[error("need exactly {SECTOR_COUNT} distinct keywords, found {0}")]
    BadKeywords(usize),
    #[error("explicit mapping is not a bijection onto {SECTOR_COUNT} keywords")]
    NotBijective,
    #[error("records ({records}) and ratio results ({ratios}) differ in length")]
    LengthMismatch { records: usize, ratios: usize },
    #[error("no rows survived the join")]
    EmptyDataset,
    #[error("year {0} has no rows")]
    AbsentYear(i32),
    #[error("train fraction {0} must lie strictly between 0 and 1")]
    BadFraction(f64),
    #[error("year {year} has no {label:?} rows to stratify")]
    Stratification { year: i32, label: Label },
    #[error("unknown feature set {0:?}")]
    UnknownFeatureSet(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingSource {
    Random,
    Explicit,
}

/// Bijection from the four largest sector codes to the news keywords.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorMapping {
    pub pairs: BTreeMap<String, String>,
    pub seed: u64,
    pub source: MappingSource,
}

impl SectorMapping {
    pub fn keyword(&self, sector_code: &str) -> Option<&str> {
        self.pairs.get(sector_code).map(String::as_str)
    }

    pub fn code_for(&self, keyword: &str) -> Option<&str> {
        self.pairs
            .iter()
            .find(|(_, k)| k.as_str() == keyword)
            .map(|(c, _)| c.as_str())
    }
}

/// Record count per sector code.
pub fn sector_frequencies(records: &[FinancialRecord]) -> BTreeMap<String, usize> {
    let mut freq = BTreeMap::new();
    for r in records {
        *freq.entry(r.sector_code.clone()).or_insert(0) += 1;
    }
    freq
}

/// Pair the four most frequent codes (ties broken by code) with the
/// keywords in a seeded shuffled order. An explicit mapping replaces the
/// random one entirely once it is checked to be a bijection.
pub fn map_sectors(
    frequencies: &BTreeMap<String, usize>,
    keywords: &[String],
    seed: u64,
    explicit: Option<&BTreeMap<String, String>>,
) -> Result<SectorMapping, DatasetError> {
    let distinct: BTreeSet<&String> = keywords.iter().collect();
    if keywords.len() != SECTOR_COUNT || distinct.len() != SECTOR_COUNT {
        return Err(DatasetError::BadKeywords(distinct.len()));
    }
    if let Some(explicit) = explicit {
        let targets: BTreeSet<&String> = explicit.values().collect();
        if explicit.len() != SECTOR_COUNT || targets.len() != SECTOR_COUNT {
            return Err(DatasetError::NotBijective);
        }
        return Ok(SectorMapping {
            pairs: explicit.clone(),
            seed,
            source: MappingSource::Explicit,
        });
    }
    if frequencies.len() < SECTOR_COUNT {
        return Err(DatasetError::TooFewSectors(frequencies.len()));
    }
    let mut ranked: Vec<(&String, usize)> = frequencies.iter().map(|(c, n)| (c, *n)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let mut shuffled: Vec<&String> = keywords.iter().collect();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let pairs = ranked
        .iter()
        .take(SECTOR_COUNT)
        .zip(shuffled)
        .map(|((code, _), kw)| ((*code).clone(), kw.clone()))
        .collect();
    Ok(SectorMapping {
        pairs,
        seed,
        source: MappingSource::Random,
    })
}

/// One company-year with financial and sector-year sentiment features.
///
/// Private companies have no market-value ratio; their `d` is 0 and `z` is
/// the original formula evaluated with that 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub company_id: String,
    pub year: i32,
    /// News keyword the row's sector code maps to.
    pub sector: String,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub d_prime: f64,
    pub e: f64,
    pub z: f64,
    pub z_prime: f64,
    pub negative_pct: f64,
    pub positive_pct: f64,
    pub pos_to_neg: f64,
    pub label: Label,
}

/// Which sentiment columns accompany the eight financial features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSet {
    NoSentiment,
    NegativePct,
    PositivePct,
    PosToNeg,
    AllSentiment,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 5] = [
        FeatureSet::NoSentiment,
        FeatureSet::NegativePct,
        FeatureSet::PositivePct,
        FeatureSet::PosToNeg,
        FeatureSet::AllSentiment,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureSet::NoSentiment => "no_sentiment",
            FeatureSet::NegativePct => "negative_pct",
            FeatureSet::PositivePct => "positive_pct",
            FeatureSet::PosToNeg => "pos_to_neg",
            FeatureSet::AllSentiment => "all_sentiment",
        }
    }

    pub fn dimension(self) -> usize {
        FINANCIAL_FEATURES
            + match self {
                FeatureSet::NoSentiment => 0,
                FeatureSet::AllSentiment => 3,
                _ => 1,
            }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureSet {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureSet::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| DatasetError::UnknownFeatureSet(s.to_string()))
    }
}

/// a, b, c, d, d′, e, z, z′.
pub const FINANCIAL_FEATURES: usize = 8;

impl FeatureRow {
    /// Numeric features in column order: a, b, c, d, d′, e, z, z′, then the
    /// selected sentiment columns (negative %, positive %, ratio).
    pub fn features(&self, set: FeatureSet) -> Vec<f64> {
        let mut v = Vec::with_capacity(set.dimension());
        v.extend_from_slice(&[
            self.a,
            self.b,
            self.c,
            self.d,
            self.d_prime,
            self.e,
            self.z,
            self.z_prime,
        ]);
        match set {
            FeatureSet::NoSentiment => {}
            FeatureSet::NegativePct => v.push(self.negative_pct),
            FeatureSet::PositivePct => v.push(self.positive_pct),
            FeatureSet::PosToNeg => v.push(self.pos_to_neg),
            FeatureSet::AllSentiment => v.extend_from_slice(&[self.negative_pct, self.positive_pct, self.pos_to_neg]),
        }
        v
    }

    pub fn sentiment_triple(&self) -> (f64, f64, f64) {
        (self.negative_pct, self.positive_pct, self.pos_to_neg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Imbalance {
    pub bankrupt_pct: f64,
    pub nonbankrupt_pct: f64,
}

/// Rows dropped during the join, by cause.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropCounts {
    pub unmapped_sector: usize,
    pub missing_sentiment: usize,
    pub zero_negative_sentiment: usize,
    pub invalid_score: usize,
}

impl DropCounts {
    pub fn total(&self) -> usize {
        self.unmapped_sector + self.missing_sentiment + self.zero_negative_sentiment + self.invalid_score
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub rows: Vec<FeatureRow>,
    /// Records whose ratios could not be computed.
    pub exclusion_count: usize,
    pub dropped: DropCounts,
    pub imbalance: BTreeMap<i32, Imbalance>,
}

impl Dataset {
    /// Assemble from rows, recomputing the per-year imbalance table.
    pub fn from_rows(rows: Vec<FeatureRow>, exclusion_count: usize, dropped: DropCounts) -> Self {
        let mut ds = Dataset {
            rows,
            exclusion_count,
            dropped,
            imbalance: BTreeMap::new(),
        };
        let years: BTreeSet<i32> = ds.rows.iter().map(|r| r.year).collect();
        for y in years {
            if let Ok(imb) = imbalance_stats(&ds, y) {
                ds.imbalance.insert(y, imb);
            }
        }
        ds
    }

    pub fn years(&self) -> Vec<i32> {
        self.imbalance.keys().copied().collect()
    }

    /// Indices of the rows for one year, in dataset order.
    pub fn year_indices(&self, year: i32) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.year == year)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Join records, their ratio outcomes and sector-year sentiment.
///
/// `ratio_results[i]` must belong to `records[i]`. Every input record ends
/// up as a row, an exclusion, or a counted drop.
pub fn build_dataset(
    records: &[FinancialRecord],
    ratio_results: &[Result<RatioVector, Exclusion>],
    mapping: &SectorMapping,
    sentiment: &[SentimentScore],
) -> Result<Dataset, DatasetError> {
    if records.len() != ratio_results.len() {
        return Err(DatasetError::LengthMismatch {
            records: records.len(),
            ratios: ratio_results.len(),
        });
    }
    let by_group: BTreeMap<(&str, i32), &SentimentScore> =
        sentiment.iter().map(|s| ((s.sector.as_str(), s.year), s)).collect();

    let mut rows = Vec::new();
    let mut exclusions = 0;
    let mut dropped = DropCounts::default();
    for (record, ratio) in records.iter().zip(ratio_results) {
        let ratio = match ratio {
            Ok(r) => r,
            Err(_) => {
                exclusions += 1;
                continue;
            }
        };
        let Some(keyword) = mapping.keyword(&record.sector_code) else {
            dropped.unmapped_sector += 1;
            continue;
        };
        let Some(score) = by_group.get(&(keyword, record.year)) else {
            dropped.missing_sentiment += 1;
            continue;
        };
        let Some(pos_to_neg) = score.pos_to_neg else {
            dropped.zero_negative_sentiment += 1;
            continue;
        };
        let Ok(z) = ratios::z_scores(ratio, record.is_public) else {
            dropped.invalid_score += 1;
            continue;
        };
        let row = FeatureRow {
            company_id: record.company_id.clone(),
            year: record.year,
            sector: keyword.to_string(),
            a: ratio.a,
            b: ratio.b,
            c: ratio.c,
            d: ratio.d.unwrap_or(0.0),
            d_prime: ratio.d_prime,
            e: ratio.e,
            z: z.z.unwrap_or_else(|| ratios::forced_original_z(ratio)),
            z_prime: z.z_prime,
            negative_pct: score.negative_pct,
            positive_pct: score.positive_pct,
            pos_to_neg,
            label: record.status,
        };
        if row.features(FeatureSet::AllSentiment).iter().all(|v| v.is_finite()) {
            rows.push(row);
        } else {
            dropped.invalid_score += 1;
        }
    }
    if rows.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    Ok(Dataset::from_rows(rows, exclusions, dropped))
}

/// Convenience: compute ratios and join in one go.
pub fn build_from_records(
    records: &[FinancialRecord],
    mapping: &SectorMapping,
    sentiment: &[SentimentScore],
) -> Result<Dataset, DatasetError> {
    let ratios: Vec<_> = records.iter().map(ratios::compute_ratios).collect();
    build_dataset(records, &ratios, mapping, sentiment)
}

pub fn imbalance_stats(dataset: &Dataset, year: i32) -> Result<Imbalance, DatasetError> {
    let (mut bankrupt, mut total) = (0usize, 0usize);
    for r in dataset.rows.iter().filter(|r| r.year == year) {
        total += 1;
        bankrupt += usize::from(r.label.is_bankrupt());
    }
    if total == 0 {
        return Err(DatasetError::AbsentYear(year));
    }
    let bankrupt_pct = 100.0 * bankrupt as f64 / total as f64;
    Ok(Imbalance {
        bankrupt_pct,
        nonbankrupt_pct: 100.0 * (total - bankrupt) as f64 / total as f64,
    })
}

/// Dataset row indices for a train/test partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified split of one year's rows: each class is shuffled with the
/// seed and `floor(n * train_fraction)` of it goes to training.
pub fn split_train_test(dataset: &Dataset, year: i32, train_fraction: f64, seed: u64) -> Result<Split, DatasetError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DatasetError::BadFraction(train_fraction));
    }
    let indices = dataset.year_indices(year);
    if indices.is_empty() {
        return Err(DatasetError::AbsentYear(year));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(crate::math::derive_seed(seed, year as u64));
    let mut split = Split {
        train: Vec::new(),
        test: Vec::new(),
    };
    for label in [Label::Bankrupt, Label::NonBankrupt] {
        let mut class: Vec<usize> = indices
            .iter()
            .copied()
            .filter(|&i| dataset.rows[i].label == label)
            .collect();
        if class.is_empty() {
            return Err(DatasetError::Stratification { year, label });
        }
        class.shuffle(&mut rng);
        // tolerance so that e.g. 90 * 0.7 floors to 63, not 62
        let n_train = (libm::floor(class.len() as f64 * train_fraction + 1e-9) as usize).min(class.len());
        split.train.extend_from_slice(&class[..n_train]);
        split.test.extend_from_slice(&class[n_train..]);
    }
    split.train.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

/// Cross-year partition: every row of `train_year` trains, every row of
/// `test_year` tests.
pub fn split_cross_year(dataset: &Dataset, train_year: i32, test_year: i32) -> Result<Split, DatasetError> {
    let train = dataset.year_indices(train_year);
    let test = dataset.year_indices(test_year);
    if train.is_empty() {
        return Err(DatasetError::AbsentYear(train_year));
    }
    if test.is_empty() {
        return Err(DatasetError::AbsentYear(test_year));
    }
    Ok(Split { train, test })
}
