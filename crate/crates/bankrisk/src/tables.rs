//! CSV artifacts: sentiment scores and the joined dataset.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use bankrisk_core::dataset::DropCounts;
use bankrisk_core::text::score_corpus;
use bankrisk_core::{Dataset, FeatureRow, Lexicon, SentimentScore, TermList, TextNormalizer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;

/// Column order of the dataset file.
pub const DATASET_COLUMNS: [&str; 15] = [
    "company_id",
    "year",
    "sector",
    "a",
    "b",
    "c",
    "d",
    "d_prime",
    "e",
    "z",
    "z_prime",
    "negative_pct",
    "positive_pct",
    "pos_to_neg",
    "label",
];

pub const SENTIMENT_COLUMNS: [&str; 10] = [
    "sector",
    "year",
    "positive_pct",
    "negative_pct",
    "pos_to_neg",
    "total_terms",
    "positive_count",
    "negative_count",
    "uncertainty_count",
    "litigious_count",
];

#[derive(Debug, Error)]
pub enum TableError {
    #[error("cannot open {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: header {found:?} does not match {expected:?}")]
    BadHeader {
        path: String,
        expected: Vec<&'static str>,
        found: Vec<String>,
    },
    #[error("{0}")]
    Csv(#[from] csv::Error),
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&'static str], path: &str) -> Result<(), TableError> {
    let found: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if found.iter().map(String::as_str).ne(expected.iter().copied()) {
        return Err(TableError::BadHeader {
            path: path.into(),
            expected: expected.to_vec(),
            found,
        });
    }
    Ok(())
}

fn open(path: &Path) -> Result<File, TableError> {
    File::open(path).map_err(|source| TableError::Io {
        path: path.into(),
        source,
    })
}

fn create(path: &Path) -> Result<File, TableError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|source| TableError::Io {
            path: parent.into(),
            source,
        })?;
    }
    File::create(path).map_err(|source| TableError::Io {
        path: path.into(),
        source,
    })
}

/// A (sector, year) group whose text produced no terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnscoredGroup {
    pub sector: String,
    pub year: i32,
    pub reason: String,
}

/// Preprocess each article (title and body) and score each group.
pub fn score_groups(
    corpus: &Corpus,
    normalizer: &TextNormalizer,
    lexicon: &Lexicon,
) -> (Vec<SentimentScore>, Vec<UnscoredGroup>) {
    let mut scores = Vec::new();
    let mut unscored = Vec::new();
    for (key, articles) in &corpus.groups {
        let mut terms = TermList::default();
        for a in articles {
            terms.extend(normalizer.preprocess(&a.text()));
        }
        match score_corpus(&terms, lexicon, &key.sector, key.year) {
            Ok(s) => scores.push(s),
            Err(e) => unscored.push(UnscoredGroup {
                sector: key.sector.clone(),
                year: key.year,
                reason: e.to_string(),
            }),
        }
    }
    (scores, unscored)
}

pub fn write_sentiment(scores: &[SentimentScore], writer: impl Write) -> Result<(), TableError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(SENTIMENT_COLUMNS)?;
    for s in scores {
        w.serialize(s)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_sentiment(reader: impl Read) -> Result<Vec<SentimentScore>, TableError> {
    let mut rdr = csv::Reader::from_reader(reader);
    check_header(&mut rdr, &SENTIMENT_COLUMNS, "sentiment")?;
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}

pub fn save_sentiment(path: &Path, scores: &[SentimentScore]) -> Result<(), TableError> {
    write_sentiment(scores, create(path)?)
}

pub fn load_sentiment(path: &Path) -> Result<Vec<SentimentScore>, TableError> {
    read_sentiment(open(path)?)
}

pub fn write_dataset(rows: &[FeatureRow], writer: impl Write) -> Result<(), TableError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(DATASET_COLUMNS)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Read dataset rows. Exclusion and drop counts are not part of the file
/// and come back as zero.
pub fn read_dataset(reader: impl Read) -> Result<Dataset, TableError> {
    let mut rdr = csv::Reader::from_reader(reader);
    check_header(&mut rdr, &DATASET_COLUMNS, "dataset")?;
    let rows: Vec<FeatureRow> = rdr.deserialize().collect::<Result<_, _>>()?;
    Ok(Dataset::from_rows(rows, 0, DropCounts::default()))
}

pub fn save_dataset(path: &Path, dataset: &Dataset) -> Result<(), TableError> {
    write_dataset(&dataset.rows, create(path)?)
}

pub fn load_dataset(path: &Path) -> Result<Dataset, TableError> {
    read_dataset(open(path)?)
}
