//! Sentiment lexicon files.
//!
//! Two layouts are accepted:
//!
//! * master-dictionary style: a header row with a `Word` column and integer
//!   `Negative`, `Positive`, `Uncertainty`, `Litigious` columns, where any
//!   nonzero value means membership (other columns are ignored);
//! * simple: headerless `word,category` rows, one category per row.

use std::fs;
use std::path::{Path, PathBuf};

use bankrisk_core::text::{Category, CategorySet, LexiconError};
use bankrisk_core::{Lexicon, TextNormalizer};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LexiconLoadError {
    #[error("cannot read lexicon {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: unknown category {name:?}")]
    UnknownCategory { line: u64, name: String },
    #[error("lexicon has no usable entries")]
    Empty,
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexiconFormat {
    MasterDictionary,
    Simple,
}

fn csv_error(e: csv::Error) -> LexiconLoadError {
    LexiconLoadError::Malformed {
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}

fn detect(first: &csv::StringRecord) -> LexiconFormat {
    let is_header = first.get(0).is_some_and(|f| f.trim().eq_ignore_ascii_case("word"))
        && first.iter().any(|f| f.trim().parse::<Category>().is_ok());
    if is_header {
        LexiconFormat::MasterDictionary
    } else {
        LexiconFormat::Simple
    }
}

/// Raw (word, categories) rows before normalization.
pub fn parse_rows(text: &str) -> Result<(LexiconFormat, Vec<(String, CategorySet)>), LexiconLoadError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = rdr.records();
    let first = match records.next() {
        None => return Err(LexiconLoadError::Empty),
        Some(r) => r.map_err(csv_error)?,
    };
    let format = detect(&first);
    let mut rows = Vec::new();
    match format {
        LexiconFormat::MasterDictionary => {
            let mut columns = Vec::new();
            for c in Category::ALL {
                let ix = first
                    .iter()
                    .position(|f| f.trim().parse::<Category>() == Ok(c))
                    .ok_or_else(|| LexiconLoadError::Malformed {
                        line: 1,
                        message: format!("header lacks a {c} column"),
                    })?;
                columns.push((c, ix));
            }
            for rec in records {
                let rec = rec.map_err(csv_error)?;
                let line = rec.position().map_or(0, |p| p.line());
                let word = rec.get(0).unwrap_or("").trim().to_string();
                let mut set = CategorySet::default();
                for &(c, ix) in &columns {
                    let raw = rec.get(ix).unwrap_or("").trim();
                    let v: i64 = raw.parse().map_err(|_| LexiconLoadError::Malformed {
                        line,
                        message: format!("{c} value {raw:?} is not an integer"),
                    })?;
                    if v != 0 {
                        set.insert(c);
                    }
                }
                rows.push((word, set));
            }
        }
        LexiconFormat::Simple => {
            for rec in std::iter::once(Ok(first)).chain(records) {
                let rec = rec.map_err(csv_error)?;
                let line = rec.position().map_or(0, |p| p.line());
                if rec.len() != 2 {
                    return Err(LexiconLoadError::Malformed {
                        line,
                        message: format!("expected word,category, found {} fields", rec.len()),
                    });
                }
                let category: Category = rec[1].parse().map_err(|_| LexiconLoadError::UnknownCategory {
                    line,
                    name: rec[1].trim().to_string(),
                })?;
                let mut set = CategorySet::default();
                set.insert(category);
                rows.push((rec[0].trim().to_string(), set));
            }
        }
    }
    Ok((format, rows))
}

pub fn parse_lexicon(text: &str, normalizer: &TextNormalizer) -> Result<Lexicon, LexiconLoadError> {
    let (_, rows) = parse_rows(text)?;
    Lexicon::from_rows(rows, normalizer).map_err(|e| match e {
        LexiconError::EmptyLexicon => LexiconLoadError::Empty,
        LexiconError::UnknownCategory(name) => LexiconLoadError::UnknownCategory { line: 0, name },
    })
}

pub fn load_lexicon(path: &Path, normalizer: &TextNormalizer) -> Result<Lexicon, LexiconLoadError> {
    let text = fs::read_to_string(path).map_err(|source| LexiconLoadError::Unreadable {
        path: path.into(),
        source,
    })?;
    parse_lexicon(&text, normalizer)
}
