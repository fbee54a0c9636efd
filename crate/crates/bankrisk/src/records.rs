//! Financial-record CSV input and the ratio table output.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use bankrisk_core::ratios::{compute_ratios, z_scores, ExclusionReason, ZModel};
use bankrisk_core::{FinancialRecord, Label, RatioVector, ZScoreResult, Zone};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const RECORD_COLUMNS: [&str; 13] = [
    "company_id",
    "year",
    "sector_code",
    "is_public",
    "working_capital",
    "total_assets",
    "retained_earnings",
    "ebit",
    "market_value_equity",
    "book_value_equity",
    "total_liabilities",
    "sales",
    "status",
];

#[derive(Debug, Error)]
pub enum RecordsError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("header must contain exactly the columns {expected:?}, found {found:?}")]
    BadHeader { expected: Vec<String>, found: Vec<String> },
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}: status must be `bankrupt` or `active`, found {value:?}")]
    BadStatus { line: u64, value: String },
    #[error("line {line}: is_public must be `true` or `false`, found {value:?}")]
    BadFlag { line: u64, value: String },
    #[error("line {line}: {field} is not a finite number")]
    NonFinite { line: u64, field: &'static str },
    #[error("line {line}: empty company_id")]
    EmptyCompanyId { line: u64 },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    company_id: String,
    year: i32,
    sector_code: String,
    is_public: String,
    working_capital: f64,
    total_assets: f64,
    retained_earnings: f64,
    ebit: f64,
    market_value_equity: f64,
    book_value_equity: f64,
    total_liabilities: f64,
    sales: f64,
    status: String,
}

fn parse_status(line: u64, value: &str) -> Result<Label, RecordsError> {
    match value {
        "bankrupt" => Ok(Label::Bankrupt),
        "active" => Ok(Label::NonBankrupt),
        _ => Err(RecordsError::BadStatus {
            line,
            value: value.into(),
        }),
    }
}

pub fn status_name(label: Label) -> &'static str {
    match label {
        Label::Bankrupt => "bankrupt",
        Label::NonBankrupt => "active",
    }
}

impl RawRecord {
    fn into_record(self, line: u64) -> Result<FinancialRecord, RecordsError> {
        if self.company_id.is_empty() {
            return Err(RecordsError::EmptyCompanyId { line });
        }
        let is_public = match self.is_public.as_str() {
            "true" => true,
            "false" => false,
            other => {
                return Err(RecordsError::BadFlag {
                    line,
                    value: other.into(),
                })
            }
        };
        let amounts = [
            ("working_capital", self.working_capital),
            ("total_assets", self.total_assets),
            ("retained_earnings", self.retained_earnings),
            ("ebit", self.ebit),
            ("market_value_equity", self.market_value_equity),
            ("book_value_equity", self.book_value_equity),
            ("total_liabilities", self.total_liabilities),
            ("sales", self.sales),
        ];
        if let Some((field, _)) = amounts.iter().find(|(_, v)| !v.is_finite()) {
            return Err(RecordsError::NonFinite { line, field });
        }
        Ok(FinancialRecord {
            status: parse_status(line, &self.status)?,
            company_id: self.company_id,
            year: self.year,
            sector_code: self.sector_code,
            is_public,
            working_capital: self.working_capital,
            total_assets: self.total_assets,
            retained_earnings: self.retained_earnings,
            ebit: self.ebit,
            market_value_equity: self.market_value_equity,
            book_value_equity: self.book_value_equity,
            total_liabilities: self.total_liabilities,
            sales: self.sales,
        })
    }
}

/// Parse records from CSV text with the fixed header.
pub fn read_records(reader: impl Read) -> Result<Vec<FinancialRecord>, RecordsError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let found: BTreeSet<&str> = header.iter().map(String::as_str).collect();
    let expected: BTreeSet<&str> = RECORD_COLUMNS.into_iter().collect();
    if found != expected || header.len() != RECORD_COLUMNS.len() {
        return Err(RecordsError::BadHeader {
            expected: RECORD_COLUMNS.iter().map(|s| s.to_string()).collect(),
            found: header,
        });
    }
    let mut out = Vec::new();
    for result in rdr.deserialize::<RawRecord>() {
        let raw = result.map_err(|e| RecordsError::Malformed {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = out.len() as u64 + 2;
        out.push(raw.into_record(line)?);
    }
    Ok(out)
}

pub fn load_records(path: &Path) -> Result<Vec<FinancialRecord>, RecordsError> {
    let file = File::open(path).map_err(|source| RecordsError::Io {
        path: path.into(),
        source,
    })?;
    read_records(file)
}

pub fn write_records(records: &[FinancialRecord], writer: impl Write) -> Result<(), RecordsError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RECORD_COLUMNS)?;
    for r in records {
        w.write_record([
            r.company_id.clone(),
            r.year.to_string(),
            r.sector_code.clone(),
            r.is_public.to_string(),
            r.working_capital.to_string(),
            r.total_assets.to_string(),
            r.retained_earnings.to_string(),
            r.ebit.to_string(),
            r.market_value_equity.to_string(),
            r.book_value_equity.to_string(),
            r.total_liabilities.to_string(),
            r.sales.to_string(),
            status_name(r.status).to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// One line of the ratio table: the ratios and scores of a record, or the
/// reason it was excluded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub company_id: String,
    pub year: i32,
    pub is_public: bool,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub d_prime: Option<f64>,
    pub e: Option<f64>,
    pub z: Option<f64>,
    pub z_prime: Option<f64>,
    pub selected_model: Option<String>,
    pub zone: Option<String>,
    pub excluded: Option<String>,
}

/// Ratios and scores per record, in record order. The second element of
/// each pair is `None` for excluded records.
pub fn ratio_table(records: &[FinancialRecord]) -> Vec<(RatioRow, Option<(RatioVector, ZScoreResult)>)> {
    records
        .iter()
        .map(|rec| {
            let mut row = RatioRow {
                company_id: rec.company_id.clone(),
                year: rec.year,
                is_public: rec.is_public,
                a: None,
                b: None,
                c: None,
                d: None,
                d_prime: None,
                e: None,
                z: None,
                z_prime: None,
                selected_model: None,
                zone: None,
                excluded: None,
            };
            let scored = compute_ratios(rec).map_err(|ex| ex.reason).and_then(|r| {
                z_scores(&r, rec.is_public)
                    .map(|z| (r, z))
                    .map_err(|_| ExclusionReason::NonFiniteRatio)
            });
            match scored {
                Ok((r, z)) => {
                    row.a = Some(r.a);
                    row.b = Some(r.b);
                    row.c = Some(r.c);
                    row.d = r.d;
                    row.d_prime = Some(r.d_prime);
                    row.e = Some(r.e);
                    row.z = z.z;
                    row.z_prime = Some(z.z_prime);
                    row.selected_model = Some(
                        match z.selected_model {
                            ZModel::Original => "original",
                            ZModel::Revised => "revised",
                        }
                        .into(),
                    );
                    row.zone = Some(z.zone.to_string());
                    (row, Some((r, z)))
                }
                Err(reason) => {
                    row.excluded = Some(reason.to_string());
                    (row, None)
                }
            }
        })
        .collect()
}

pub fn write_ratio_table(rows: &[RatioRow], writer: impl Write) -> Result<(), RecordsError> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Count of records per zone among the scored ones.
pub fn zone_counts<'a>(rows: impl IntoIterator<Item = &'a ZScoreResult>) -> [(Zone, usize); 3] {
    let mut counts = [(Zone::Distress, 0), (Zone::Grey, 0), (Zone::Safe, 0)];
    for z in rows {
        if let Some(slot) = counts.iter_mut().find(|(zone, _)| *zone == z.zone) {
            slot.1 += 1;
        }
    }
    counts
}
