use std::collections::{BTreeSet, HashMap};

use bankrisk_core::scoring::Partition;
use bankrisk_core::{ScoreEntry, SentimentScore};

use super::Snapshot;

/// Conjunctive query filters. Unknown parameter names are ignored; a
/// known parameter with a value outside the snapshot is rejected.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Filter {
    pub sector: Option<String>,
    pub year: Option<i32>,
    pub flagged: Option<bool>,
    pub company_id: Option<String>,
    pub partition: Option<Partition>,
}

impl Filter {
    pub fn parse(params: &HashMap<String, String>, snapshot: &Snapshot) -> Result<Self, String> {
        let mut f = Filter::default();
        if let Some(s) = params.get("sector") {
            if !snapshot.sectors.contains(s) {
                return Err(format!("unknown sector {s:?}"));
            }
            f.sector = Some(s.clone());
        }
        if let Some(y) = params.get("year") {
            let year: i32 = y.parse().map_err(|_| format!("year {y:?} is not an integer"))?;
            if !snapshot.years.contains(&year) {
                return Err(format!("unknown year {year}"));
            }
            f.year = Some(year);
        }
        if let Some(v) = params.get("flagged") {
            f.flagged = Some(match v.as_str() {
                "true" => true,
                "false" => false,
                _ => return Err(format!("flagged must be true or false, got {v:?}")),
            });
        }
        if let Some(id) = params.get("company_id") {
            if !snapshot.companies.contains(id) {
                return Err(format!("unknown company_id {id:?}"));
            }
            f.company_id = Some(id.clone());
        }
        if let Some(p) = params.get("partition") {
            f.partition = Some(match p.as_str() {
                "full" => Partition::Full,
                "held_out" => Partition::HeldOut,
                _ => return Err(format!("partition must be full or held_out, got {p:?}")),
            });
        }
        Ok(f)
    }

    pub fn partition(&self) -> Partition {
        self.partition.unwrap_or(Partition::Full)
    }

    fn group_matches(&self, sector: &str, year: i32) -> bool {
        self.sector.as_deref().is_none_or(|s| s == sector) && self.year.is_none_or(|y| y == year)
    }

    pub fn entry_matches(&self, e: &ScoreEntry) -> bool {
        self.group_matches(&e.sector, e.year)
            && self.flagged.is_none_or(|f| f == e.flagged)
            && self.company_id.as_deref().is_none_or(|c| c == e.company_id)
    }

    /// A sentiment group passes company and flag filters when some score
    /// entry in that sector-year passes them.
    pub fn sentiment_matches(&self, s: &SentimentScore, entries: &[ScoreEntry]) -> bool {
        if !self.group_matches(&s.sector, s.year) {
            return false;
        }
        if self.flagged.is_none() && self.company_id.is_none() {
            return true;
        }
        entries
            .iter()
            .any(|e| e.sector == s.sector && e.year == s.year && self.entry_matches(e))
    }
}

/// Values the filters are validated against.
pub(super) fn domain<'a>(
    entries: impl Iterator<Item = &'a ScoreEntry> + Clone,
    sentiment: &[SentimentScore],
    companies: impl Iterator<Item = &'a str>,
) -> (BTreeSet<String>, BTreeSet<i32>, BTreeSet<String>) {
    let mut sectors: BTreeSet<String> = entries.clone().map(|e| e.sector.clone()).collect();
    sectors.extend(sentiment.iter().map(|s| s.sector.clone()));
    let mut years: BTreeSet<i32> = entries.clone().map(|e| e.year).collect();
    years.extend(sentiment.iter().map(|s| s.year));
    let mut ids: BTreeSet<String> = entries.map(|e| e.company_id.clone()).collect();
    ids.extend(companies.map(str::to_owned));
    (sectors, years, ids)
}
