use alloc::string::String;

use serde::{Deserialize, Serialize};

use super::{Category, Lexicon, TermList, TextError};

/// Sentiment variables for one (sector, year) corpus.
///
/// Uncertainty and litigious counts are kept for reporting but are not model
/// features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore {
    pub sector: String,
    pub year: i32,
    pub positive_pct: f64,
    pub negative_pct: f64,
    /// positive_count / negative_count; absent when there are no negatives.
    pub pos_to_neg: Option<f64>,
    pub total_terms: u64,
    pub positive_count: u64,
    pub negative_count: u64,
    #[serde(default)]
    pub uncertainty_count: u64,
    #[serde(default)]
    pub litigious_count: u64,
}

/// Positive-to-negative ratio; `None` when the negative side is zero.
/// Works on raw counts or on percentages of the same total.
pub fn pos_to_neg_ratio(positive: f64, negative: f64) -> Option<f64> {
    (negative > 0.0).then(|| positive / negative)
}

/// Count category hits over every term occurrence.
pub fn score_corpus(terms: &TermList, lexicon: &Lexicon, sector: &str, year: i32) -> Result<SentimentScore, TextError> {
    if terms.is_empty() {
        return Err(TextError::EmptyCorpus);
    }
    let mut counts = [0u64; 4];
    for term in terms {
        let cats = lexicon.categories(term);
        for (slot, c) in counts.iter_mut().zip(Category::ALL) {
            if cats.contains(c) {
                *slot += 1;
            }
        }
    }
    let [positive, negative, uncertainty, litigious] = counts;
    let total = terms.len() as u64;
    let pct = |n: u64| 100.0 * n as f64 / total as f64;
    Ok(SentimentScore {
        sector: sector.into(),
        year,
        positive_pct: pct(positive),
        negative_pct: pct(negative),
        pos_to_neg: pos_to_neg_ratio(positive as f64, negative as f64),
        total_terms: total,
        positive_count: positive,
        negative_count: negative,
        uncertainty_count: uncertainty,
        litigious_count: litigious,
    })
}
