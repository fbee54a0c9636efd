//! Altman ratios, the original Z and revised Z′ scores, and distress zones.

use alloc::string::String;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Label;

/// Z = 1.2A + 1.4B + 3.3C + 0.6D + 1.0E, in (A, B, C, D, E) order.
pub const ORIGINAL_COEFFICIENTS: [f64; 5] = [1.2, 1.4, 3.3, 0.6, 1.0];
/// Z′ = 0.717A + 0.847B + 3.107C + 0.420D′ + 0.998E, in (A, B, C, D′, E) order.
pub const REVISED_COEFFICIENTS: [f64; 5] = [0.717, 0.847, 3.107, 0.420, 0.998];

/// (distress upper bound, safe lower bound) for the original model.
pub const ORIGINAL_THRESHOLDS: (f64, f64) = (1.8, 3.0);
/// (distress upper bound, safe lower bound) for the revised model.
pub const REVISED_THRESHOLDS: (f64, f64) = (1.21, 2.90);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RatioError {
    #[error("market-value ratio D is required for the original Z of a public company")]
    MissingMarketRatio,
    #[error("score {0} is not finite")]
    NonFiniteScore(f64),
}

/// One company-year of the balance-sheet fields feeding the Z scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinancialRecord {
    pub company_id: String,
    pub year: i32,
    pub sector_code: String,
    pub is_public: bool,
    pub working_capital: f64,
    pub total_assets: f64,
    pub retained_earnings: f64,
    pub ebit: f64,
    pub market_value_equity: f64,
    pub book_value_equity: f64,
    pub total_liabilities: f64,
    pub sales: f64,
    pub status: Label,
}

/// The five Altman ratios. `d` (market value of equity over liabilities)
/// exists only for public companies; `d_prime` uses book value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioVector {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: Option<f64>,
    pub d_prime: f64,
    pub e: f64,
}

impl RatioVector {
    fn original_inputs(&self, d: f64) -> [f64; 5] {
        [self.a, self.b, self.c, d, self.e]
    }

    fn revised_inputs(&self) -> [f64; 5] {
        [self.a, self.b, self.c, self.d_prime, self.e]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    NonPositiveTotalAssets,
    NonPositiveTotalLiabilities,
    NonFiniteInput,
    NonFiniteRatio,
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::NonPositiveTotalAssets => "non_positive_total_assets",
            Self::NonPositiveTotalLiabilities => "non_positive_total_liabilities",
            Self::NonFiniteInput => "non_finite_input",
            Self::NonFiniteRatio => "non_finite_ratio",
        })
    }
}

/// A record that cannot contribute ratios. This is a value, not an error:
/// batch callers count exclusions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZModel {
    Original,
    Revised,
}

/// Ordered `Distress < Grey < Safe`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Zone {
    Distress,
    Grey,
    Safe,
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Zone::Distress => "distress",
            Zone::Grey => "grey",
            Zone::Safe => "safe",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZScoreResult {
    /// Original Z; only computed for public companies.
    pub z: Option<f64>,
    pub z_prime: f64,
    pub selected_model: ZModel,
    pub zone: Zone,
}

impl ZScoreResult {
    /// The score that drove the zone.
    pub fn selected_score(&self) -> f64 {
        match (self.selected_model, self.z) {
            (ZModel::Original, Some(z)) => z,
            _ => self.z_prime,
        }
    }
}

/// Compute A–E from a record, or an [`Exclusion`] when a denominator is not
/// positive or any ratio comes out non-finite.
pub fn compute_ratios(record: &FinancialRecord) -> Result<RatioVector, Exclusion> {
    let exclude = |reason| Err(Exclusion { reason });
    let inputs = [
        record.working_capital,
        record.total_assets,
        record.retained_earnings,
        record.ebit,
        record.book_value_equity,
        record.total_liabilities,
        record.sales,
    ];
    if inputs.iter().any(|v| !v.is_finite()) || (record.is_public && !record.market_value_equity.is_finite()) {
        return exclude(ExclusionReason::NonFiniteInput);
    }
    if record.total_assets <= 0.0 {
        return exclude(ExclusionReason::NonPositiveTotalAssets);
    }
    if record.total_liabilities <= 0.0 {
        return exclude(ExclusionReason::NonPositiveTotalLiabilities);
    }

    let ta = record.total_assets;
    let tl = record.total_liabilities;
    let ratios = RatioVector {
        a: record.working_capital / ta,
        b: record.retained_earnings / ta,
        c: record.ebit / ta,
        d: record.is_public.then(|| record.market_value_equity / tl),
        d_prime: record.book_value_equity / tl,
        e: record.sales / ta,
    };
    let all_finite = [ratios.a, ratios.b, ratios.c, ratios.d_prime, ratios.e]
        .iter()
        .chain(ratios.d.as_ref())
        .all(|v| v.is_finite());
    if !all_finite {
        return exclude(ExclusionReason::NonFiniteRatio);
    }
    Ok(ratios)
}

fn weighted_sum(coefficients: &[f64; 5], inputs: &[f64; 5]) -> f64 {
    coefficients.iter().zip(inputs).map(|(c, x)| c * x).sum()
}

/// Revised Z′ (book-value variant); defined for every company.
pub fn revised_z(r: &RatioVector) -> f64 {
    weighted_sum(&REVISED_COEFFICIENTS, &r.revised_inputs())
}

/// Original Z, when D is known.
pub fn original_z(r: &RatioVector) -> Option<f64> {
    r.d.map(|d| weighted_sum(&ORIGINAL_COEFFICIENTS, &r.original_inputs(d)))
}

/// Original Z with D taken as 0 when it is absent, which is how a private
/// company's market-value ratio reads. Never used to pick a zone.
pub fn forced_original_z(r: &RatioVector) -> f64 {
    weighted_sum(&ORIGINAL_COEFFICIENTS, &r.original_inputs(r.d.unwrap_or(0.0)))
}

/// Evaluate Z (public only) and Z′, select the model by listing status and
/// classify the selected score.
pub fn z_scores(r: &RatioVector, is_public: bool) -> Result<ZScoreResult, RatioError> {
    let z_prime = revised_z(r);
    let (z, selected_model, score) = if is_public {
        let z = original_z(r).ok_or(RatioError::MissingMarketRatio)?;
        (Some(z), ZModel::Original, z)
    } else {
        (None, ZModel::Revised, z_prime)
    };
    let zone = classify_zone(score, selected_model)?;
    Ok(ZScoreResult {
        z,
        z_prime,
        selected_model,
        zone,
    })
}

/// Strict inequalities on both sides; scores exactly on a threshold are Grey.
pub fn classify_zone(score: f64, model: ZModel) -> Result<Zone, RatioError> {
    if !score.is_finite() {
        return Err(RatioError::NonFiniteScore(score));
    }
    let (distress, safe) = match model {
        ZModel::Original => ORIGINAL_THRESHOLDS,
        ZModel::Revised => REVISED_THRESHOLDS,
    };
    Ok(if score < distress {
        Zone::Distress
    } else if score > safe {
        Zone::Safe
    } else {
        Zone::Grey
    })
}
