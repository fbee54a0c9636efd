//! Confusion counts, the derived rates, and the experiment grid.
//!
//! Bankrupt is the class of interest. The matrix uses four self-describing
//! counts rather than TP/FP/TN/FN so the rates cannot be bound to the wrong
//! class: [`type_i_error`] is the share of truly bankrupt companies
//! classified as non-bankrupt, [`false_alarm_rate`] the share of healthy
//! companies classified as bankrupt.

mod experiment;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Label;

pub use experiment::{
    run_cell, run_cross_year_cell, run_experiment, train_with_imbalance_treatment, CellMetrics, CellOutcome,
    CellResult, CrossYearResult, ExperimentConfig, ExperimentError, ExperimentReport, TreatedModel,
};

/// Hard-classification threshold used by the experiment grid.
pub const GRID_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("labels ({labels}) and probabilities ({probabilities}) differ in length")]
    LengthMismatch { labels: usize, probabilities: usize },
    #[error("probability {0} at row {1} is outside (0, 1)")]
    BadProbability(f64, usize),
    #[error("confusion matrix is empty")]
    Empty,
    #[error("no truly bankrupt rows")]
    NoBankrupt,
    #[error("no truly non-bankrupt rows")]
    NoNonBankrupt,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    /// Bankrupt, predicted bankrupt.
    pub bankrupt_correct: usize,
    /// Bankrupt, predicted non-bankrupt.
    pub bankrupt_missed: usize,
    /// Non-bankrupt, predicted non-bankrupt.
    pub nonbankrupt_correct: usize,
    /// Non-bankrupt, predicted bankrupt.
    pub nonbankrupt_false_alarm: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.bankrupt_correct + self.bankrupt_missed + self.nonbankrupt_correct + self.nonbankrupt_false_alarm
    }

    pub fn misclassified(&self) -> usize {
        self.bankrupt_missed + self.nonbankrupt_false_alarm
    }

    pub fn record(&mut self, truth: Label, predicted_bankrupt: bool) {
        match (truth.is_bankrupt(), predicted_bankrupt) {
            (true, true) => self.bankrupt_correct += 1,
            (true, false) => self.bankrupt_missed += 1,
            (false, false) => self.nonbankrupt_correct += 1,
            (false, true) => self.nonbankrupt_false_alarm += 1,
        }
    }
}

/// Tally predictions; a row is predicted bankrupt iff its probability is
/// strictly above `threshold`.
pub fn confusion(labels: &[Label], probabilities: &[f64], threshold: f64) -> Result<ConfusionMatrix, MetricError> {
    if labels.len() != probabilities.len() {
        return Err(MetricError::LengthMismatch {
            labels: labels.len(),
            probabilities: probabilities.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (row, (l, p)) in labels.iter().zip(probabilities).enumerate() {
        if !(*p > 0.0 && *p < 1.0) {
            return Err(MetricError::BadProbability(*p, row));
        }
        cm.record(*l, *p > threshold);
    }
    Ok(cm)
}

pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64, MetricError> {
    let total = cm.total();
    if total == 0 {
        return Err(MetricError::Empty);
    }
    Ok((cm.bankrupt_correct + cm.nonbankrupt_correct) as f64 / total as f64)
}

/// Bankrupt companies classified as non-bankrupt, over all bankrupt rows.
pub fn type_i_error(cm: &ConfusionMatrix) -> Result<f64, MetricError> {
    let n = cm.bankrupt_correct + cm.bankrupt_missed;
    if n == 0 {
        return Err(MetricError::NoBankrupt);
    }
    Ok(cm.bankrupt_missed as f64 / n as f64)
}

/// Healthy companies classified as bankrupt, over all non-bankrupt rows.
pub fn false_alarm_rate(cm: &ConfusionMatrix) -> Result<f64, MetricError> {
    let n = cm.nonbankrupt_correct + cm.nonbankrupt_false_alarm;
    if n == 0 {
        return Err(MetricError::NoNonBankrupt);
    }
    Ok(cm.nonbankrupt_false_alarm as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use proptest::prelude::*;
    use Label::{Bankrupt as B, NonBankrupt as N};

    fn cm(bc: usize, bm: usize, nc: usize, nf: usize) -> ConfusionMatrix {
        ConfusionMatrix {
            bankrupt_correct: bc,
            bankrupt_missed: bm,
            nonbankrupt_correct: nc,
            nonbankrupt_false_alarm: nf,
        }
    }

    #[test]
    fn hand_tally() {
        let m = confusion(&[B, B, N], &[0.9, 0.4, 0.2], 0.5).unwrap();
        assert_eq!(m, cm(1, 1, 1, 0));
    }

    #[test]
    fn perfect_and_constant_classifiers() {
        let labels: Vec<Label> = (0..100).map(|i| if i < 5 { B } else { N }).collect();
        let perfect: Vec<f64> = labels.iter().map(|l| if l.is_bankrupt() { 0.9 } else { 0.1 }).collect();
        let m = confusion(&labels, &perfect, 0.5).unwrap();
        assert_eq!((m.bankrupt_missed, m.nonbankrupt_false_alarm), (0, 0));
        assert_eq!(accuracy(&m), Ok(1.0));

        let m = confusion(&labels, &vec![0.1; 100], 0.5).unwrap();
        assert_eq!(m, cm(0, 5, 95, 0));
    }

    #[test]
    fn threshold_is_strict() {
        assert_eq!(confusion(&[B], &[0.5], 0.5).unwrap(), cm(0, 1, 0, 0));
    }

    #[test]
    fn rates_by_hand() {
        let m = cm(5, 3, 90, 2);
        assert_eq!(accuracy(&m), Ok(0.95));
        assert_eq!(type_i_error(&m), Ok(0.375));
        assert_eq!(false_alarm_rate(&m), Ok(2.0 / 92.0));
        assert_eq!(accuracy(&cm(0, 4, 0, 6)), Ok(0.0));
        assert_eq!(type_i_error(&cm(4, 0, 1, 1)), Ok(0.0));
        assert_eq!(type_i_error(&cm(0, 4, 1, 1)), Ok(1.0));
        assert_eq!(false_alarm_rate(&cm(1, 1, 7, 0)), Ok(0.0));
        assert_eq!(false_alarm_rate(&cm(1, 1, 0, 7)), Ok(1.0));
    }

    #[test]
    fn errors() {
        assert_eq!(accuracy(&cm(0, 0, 0, 0)), Err(MetricError::Empty));
        assert_eq!(type_i_error(&cm(0, 0, 3, 1)), Err(MetricError::NoBankrupt));
        assert_eq!(false_alarm_rate(&cm(3, 1, 0, 0)), Err(MetricError::NoNonBankrupt));
        assert!(matches!(
            confusion(&[B], &[], 0.5),
            Err(MetricError::LengthMismatch { .. })
        ));
        assert_eq!(confusion(&[B], &[1.0], 0.5), Err(MetricError::BadProbability(1.0, 0)));
    }

    proptest! {
        #[test]
        fn accuracy_plus_error_share_is_one(bc in 0usize..50, bm in 0usize..50, nc in 0usize..50, nf in 0usize..50) {
            let m = cm(bc, bm, nc, nf);
            prop_assume!(m.total() > 0);
            let err = m.misclassified() as f64 / m.total() as f64;
            prop_assert_eq!(accuracy(&m).unwrap() + err, 1.0);
        }

        #[test]
        fn rates_depend_only_on_their_class(bc in 0usize..50, bm in 1usize..50, nc in 0usize..50, nf in 1usize..50) {
            let m = cm(bc, bm, nc, nf);
            let swapped = cm(nc, bm, bc, nf);
            prop_assert_eq!(type_i_error(&cm(bc, bm, 0, 1)), type_i_error(&m));
            prop_assert_eq!(false_alarm_rate(&cm(0, 1, nc, nf)), false_alarm_rate(&m));
            prop_assert_eq!(m.misclassified(), swapped.misclassified());
        }

        #[test]
        fn counts_sum_to_rows(rows in proptest::collection::vec((any::<bool>(), 0.001f64..0.999), 0..100)) {
            let labels: Vec<Label> = rows.iter().map(|(b, _)| if *b { B } else { N }).collect();
            let probs: Vec<f64> = rows.iter().map(|(_, p)| *p).collect();
            prop_assert_eq!(confusion(&labels, &probs, 0.5).unwrap().total(), rows.len());
        }
    }
}
