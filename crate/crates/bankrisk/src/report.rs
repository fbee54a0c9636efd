//! Experiment reports as aligned text: one accuracy table and one type I
//! error table per feature set, years down and models across.

use std::fmt::Write;

use bankrisk_core::evaluation::{CellMetrics, CellOutcome};
use bankrisk_core::{ExperimentReport, FeatureSet, ModelKind};

fn cell_text(outcome: Option<&CellOutcome>, pick: fn(&CellMetrics) -> Option<f64>) -> String {
    match outcome {
        None => "-".into(),
        Some(CellOutcome::Failed { .. }) => "failed".into(),
        Some(CellOutcome::Completed(m)) => pick(m).map_or_else(|| "n/a".into(), |v| format!("{v:.4}")),
    }
}

fn table(
    out: &mut String,
    title: &str,
    report: &ExperimentReport,
    set: FeatureSet,
    pick: fn(&CellMetrics) -> Option<f64>,
) {
    let models = &report.config.models;
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut header = vec!["year".to_string()];
    header.extend(models.iter().map(ModelKind::to_string));
    rows.push(header);
    for &year in &report.config.years {
        let mut row = vec![year.to_string()];
        for &m in models {
            row.push(cell_text(report.cell(year, m, set).map(|c| &c.outcome), pick));
        }
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let _ = writeln!(out, "{title} ({set})");
    for r in &rows {
        let line: Vec<String> = r
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (v, w))| if i == 0 { format!("{v:<w$}") } else { format!("{v:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    let _ = writeln!(out);
}

pub fn render_text(report: &ExperimentReport) -> String {
    let mut out = String::new();
    for &set in &report.config.feature_sets {
        table(&mut out, "Accuracy", report, set, |m| Some(m.accuracy));
        table(&mut out, "Type I error", report, set, |m| m.type_i_error);
    }
    if !report.cross_year.is_empty() {
        let _ = writeln!(out, "Cross-year");
        for c in &report.cross_year {
            let acc = cell_text(Some(&c.outcome), |m| Some(m.accuracy));
            let t1 = cell_text(Some(&c.outcome), |m| m.type_i_error);
            let _ = writeln!(
                out,
                "{} -> {}  {:<8}  {:<13}  accuracy {acc}  type I {t1}",
                c.train_year, c.test_year, c.model, c.feature_set
            );
        }
        let _ = writeln!(out);
    }
    let failures: Vec<_> = report
        .cells
        .iter()
        .filter_map(|c| match &c.outcome {
            CellOutcome::Failed { error } => Some((c, error)),
            CellOutcome::Completed(_) => None,
        })
        .collect();
    if !failures.is_empty() {
        let _ = writeln!(out, "Failed cells");
        for (c, e) in failures {
            let _ = writeln!(out, "{} {} {}: {e}", c.year, c.model, c.feature_set);
        }
    }
    out
}
