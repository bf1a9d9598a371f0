//! Report table rendering: comma-separated tables with a header row, fixed
//! column order and reals printed with 6 significant digits, suitable for
//! byte-exact comparison across runs.

pub mod pipeline;

pub use pipeline::{run_pipeline, Grouping, LexiconPaths, Manifest, ReportBundle, RunConfig};

use crate::inference::RegressionResult;
use crate::matching::{MatchCriterion, MatchOutcome};
use crate::stratify::{BinSpec, GroupProfile, StratumReport};
use crate::text::IndexVector;

/// Format a real with 6 significant digits in plain decimal notation.
pub fn fmt_g6(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (5 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Quote a CSV field when it contains a comma, quote or newline.
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Render rows (already stringified) as a CSV table with the given header.
pub fn render_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Per-span table: identifiers, the seven indices, and the match outcome.
pub fn per_span_table(
    rows: &[(&MatchOutcome, Option<&IndexVector>)],
    criterion: MatchCriterion,
) -> String {
    let header = [
        "span_id",
        "doc_id",
        "category",
        "criterion",
        "n_words",
        "n_sentences",
        "defined",
        "fkgl",
        "avg_syllables",
        "proper_nouns",
        "stopwords",
        "pronouns",
        "hedge",
        "negation",
        "is_matched",
        "best_iou",
        "empty_token_range",
    ];
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(o, v)| {
            let crit = criterion.name();
            let mut row = vec![
                o.span_id.clone(),
                o.doc_id.clone(),
                o.category.label().to_string(),
                crit,
            ];
            match v {
                Some(v) if v.is_defined() => {
                    row.extend([
                        v.n_words.to_string(),
                        v.n_sentences.to_string(),
                        "1".to_string(),
                        fmt_g6(v.fkgl),
                        fmt_g6(v.avg_syllables),
                        fmt_g6(v.prop_proper_nouns),
                        fmt_g6(v.prop_stopwords),
                        fmt_g6(v.prop_pronouns),
                        v.hedge_present.to_string(),
                        v.negation_present.to_string(),
                    ]);
                }
                _ => {
                    row.extend([
                        "0".to_string(),
                        "0".to_string(),
                        "0".to_string(),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                    ]);
                }
            }
            row.push(o.is_matched.to_string());
            row.push(o.best_iou.map(fmt_g6).unwrap_or_default());
            row.push(u8::from(o.empty_token_range).to_string());
            row
        })
        .collect();
    render_csv(&header, &body)
}

/// Index-only table for the `indices` subcommand (no match outcomes).
pub fn indices_table(rows: &[(&crate::corpus::GoldSpan, &IndexVector)]) -> String {
    let header = [
        "span_id",
        "doc_id",
        "category",
        "n_words",
        "n_sentences",
        "defined",
        "fkgl",
        "avg_syllables",
        "proper_nouns",
        "stopwords",
        "pronouns",
        "hedge",
        "negation",
    ];
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(g, v)| {
            let mut row = vec![
                g.span_id.clone(),
                g.doc_id.clone(),
                g.category.label().to_string(),
            ];
            if v.is_defined() {
                row.extend([
                    v.n_words.to_string(),
                    v.n_sentences.to_string(),
                    "1".to_string(),
                    fmt_g6(v.fkgl),
                    fmt_g6(v.avg_syllables),
                    fmt_g6(v.prop_proper_nouns),
                    fmt_g6(v.prop_stopwords),
                    fmt_g6(v.prop_pronouns),
                    v.hedge_present.to_string(),
                    v.negation_present.to_string(),
                ]);
            } else {
                row.extend([
                    "0".into(),
                    "0".into(),
                    "0".into(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
            }
            row
        })
        .collect();
    render_csv(&header, &body)
}

/// Outcome export for the `match` subcommand: one record per gold span.
pub fn outcomes_table(outcomes: &[MatchOutcome]) -> String {
    let header = [
        "span_id",
        "doc_id",
        "category",
        "criterion",
        "is_matched",
        "best_iou",
        "empty_token_range",
    ];
    let body: Vec<Vec<String>> = outcomes
        .iter()
        .map(|o| {
            vec![
                o.span_id.clone(),
                o.doc_id.clone(),
                o.category.label().to_string(),
                o.criterion.name(),
                o.is_matched.to_string(),
                o.best_iou.map(fmt_g6).unwrap_or_default(),
                u8::from(o.empty_token_range).to_string(),
            ]
        })
        .collect();
    render_csv(&header, &body)
}

/// Category (or any labeled stratum) recall table.
pub fn stratum_table(label_column: &str, reports: &[StratumReport]) -> String {
    let header = [label_column, "n", "recall", "ci_low", "ci_high", "unstable"];
    let body: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.label.clone(),
                r.n.to_string(),
                fmt_g6(r.recall),
                fmt_g6(r.ci_low),
                fmt_g6(r.ci_high),
                u8::from(r.unstable).to_string(),
            ]
        })
        .collect();
    render_csv(&header, &body)
}

/// Per-index bin table: observed ranges and sizes joined with recall rows.
/// Reports come label-sorted from stratified_recall and `spec.bins` are in
/// ascending value order; with at most 10 bins the two orders coincide, so
/// rows pair positionally.
pub fn bin_table(spec: &BinSpec, reports: &[StratumReport]) -> String {
    let header = [
        "bin",
        "range_min",
        "range_max",
        "n",
        "recall",
        "ci_low",
        "ci_high",
        "unstable",
    ];
    assert_eq!(spec.bins.len(), reports.len(), "bin/report alignment");
    let body: Vec<Vec<String>> = reports
        .iter()
        .zip(&spec.bins)
        .map(|(r, b)| {
            vec![
                r.label.clone(),
                fmt_g6(b.min),
                fmt_g6(b.max),
                r.n.to_string(),
                fmt_g6(r.recall),
                fmt_g6(r.ci_low),
                fmt_g6(r.ci_high),
                u8::from(r.unstable).to_string(),
            ]
        })
        .collect();
    render_csv(&header, &body)
}

/// Regression table in report order.
pub fn regression_table(result: &RegressionResult) -> String {
    let header = ["term", "coefficient", "ci_low", "ci_high"];
    let body: Vec<Vec<String>> = result
        .terms
        .iter()
        .map(|t| {
            vec![
                t.name.clone(),
                fmt_g6(t.coefficient),
                fmt_g6(t.ci_low),
                fmt_g6(t.ci_high),
            ]
        })
        .collect();
    render_csv(&header, &body)
}

/// Group-by-index mean z-score matrix.
pub fn group_profile_table(profile: &GroupProfile) -> String {
    let mut header: Vec<&str> = vec!["group", "n"];
    for idx in &profile.indices {
        header.push(idx.key());
    }
    let body: Vec<Vec<String>> = profile
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![r.label.clone(), r.n.to_string()];
            row.extend(r.mean_z.iter().map(|z| fmt_g6(*z)));
            row
        })
        .collect();
    render_csv(&header, &body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_g6(0.56), "0.560000");
        assert_eq!(fmt_g6(114.6), "114.600");
        assert_eq!(fmt_g6(-12.524), "-12.5240");
        assert_eq!(fmt_g6(1.0), "1.00000");
        assert_eq!(fmt_g6(0.0), "0");
        assert_eq!(fmt_g6(0.000123456), "0.000123456");
        assert_eq!(fmt_g6(1234567.0), "1234567");
    }

    #[test]
    fn csv_quoting() {
        let table = render_csv(
            &["a", "b"],
            &[vec!["plain".to_string(), "with, comma".to_string()]],
        );
        assert_eq!(table, "a,b\nplain,\"with, comma\"\n");
    }
}
