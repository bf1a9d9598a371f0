//! Uncertainty and regression: document-cluster bootstrap and the
//! category-controlled logistic regression of match outcome on indices.

pub mod bootstrap;
pub mod logistic;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use bootstrap::{
    cluster_bootstrap, cluster_bootstrap_vec, BootstrapConfig, BootstrapEstimate,
};
pub use logistic::{fit_logistic, penalized_score_norm, LogisticFit};

use crate::corpus::{Corpus, DecisionCategory};
use crate::error::{Error, Result};
use crate::matching::MatchOutcome;
use crate::stratify::ZScoreParams;
use crate::text::{Index, IndexVector, ALL_INDICES};

/// Default ridge strength; tames quasi-separation from zero-recall categories.
pub const DEFAULT_RIDGE_LAMBDA: f64 = 1e-4;

/// One fitted term: log-odds coefficient with its bootstrap interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTerm {
    pub name: String,
    pub coefficient: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Category-controlled regression output with fit diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionResult {
    pub terms: Vec<RegressionTerm>,
    pub reference_category: DecisionCategory,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Rows used in the fit (defined index vectors joined to outcomes).
    pub n_spans: usize,
    /// Gold spans excluded because their index vector was undefined.
    pub n_excluded_undefined: usize,
    pub bootstrap_used: usize,
    pub bootstrap_skipped: usize,
    pub warnings: Vec<String>,
}

struct JoinedRow {
    doc_index: usize,
    y: f64,
    raw: [f64; 7],
    category: DecisionCategory,
}

/// Regress is_matched on the z-scored indices plus category fixed effects.
///
/// The design is intercept + seven z-scored index columns (binary indicators
/// are entered 0/1 then z-scored unless `zscore_binaries` is false) +
/// reference-coded category dummies, with the most frequent category as the
/// reference. Per-coefficient CIs come from refitting on each document
/// resample; z-scores and dropped columns are fixed from the full data.
pub fn regress_matching(
    corpus: &Corpus,
    outcomes: &[MatchOutcome],
    vectors: &BTreeMap<String, IndexVector>,
    config: &BootstrapConfig,
    lambda: f64,
    zscore_binaries: bool,
) -> Result<RegressionResult> {
    config.validate()?;
    if lambda < 0.0 {
        return Err(Error::InvalidConfig("ridge lambda must be >= 0".into()));
    }
    let mut warnings = Vec::new();
    let doc_index = corpus.doc_index();

    // Join outcomes to defined index vectors.
    let mut rows: Vec<JoinedRow> = Vec::new();
    let mut n_excluded = 0usize;
    let mut missing_vector = 0usize;
    for o in outcomes {
        let Some(v) = vectors.get(&o.span_id) else {
            missing_vector += 1;
            continue;
        };
        if !v.is_defined() {
            n_excluded += 1;
            continue;
        }
        let mut raw = [0.0; 7];
        for (slot, idx) in raw.iter_mut().zip(ALL_INDICES) {
            *slot = idx.value(v);
        }
        rows.push(JoinedRow {
            doc_index: *doc_index
                .get(o.doc_id.as_str())
                .ok_or_else(|| Error::InvalidConfig(format!("outcome references unknown doc {}", o.doc_id)))?,
            y: f64::from(o.is_matched),
            raw,
            category: o.category,
        });
    }
    if missing_vector > 0 {
        warnings.push(format!("{missing_vector} outcomes had no index vector"));
    }
    if rows.len() < 2 {
        return Err(Error::TooFewValues {
            need: 2,
            got: rows.len(),
        });
    }
    if rows.iter().all(|r| r.y == rows[0].y) {
        return Err(Error::ConstantOutcome {
            value: rows[0].y as u8,
        });
    }

    // Column standardization; constant columns are dropped.
    let mut kept_indices: Vec<(usize, Index, ZScoreParams)> = Vec::new();
    for (j, idx) in ALL_INDICES.iter().enumerate() {
        let values: Vec<f64> = rows.iter().map(|r| r.raw[j]).collect();
        let params = ZScoreParams::fit(&values)?;
        if params.is_constant() {
            warnings.push(format!("constant index \"{}\" omitted from design", idx.label()));
            continue;
        }
        if idx.is_binary() && !zscore_binaries {
            kept_indices.push((j, *idx, ZScoreParams { mean: 0.0, std: 1.0 }));
        } else {
            kept_indices.push((j, *idx, params));
        }
    }

    // Reference category: most frequent, ties broken by label.
    let mut counts: BTreeMap<DecisionCategory, usize> = BTreeMap::new();
    for r in &rows {
        *counts.entry(r.category).or_insert(0) += 1;
    }
    let reference = *counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.label().cmp(a.0.label())))
        .map(|(c, _)| c)
        .expect("non-empty rows");
    let mut dummies: Vec<DecisionCategory> = counts.keys().copied().filter(|c| *c != reference).collect();
    dummies.sort_by_key(|c| c.label());
    for c in crate::corpus::ALL_CATEGORIES {
        if !counts.contains_key(&c) {
            warnings.push(format!("category \"{}\" absent from data; dummy omitted", c.label()));
        }
    }

    // Materialized design rows grouped by document for cluster resampling.
    let p = 1 + kept_indices.len() + dummies.len();
    let mut term_names = Vec::with_capacity(p);
    term_names.push("Intercept".to_string());
    for (_, idx, _) in &kept_indices {
        term_names.push(idx.label().to_string());
    }
    for c in &dummies {
        term_names.push(format!("Category: {}", c.label()));
    }

    let n_docs = corpus.documents.len();
    let mut grouped: Vec<Vec<(Vec<f64>, f64)>> = vec![Vec::new(); n_docs];
    for r in &rows {
        let mut design = Vec::with_capacity(p);
        design.push(1.0);
        for (j, _, params) in &kept_indices {
            design.push(params.apply(r.raw[*j]));
        }
        for c in &dummies {
            design.push(f64::from(r.category == *c));
        }
        grouped[r.doc_index].push((design, r.y));
    }

    let fit_on = |selected: &[&[(Vec<f64>, f64)]]| -> Option<(LogisticFit, usize)> {
        let mut design_refs: Vec<&[f64]> = Vec::new();
        let mut y = Vec::new();
        for g in selected {
            for (row, yi) in *g {
                design_refs.push(row.as_slice());
                y.push(*yi);
            }
        }
        if design_refs.is_empty() {
            return None;
        }
        let n = y.len();
        fit_logistic(&design_refs, &y, lambda).ok().map(|f| (f, n))
    };

    let group_refs: Vec<&[(Vec<f64>, f64)]> = grouped.iter().map(|g| g.as_slice()).collect();
    let (point_fit, _) = fit_on(&group_refs).ok_or(Error::StatisticUndefined { b: 0 })?;
    if !point_fit.converged {
        warnings.push(format!(
            "fit did not converge in {} iterations; consider a larger ridge lambda",
            point_fit.iterations
        ));
    }

    let boot = cluster_bootstrap_vec(
        &group_refs,
        |sel| fit_on(sel).map(|(f, _)| f.coefficients),
        config,
    )?;

    let terms = term_names
        .into_iter()
        .enumerate()
        .map(|(j, name)| RegressionTerm {
            name,
            coefficient: boot.points[j],
            ci_low: boot.ci_low[j],
            ci_high: boot.ci_high[j],
        })
        .collect();

    Ok(RegressionResult {
        terms,
        reference_category: reference,
        lambda,
        iterations: point_fit.iterations,
        converged: point_fit.converged,
        n_spans: rows.len(),
        n_excluded_undefined: n_excluded,
        bootstrap_used: boot.used,
        bootstrap_skipped: boot.skipped,
        warnings,
    })
}
