//! Z-scoring, nearest-rank quantile binning with tie collapse, stratified
//! recall with cluster-bootstrap intervals, and grouped index profiles.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::inference::{cluster_bootstrap, BootstrapConfig};
use crate::matching::MatchOutcome;
use crate::text::{Index, IndexVector, ALL_INDICES};

/// Population mean/std for one index. `std == 0` marks a constant index
/// whose z-scores are undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZScoreParams {
    pub mean: f64,
    pub std: f64,
}

impl ZScoreParams {
    /// Fit over at least two values; population (not sample) std.
    pub fn fit(values: &[f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooFewValues {
                need: 2,
                got: values.len(),
            });
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Ok(Self {
            mean,
            std: var.sqrt(),
        })
    }

    pub fn is_constant(&self) -> bool {
        self.std == 0.0
    }

    pub fn apply(&self, x: f64) -> f64 {
        (x - self.mean) / self.std
    }
}

/// Z-score a value list. Returns the fitted params and, unless the input is
/// constant, the transformed values (mean 0, population std 1).
pub fn zscore(values: &[f64]) -> Result<(ZScoreParams, Option<Vec<f64>>)> {
    let params = ZScoreParams::fit(values)?;
    if params.is_constant() {
        return Ok((params, None));
    }
    Ok((params, Some(values.iter().map(|v| params.apply(*v)).collect())))
}

/// Observed summary of one quantile bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSummary {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// Quantile bin layout for one index: deduplicated interior cuts plus the
/// observed [min, max] range and count per non-empty bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub index: String,
    pub cuts: Vec<f64>,
    pub bins: Vec<BinSummary>,
}

impl BinSpec {
    /// Bin index for a value: bin 0 is (-inf, cuts[0]], bin i is
    /// (cuts[i-1], cuts[i]], the last bin is open above.
    pub fn assign(&self, x: f64) -> usize {
        self.cuts.iter().filter(|c| **c < x).count()
    }
}

/// Nearest-rank (type 1) quantile binning with duplicate-cut collapse.
///
/// Cut candidates sit at quantiles k/target for k = 1..target-1; duplicate
/// cuts merge, so heavily tied data yields fewer bins (binary data at most
/// two). Every value lands in exactly one bin and no empty bin is reported.
/// Returns the spec plus each input value's bin assignment.
pub fn quantile_bins(
    name: &str,
    values: &[f64],
    target_bins: usize,
) -> Result<(BinSpec, Vec<usize>)> {
    if target_bins < 2 {
        return Err(Error::InvalidConfig(format!(
            "target_bins must be >= 2, got {target_bins}"
        )));
    }
    if values.len() < target_bins {
        return Err(Error::TooFewValues {
            need: target_bins,
            got: values.len(),
        });
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidConfig("cannot bin NaN values".into()));
    }

    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let n = sorted.len();

    let mut cuts: Vec<f64> = Vec::new();
    for k in 1..target_bins {
        // nearest-rank: ceil(n * k / target) as a 1-based rank
        let rank = (n * k).div_ceil(target_bins);
        let cut = sorted[rank - 1];
        if cuts.last() != Some(&cut) {
            cuts.push(cut);
        }
    }
    // A cut at the maximum would define an empty trailing bin; drop it.
    // Values at the maximum keep their assignment (assign uses cut < x).
    if cuts.last() == Some(&sorted[n - 1]) {
        cuts.pop();
    }

    let mut spec = BinSpec {
        index: name.to_string(),
        cuts,
        bins: Vec::new(),
    };
    let assignment: Vec<usize> = values.iter().map(|v| spec.assign(*v)).collect();

    // Every bin is non-empty: bin 0 holds the minimum and each interior bin
    // contains its upper cut, a realized order statistic.
    let n_bins = spec.cuts.len() + 1;
    let mut mins = vec![f64::INFINITY; n_bins];
    let mut maxs = vec![f64::NEG_INFINITY; n_bins];
    let mut counts = vec![0usize; n_bins];
    for (v, &b) in values.iter().zip(&assignment) {
        mins[b] = mins[b].min(*v);
        maxs[b] = maxs[b].max(*v);
        counts[b] += 1;
    }
    debug_assert!(counts.iter().all(|&c| c > 0));
    spec.bins = (0..n_bins)
        .map(|b| BinSummary {
            min: mins[b],
            max: maxs[b],
            count: counts[b],
        })
        .collect();

    Ok((spec, assignment))
}

/// Recall within one stratum, with its cluster-bootstrap interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumReport {
    pub label: String,
    pub n: usize,
    pub recall: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// More than 10% of bootstrap replicates had an empty stratum.
    pub unstable: bool,
}

/// Stratified recall: point recall and a document-cluster bootstrap CI per
/// stratum. `strata` maps span_id to a stratum label; spans without a label
/// (e.g. undefined index vectors) are excluded. Empty strata are omitted.
/// Deterministic given the seed; all strata share one resample universe.
pub fn stratified_recall(
    outcomes: &[MatchOutcome],
    strata: &BTreeMap<String, String>,
    corpus: &Corpus,
    config: &BootstrapConfig,
) -> Result<Vec<StratumReport>> {
    config.validate()?;
    let doc_index = corpus.doc_index();
    let n_docs = corpus.documents.len();

    // Per-document (count, matched-sum) aggregates per stratum. Outcomes are
    // 0/1, so the sums are exact integers in f64 and the aggregated statistic
    // equals the record-level mean exactly.
    let mut per_doc: Vec<BTreeMap<&str, (f64, f64)>> = vec![BTreeMap::new(); n_docs];
    let mut labels: Vec<&String> = Vec::new();
    for o in outcomes {
        let Some(label) = strata.get(&o.span_id) else {
            continue;
        };
        let Some(&di) = doc_index.get(o.doc_id.as_str()) else {
            return Err(Error::InvalidConfig(format!(
                "outcome references unknown doc {}",
                o.doc_id
            )));
        };
        let cell = per_doc[di].entry(label.as_str()).or_insert((0.0, 0.0));
        cell.0 += 1.0;
        cell.1 += f64::from(o.is_matched);
        if !labels.contains(&label) {
            labels.push(label);
        }
    }
    labels.sort();

    let mut reports = Vec::new();
    for label in labels {
        // one (count, sum) record per document that has stratum members
        let doc_cells: Vec<Vec<(f64, f64)>> = per_doc
            .iter()
            .map(|m| m.get(label.as_str()).map(|c| vec![*c]).unwrap_or_default())
            .collect();
        let groups: Vec<&[(f64, f64)]> = doc_cells.iter().map(|g| g.as_slice()).collect();
        let stat = |sel: &[&[(f64, f64)]]| -> Option<f64> {
            let mut n = 0.0;
            let mut sum = 0.0;
            for g in sel {
                for (count, matched) in *g {
                    n += count;
                    sum += matched;
                }
            }
            if n == 0.0 {
                None
            } else {
                Some(sum / n)
            }
        };
        let n_members: f64 = doc_cells.iter().flatten().map(|c| c.0).sum();
        if n_members == 0.0 {
            continue;
        }
        let est = cluster_bootstrap(&groups, stat, config)?;
        reports.push(StratumReport {
            label: label.clone(),
            n: n_members as usize,
            recall: est.point,
            ci_low: est.ci_low,
            ci_high: est.ci_high,
            unstable: est.is_unstable(),
        });
    }
    Ok(reports)
}

/// Group-by-index matrix of mean z-scores with per-group sizes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupProfile {
    /// Indices retained as columns (constant indices are omitted).
    pub indices: Vec<Index>,
    pub rows: Vec<GroupProfileRow>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupProfileRow {
    pub label: String,
    pub n: usize,
    /// Mean z-score per retained index, in `indices` order.
    pub mean_z: Vec<f64>,
}

/// Per-group mean z-scored indices. `zparams` must be fitted on the full
/// plotted population (all defined spans in the analysis set) so the
/// size-weighted column means are zero. Constant indices are omitted.
pub fn group_profile(
    vectors: &BTreeMap<String, IndexVector>,
    grouping: &BTreeMap<String, String>,
    zparams: &BTreeMap<Index, ZScoreParams>,
) -> GroupProfile {
    let mut warnings = Vec::new();
    let mut kept: Vec<Index> = Vec::new();
    for idx in ALL_INDICES {
        match zparams.get(&idx) {
            Some(p) if !p.is_constant() => kept.push(idx),
            Some(_) => warnings.push(format!(
                "constant index \"{}\" omitted from profile",
                idx.label()
            )),
            None => warnings.push(format!("no z-params for \"{}\"; omitted", idx.label())),
        }
    }

    let mut by_group: BTreeMap<&String, Vec<&IndexVector>> = BTreeMap::new();
    for (span_id, v) in vectors {
        if !v.is_defined() {
            continue;
        }
        if let Some(label) = grouping.get(span_id) {
            by_group.entry(label).or_default().push(v);
        }
    }

    let rows = by_group
        .into_iter()
        .map(|(label, members)| {
            let n = members.len();
            let mean_z = kept
                .iter()
                .map(|idx| {
                    let params = zparams[idx];
                    members.iter().map(|v| params.apply(idx.value(v))).sum::<f64>() / n as f64
                })
                .collect();
            GroupProfileRow {
                label: label.clone(),
                n,
                mean_z,
            }
        })
        .collect();

    GroupProfile {
        indices: kept,
        rows,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DecisionCategory, Document};
    use crate::matching::MatchCriterion;

    #[test]
    fn zscore_hand_example() {
        let (params, z) = zscore(&[1.0, 2.0, 3.0]).unwrap();
        assert!((params.mean - 2.0).abs() < 1e-12);
        assert!((params.std - (2.0f64 / 3.0).sqrt()).abs() < 1e-9);
        assert!((params.std - 0.81650).abs() < 1e-5);
        let z = z.unwrap();
        assert!((z[2] - 1.22474).abs() < 1e-5);
        let mean: f64 = z.iter().sum::<f64>() / z.len() as f64;
        assert!(mean.abs() < 1e-9);
        let var: f64 = z.iter().map(|v| v * v).sum::<f64>() / z.len() as f64;
        assert!((var - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zscore_constant_and_short_inputs() {
        let (params, z) = zscore(&[5.0, 5.0, 5.0]).unwrap();
        assert!(params.is_constant());
        assert!(z.is_none());
        assert!(zscore(&[1.0]).is_err());
    }

    #[test]
    fn uniform_ranks_five_bins() {
        let values: Vec<f64> = (1..=10).map(f64::from).collect();
        let (spec, assign) = quantile_bins("x", &values, 5).unwrap();
        assert_eq!(spec.bins.len(), 5);
        assert!(spec.bins.iter().all(|b| b.count == 2));
        assert_eq!(assign, vec![0, 0, 1, 1, 2, 2, 3, 3, 4, 4]);
        assert_eq!(spec.cuts, vec![2.0, 4.0, 6.0, 8.0]);
    }

    #[test]
    fn heavy_ties_collapse() {
        let values = vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 2.0, 3.0];
        let (spec, assign) = quantile_bins("x", &values, 5).unwrap();
        assert_eq!(spec.cuts, vec![0.0, 1.0]);
        assert_eq!(spec.bins.len(), 3);
        let counts: Vec<usize> = spec.bins.iter().map(|b| b.count).collect();
        assert_eq!(counts, vec![6, 2, 2]);
        assert_eq!(assign[0], 0);
        assert_eq!(assign[6], 1);
        assert_eq!(assign[8], 2);
        assert_eq!(assign[9], 2);
    }

    #[test]
    fn binary_values_two_bins() {
        let values = vec![0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0];
        let (spec, _) = quantile_bins("hedge", &values, 5).unwrap();
        assert_eq!(spec.bins.len(), 2);
        assert_eq!(spec.bins[0].count, 4);
        assert_eq!(spec.bins[1].count, 3);
    }

    #[test]
    fn identical_values_single_bin() {
        let values = vec![2.0; 8];
        let (spec, assign) = quantile_bins("x", &values, 5).unwrap();
        assert_eq!(spec.bins.len(), 1);
        assert_eq!(spec.bins[0].count, 8);
        assert!(assign.iter().all(|&b| b == 0));
    }

    #[test]
    fn bins_are_exhaustive_exclusive_and_ordered() {
        let values = vec![3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0, 5.0, 8.0];
        let (spec, assign) = quantile_bins("x", &values, 5).unwrap();
        let total: usize = spec.bins.iter().map(|b| b.count).sum();
        assert_eq!(total, values.len());
        assert_eq!(assign.len(), values.len());
        for w in spec.bins.windows(2) {
            assert!(w[0].max < w[1].min, "ranges must be disjoint ascending");
        }
    }

    fn outcome(span_id: &str, doc_id: &str, matched: bool) -> MatchOutcome {
        MatchOutcome {
            span_id: span_id.into(),
            doc_id: doc_id.into(),
            category: DecisionCategory::DefiningProblem,
            is_matched: u8::from(matched),
            criterion: MatchCriterion::Exact,
            best_iou: None,
            empty_token_range: false,
        }
    }

    fn corpus_with_docs(n: usize) -> Corpus {
        Corpus {
            documents: (0..n)
                .map(|i| Document {
                    doc_id: format!("d{i}"),
                    text: "x".into(),
                    meta: BTreeMap::new(),
                })
                .collect(),
            gold: vec![],
            predicted: vec![],
        }
    }

    #[test]
    fn all_matched_stratum_has_unit_ci() {
        let corpus = corpus_with_docs(4);
        let outcomes: Vec<MatchOutcome> = (0..4)
            .flat_map(|d| {
                (0..3).map(move |s| outcome(&format!("d{d}:{s}"), &format!("d{d}"), true))
            })
            .collect();
        let strata: BTreeMap<String, String> = outcomes
            .iter()
            .map(|o| (o.span_id.clone(), "all".to_string()))
            .collect();
        let reports =
            stratified_recall(&outcomes, &strata, &corpus, &BootstrapConfig::new(200, 3)).unwrap();
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].n, 12);
        assert_eq!(
            (reports[0].recall, reports[0].ci_low, reports[0].ci_high),
            (1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn weighted_stratum_recalls_recompose_overall() {
        let corpus = corpus_with_docs(10);
        let mut outcomes = Vec::new();
        for d in 0..10 {
            for s in 0..7 {
                outcomes.push(outcome(
                    &format!("d{d}:{s}"),
                    &format!("d{d}"),
                    (d + s) % 3 != 0,
                ));
            }
        }
        let strata: BTreeMap<String, String> = outcomes
            .iter()
            .enumerate()
            .map(|(i, o)| (o.span_id.clone(), format!("bin{}", i % 3)))
            .collect();
        let reports =
            stratified_recall(&outcomes, &strata, &corpus, &BootstrapConfig::new(100, 5)).unwrap();
        let weighted: f64 = reports.iter().map(|r| r.recall * r.n as f64).sum::<f64>()
            / reports.iter().map(|r| r.n as f64).sum::<f64>();
        let overall: f64 = outcomes.iter().map(|o| f64::from(o.is_matched)).sum::<f64>()
            / outcomes.len() as f64;
        assert!((weighted - overall).abs() < 1e-12);
    }

    #[test]
    fn spans_without_labels_are_excluded() {
        let corpus = corpus_with_docs(2);
        let outcomes = vec![
            outcome("d0:0", "d0", true),
            outcome("d1:0", "d1", false),
            outcome("d1:1", "d1", true),
        ];
        let strata: BTreeMap<String, String> =
            [("d0:0".to_string(), "a".to_string())].into_iter().collect();
        let reports =
            stratified_recall(&outcomes, &strata, &corpus, &BootstrapConfig::new(50, 2)).unwrap();
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].n, 1);
    }

    fn vector_with(idx_weight: f64) -> IndexVector {
        IndexVector {
            fkgl: idx_weight,
            avg_syllables: 1.0 + idx_weight,
            prop_proper_nouns: 0.0,
            prop_stopwords: idx_weight.clamp(0.0, 1.0),
            prop_pronouns: 0.0,
            hedge_present: 0,
            negation_present: 0,
            n_words: 4,
            n_sentences: 1,
        }
    }

    fn fit_zparams(vectors: &BTreeMap<String, IndexVector>) -> BTreeMap<Index, ZScoreParams> {
        ALL_INDICES
            .iter()
            .map(|idx| {
                let vals: Vec<f64> = vectors
                    .values()
                    .filter(|v| v.is_defined())
                    .map(|v| idx.value(v))
                    .collect();
                (*idx, ZScoreParams::fit(&vals).unwrap())
            })
            .collect()
    }

    #[test]
    fn single_group_profile_is_centered() {
        let vectors: BTreeMap<String, IndexVector> = (0..10)
            .map(|i| (format!("s{i}"), vector_with(i as f64 / 10.0)))
            .collect();
        let grouping: BTreeMap<String, String> = vectors
            .keys()
            .map(|k| (k.clone(), "only".to_string()))
            .collect();
        let zp = fit_zparams(&vectors);
        let profile = group_profile(&vectors, &grouping, &zp);
        assert_eq!(profile.rows.len(), 1);
        for z in &profile.rows[0].mean_z {
            assert!(z.abs() < 1e-9);
        }
        // constant columns (proper nouns, pronouns, hedge, negation) omitted
        assert!(profile.indices.len() < ALL_INDICES.len());
        assert!(!profile.warnings.is_empty());
    }

    #[test]
    fn two_equal_groups_mirror() {
        let mut vectors = BTreeMap::new();
        let mut grouping = BTreeMap::new();
        for i in 0..8 {
            let id = format!("s{i}");
            vectors.insert(id.clone(), vector_with(f64::from(i % 2)));
            grouping.insert(id, if i % 2 == 0 { "lo".to_string() } else { "hi".to_string() });
        }
        let zp = fit_zparams(&vectors);
        let profile = group_profile(&vectors, &grouping, &zp);
        assert_eq!(profile.rows.len(), 2);
        let hi = profile.rows.iter().find(|r| r.label == "hi").unwrap();
        let lo = profile.rows.iter().find(|r| r.label == "lo").unwrap();
        for (a, b) in hi.mean_z.iter().zip(&lo.mean_z) {
            assert!((a + b).abs() < 1e-9, "{a} vs {b}");
            assert!(a.abs() > 0.5);
        }
    }

    #[test]
    fn weighted_profile_columns_sum_to_zero() {
        let mut vectors = BTreeMap::new();
        let mut grouping = BTreeMap::new();
        for i in 0..30 {
            let id = format!("s{i:02}");
            vectors.insert(id.clone(), vector_with(i as f64 / 30.0));
            grouping.insert(id, format!("g{}", i % 4));
        }
        let zp = fit_zparams(&vectors);
        let profile = group_profile(&vectors, &grouping, &zp);
        for (col, _) in profile.indices.iter().enumerate() {
            let weighted: f64 = profile
                .rows
                .iter()
                .map(|r| r.mean_z[col] * r.n as f64)
                .sum();
            assert!(weighted.abs() < 1e-9);
        }
    }
}
