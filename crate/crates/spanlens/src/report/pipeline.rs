//! End-to-end pipeline: ingest -> indices -> match -> stratify -> regress ->
//! profile -> report bundle, driven by a fully explicit `RunConfig`.
//!
//! The whole bundle is rendered in memory and written atomically at the end,
//! so a failing stage never leaves partial outputs. A manifest recording
//! every effective setting ships with each bundle; re-running from the
//! manifest reproduces the outputs byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{load_documents, load_gold_spans, load_predicted_spans, Corpus};
use crate::error::{Error, Result};
use crate::inference::{cluster_bootstrap, regress_matching, BootstrapConfig};
use crate::matching::{evaluate_matches, MatchCriterion, MatchOutcome};
use crate::stratify::{
    quantile_bins, stratified_recall, BinSpec, BinSummary, StratumReport, ZScoreParams,
};
use crate::text::{
    compute_index_vector, CueLexicon, Index, IndexVector, LexiconBundle, StopwordSet, ALL_INDICES,
};

use super::{
    bin_table, group_profile_table, per_span_table, regression_table, stratum_table,
};

/// How spans are grouped for the profile matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "by", rename_all = "snake_case")]
pub enum Grouping {
    Category,
    Meta { key: String },
}

impl Grouping {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "category" {
            Ok(Self::Category)
        } else if let Some(key) = s.strip_prefix("meta:") {
            if key.is_empty() {
                return Err(Error::InvalidConfig("empty meta key in grouping".into()));
            }
            Ok(Self::Meta {
                key: key.to_string(),
            })
        } else {
            Err(Error::InvalidConfig(format!(
                "grouping must be \"category\" or \"meta:<key>\", got \"{s}\""
            )))
        }
    }
}

/// Optional lexicon override files; builtin resources are used when absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LexiconPaths {
    pub negation: Option<PathBuf>,
    pub hedge: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
}

impl LexiconPaths {
    pub fn load(&self) -> Result<LexiconBundle> {
        let builtin = LexiconBundle::builtin();
        let stopwords = match &self.stopwords {
            Some(p) => StopwordSet::load(p)?,
            None => builtin.stopwords,
        };
        let negation = match &self.negation {
            Some(p) => CueLexicon::load(p)?,
            None => builtin.negation,
        };
        let hedge = match &self.hedge {
            Some(p) => CueLexicon::load(p)?,
            None => builtin.hedge,
        };
        Ok(LexiconBundle::from_parts(stopwords, negation, hedge))
    }
}

/// Complete, explicit run configuration; doubles as the manifest payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub documents: PathBuf,
    pub gold: PathBuf,
    pub predictions: PathBuf,
    pub out_dir: PathBuf,
    pub criterion: MatchCriterion,
    pub target_bins: usize,
    pub bootstrap: BootstrapConfig,
    pub ridge_lambda: f64,
    pub grouping: Grouping,
    #[serde(default)]
    pub lexicons: LexiconPaths,
    /// Z-score binary indices in the regression design (default true).
    pub zscore_binaries: bool,
    /// Restrict the analysis set to documents with meta["split"] == value.
    #[serde(default)]
    pub split: Option<String>,
    /// Fit z-score parameters on all defined spans rather than the analysis
    /// set (only differs when `split` is set).
    #[serde(default)]
    pub zscore_on_all: bool,
}

impl RunConfig {
    pub const DEFAULT_TARGET_BINS: usize = 5;

    pub fn new(
        documents: PathBuf,
        gold: PathBuf,
        predictions: PathBuf,
        out_dir: PathBuf,
        criterion: MatchCriterion,
        seed: u64,
    ) -> Self {
        Self {
            documents,
            gold,
            predictions,
            out_dir,
            criterion,
            target_bins: Self::DEFAULT_TARGET_BINS,
            bootstrap: BootstrapConfig::new(BootstrapConfig::DEFAULT_B, seed),
            ridge_lambda: crate::inference::DEFAULT_RIDGE_LAMBDA,
            grouping: Grouping::Category,
            lexicons: LexiconPaths::default(),
            zscore_binaries: true,
            split: None,
            zscore_on_all: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let inputs = [&self.documents, &self.gold, &self.predictions];
        for (i, a) in inputs.iter().enumerate() {
            for b in inputs.iter().skip(i + 1) {
                if a == b {
                    return Err(Error::InvalidConfig(format!(
                        "input paths must be distinct ({} given twice)",
                        a.display()
                    )));
                }
            }
        }
        // ten-bin cap keeps string bin labels in lexicographic == numeric order
        if !(2..=10).contains(&self.target_bins) {
            return Err(Error::InvalidConfig(
                "target_bins must be between 2 and 10".into(),
            ));
        }
        if self.ridge_lambda < 0.0 {
            return Err(Error::InvalidConfig("ridge lambda must be >= 0".into()));
        }
        self.criterion.validate()?;
        self.bootstrap.validate()
    }
}

/// Manifest written alongside every bundle; sufficient to reproduce the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub tool: String,
    pub config: RunConfig,
}

impl Manifest {
    pub const FORMAT_VERSION: u32 = 1;

    pub fn for_config(config: &RunConfig) -> Self {
        Self {
            format_version: Self::FORMAT_VERSION,
            tool: format!("spanlens {}", env!("CARGO_PKG_VERSION")),
            config: config.clone(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&raw).map_err(|e| Error::MalformedRecord {
            path: path.display().to_string(),
            line: 0,
            msg: e.to_string(),
        })
    }
}

/// Fit diagnostics for the regression stage, absent when the outcome was
/// constant and the regression was skipped.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionDiagnostics {
    pub reference_category: String,
    pub converged: bool,
    pub iterations: usize,
    pub bootstrap_used: usize,
    pub bootstrap_skipped: usize,
}

/// Machine-readable run summary (summary.json).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub criterion: String,
    pub n_documents: usize,
    pub n_gold: usize,
    pub n_predicted: usize,
    pub n_undefined_vectors: usize,
    pub overall_recall: f64,
    pub overall_ci_low: f64,
    pub overall_ci_high: f64,
    pub regression: Option<RegressionDiagnostics>,
    pub ridge_lambda: f64,
    pub bootstrap_b: usize,
    pub bootstrap_seed: u64,
    pub ci_level: f64,
    pub warnings: Vec<String>,
}

/// A fully rendered report: file name -> bytes. Nothing touches the
/// filesystem until `write`.
#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub files: BTreeMap<String, Vec<u8>>,
    pub summary: RunSummary,
}

impl ReportBundle {
    /// Write every file into `out_dir`; on failure, remove anything this
    /// call already wrote so no partial bundle remains.
    pub fn write(&self, out_dir: &Path) -> Result<()> {
        fs::create_dir_all(out_dir).map_err(|source| Error::Io {
            path: out_dir.display().to_string(),
            source,
        })?;
        let mut written: Vec<PathBuf> = Vec::new();
        for (name, bytes) in &self.files {
            let path = out_dir.join(name);
            if let Err(source) = fs::write(&path, bytes) {
                for w in &written {
                    let _ = fs::remove_file(w);
                }
                return Err(Error::Io {
                    path: path.display().to_string(),
                    source,
                });
            }
            written.push(path);
        }
        Ok(())
    }
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_stage(name))
}

/// Run the full analysis and render the report bundle.
pub fn run_pipeline(config: &RunConfig) -> Result<ReportBundle> {
    stage("config", config.validate())?;
    let mut warnings: Vec<String> = Vec::new();

    // ingest
    let full_corpus = stage("ingest", load_corpus(config))?;
    let corpus = match &config.split {
        Some(v) => {
            let filtered = full_corpus.filter_by_meta("split", v);
            if filtered.documents.is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "no documents with meta split == \"{v}\""
                ))
                .in_stage("ingest"));
            }
            filtered
        }
        None => full_corpus.clone(),
    };

    // lexicons
    let lexicons = stage("lexicons", config.lexicons.load())?;
    if !lexicons.pronouns_subset_of_stopwords() {
        warnings.push(format!(
            "pronouns not in the stopword set: {}; prop_pronouns <= prop_stopwords not guaranteed",
            lexicons.pronouns_not_in_stopwords().join(", ")
        ));
    }

    // indices
    let vectors: BTreeMap<String, IndexVector> = corpus
        .gold
        .iter()
        .map(|g| (g.span_id.clone(), compute_index_vector(&g.text, &lexicons)))
        .collect();
    let n_undefined = vectors.values().filter(|v| !v.is_defined()).count();

    // z-score population: the analysis set, or every defined span on request
    let z_population: Vec<(String, IndexVector)> = if config.zscore_on_all {
        full_corpus
            .gold
            .iter()
            .map(|g| (g.span_id.clone(), compute_index_vector(&g.text, &lexicons)))
            .collect()
    } else {
        vectors.iter().map(|(k, v)| (k.clone(), *v)).collect()
    };
    let zparams = stage("indices", fit_zparams(&z_population))?;

    // match
    let outcomes = stage("match", evaluate_matches(&corpus, config.criterion))?;

    // stratify: overall, by category, by index bins
    let overall = stage("stratify", overall_recall(&outcomes, &corpus, &config.bootstrap))?;

    let category_strata: BTreeMap<String, String> = outcomes
        .iter()
        .map(|o| (o.span_id.clone(), o.category.label().to_string()))
        .collect();
    let category_reports = stage(
        "stratify",
        stratified_recall(&outcomes, &category_strata, &corpus, &config.bootstrap),
    )?;

    let mut bin_outputs: Vec<(Index, BinSpec, Vec<StratumReport>)> = Vec::new();
    for idx in ALL_INDICES {
        match index_bins(idx, &outcomes, &vectors, config.target_bins) {
            Ok(Some((spec, strata))) => {
                let reports = stage(
                    "stratify",
                    stratified_recall(&outcomes, &strata, &corpus, &config.bootstrap),
                )?;
                if reports.len() != spec.bins.len()
                    || reports
                        .iter()
                        .zip(&spec.bins)
                        .any(|(r, b)| r.n != b.count)
                {
                    return Err(Error::InvalidConfig(format!(
                        "bin/report mismatch for {}: {} bins vs {} strata",
                        idx.key(),
                        spec.bins.len(),
                        reports.len()
                    ))
                    .in_stage("stratify"));
                }
                if spec.bins.len() < config.target_bins && !idx.is_binary() {
                    warnings.push(format!(
                        "index {} collapsed to {} bins (tied values)",
                        idx.key(),
                        spec.bins.len()
                    ));
                }
                bin_outputs.push((idx, spec, reports));
            }
            Ok(None) => warnings.push(format!(
                "index {} skipped: fewer defined spans than target bins",
                idx.key()
            )),
            Err(e) => return Err(e.in_stage("stratify")),
        }
    }

    // regress; a constant outcome (recall exactly 0 or 1) has no model
    let regression = match regress_matching(
        &corpus,
        &outcomes,
        &vectors,
        &config.bootstrap,
        config.ridge_lambda,
        config.zscore_binaries,
    ) {
        Ok(r) => {
            warnings.extend(r.warnings.iter().cloned());
            Some(r)
        }
        Err(e @ Error::ConstantOutcome { .. }) => {
            warnings.push(format!("regression skipped: {e}"));
            None
        }
        Err(e) => return Err(e.in_stage("regress")),
    };

    // profile
    let grouping_map: BTreeMap<String, String> = match &config.grouping {
        Grouping::Category => corpus
            .gold
            .iter()
            .map(|g| (g.span_id.clone(), g.category.label().to_string()))
            .collect(),
        Grouping::Meta { key } => corpus
            .gold
            .iter()
            .map(|g| {
                let label = corpus
                    .document(&g.doc_id)
                    .and_then(|d| d.meta.get(key).cloned())
                    .unwrap_or_else(|| "(missing)".to_string());
                (g.span_id.clone(), label)
            })
            .collect(),
    };
    let profile = crate::stratify::group_profile(&vectors, &grouping_map, &zparams);
    warnings.extend(profile.warnings.iter().cloned());

    // report
    let summary = RunSummary {
        criterion: config.criterion.name(),
        n_documents: corpus.documents.len(),
        n_gold: corpus.gold.len(),
        n_predicted: corpus.predicted.len(),
        n_undefined_vectors: n_undefined,
        overall_recall: overall.recall,
        overall_ci_low: overall.ci_low,
        overall_ci_high: overall.ci_high,
        regression: regression.as_ref().map(|r| RegressionDiagnostics {
            reference_category: r.reference_category.label().to_string(),
            converged: r.converged,
            iterations: r.iterations,
            bootstrap_used: r.bootstrap_used,
            bootstrap_skipped: r.bootstrap_skipped,
        }),
        ridge_lambda: config.ridge_lambda,
        bootstrap_b: config.bootstrap.b,
        bootstrap_seed: config.bootstrap.seed,
        ci_level: config.bootstrap.ci_level,
        warnings,
    };

    let mut files: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    let span_rows: Vec<(&MatchOutcome, Option<&IndexVector>)> = outcomes
        .iter()
        .map(|o| (o, vectors.get(&o.span_id)))
        .collect();
    files.insert(
        "per_span.csv".to_string(),
        per_span_table(&span_rows, config.criterion).into_bytes(),
    );
    files.insert(
        "category_recall.csv".to_string(),
        stratum_table("category", &category_reports).into_bytes(),
    );
    for (idx, spec, reports) in &bin_outputs {
        files.insert(
            format!("bins_{}.csv", idx.key()),
            bin_table(spec, reports).into_bytes(),
        );
    }
    if let Some(r) = &regression {
        files.insert(
            "regression.csv".to_string(),
            regression_table(r).into_bytes(),
        );
    }
    files.insert(
        "group_profile.csv".to_string(),
        group_profile_table(&profile).into_bytes(),
    );
    files.insert(
        "summary.json".to_string(),
        to_pretty_json(&summary)?.into_bytes(),
    );
    files.insert(
        "manifest.json".to_string(),
        to_pretty_json(&Manifest::for_config(config))?.into_bytes(),
    );

    Ok(ReportBundle { files, summary })
}

fn to_pretty_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidConfig(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn load_corpus(config: &RunConfig) -> Result<Corpus> {
    let documents = load_documents(&config.documents)?;
    let gold = load_gold_spans(&config.gold, &documents)?;
    let predicted = load_predicted_spans(&config.predictions, &documents)?;
    Ok(Corpus {
        documents,
        gold,
        predicted,
    })
}

fn fit_zparams(
    population: &[(String, IndexVector)],
) -> Result<BTreeMap<Index, ZScoreParams>> {
    let defined: Vec<&IndexVector> = population
        .iter()
        .map(|(_, v)| v)
        .filter(|v| v.is_defined())
        .collect();
    if defined.len() < 2 {
        return Err(Error::TooFewValues {
            need: 2,
            got: defined.len(),
        });
    }
    ALL_INDICES
        .iter()
        .map(|idx| {
            let values: Vec<f64> = defined.iter().map(|v| idx.value(v)).collect();
            ZScoreParams::fit(&values).map(|p| (*idx, p))
        })
        .collect()
}

fn overall_recall(
    outcomes: &[MatchOutcome],
    corpus: &Corpus,
    config: &BootstrapConfig,
) -> Result<StratumReport> {
    let doc_index = corpus.doc_index();
    let mut grouped: Vec<Vec<f64>> = vec![Vec::new(); corpus.documents.len()];
    for o in outcomes {
        let di = *doc_index
            .get(o.doc_id.as_str())
            .ok_or_else(|| Error::InvalidConfig(format!("unknown doc {}", o.doc_id)))?;
        grouped[di].push(f64::from(o.is_matched));
    }
    let groups: Vec<&[f64]> = grouped.iter().map(|g| g.as_slice()).collect();
    let stat = |sel: &[&[f64]]| -> Option<f64> {
        let mut n = 0usize;
        let mut sum = 0.0;
        for g in sel {
            n += g.len();
            sum += g.iter().sum::<f64>();
        }
        if n == 0 {
            None
        } else {
            Some(sum / n as f64)
        }
    };
    let est = cluster_bootstrap(&groups, stat, config)?;
    Ok(StratumReport {
        label: "overall".to_string(),
        n: outcomes.len(),
        recall: est.point,
        ci_low: est.ci_low,
        ci_high: est.ci_high,
        unstable: est.is_unstable(),
    })
}

/// span_id -> bin-label strata for one index (the stratify subcommand's
/// view of [`index_bins`]). None when too few defined spans exist to bin.
pub fn index_strata(
    idx: Index,
    outcomes: &[MatchOutcome],
    vectors: &BTreeMap<String, IndexVector>,
    target_bins: usize,
) -> Result<Option<BTreeMap<String, String>>> {
    Ok(index_bins(idx, outcomes, vectors, target_bins)?.map(|(_, strata)| strata))
}

/// Bin layout and span_id -> bin-label strata for one index. Continuous
/// indices use nearest-rank quantile bins; binary indices use their natural
/// 0/1 values. None when too few defined spans exist to bin.
#[allow(clippy::type_complexity)]
fn index_bins(
    idx: Index,
    outcomes: &[MatchOutcome],
    vectors: &BTreeMap<String, IndexVector>,
    target_bins: usize,
) -> Result<Option<(BinSpec, BTreeMap<String, String>)>> {
    let defined: Vec<(&str, f64)> = outcomes
        .iter()
        .filter_map(|o| {
            vectors
                .get(&o.span_id)
                .filter(|v| v.is_defined())
                .map(|v| (o.span_id.as_str(), idx.value(v)))
        })
        .collect();

    if idx.is_binary() {
        if defined.is_empty() {
            return Ok(None);
        }
        let mut bins = Vec::new();
        let mut strata = BTreeMap::new();
        for value in [0.0, 1.0] {
            let members: Vec<&str> = defined
                .iter()
                .filter(|(_, v)| *v == value)
                .map(|(id, _)| *id)
                .collect();
            if members.is_empty() {
                continue;
            }
            bins.push(BinSummary {
                min: value,
                max: value,
                count: members.len(),
            });
            for id in members {
                strata.insert(id.to_string(), format!("{}", value as u8));
            }
        }
        let cuts = if bins.len() == 2 { vec![0.0] } else { vec![] };
        return Ok(Some((
            BinSpec {
                index: idx.key().to_string(),
                cuts,
                bins,
            },
            strata,
        )));
    }

    if defined.len() < target_bins {
        return Ok(None);
    }
    let values: Vec<f64> = defined.iter().map(|(_, v)| *v).collect();
    let (spec, assignment) = quantile_bins(idx.key(), &values, target_bins)?;
    let strata: BTreeMap<String, String> = defined
        .iter()
        .zip(&assignment)
        .map(|((id, _), bin)| (id.to_string(), bin.to_string()))
        .collect();
    Ok(Some((spec, strata)))
}

/// Convenience for tests and the CLI: materialize a synthetic corpus and its
/// simulated predictions as the three JSONL input files.
pub fn write_synth_inputs(
    corpus: &Corpus,
    predictions: &[crate::corpus::PredictedSpan],
    dir: &Path,
) -> Result<(PathBuf, PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let docs_path = dir.join("documents.jsonl");
    let gold_path = dir.join("gold.jsonl");
    let pred_path = dir.join("predictions.jsonl");
    let write = |path: &Path, content: String| -> Result<()> {
        fs::write(path, content).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    };
    write(&docs_path, crate::corpus::documents_to_jsonl(&corpus.documents))?;
    write(&gold_path, crate::corpus::gold_to_jsonl(&corpus.gold))?;
    write(&pred_path, crate::corpus::predicted_to_jsonl(predictions))?;
    Ok((docs_path, gold_path, pred_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{default_profiles, generate_corpus, simulate_predictions, ExtractorSim};
    use crate::text::LexiconBundle;

    fn make_run(dir: &Path, seed: u64, criterion: MatchCriterion) -> RunConfig {
        let corpus = generate_corpus(&default_profiles(), 25, (3, 8), seed).unwrap();
        let sim = ExtractorSim {
            base_miss: 0.15,
            miss_slope_stopwords: 0.5,
            jitter_tokens: 1,
            confusion_prob: 0.05,
        };
        let preds = simulate_predictions(&corpus, &sim, &LexiconBundle::builtin(), seed + 1);
        let (docs, gold, pred) = write_synth_inputs(&corpus, &preds, dir).unwrap();
        let mut config = RunConfig::new(
            docs,
            gold,
            pred,
            dir.join("out"),
            criterion,
            4242,
        );
        config.bootstrap.b = 120;
        config
    }

    #[test]
    fn pipeline_produces_expected_files() {
        let dir = tempfile::tempdir().unwrap();
        let config = make_run(dir.path(), 5, MatchCriterion::iou_default());
        let bundle = run_pipeline(&config).unwrap();
        for required in [
            "per_span.csv",
            "category_recall.csv",
            "bins_fkgl.csv",
            "bins_avg_syllables.csv",
            "bins_proper_nouns.csv",
            "bins_stopwords.csv",
            "bins_pronouns.csv",
            "bins_hedge.csv",
            "bins_negation.csv",
            "regression.csv",
            "group_profile.csv",
            "summary.json",
            "manifest.json",
        ] {
            assert!(bundle.files.contains_key(required), "missing {required}");
        }
        bundle.write(&config.out_dir).unwrap();
        assert!(config.out_dir.join("per_span.csv").exists());
    }

    #[test]
    fn rerun_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let config = make_run(dir.path(), 6, MatchCriterion::Exact);
        let a = run_pipeline(&config).unwrap();
        let b = run_pipeline(&config).unwrap();
        assert_eq!(a.files, b.files);
    }

    #[test]
    fn manifest_round_trip_reproduces_config() {
        let dir = tempfile::tempdir().unwrap();
        let config = make_run(dir.path(), 7, MatchCriterion::iou_default());
        let bundle = run_pipeline(&config).unwrap();
        bundle.write(&config.out_dir).unwrap();
        let manifest = Manifest::load(&config.out_dir.join("manifest.json")).unwrap();
        assert_eq!(manifest.config, config);
        let again = run_pipeline(&manifest.config).unwrap();
        assert_eq!(again.files, bundle.files);
    }

    #[test]
    fn identity_extractor_yields_unit_category_recalls() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = generate_corpus(&default_profiles(), 12, (2, 6), 9).unwrap();
        let preds =
            simulate_predictions(&corpus, &ExtractorSim::identity(), &LexiconBundle::builtin(), 1);
        let (docs, gold, pred) = write_synth_inputs(&corpus, &preds, dir.path()).unwrap();
        let mut config = RunConfig::new(
            docs,
            gold,
            pred,
            dir.path().join("out"),
            MatchCriterion::Exact,
            11,
        );
        config.bootstrap.b = 60;
        let bundle = run_pipeline(&config).unwrap();
        assert_eq!(bundle.summary.overall_recall, 1.0);
        let table = String::from_utf8(bundle.files["category_recall.csv"].clone()).unwrap();
        for line in table.lines().skip(1) {
            let recall = line.split(',').nth(2).unwrap();
            assert_eq!(recall, "1.00000", "{line}");
        }
    }

    #[test]
    fn duplicate_input_paths_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("same.jsonl");
        let config = RunConfig::new(
            p.clone(),
            p.clone(),
            dir.path().join("other.jsonl"),
            dir.path().join("out"),
            MatchCriterion::Exact,
            1,
        );
        assert!(matches!(
            run_pipeline(&config),
            Err(Error::Stage { stage: "config", .. })
        ));
    }

    #[test]
    fn synth_inputs_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = generate_corpus(&default_profiles(), 10, (2, 7), 0xAB).unwrap();
        let sim = ExtractorSim {
            base_miss: 0.2,
            miss_slope_stopwords: 0.4,
            jitter_tokens: 2,
            confusion_prob: 0.1,
        };
        let preds = simulate_predictions(&corpus, &sim, &LexiconBundle::builtin(), 0xAC);
        let (d, g, p) = write_synth_inputs(&corpus, &preds, dir.path()).unwrap();

        let documents = crate::corpus::load_documents(&d).unwrap();
        let gold = crate::corpus::load_gold_spans(&g, &documents).unwrap();
        let predicted = crate::corpus::load_predicted_spans(&p, &documents).unwrap();
        assert_eq!(documents, corpus.documents);
        assert_eq!(gold, corpus.gold);
        assert_eq!(predicted, preds);
    }

    #[test]
    fn grouping_parse() {
        assert_eq!(Grouping::parse("category").unwrap(), Grouping::Category);
        assert_eq!(
            Grouping::parse("meta:sex").unwrap(),
            Grouping::Meta { key: "sex".into() }
        );
        assert!(Grouping::parse("meta:").is_err());
        assert!(Grouping::parse("bogus").is_err());
    }
}
