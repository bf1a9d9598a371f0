//! spanlens - span-level reliability analysis CLI
//!
//! Subcommands mirror the pipeline stages so each analysis is reachable in
//! isolation: ingest-check, indices, match, stratify, regress, profile,
//! simulate, and run-all for the full report bundle.
//!
//! Exit codes: 0 success, 1 validation error (bad inputs/flags), 2 runtime
//! error. Diagnostics go to stderr; tables go to --out or stdout.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spanlens::corpus::{load_documents, load_gold_spans, load_predicted_spans, Corpus};
use spanlens::error::Error;
use spanlens::inference::{regress_matching, BootstrapConfig};
use spanlens::matching::{evaluate_matches, MatchCriterion};
use spanlens::report::pipeline::{
    index_strata, run_pipeline, write_synth_inputs, Grouping, LexiconPaths, Manifest, RunConfig,
};
use spanlens::report::{
    group_profile_table, indices_table, outcomes_table, regression_table, stratum_table,
};
use spanlens::stratify::{group_profile, stratified_recall, ZScoreParams};
use spanlens::synth::{
    default_profiles, generate_corpus, simulate_predictions, CategoryProfile, ExtractorSim,
};
use spanlens::text::{compute_index_vector, Index, IndexVector, LexiconBundle, ALL_INDICES};

#[derive(Parser)]
#[command(
    name = "spanlens",
    version,
    about = "Span-level extraction reliability analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate input files and print record counts
    IngestCheck(IngestCheckArgs),
    /// Compute the seven linguistic indices per gold span
    Indices(IndicesArgs),
    /// Evaluate per-span match outcomes under a criterion
    Match(MatchArgs),
    /// Stratified recall with cluster-bootstrap intervals
    Stratify(StratifyArgs),
    /// Category-controlled logistic regression of is_matched on indices
    Regress(RegressArgs),
    /// Group-by-index mean z-score profile matrix
    Profile(ProfileArgs),
    /// Generate a synthetic corpus and simulated predictions
    Simulate(SimulateArgs),
    /// Run the full pipeline and write the report bundle
    RunAll(RunAllArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Documents file (JSONL: doc_id, text, meta)
    #[arg(long)]
    documents: PathBuf,
    /// Gold spans file (JSONL: doc_id, category, char_start, char_end, text)
    #[arg(long)]
    gold: PathBuf,
}

#[derive(Args)]
struct LexiconArgs {
    /// Override the negation cue lexicon (one cue per line)
    #[arg(long)]
    negation_lexicon: Option<PathBuf>,
    /// Override the hedge cue lexicon (one cue per line)
    #[arg(long)]
    hedge_lexicon: Option<PathBuf>,
    /// Override the stopword list (one word per line)
    #[arg(long)]
    stopword_lexicon: Option<PathBuf>,
}

impl LexiconArgs {
    fn paths(&self) -> LexiconPaths {
        LexiconPaths {
            negation: self.negation_lexicon.clone(),
            hedge: self.hedge_lexicon.clone(),
            stopwords: self.stopword_lexicon.clone(),
        }
    }
}

#[derive(Args)]
struct CriterionArgs {
    /// Match criterion: exact | iou
    #[arg(long, default_value = "exact")]
    criterion: String,
    /// IoU threshold in (0, 1] for the iou criterion
    #[arg(long, default_value_t = MatchCriterion::DEFAULT_IOU_THRESHOLD)]
    iou_threshold: f64,
}

impl CriterionArgs {
    fn parse(&self) -> Result<MatchCriterion, Error> {
        let c = match self.criterion.as_str() {
            "exact" => MatchCriterion::Exact,
            "iou" => MatchCriterion::Iou {
                threshold: self.iou_threshold,
            },
            other => {
                return Err(Error::InvalidConfig(format!(
                    "criterion must be \"exact\" or \"iou\", got \"{other}\""
                )))
            }
        };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct IngestCheckArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Predicted spans file (optional here)
    #[arg(long)]
    predictions: Option<PathBuf>,
}

#[derive(Args)]
struct IndicesArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    lexicons: LexiconArgs,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MatchArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    predictions: PathBuf,
    #[command(flatten)]
    criterion: CriterionArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StratifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    predictions: PathBuf,
    #[command(flatten)]
    criterion: CriterionArgs,
    #[command(flatten)]
    lexicons: LexiconArgs,
    /// Stratify by "category" or an index key (fkgl, avg_syllables,
    /// proper_nouns, stopwords, pronouns, hedge, negation)
    #[arg(long)]
    by: String,
    /// Target number of quantile bins for continuous indices
    #[arg(long, default_value_t = RunConfig::DEFAULT_TARGET_BINS)]
    bins: usize,
    /// Bootstrap replicates
    #[arg(long, default_value_t = BootstrapConfig::DEFAULT_B)]
    b: usize,
    /// Bootstrap seed (required for reproducibility)
    #[arg(long)]
    seed: u64,
    /// Confidence level in (0, 1)
    #[arg(long, default_value_t = BootstrapConfig::DEFAULT_CI_LEVEL)]
    ci_level: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RegressArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    predictions: PathBuf,
    #[command(flatten)]
    criterion: CriterionArgs,
    #[command(flatten)]
    lexicons: LexiconArgs,
    #[arg(long, default_value_t = BootstrapConfig::DEFAULT_B)]
    b: usize,
    /// Bootstrap seed (required for reproducibility)
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = BootstrapConfig::DEFAULT_CI_LEVEL)]
    ci_level: f64,
    /// Ridge penalty on non-intercept terms
    #[arg(long, default_value_t = spanlens::inference::DEFAULT_RIDGE_LAMBDA)]
    ridge: f64,
    /// Enter hedge/negation as raw 0/1 instead of z-scored
    #[arg(long)]
    raw_binaries: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    lexicons: LexiconArgs,
    /// Grouping: "category" or "meta:<key>"
    #[arg(long, default_value = "category")]
    group_by: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Directory for documents.jsonl, gold.jsonl, predictions.jsonl
    #[arg(long)]
    out_dir: PathBuf,
    /// Generator / simulator seed (required for reproducibility)
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    docs: usize,
    #[arg(long, default_value_t = 3)]
    spans_min: usize,
    #[arg(long, default_value_t = 10)]
    spans_max: usize,
    /// JSON file with an array of category profiles (defaults built in)
    #[arg(long)]
    profiles_file: Option<PathBuf>,
    /// Base miss probability
    #[arg(long, default_value_t = 0.2)]
    base_miss: f64,
    /// Added miss probability per unit stopword proportion
    #[arg(long, default_value_t = 0.5)]
    miss_slope: f64,
    /// Max token jitter applied to each predicted boundary
    #[arg(long, default_value_t = 1)]
    jitter: usize,
    /// Probability of flipping a prediction's category
    #[arg(long, default_value_t = 0.0)]
    confusion: f64,
}

#[derive(Args)]
struct RunAllArgs {
    /// Re-run from a manifest; all other flags are ignored
    #[arg(long, conflicts_with_all = ["documents", "gold", "predictions", "out_dir", "seed"])]
    manifest: Option<PathBuf>,
    #[arg(long, required_unless_present = "manifest")]
    documents: Option<PathBuf>,
    #[arg(long, required_unless_present = "manifest")]
    gold: Option<PathBuf>,
    #[arg(long, required_unless_present = "manifest")]
    predictions: Option<PathBuf>,
    /// Report bundle output directory
    #[arg(long, required_unless_present = "manifest")]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    criterion: CriterionArgs,
    #[command(flatten)]
    lexicons: LexiconArgs,
    #[arg(long, default_value_t = RunConfig::DEFAULT_TARGET_BINS)]
    bins: usize,
    #[arg(long, default_value_t = BootstrapConfig::DEFAULT_B)]
    b: usize,
    /// Bootstrap seed (required unless --manifest is given)
    #[arg(long, required_unless_present = "manifest")]
    seed: Option<u64>,
    #[arg(long, default_value_t = BootstrapConfig::DEFAULT_CI_LEVEL)]
    ci_level: f64,
    #[arg(long, default_value_t = spanlens::inference::DEFAULT_RIDGE_LAMBDA)]
    ridge: f64,
    /// Profile grouping: "category" or "meta:<key>"
    #[arg(long, default_value = "category")]
    group_by: String,
    /// Enter hedge/negation as raw 0/1 instead of z-scored
    #[arg(long)]
    raw_binaries: bool,
    /// Restrict analysis to documents whose meta split equals this value
    #[arg(long)]
    split: Option<String>,
    /// Fit z-score parameters on all spans rather than the analysis split
    #[arg(long)]
    zscore_on_all: bool,
}

fn load_corpus(input: &InputArgs, predictions: Option<&PathBuf>) -> Result<Corpus, Error> {
    let documents = load_documents(&input.documents)?;
    let gold = load_gold_spans(&input.gold, &documents)?;
    let predicted = match predictions {
        Some(p) => load_predicted_spans(p, &documents)?,
        None => Vec::new(),
    };
    Ok(Corpus {
        documents,
        gold,
        predicted,
    })
}

fn emit(out: Option<&PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, content).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn gold_vectors(corpus: &Corpus, lexicons: &LexiconBundle) -> BTreeMap<String, IndexVector> {
    corpus
        .gold
        .iter()
        .map(|g| (g.span_id.clone(), compute_index_vector(&g.text, lexicons)))
        .collect()
}

fn grouping_map(corpus: &Corpus, grouping: &Grouping) -> BTreeMap<String, String> {
    match grouping {
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
    }
}

/// Strata map for the stratify subcommand: by category or by one index.
fn build_strata(
    by: &str,
    outcomes: &[spanlens::matching::MatchOutcome],
    vectors: &BTreeMap<String, IndexVector>,
    target_bins: usize,
) -> Result<(&'static str, BTreeMap<String, String>), Error> {
    if by == "category" {
        let strata = outcomes
            .iter()
            .map(|o| (o.span_id.clone(), o.category.label().to_string()))
            .collect();
        return Ok(("category", strata));
    }
    let Some(idx) = Index::parse_key(by) else {
        return Err(Error::InvalidConfig(format!(
            "--by must be \"category\" or one of: {}",
            ALL_INDICES
                .iter()
                .map(|i| i.key())
                .collect::<Vec<_>>()
                .join(", ")
        )));
    };
    match index_strata(idx, outcomes, vectors, target_bins)? {
        Some(strata) => Ok(("bin", strata)),
        None => Err(Error::TooFewValues {
            need: target_bins,
            got: vectors.values().filter(|v| v.is_defined()).count(),
        }),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::IngestCheck(args) => {
            let corpus = load_corpus(&args.input, args.predictions.as_ref())?;
            println!(
                "ok: {} documents, {} gold spans, {} predicted spans",
                corpus.documents.len(),
                corpus.gold.len(),
                corpus.predicted.len()
            );
            Ok(())
        }
        Command::Indices(args) => {
            let corpus = load_corpus(&args.input, None)?;
            let lexicons = args.lexicons.paths().load()?;
            let vectors = gold_vectors(&corpus, &lexicons);
            let rows: Vec<_> = corpus
                .gold
                .iter()
                .map(|g| (g, &vectors[&g.span_id]))
                .collect();
            emit(args.out.as_ref(), &indices_table(&rows))
        }
        Command::Match(args) => {
            let corpus = load_corpus(&args.input, Some(&args.predictions))?;
            let criterion = args.criterion.parse()?;
            let outcomes = evaluate_matches(&corpus, criterion)?;
            emit(args.out.as_ref(), &outcomes_table(&outcomes))
        }
        Command::Stratify(args) => {
            let corpus = load_corpus(&args.input, Some(&args.predictions))?;
            let criterion = args.criterion.parse()?;
            let lexicons = args.lexicons.paths().load()?;
            let outcomes = evaluate_matches(&corpus, criterion)?;
            let vectors = gold_vectors(&corpus, &lexicons);
            let config = BootstrapConfig {
                b: args.b,
                seed: args.seed,
                ci_level: args.ci_level,
            };
            let (label_col, strata) = build_strata(&args.by, &outcomes, &vectors, args.bins)?;
            let reports = stratified_recall(&outcomes, &strata, &corpus, &config)?;
            emit(args.out.as_ref(), &stratum_table(label_col, &reports))
        }
        Command::Regress(args) => {
            let corpus = load_corpus(&args.input, Some(&args.predictions))?;
            let criterion = args.criterion.parse()?;
            let lexicons = args.lexicons.paths().load()?;
            let outcomes = evaluate_matches(&corpus, criterion)?;
            let vectors = gold_vectors(&corpus, &lexicons);
            let config = BootstrapConfig {
                b: args.b,
                seed: args.seed,
                ci_level: args.ci_level,
            };
            let result = regress_matching(
                &corpus,
                &outcomes,
                &vectors,
                &config,
                args.ridge,
                !args.raw_binaries,
            )?;
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!(
                "reference category: {}; lambda {}; converged {} in {} iterations; \
                 bootstrap used {} skipped {}",
                result.reference_category.label(),
                result.lambda,
                result.converged,
                result.iterations,
                result.bootstrap_used,
                result.bootstrap_skipped
            );
            emit(args.out.as_ref(), &regression_table(&result))
        }
        Command::Profile(args) => {
            let corpus = load_corpus(&args.input, None)?;
            let grouping = Grouping::parse(&args.group_by)?;
            let lexicons = args.lexicons.paths().load()?;
            let vectors = gold_vectors(&corpus, &lexicons);
            let defined: Vec<&IndexVector> = vectors.values().filter(|v| v.is_defined()).collect();
            if defined.len() < 2 {
                return Err(Error::TooFewValues {
                    need: 2,
                    got: defined.len(),
                });
            }
            let zparams: BTreeMap<Index, ZScoreParams> = ALL_INDICES
                .iter()
                .map(|idx| {
                    let vals: Vec<f64> = defined.iter().map(|v| idx.value(v)).collect();
                    ZScoreParams::fit(&vals).map(|p| (*idx, p))
                })
                .collect::<Result<_, _>>()?;
            let profile = group_profile(&vectors, &grouping_map(&corpus, &grouping), &zparams);
            for w in &profile.warnings {
                eprintln!("warning: {w}");
            }
            emit(args.out.as_ref(), &group_profile_table(&profile))
        }
        Command::Simulate(args) => {
            let profiles: Vec<CategoryProfile> = match &args.profiles_file {
                Some(path) => {
                    let raw = fs::read_to_string(path).map_err(|source| Error::Io {
                        path: path.display().to_string(),
                        source,
                    })?;
                    serde_json::from_str(&raw).map_err(|e| Error::MalformedRecord {
                        path: path.display().to_string(),
                        line: 0,
                        msg: e.to_string(),
                    })?
                }
                None => default_profiles(),
            };
            let corpus = generate_corpus(
                &profiles,
                args.docs,
                (args.spans_min, args.spans_max),
                args.seed,
            )?;
            let sim = ExtractorSim {
                base_miss: args.base_miss,
                miss_slope_stopwords: args.miss_slope,
                jitter_tokens: args.jitter,
                confusion_prob: args.confusion,
            };
            let lexicons = LexiconBundle::builtin();
            let preds = simulate_predictions(&corpus, &sim, &lexicons, args.seed.wrapping_add(1));
            let (d, g, p) = write_synth_inputs(&corpus, &preds, &args.out_dir)?;
            println!(
                "wrote {} ({} docs), {} ({} gold), {} ({} predicted)",
                d.display(),
                corpus.documents.len(),
                g.display(),
                corpus.gold.len(),
                p.display(),
                preds.len()
            );
            Ok(())
        }
        Command::RunAll(args) => {
            let config = match &args.manifest {
                Some(path) => Manifest::load(path)?.config,
                None => {
                    let criterion = args.criterion.parse()?;
                    let mut config = RunConfig::new(
                        args.documents.clone().expect("required by clap"),
                        args.gold.clone().expect("required by clap"),
                        args.predictions.clone().expect("required by clap"),
                        args.out_dir.clone().expect("required by clap"),
                        criterion,
                        args.seed.expect("required by clap"),
                    );
                    config.target_bins = args.bins;
                    config.bootstrap.b = args.b;
                    config.bootstrap.ci_level = args.ci_level;
                    config.ridge_lambda = args.ridge;
                    config.grouping = Grouping::parse(&args.group_by)?;
                    config.lexicons = args.lexicons.paths();
                    config.zscore_binaries = !args.raw_binaries;
                    config.split = args.split.clone();
                    config.zscore_on_all = args.zscore_on_all;
                    config
                }
            };
            let bundle = run_pipeline(&config)?;
            for w in &bundle.summary.warnings {
                eprintln!("warning: {w}");
            }
            bundle.write(&config.out_dir)?;
            println!(
                "wrote {} files to {} (overall recall {:.4})",
                bundle.files.len(),
                config.out_dir.display(),
                bundle.summary.overall_recall
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(if e.is_validation() { 1u8 } else { 2u8 })
        }
    }
}
