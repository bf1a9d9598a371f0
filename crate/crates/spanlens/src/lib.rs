//! spanlens: span-level reliability analysis for span-extraction systems.
//!
//! Given documents, gold decision spans and predicted spans, the toolkit
//! computes seven linguistic indices per gold span, evaluates recall under
//! exact and overlap-relaxed match criteria, stratifies recall by index
//! quantile bins with document-cluster bootstrap confidence intervals, and
//! fits a category-controlled ridge logistic regression of match outcome on
//! the indices. A synthetic corpus generator with a configurable extractor
//! simulator provides known ground truth for end-to-end validation.

pub mod corpus;
pub mod error;
pub mod inference;
pub mod matching;
pub mod report;
pub mod stratify;
pub mod synth;
pub mod text;

pub use corpus::{
    load_documents, load_gold_spans, load_predicted_spans, Corpus, DecisionCategory, Document,
    GoldSpan, PredictedSpan,
};
pub use error::{Error, Result};
pub use inference::{
    cluster_bootstrap, fit_logistic, regress_matching, BootstrapConfig, RegressionResult,
};
pub use matching::{evaluate_matches, normalize_span_text, token_iou, MatchCriterion, MatchOutcome};
pub use report::{run_pipeline, Manifest, ReportBundle, RunConfig};
pub use stratify::{group_profile, quantile_bins, stratified_recall, zscore, BinSpec, StratumReport};
pub use text::{compute_index_vector, Index, IndexVector, LexiconBundle};
