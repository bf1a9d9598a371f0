//! Error type shared across the toolkit.

use thiserror::Error;

/// All failure modes surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed record: {msg}")]
    MalformedRecord {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("duplicate doc_id \"{doc_id}\" at line {line}")]
    DuplicateDocId { doc_id: String, line: usize },

    #[error("{path}:{line}: unknown category \"{label}\"")]
    UnknownCategory {
        path: String,
        line: usize,
        label: String,
    },

    #[error("{path}:{line}: unresolved doc_id \"{doc_id}\"")]
    UnresolvedDocId {
        path: String,
        line: usize,
        doc_id: String,
    },

    #[error("{path}:{line}: span offsets [{start}, {end}) out of bounds for doc \"{doc_id}\" (len {len})")]
    SpanOutOfBounds {
        path: String,
        line: usize,
        doc_id: String,
        start: usize,
        end: usize,
        len: usize,
    },

    #[error("{path}:{line}: span text mismatch for doc \"{doc_id}\": record says {recorded:?}, document has {actual:?}")]
    SpanTextMismatch {
        path: String,
        line: usize,
        doc_id: String,
        recorded: String,
        actual: String,
    },

    #[error("duplicate span_id \"{span_id}\" at line {line}")]
    DuplicateSpanId { span_id: String, line: usize },

    #[error("not a word (no alphabetic character): {0:?}")]
    NotAWord(String),

    #[error("need at least {need} values, got {got}")]
    TooFewValues { need: usize, got: usize },

    #[error("statistic undefined under resampling (all {b} replicates skipped)")]
    StatisticUndefined { b: usize },

    #[error("rank-deficient design matrix (column {col}); add a ridge penalty or drop collinear columns")]
    RankDeficient { col: usize },

    #[error("match outcome is constant ({value}) across all spans; logistic regression is undefined")]
    ConstantOutcome { value: u8 },

    #[error("infeasible category profile \"{0}\": stopword + proper-noun + pronoun rates exceed 1")]
    InfeasibleProfile(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for errors caused by bad inputs or configuration (CLI exit code 1);
    /// everything else is a runtime failure (exit code 2).
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Io { .. }
            | Error::StatisticUndefined { .. }
            | Error::ConstantOutcome { .. } => false,
            Error::Stage { source, .. } => source.is_validation(),
            _ => true,
        }
    }

    /// Attach the pipeline stage that failed.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
