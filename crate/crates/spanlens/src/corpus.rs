//! Document / span data model and JSONL ingestion.
//!
//! Input files are newline-delimited JSON records. Offsets are Unicode
//! scalar-value (char) indices into the owning document's text, half-open
//! `[char_start, char_end)`. Every loader validates the offset/substring
//! invariants and reports the offending line on failure.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The nine decision categories retained for analysis (legal/insurance is
/// excluded upstream and rejected here as an unknown label).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DecisionCategory {
    DefiningProblem,
    EvaluatingTestResult,
    DrugRelated,
    TherapeuticProcedureRelated,
    GatheringInformation,
    AdviceAndPrecaution,
    ContactRelated,
    TreatmentGoal,
    Deferment,
}

/// All nine categories in report order.
pub const ALL_CATEGORIES: [DecisionCategory; 9] = [
    DecisionCategory::DefiningProblem,
    DecisionCategory::EvaluatingTestResult,
    DecisionCategory::DrugRelated,
    DecisionCategory::TherapeuticProcedureRelated,
    DecisionCategory::GatheringInformation,
    DecisionCategory::AdviceAndPrecaution,
    DecisionCategory::ContactRelated,
    DecisionCategory::TreatmentGoal,
    DecisionCategory::Deferment,
];

impl DecisionCategory {
    /// Surface string used in reports ("Defining problem", "Drug-related", ...).
    pub fn label(&self) -> &'static str {
        match self {
            Self::DefiningProblem => "Defining problem",
            Self::EvaluatingTestResult => "Evaluating test result",
            Self::DrugRelated => "Drug-related",
            Self::TherapeuticProcedureRelated => "Therapeutic procedure related",
            Self::GatheringInformation => "Gathering information",
            Self::AdviceAndPrecaution => "Advice and precaution",
            Self::ContactRelated => "Contact-related",
            Self::TreatmentGoal => "Treatment goal",
            Self::Deferment => "Deferment",
        }
    }

    /// Parse a label leniently: case, spacing, hyphens and underscores are
    /// ignored ("drug-related", "Drug related" and "DRUG_RELATED" all parse).
    /// Anything outside the nine categories is an error.
    pub fn parse(label: &str) -> Option<Self> {
        let key: String = label
            .chars()
            .filter(|c| c.is_alphanumeric())
            .flat_map(|c| c.to_lowercase())
            .collect();
        ALL_CATEGORIES.iter().copied().find(|c| {
            c.label()
                .chars()
                .filter(|ch| ch.is_alphanumeric())
                .flat_map(|ch| ch.to_lowercase())
                .collect::<String>()
                == key
        })
    }
}

impl fmt::Display for DecisionCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A source document; the cluster unit for bootstrap resampling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub text: String,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
}

impl Document {
    /// Text length in chars (the unit all offsets are expressed in).
    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }
}

/// A gold (annotated) decision span.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldSpan {
    pub span_id: String,
    pub doc_id: String,
    pub category: DecisionCategory,
    pub char_start: usize,
    pub char_end: usize,
    pub text: String,
}

/// A predicted decision span.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedSpan {
    pub doc_id: String,
    pub category: DecisionCategory,
    pub char_start: usize,
    pub char_end: usize,
    pub text: String,
}

/// Common view over gold and predicted spans for the matching code.
pub trait SpanLike {
    fn doc_id(&self) -> &str;
    fn category(&self) -> DecisionCategory;
    fn char_start(&self) -> usize;
    fn char_end(&self) -> usize;
    fn text(&self) -> &str;
}

impl SpanLike for GoldSpan {
    fn doc_id(&self) -> &str {
        &self.doc_id
    }
    fn category(&self) -> DecisionCategory {
        self.category
    }
    fn char_start(&self) -> usize {
        self.char_start
    }
    fn char_end(&self) -> usize {
        self.char_end
    }
    fn text(&self) -> &str {
        &self.text
    }
}

impl SpanLike for PredictedSpan {
    fn doc_id(&self) -> &str {
        &self.doc_id
    }
    fn category(&self) -> DecisionCategory {
        self.category
    }
    fn char_start(&self) -> usize {
        self.char_start
    }
    fn char_end(&self) -> usize {
        self.char_end
    }
    fn text(&self) -> &str {
        &self.text
    }
}

/// A loaded corpus. Immutable after load; safe to share across threads.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub gold: Vec<GoldSpan>,
    pub predicted: Vec<PredictedSpan>,
}

impl Corpus {
    pub fn document(&self, doc_id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.doc_id == doc_id)
    }

    /// doc_id -> index lookup for the matching and bootstrap layers.
    pub fn doc_index(&self) -> BTreeMap<&str, usize> {
        self.documents
            .iter()
            .enumerate()
            .map(|(i, d)| (d.doc_id.as_str(), i))
            .collect()
    }

    /// Keep only documents whose `meta[key] == value`, dropping spans with them.
    pub fn filter_by_meta(&self, key: &str, value: &str) -> Corpus {
        let keep: BTreeSet<&str> = self
            .documents
            .iter()
            .filter(|d| d.meta.get(key).map(String::as_str) == Some(value))
            .map(|d| d.doc_id.as_str())
            .collect();
        Corpus {
            documents: self
                .documents
                .iter()
                .filter(|d| keep.contains(d.doc_id.as_str()))
                .cloned()
                .collect(),
            gold: self
                .gold
                .iter()
                .filter(|s| keep.contains(s.doc_id.as_str()))
                .cloned()
                .collect(),
            predicted: self
                .predicted
                .iter()
                .filter(|s| keep.contains(s.doc_id.as_str()))
                .cloned()
                .collect(),
        }
    }
}

/// Extract `text[start..end)` in char offsets. Returns None when out of range.
pub fn char_substring(text: &str, start: usize, end: usize) -> Option<String> {
    if end < start {
        return None;
    }
    let mut it = text.chars();
    // Advance to `start`; fail if the text is shorter.
    for _ in 0..start {
        it.next()?;
    }
    let mut out = String::new();
    for _ in start..end {
        out.push(it.next()?);
    }
    Some(out)
}

#[derive(Deserialize)]
struct DocumentRecord {
    doc_id: String,
    text: String,
    #[serde(default)]
    meta: BTreeMap<String, String>,
}

#[derive(Deserialize)]
struct SpanRecord {
    doc_id: String,
    category: String,
    char_start: usize,
    char_end: usize,
    text: String,
    #[serde(default)]
    span_id: Option<String>,
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let raw = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(raw
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.to_string()))
        .filter(|(_, l)| !l.trim().is_empty())
        .collect())
}

/// Load documents from a JSONL file, one record per line, order preserved.
pub fn load_documents(path: &Path) -> Result<Vec<Document>> {
    let path_str = path.display().to_string();
    let mut docs = Vec::new();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (line, raw) in read_lines(path)? {
        let rec: DocumentRecord =
            serde_json::from_str(&raw).map_err(|e| Error::MalformedRecord {
                path: path_str.clone(),
                line,
                msg: e.to_string(),
            })?;
        if rec.text.is_empty() {
            return Err(Error::MalformedRecord {
                path: path_str.clone(),
                line,
                msg: format!("document \"{}\" has empty text", rec.doc_id),
            });
        }
        if seen.insert(rec.doc_id.clone(), line).is_some() {
            return Err(Error::DuplicateDocId {
                doc_id: rec.doc_id,
                line,
            });
        }
        docs.push(Document {
            doc_id: rec.doc_id,
            text: rec.text,
            meta: rec.meta,
        });
    }
    Ok(docs)
}

fn validate_span_record(
    rec: &SpanRecord,
    line: usize,
    path_str: &str,
    documents: &[Document],
) -> Result<DecisionCategory> {
    let category = DecisionCategory::parse(&rec.category).ok_or_else(|| Error::UnknownCategory {
        path: path_str.to_string(),
        line,
        label: rec.category.clone(),
    })?;
    let doc = documents
        .iter()
        .find(|d| d.doc_id == rec.doc_id)
        .ok_or_else(|| Error::UnresolvedDocId {
            path: path_str.to_string(),
            line,
            doc_id: rec.doc_id.clone(),
        })?;
    if rec.char_end <= rec.char_start {
        return Err(Error::MalformedRecord {
            path: path_str.to_string(),
            line,
            msg: format!(
                "char_end ({}) must exceed char_start ({})",
                rec.char_end, rec.char_start
            ),
        });
    }
    let actual = char_substring(&doc.text, rec.char_start, rec.char_end).ok_or_else(|| {
        Error::SpanOutOfBounds {
            path: path_str.to_string(),
            line,
            doc_id: rec.doc_id.clone(),
            start: rec.char_start,
            end: rec.char_end,
            len: doc.char_len(),
        }
    })?;
    if actual != rec.text {
        return Err(Error::SpanTextMismatch {
            path: path_str.to_string(),
            line,
            doc_id: rec.doc_id.clone(),
            recorded: rec.text.clone(),
            actual,
        });
    }
    Ok(category)
}

/// Load gold spans. `span_id` defaults to `"doc_id:<zero-based record index>"`
/// when the file does not provide one; ids must be unique after defaulting.
pub fn load_gold_spans(path: &Path, documents: &[Document]) -> Result<Vec<GoldSpan>> {
    let path_str = path.display().to_string();
    let mut spans = Vec::new();
    let mut ids: BTreeSet<String> = BTreeSet::new();
    for (index, (line, raw)) in read_lines(path)?.into_iter().enumerate() {
        let rec: SpanRecord = serde_json::from_str(&raw).map_err(|e| Error::MalformedRecord {
            path: path_str.clone(),
            line,
            msg: e.to_string(),
        })?;
        let category = validate_span_record(&rec, line, &path_str, documents)?;
        let span_id = rec
            .span_id
            .clone()
            .unwrap_or_else(|| format!("{}:{}", rec.doc_id, index));
        if !ids.insert(span_id.clone()) {
            return Err(Error::DuplicateSpanId { span_id, line });
        }
        spans.push(GoldSpan {
            span_id,
            doc_id: rec.doc_id,
            category,
            char_start: rec.char_start,
            char_end: rec.char_end,
            text: rec.text,
        });
    }
    Ok(spans)
}

/// Load predicted spans; same validation as gold, no span_id.
pub fn load_predicted_spans(path: &Path, documents: &[Document]) -> Result<Vec<PredictedSpan>> {
    let path_str = path.display().to_string();
    let mut spans = Vec::new();
    for (line, raw) in read_lines(path)? {
        let rec: SpanRecord = serde_json::from_str(&raw).map_err(|e| Error::MalformedRecord {
            path: path_str.clone(),
            line,
            msg: e.to_string(),
        })?;
        let category = validate_span_record(&rec, line, &path_str, documents)?;
        spans.push(PredictedSpan {
            doc_id: rec.doc_id,
            category,
            char_start: rec.char_start,
            char_end: rec.char_end,
            text: rec.text,
        });
    }
    Ok(spans)
}

#[derive(Serialize)]
struct SpanOut<'a> {
    doc_id: &'a str,
    category: String,
    char_start: usize,
    char_end: usize,
    text: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    span_id: Option<&'a str>,
}

/// Serialize documents to the JSONL format `load_documents` ingests.
pub fn documents_to_jsonl(documents: &[Document]) -> String {
    let mut out = String::new();
    for d in documents {
        #[derive(Serialize)]
        struct DocOut<'a> {
            doc_id: &'a str,
            text: &'a str,
            meta: &'a BTreeMap<String, String>,
        }
        out.push_str(
            &serde_json::to_string(&DocOut {
                doc_id: &d.doc_id,
                text: &d.text,
                meta: &d.meta,
            })
            .expect("document serialization"),
        );
        out.push('\n');
    }
    out
}

/// Serialize gold spans to the JSONL format `load_gold_spans` ingests.
pub fn gold_to_jsonl(spans: &[GoldSpan]) -> String {
    let mut out = String::new();
    for s in spans {
        out.push_str(
            &serde_json::to_string(&SpanOut {
                doc_id: &s.doc_id,
                category: s.category.label().to_string(),
                char_start: s.char_start,
                char_end: s.char_end,
                text: &s.text,
                span_id: Some(&s.span_id),
            })
            .expect("span serialization"),
        );
        out.push('\n');
    }
    out
}

/// Serialize predicted spans to the JSONL format `load_predicted_spans` ingests.
pub fn predicted_to_jsonl(spans: &[PredictedSpan]) -> String {
    let mut out = String::new();
    for s in spans {
        out.push_str(
            &serde_json::to_string(&SpanOut {
                doc_id: &s.doc_id,
                category: s.category.label().to_string(),
                char_start: s.char_start,
                char_end: s.char_end,
                text: &s.text,
                span_id: None,
            })
            .expect("span serialization"),
        );
        out.push('\n');
    }
    out
}
