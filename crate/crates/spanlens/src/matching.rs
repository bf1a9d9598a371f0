//! Exact and IoU-relaxed match criteria over gold/predicted spans.
//!
//! Evaluation is gold-span-centric: every gold span yields one binary
//! outcome, and a prediction may satisfy several gold spans (no one-to-one
//! assignment). Exact matching compares normalized span text; relaxed
//! matching compares document token index ranges by intersection-over-union.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, DecisionCategory, SpanLike};
use crate::error::{Error, Result};
use crate::text::tokenize;

/// Match criterion: exact normalized-text equality, or token IoU >= threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatchCriterion {
    Exact,
    Iou { threshold: f64 },
}

impl MatchCriterion {
    pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

    pub fn iou_default() -> Self {
        Self::Iou {
            threshold: Self::DEFAULT_IOU_THRESHOLD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Self::Iou { threshold } = self {
            if !(*threshold > 0.0 && *threshold <= 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "iou threshold must be in (0, 1], got {threshold}"
                )));
            }
        }
        Ok(())
    }

    /// Short name used in reports ("exact" or "iou@<t>").
    pub fn name(&self) -> String {
        match self {
            Self::Exact => "exact".to_string(),
            Self::Iou { threshold } => format!("iou@{threshold}"),
        }
    }
}

/// Half-open range of document token indices covered by a span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenRange {
    pub start: usize,
    pub end: usize,
}

impl TokenRange {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(end > start);
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// One outcome per gold span under a criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchOutcome {
    pub span_id: String,
    pub doc_id: String,
    pub category: DecisionCategory,
    pub is_matched: u8,
    pub criterion: MatchCriterion,
    /// Max IoU over same-document same-category predictions (IoU mode only).
    pub best_iou: Option<f64>,
    /// Set when the gold span covered no document tokens; such spans are
    /// scored unmatched.
    pub empty_token_range: bool,
}

/// Normalize span text for exact matching: lowercase, collapse whitespace
/// runs to single spaces, strip leading/trailing whitespace and punctuation.
/// Idempotent.
pub fn normalize_span_text(text: &str) -> String {
    let lowered = text.to_lowercase();
    let collapsed: String = lowered.split_whitespace().collect::<Vec<_>>().join(" ");
    collapsed
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_string()
}

/// IoU of two token index ranges over integer index sets.
pub fn token_iou(a: TokenRange, b: TokenRange) -> f64 {
    let inter_lo = a.start.max(b.start);
    let inter_hi = a.end.min(b.end);
    let inter = inter_hi.saturating_sub(inter_lo);
    let union = a.len() + b.len() - inter;
    if union == 0 {
        return 0.0;
    }
    inter as f64 / union as f64
}

/// Token range of a char span: all tokens fully or partially covered by
/// `[char_start, char_end)`. None when no token overlaps the span.
pub fn derive_token_range(
    tokens: &[crate::text::Token],
    char_start: usize,
    char_end: usize,
) -> Option<TokenRange> {
    let mut first = None;
    let mut last = None;
    for t in tokens {
        if t.char_start < char_end && t.char_end > char_start {
            if first.is_none() {
                first = Some(t.doc_token_index);
            }
            last = Some(t.doc_token_index);
        }
    }
    match (first, last) {
        (Some(f), Some(l)) => Some(TokenRange::new(f, l + 1)),
        _ => None,
    }
}

/// Evaluate every gold span against the predictions under `criterion`.
/// Returns one outcome per gold span, sorted by span_id.
pub fn evaluate_matches(corpus: &Corpus, criterion: MatchCriterion) -> Result<Vec<MatchOutcome>> {
    criterion.validate()?;

    // Tokenize each document once; token ranges are document token indices.
    let doc_tokens: BTreeMap<&str, Vec<crate::text::Token>> = corpus
        .documents
        .iter()
        .map(|d| (d.doc_id.as_str(), tokenize(&d.text)))
        .collect();
    for gold in &corpus.gold {
        if !doc_tokens.contains_key(gold.doc_id.as_str()) {
            return Err(Error::InvalidConfig(format!(
                "gold span {} references unknown document {}",
                gold.span_id, gold.doc_id
            )));
        }
    }

    // Group predictions by document.
    let mut preds_by_doc: BTreeMap<&str, Vec<&crate::corpus::PredictedSpan>> = BTreeMap::new();
    for p in &corpus.predicted {
        preds_by_doc.entry(p.doc_id.as_str()).or_default().push(p);
    }

    let mut outcomes: Vec<MatchOutcome> = corpus
        .gold
        .iter()
        .map(|gold| {
            let preds = preds_by_doc.get(gold.doc_id.as_str());
            let same_cat = preds
                .into_iter()
                .flatten()
                .filter(|p| p.category == gold.category);
            match criterion {
                MatchCriterion::Exact => {
                    let gold_norm = normalize_span_text(&gold.text);
                    let matched = same_cat
                        .into_iter()
                        .any(|p| normalize_span_text(&p.text) == gold_norm);
                    MatchOutcome {
                        span_id: gold.span_id.clone(),
                        doc_id: gold.doc_id.clone(),
                        category: gold.category,
                        is_matched: u8::from(matched),
                        criterion,
                        best_iou: None,
                        empty_token_range: false,
                    }
                }
                MatchCriterion::Iou { threshold } => {
                    let tokens = &doc_tokens[gold.doc_id.as_str()];
                    let gold_range = derive_token_range(tokens, gold.char_start, gold.char_end);
                    match gold_range {
                        None => MatchOutcome {
                            span_id: gold.span_id.clone(),
                            doc_id: gold.doc_id.clone(),
                            category: gold.category,
                            is_matched: 0,
                            criterion,
                            best_iou: Some(0.0),
                            empty_token_range: true,
                        },
                        Some(g) => {
                            let best = same_cat
                                .into_iter()
                                .filter_map(|p| {
                                    derive_token_range(tokens, p.char_start(), p.char_end())
                                })
                                .map(|r| token_iou(g, r))
                                .fold(0.0f64, f64::max);
                            MatchOutcome {
                                span_id: gold.span_id.clone(),
                                doc_id: gold.doc_id.clone(),
                                category: gold.category,
                                is_matched: u8::from(best >= threshold),
                                criterion,
                                best_iou: Some(best),
                                empty_token_range: false,
                            }
                        }
                    }
                }
            }
        })
        .collect();

    outcomes.sort_by(|a, b| a.span_id.cmp(&b.span_id));
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, GoldSpan, PredictedSpan};
    use proptest::prelude::*;
    use std::collections::BTreeMap as Meta;

    fn doc(id: &str, text: &str) -> Document {
        Document {
            doc_id: id.into(),
            text: text.into(),
            meta: Meta::new(),
        }
    }

    fn gold(id: &str, doc_id: &str, cat: DecisionCategory, s: usize, e: usize, text: &str) -> GoldSpan {
        GoldSpan {
            span_id: id.into(),
            doc_id: doc_id.into(),
            category: cat,
            char_start: s,
            char_end: e,
            text: text.into(),
        }
    }

    fn pred(doc_id: &str, cat: DecisionCategory, s: usize, e: usize, text: &str) -> PredictedSpan {
        PredictedSpan {
            doc_id: doc_id.into(),
            category: cat,
            char_start: s,
            char_end: e,
            text: text.into(),
        }
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(
            normalize_span_text("  Aspirin 81mg  daily "),
            "aspirin 81mg daily"
        );
        assert_eq!(
            normalize_span_text("Follow up with PCP."),
            "follow up with pcp"
        );
        assert_eq!(normalize_span_text("(daily)"), "daily");
        assert_eq!(normalize_span_text("..."), "");
    }

    #[test]
    fn iou_examples() {
        assert_eq!(token_iou(TokenRange::new(10, 20), TokenRange::new(10, 20)), 1.0);
        let v = token_iou(TokenRange::new(10, 20), TokenRange::new(15, 25));
        assert!((v - 5.0 / 15.0).abs() < 1e-15);
        assert_eq!(token_iou(TokenRange::new(10, 20), TokenRange::new(30, 40)), 0.0);
        // a one-sided boundary disagreement of 2 tokens on a 10-token span
        assert_eq!(token_iou(TokenRange::new(10, 20), TokenRange::new(12, 20)), 0.8);
        // symmetry
        assert_eq!(
            token_iou(TokenRange::new(3, 9), TokenRange::new(5, 14)),
            token_iou(TokenRange::new(5, 14), TokenRange::new(3, 9))
        );
    }

    #[test]
    fn exact_match_same_category() {
        let d = doc("d1", "plan: hold coumadin tonight");
        let cat = DecisionCategory::DrugRelated;
        let corpus = Corpus {
            documents: vec![d],
            gold: vec![gold("g1", "d1", cat, 6, 19, "hold coumadin")],
            predicted: vec![pred("d1", cat, 6, 19, "hold coumadin")],
        };
        let out = evaluate_matches(&corpus, MatchCriterion::Exact).unwrap();
        assert_eq!(out[0].is_matched, 1);

        // category firewall: different category never matches
        let mut c2 = corpus.clone();
        c2.predicted[0].category = DecisionCategory::DefiningProblem;
        let out = evaluate_matches(&c2, MatchCriterion::Exact).unwrap();
        assert_eq!(out[0].is_matched, 0);
    }

    #[test]
    fn iou_overlap_vs_exact() {
        // doc tokens: plan(0) :(1) hold(2) coumadin(3) and(4) lovenox(5) tonight(6)
        let d = doc("d1", "plan: hold coumadin and lovenox tonight");
        let cat = DecisionCategory::DrugRelated;
        // gold covers "hold coumadin and lovenox" (tokens 2..6)
        // prediction covers "coumadin and lovenox" (tokens 3..6): IoU 3/4
        let corpus = Corpus {
            documents: vec![d],
            gold: vec![gold("g1", "d1", cat, 6, 31, "hold coumadin and lovenox")],
            predicted: vec![pred("d1", cat, 11, 31, "coumadin and lovenox")],
        };
        let relaxed = evaluate_matches(&corpus, MatchCriterion::iou_default()).unwrap();
        assert_eq!(relaxed[0].is_matched, 1);
        assert!((relaxed[0].best_iou.unwrap() - 0.75).abs() < 1e-15);
        let exact = evaluate_matches(&corpus, MatchCriterion::Exact).unwrap();
        assert_eq!(exact[0].is_matched, 0);
    }

    #[test]
    fn saturated_corpus_full_recall() {
        let d = doc("d1", "aspirin daily. rest today.");
        let cat = DecisionCategory::AdviceAndPrecaution;
        let corpus = Corpus {
            documents: vec![d],
            gold: vec![
                gold("g1", "d1", cat, 0, 13, "aspirin daily"),
                gold("g2", "d1", cat, 15, 25, "rest today"),
            ],
            predicted: vec![
                pred("d1", cat, 0, 13, "aspirin daily"),
                pred("d1", cat, 15, 25, "rest today"),
            ],
        };
        for criterion in [MatchCriterion::Exact, MatchCriterion::iou_default()] {
            let out = evaluate_matches(&corpus, criterion).unwrap();
            assert!(out.iter().all(|o| o.is_matched == 1), "{criterion:?}");
        }
    }

    #[test]
    fn one_prediction_may_satisfy_many_golds() {
        let d = doc("d1", "chest pain noted");
        let cat = DecisionCategory::DefiningProblem;
        let corpus = Corpus {
            documents: vec![d],
            gold: vec![
                gold("g1", "d1", cat, 0, 10, "chest pain"),
                gold("g2", "d1", cat, 0, 10, "chest pain"),
            ],
            predicted: vec![pred("d1", cat, 0, 10, "chest pain")],
        };
        let out = evaluate_matches(&corpus, MatchCriterion::Exact).unwrap();
        assert_eq!(out.iter().map(|o| o.is_matched).sum::<u8>(), 2);
    }

    #[test]
    fn whitespace_only_span_is_flagged() {
        let d = doc("d1", "word  word");
        let cat = DecisionCategory::Deferment;
        let corpus = Corpus {
            documents: vec![d],
            gold: vec![gold("g1", "d1", cat, 4, 6, "  ")],
            predicted: vec![],
        };
        let out = evaluate_matches(&corpus, MatchCriterion::iou_default()).unwrap();
        assert!(out[0].empty_token_range);
        assert_eq!(out[0].is_matched, 0);
    }

    #[test]
    fn threshold_validation() {
        assert!(MatchCriterion::Iou { threshold: 0.0 }.validate().is_err());
        assert!(MatchCriterion::Iou { threshold: 1.5 }.validate().is_err());
        assert!(MatchCriterion::Iou { threshold: 1.0 }.validate().is_ok());
    }

    // Cross-category predictions never help a gold span: flipping every
    // same-category prediction away from a category drives that category's
    // gold outcomes to zero and can never raise any of them.
    #[test]
    fn category_firewall() {
        let corpus = crate::synth::generate_corpus(
            &crate::synth::default_profiles(),
            15,
            (2, 6),
            0xF1,
        )
        .unwrap();
        let preds = crate::synth::simulate_predictions(
            &corpus,
            &crate::synth::ExtractorSim {
                base_miss: 0.1,
                miss_slope_stopwords: 0.3,
                jitter_tokens: 1,
                confusion_prob: 0.0,
            },
            &crate::text::LexiconBundle::builtin(),
            0xF2,
        );
        let corpus = Corpus {
            predicted: preds,
            ..corpus
        };
        for criterion in [MatchCriterion::Exact, MatchCriterion::iou_default()] {
            let baseline = evaluate_matches(&corpus, criterion).unwrap();
            let categories: std::collections::BTreeSet<DecisionCategory> =
                corpus.gold.iter().map(|g| g.category).collect();
            for victim in categories {
                let mut flipped = corpus.clone();
                for p in &mut flipped.predicted {
                    if p.category == victim {
                        p.category = if victim == DecisionCategory::Deferment {
                            DecisionCategory::TreatmentGoal
                        } else {
                            DecisionCategory::Deferment
                        };
                    }
                }
                let outcomes = evaluate_matches(&flipped, criterion).unwrap();
                for (before, after) in baseline.iter().zip(&outcomes) {
                    assert_eq!(before.span_id, after.span_id);
                    if before.category == victim {
                        assert!(
                            after.is_matched <= before.is_matched,
                            "{criterion:?} {}: firewall breached",
                            before.span_id
                        );
                        assert_eq!(after.is_matched, 0, "no same-category preds remain");
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(s in "\\PC{0,60}") {
            let once = normalize_span_text(&s);
            prop_assert_eq!(normalize_span_text(&once), once.clone());
        }

        #[test]
        fn iou_bounds_and_identity(a in 0usize..50, alen in 1usize..20, b in 0usize..50, blen in 1usize..20) {
            let ra = TokenRange::new(a, a + alen);
            let rb = TokenRange::new(b, b + blen);
            let v = token_iou(ra, rb);
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert_eq!(token_iou(ra, ra), 1.0);
            prop_assert_eq!(token_iou(ra, rb), token_iou(rb, ra));
        }
    }
}
