//! Synthetic corpora with category-conditioned linguistic profiles, plus a
//! configurable extractor simulator. Together they provide known ground
//! truth for end-to-end validation: profile rates are measurable by the
//! index computation, and the simulator's miss model and boundary jitter
//! produce recall gradients with closed-form expectations.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, DecisionCategory, Document, GoldSpan, PredictedSpan};
use crate::error::{Error, Result};
use crate::matching::derive_token_range;
use crate::text::{tokenize, LexiconBundle};

/// Non-pronoun, non-cue stopwords used for stopword slots. Pronoun slots draw
/// from [`PRONOUN_POOL`]; since pronouns are stopwords too, a generated
/// span's expected measured stopword proportion is stopword_rate +
/// pronoun_rate.
pub const STOPWORD_POOL: [&str; 20] = [
    "the", "of", "and", "to", "in", "with", "for", "on", "at", "by", "from", "as", "during",
    "after", "before", "into", "upon", "than", "then", "when",
];

/// Pronouns drawn for pronoun slots; all are also in the stopword list.
pub const PRONOUN_POOL: [&str; 12] = [
    "you", "your", "he", "she", "it", "we", "they", "his", "her", "my", "our", "them",
];

/// Capitalized multi-syllable pseudo-drug names for proper-noun slots.
pub const ENTITY_POOL: [&str; 12] = [
    "Veloprazine",
    "Cardexolol",
    "Nubitramol",
    "Oxaleptin",
    "Fenoclazide",
    "Tramivexin",
    "Zolpidrene",
    "Quinarosol",
    "Mexolandin",
    "Barivectam",
    "Dolaferone",
    "Relitazone",
];

/// Lowercase filler words disjoint from the stopword list, both cue lexicons
/// and the pronoun list.
pub const FILLER_POOL: [&str; 16] = [
    "dose", "chart", "scan", "vital", "gauze", "splint", "wound", "clinic", "nurse", "tablet",
    "fluid", "pulse", "graft", "lesion", "stent", "drain",
];

/// Hedge cues inserted by hedge_prob; none are stopwords, so insertion does
/// not move the stopword proportion.
pub const HEDGE_INSERT_POOL: [&str; 6] =
    ["likely", "possible", "probably", "pending", "unclear", "suspected"];

/// Negation cues inserted by negation_prob; none are stopwords or hedges.
pub const NEGATION_INSERT_POOL: [&str; 7] = [
    "denies",
    "denied",
    "absent",
    "unremarkable",
    "negative",
    "lacks",
    "lacking",
];

/// Word-slot composition and cue probabilities for one category's spans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryProfile {
    pub category: DecisionCategory,
    pub words_min: usize,
    pub words_max: usize,
    pub stopword_rate: f64,
    pub proper_noun_rate: f64,
    pub pronoun_rate: f64,
    pub hedge_prob: f64,
    pub negation_prob: f64,
}

impl CategoryProfile {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            self.stopword_rate,
            self.proper_noun_rate,
            self.pronoun_rate,
            self.hedge_prob,
            self.negation_prob,
        ];
        if rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::InvalidConfig(format!(
                "profile \"{}\": rates must lie in [0, 1]",
                self.category.label()
            )));
        }
        if self.stopword_rate + self.proper_noun_rate + self.pronoun_rate > 1.0 + 1e-12 {
            return Err(Error::InfeasibleProfile(self.category.label().to_string()));
        }
        if self.words_min < 1 || self.words_max < self.words_min {
            return Err(Error::InvalidConfig(format!(
                "profile \"{}\": need 1 <= words_min <= words_max",
                self.category.label()
            )));
        }
        Ok(())
    }
}

/// A telegraphic/narrative contrast set covering four categories.
pub fn default_profiles() -> Vec<CategoryProfile> {
    vec![
        CategoryProfile {
            category: DecisionCategory::DrugRelated,
            words_min: 4,
            words_max: 8,
            stopword_rate: 0.05,
            proper_noun_rate: 0.50,
            pronoun_rate: 0.0,
            hedge_prob: 0.03,
            negation_prob: 0.05,
        },
        CategoryProfile {
            category: DecisionCategory::DefiningProblem,
            words_min: 4,
            words_max: 10,
            stopword_rate: 0.15,
            proper_noun_rate: 0.30,
            pronoun_rate: 0.02,
            hedge_prob: 0.10,
            negation_prob: 0.15,
        },
        CategoryProfile {
            category: DecisionCategory::EvaluatingTestResult,
            words_min: 5,
            words_max: 12,
            stopword_rate: 0.25,
            proper_noun_rate: 0.15,
            pronoun_rate: 0.03,
            hedge_prob: 0.25,
            negation_prob: 0.35,
        },
        CategoryProfile {
            category: DecisionCategory::AdviceAndPrecaution,
            words_min: 8,
            words_max: 16,
            stopword_rate: 0.45,
            proper_noun_rate: 0.04,
            pronoun_rate: 0.15,
            hedge_prob: 0.60,
            negation_prob: 0.30,
        },
    ]
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool[rng.random_range(0..pool.len())]
}

fn generate_span_words(profile: &CategoryProfile, rng: &mut ChaCha8Rng) -> Vec<String> {
    let len = rng.random_range(profile.words_min..=profile.words_max);
    let mut words: Vec<String> = (0..len)
        .map(|_| {
            let u: f64 = rng.random();
            let w = if u < profile.stopword_rate {
                pick(rng, &STOPWORD_POOL)
            } else if u < profile.stopword_rate + profile.proper_noun_rate {
                pick(rng, &ENTITY_POOL)
            } else if u < profile.stopword_rate + profile.proper_noun_rate + profile.pronoun_rate {
                pick(rng, &PRONOUN_POOL)
            } else {
                pick(rng, &FILLER_POOL)
            };
            w.to_string()
        })
        .collect();
    if rng.random_bool(profile.hedge_prob) {
        let at = rng.random_range(0..=words.len());
        words.insert(at, pick(rng, &HEDGE_INSERT_POOL).to_string());
    }
    if rng.random_bool(profile.negation_prob) {
        let at = rng.random_range(0..=words.len());
        words.insert(at, pick(rng, &NEGATION_INSERT_POOL).to_string());
    }
    words
}

/// Generate a gold-only corpus. Documents are built by joining spans with a
/// ".\n" separator, so every span is token-aligned and sentence-contained.
/// Each document draws from a ChaCha stream derived from (seed, doc index);
/// the result is bit-identical for a given (profiles, seed).
pub fn generate_corpus(
    profiles: &[CategoryProfile],
    n_docs: usize,
    spans_per_doc: (usize, usize),
    seed: u64,
) -> Result<Corpus> {
    if profiles.is_empty() {
        return Err(Error::InvalidConfig("need at least one profile".into()));
    }
    for p in profiles {
        p.validate()?;
    }
    if n_docs < 1 {
        return Err(Error::InvalidConfig("n_docs must be >= 1".into()));
    }
    let (spans_lo, spans_hi) = spans_per_doc;
    if spans_lo < 1 || spans_hi < spans_lo {
        return Err(Error::InvalidConfig(
            "spans_per_doc must satisfy 1 <= lo <= hi".into(),
        ));
    }

    let mut corpus = Corpus::default();
    let mut global_index = 0usize;
    for d in 0..n_docs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(d as u64);
        let doc_id = format!("doc{d:05}");
        let n_spans = rng.random_range(spans_lo..=spans_hi);
        let mut text = String::new();
        let mut char_cursor = 0usize;
        for _ in 0..n_spans {
            let profile = &profiles[rng.random_range(0..profiles.len())];
            let words = generate_span_words(profile, &mut rng);
            let span_text = words.join(" ");
            let span_chars = span_text.chars().count();
            corpus.gold.push(GoldSpan {
                span_id: format!("{doc_id}:{global_index}"),
                doc_id: doc_id.clone(),
                category: profile.category,
                char_start: char_cursor,
                char_end: char_cursor + span_chars,
                text: span_text.clone(),
            });
            global_index += 1;
            text.push_str(&span_text);
            text.push_str(".\n");
            char_cursor += span_chars + 2;
        }
        corpus.documents.push(Document {
            doc_id,
            text,
            meta: [("split".to_string(), "synth".to_string())].into(),
        });
    }
    Ok(corpus)
}

/// Extractor simulator: spans are dropped with probability
/// clamp(base_miss + miss_slope_stopwords * prop_stopwords), survivors get
/// token boundaries jittered uniformly in [-jitter_tokens, +jitter_tokens]
/// and their category flipped with confusion_prob.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractorSim {
    pub base_miss: f64,
    pub miss_slope_stopwords: f64,
    pub jitter_tokens: usize,
    pub confusion_prob: f64,
}

impl ExtractorSim {
    /// Reproduces every gold span verbatim.
    pub fn identity() -> Self {
        Self {
            base_miss: 0.0,
            miss_slope_stopwords: 0.0,
            jitter_tokens: 0,
            confusion_prob: 0.0,
        }
    }

    pub fn miss_probability(&self, prop_stopwords: f64) -> f64 {
        (self.base_miss + self.miss_slope_stopwords * prop_stopwords).clamp(0.0, 1.0)
    }
}

/// Jittered token range, clamped to the document's token count with end >
/// start preserved.
fn jitter_range(
    start: usize,
    end: usize,
    n_tokens: usize,
    ds: i64,
    de: i64,
) -> (usize, usize) {
    let new_start = (start as i64 + ds).clamp(0, n_tokens as i64 - 1) as usize;
    let new_end = (end as i64 + de).clamp(new_start as i64 + 1, n_tokens as i64) as usize;
    (new_start, new_end)
}

/// Simulate predictions for every gold span. Deterministic given the seed;
/// spans are processed in gold order, each on its own ChaCha stream.
pub fn simulate_predictions(
    corpus: &Corpus,
    sim: &ExtractorSim,
    lexicons: &LexiconBundle,
    seed: u64,
) -> Vec<PredictedSpan> {
    let doc_tokens: BTreeMap<&str, Vec<crate::text::Token>> = corpus
        .documents
        .iter()
        .map(|d| (d.doc_id.as_str(), tokenize(&d.text)))
        .collect();
    let doc_texts: BTreeMap<&str, Vec<char>> = corpus
        .documents
        .iter()
        .map(|d| (d.doc_id.as_str(), d.text.chars().collect()))
        .collect();

    let mut predictions = Vec::new();
    for (i, gold) in corpus.gold.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);

        let vector = crate::text::compute_index_vector(&gold.text, lexicons);
        let p_miss = sim.miss_probability(vector.prop_stopwords);
        if rng.random_bool(p_miss) {
            continue;
        }

        let tokens = &doc_tokens[gold.doc_id.as_str()];
        let Some(range) = derive_token_range(tokens, gold.char_start, gold.char_end) else {
            continue;
        };
        let j = sim.jitter_tokens as i64;
        let (ds, de) = if j > 0 {
            (rng.random_range(-j..=j), rng.random_range(-j..=j))
        } else {
            (0, 0)
        };
        let (s, e) = jitter_range(range.start, range.end, tokens.len(), ds, de);
        let char_start = tokens[s].char_start;
        let char_end = tokens[e - 1].char_end;
        let chars = &doc_texts[gold.doc_id.as_str()];
        let text: String = chars[char_start..char_end].iter().collect();

        let category = if sim.confusion_prob > 0.0 && rng.random_bool(sim.confusion_prob) {
            let others: Vec<DecisionCategory> = crate::corpus::ALL_CATEGORIES
                .iter()
                .copied()
                .filter(|c| *c != gold.category)
                .collect();
            others[rng.random_range(0..others.len())]
        } else {
            gold.category
        };

        predictions.push(PredictedSpan {
            doc_id: gold.doc_id.clone(),
            category,
            char_start,
            char_end,
            text,
        });
    }
    predictions
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::{evaluate_matches, MatchCriterion};
    use crate::text::compute_index_vector;

    #[test]
    fn pools_are_disjoint_from_lexicons() {
        let b = LexiconBundle::builtin();
        for w in FILLER_POOL {
            assert!(!b.stopwords.contains(w), "filler {w} is a stopword");
            assert!(!b.negation.single_word_cues.contains(w), "filler {w} negation cue");
            assert!(!b.hedge.single_word_cues.contains(w), "filler {w} hedge cue");
            assert!(!b.pronouns.contains(w), "filler {w} pronoun");
        }
        for w in ENTITY_POOL {
            let lower = w.to_lowercase();
            assert!(!b.stopwords.contains(&lower), "entity {w} is a stopword");
        }
        for w in STOPWORD_POOL {
            assert!(b.stopwords.contains(w), "{w} must be a stopword");
            assert!(!b.negation.single_word_cues.contains(w), "{w} negation cue");
            assert!(!b.hedge.single_word_cues.contains(w), "{w} hedge cue");
            assert!(!b.pronouns.contains(w), "{w} pronoun");
        }
        for w in PRONOUN_POOL {
            assert!(b.pronouns.contains(w), "{w} must be a pronoun");
            assert!(b.stopwords.contains(w), "{w} must also be a stopword");
        }
        for w in HEDGE_INSERT_POOL {
            assert!(b.hedge.single_word_cues.contains(w), "{w} must be a hedge cue");
            assert!(!b.stopwords.contains(w), "{w} must not be a stopword");
            assert!(!b.negation.single_word_cues.contains(w), "{w} negation cue");
        }
        for w in NEGATION_INSERT_POOL {
            assert!(b.negation.single_word_cues.contains(w), "{w} must be a negation cue");
            assert!(!b.stopwords.contains(w), "{w} must not be a stopword");
            assert!(!b.hedge.single_word_cues.contains(w), "{w} hedge cue");
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let profiles = default_profiles();
        let a = generate_corpus(&profiles, 5, (2, 6), 99).unwrap();
        let b = generate_corpus(&profiles, 5, (2, 6), 99).unwrap();
        assert_eq!(a, b);
        let c = generate_corpus(&profiles, 5, (2, 6), 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generated_spans_satisfy_offsets() {
        let corpus = generate_corpus(&default_profiles(), 8, (1, 10), 7).unwrap();
        for span in &corpus.gold {
            let doc = corpus.document(&span.doc_id).unwrap();
            let actual =
                crate::corpus::char_substring(&doc.text, span.char_start, span.char_end).unwrap();
            assert_eq!(actual, span.text);
        }
    }

    #[test]
    fn infeasible_profile_rejected() {
        let mut p = default_profiles().remove(0);
        p.stopword_rate = 0.6;
        p.proper_noun_rate = 0.6;
        let err = generate_corpus(&[p], 1, (1, 1), 0).unwrap_err();
        assert!(matches!(err, Error::InfeasibleProfile(_)));
    }

    #[test]
    fn forced_hedge_always_present() {
        let mut p = default_profiles().remove(3);
        p.hedge_prob = 1.0;
        let corpus = generate_corpus(&[p], 10, (3, 5), 21).unwrap();
        let b = LexiconBundle::builtin();
        for span in &corpus.gold {
            let v = compute_index_vector(&span.text, &b);
            assert_eq!(v.hedge_present, 1, "{}", span.text);
        }
    }

    #[test]
    fn identity_extractor_has_perfect_recall() {
        let corpus0 = generate_corpus(&default_profiles(), 6, (2, 8), 3).unwrap();
        let b = LexiconBundle::builtin();
        let preds = simulate_predictions(&corpus0, &ExtractorSim::identity(), &b, 5);
        assert_eq!(preds.len(), corpus0.gold.len());
        let corpus = Corpus {
            predicted: preds,
            ..corpus0
        };
        for criterion in [MatchCriterion::Exact, MatchCriterion::iou_default()] {
            let outcomes = evaluate_matches(&corpus, criterion).unwrap();
            assert!(outcomes.iter().all(|o| o.is_matched == 1));
        }
    }

    #[test]
    fn zero_jitter_makes_exact_equal_iou() {
        let sim = ExtractorSim {
            base_miss: 0.3,
            miss_slope_stopwords: 0.0,
            jitter_tokens: 0,
            confusion_prob: 0.0,
        };
        let corpus0 = generate_corpus(&default_profiles(), 20, (2, 8), 11).unwrap();
        let b = LexiconBundle::builtin();
        let preds = simulate_predictions(&corpus0, &sim, &b, 13);
        assert!(preds.len() < corpus0.gold.len());
        let corpus = Corpus {
            predicted: preds,
            ..corpus0
        };
        let exact = evaluate_matches(&corpus, MatchCriterion::Exact).unwrap();
        let iou = evaluate_matches(&corpus, MatchCriterion::iou_default()).unwrap();
        for (a, b) in exact.iter().zip(&iou) {
            assert_eq!(a.span_id, b.span_id);
            assert_eq!(a.is_matched, b.is_matched, "{}", a.span_id);
        }
    }

    #[test]
    fn jitter_expectation_oracle() {
        // With jitter +-1 and no misses, the exact-match rate equals the
        // fraction of (ds, de) draws that reproduce the original range, and
        // the IoU rate follows from enumerating all nine jitter pairs per
        // span with the same clamping rule.
        let profiles = vec![CategoryProfile {
            category: DecisionCategory::DefiningProblem,
            words_min: 6,
            words_max: 10,
            stopword_rate: 0.2,
            proper_noun_rate: 0.2,
            pronoun_rate: 0.0,
            hedge_prob: 0.0,
            negation_prob: 0.0,
        }];
        let corpus0 = generate_corpus(&profiles, 400, (4, 8), 17).unwrap();
        let b = LexiconBundle::builtin();
        let sim = ExtractorSim {
            base_miss: 0.0,
            miss_slope_stopwords: 0.0,
            jitter_tokens: 1,
            confusion_prob: 0.0,
        };
        let preds = simulate_predictions(&corpus0, &sim, &b, 19);
        let corpus = Corpus {
            predicted: preds,
            ..corpus0
        };

        // enumeration oracle over the nine jitter pairs; exact matching is on
        // normalized text, so a jitter that only swallows the "." separator
        // still matches exactly
        let mut expected_iou_hits = 0.0f64;
        let mut expected_exact_hits = 0.0f64;
        let threshold = 0.5;
        for gold in &corpus.gold {
            let doc = corpus.document(&gold.doc_id).unwrap();
            let tokens = tokenize(&doc.text);
            let chars: Vec<char> = doc.text.chars().collect();
            let range = derive_token_range(&tokens, gold.char_start, gold.char_end).unwrap();
            let gold_norm = crate::matching::normalize_span_text(&gold.text);
            let mut iou_hits = 0usize;
            let mut exact_hits = 0usize;
            for ds in -1i64..=1 {
                for de in -1i64..=1 {
                    let (s, e) = jitter_range(range.start, range.end, tokens.len(), ds, de);
                    let cand = crate::matching::TokenRange::new(s, e);
                    let orig =
                        crate::matching::TokenRange::new(range.start, range.end);
                    if crate::matching::token_iou(cand, orig) >= threshold {
                        iou_hits += 1;
                    }
                    let cand_text: String = chars
                        [tokens[s].char_start..tokens[e - 1].char_end]
                        .iter()
                        .collect();
                    if crate::matching::normalize_span_text(&cand_text) == gold_norm {
                        exact_hits += 1;
                    }
                }
            }
            expected_iou_hits += iou_hits as f64 / 9.0;
            expected_exact_hits += exact_hits as f64 / 9.0;
        }
        let n = corpus.gold.len() as f64;
        let expected_iou = expected_iou_hits / n;
        let expected_exact = expected_exact_hits / n;

        let exact = evaluate_matches(&corpus, MatchCriterion::Exact).unwrap();
        let iou = evaluate_matches(&corpus, MatchCriterion::iou_default()).unwrap();
        let measured_exact =
            exact.iter().map(|o| f64::from(o.is_matched)).sum::<f64>() / n;
        let measured_iou = iou.iter().map(|o| f64::from(o.is_matched)).sum::<f64>() / n;

        // jittered text almost never equals the gold text except at (0, 0);
        // repeated words could create rare accidental equalities, so compare
        // against the enumeration with a CLT-scale margin
        assert!(
            (measured_exact - expected_exact).abs() < 0.03,
            "exact {measured_exact} vs {expected_exact}"
        );
        assert!(
            (measured_iou - expected_iou).abs() < 0.03,
            "iou {measured_iou} vs {expected_iou}"
        );
        assert!(measured_iou > measured_exact);
    }

    #[test]
    fn category_confusion_breaks_matches() {
        let corpus0 = generate_corpus(&default_profiles(), 15, (3, 6), 29).unwrap();
        let b = LexiconBundle::builtin();
        let sim = ExtractorSim {
            base_miss: 0.0,
            miss_slope_stopwords: 0.0,
            jitter_tokens: 0,
            confusion_prob: 1.0,
        };
        let preds = simulate_predictions(&corpus0, &sim, &b, 31);
        let corpus = Corpus {
            predicted: preds,
            ..corpus0
        };
        let outcomes = evaluate_matches(&corpus, MatchCriterion::Exact).unwrap();
        // every prediction got a different category; matches only happen when
        // another gold span's confused prediction lands on this span's text
        let recall =
            outcomes.iter().map(|o| f64::from(o.is_matched)).sum::<f64>() / outcomes.len() as f64;
        assert!(recall < 0.1, "recall {recall}");
    }
}
