//! The seven per-span linguistic indices.
//!
//! Five continuous indices (FKGL, average syllables per word, proper-noun /
//! stopword / pronoun proportions) and two binary cue indicators (hedge,
//! negation). A span with no word tokens has an undefined vector and is
//! excluded from stratified analyses.

pub mod lexicon;
pub mod tokenize;

use serde::{Deserialize, Serialize};

pub use lexicon::{CueLexicon, LexiconBundle, StopwordSet};
pub use tokenize::{count_syllables, sentence_segments, split_sentences, tokenize, Token};

/// FKGL = 0.39 * (words/sentences) + 11.8 * (syllables/words) - 15.59
const FKGL_WORDS_PER_SENTENCE: f64 = 0.39;
const FKGL_SYLLABLES_PER_WORD: f64 = 11.8;
const FKGL_OFFSET: f64 = 15.59;

/// The per-span index vector. `n_words == 0` marks the vector undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexVector {
    pub fkgl: f64,
    pub avg_syllables: f64,
    pub prop_proper_nouns: f64,
    pub prop_stopwords: f64,
    pub prop_pronouns: f64,
    pub hedge_present: u8,
    pub negation_present: u8,
    pub n_words: usize,
    pub n_sentences: usize,
}

impl IndexVector {
    /// Vectors over wordless text are undefined and excluded from
    /// continuous-index stratification.
    pub fn is_defined(&self) -> bool {
        self.n_words >= 1
    }

    fn undefined() -> Self {
        Self {
            fkgl: 0.0,
            avg_syllables: 0.0,
            prop_proper_nouns: 0.0,
            prop_stopwords: 0.0,
            prop_pronouns: 0.0,
            hedge_present: 0,
            negation_present: 0,
            n_words: 0,
            n_sentences: 0,
        }
    }
}

/// Identifier for one of the seven indices, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Index {
    ProperNouns,
    AvgSyllables,
    Fkgl,
    Stopwords,
    Pronouns,
    Hedge,
    Negation,
}

pub const ALL_INDICES: [Index; 7] = [
    Index::ProperNouns,
    Index::AvgSyllables,
    Index::Fkgl,
    Index::Stopwords,
    Index::Pronouns,
    Index::Hedge,
    Index::Negation,
];

impl Index {
    /// Human-readable name used in report tables.
    pub fn label(&self) -> &'static str {
        match self {
            Self::ProperNouns => "Proportion of proper nouns",
            Self::AvgSyllables => "Average syllables",
            Self::Fkgl => "FKGL (Readability)",
            Self::Stopwords => "Proportion of stopwords",
            Self::Pronouns => "Proportion of pronouns",
            Self::Hedge => "Hedge presence",
            Self::Negation => "Negation presence",
        }
    }

    /// Short machine-friendly key used in file names and CLI flags.
    pub fn key(&self) -> &'static str {
        match self {
            Self::ProperNouns => "proper_nouns",
            Self::AvgSyllables => "avg_syllables",
            Self::Fkgl => "fkgl",
            Self::Stopwords => "stopwords",
            Self::Pronouns => "pronouns",
            Self::Hedge => "hedge",
            Self::Negation => "negation",
        }
    }

    pub fn parse_key(key: &str) -> Option<Self> {
        ALL_INDICES.iter().copied().find(|i| i.key() == key)
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, Self::Hedge | Self::Negation)
    }

    pub fn value(&self, v: &IndexVector) -> f64 {
        match self {
            Self::ProperNouns => v.prop_proper_nouns,
            Self::AvgSyllables => v.avg_syllables,
            Self::Fkgl => v.fkgl,
            Self::Stopwords => v.prop_stopwords,
            Self::Pronouns => v.prop_pronouns,
            Self::Hedge => f64::from(v.hedge_present),
            Self::Negation => f64::from(v.negation_present),
        }
    }
}

/// 1 iff a single-word cue equals some lowercased word token, or a multiword
/// cue equals a contiguous run of lowercased word tokens. Matching is
/// token-boundary: "no" never fires inside "normal".
pub fn match_cues(tokens: &[Token], lexicon: &CueLexicon) -> bool {
    let words: Vec<String> = tokens
        .iter()
        .filter(|t| t.is_word)
        .map(|t| t.surface.to_lowercase())
        .collect();
    if words
        .iter()
        .any(|w| lexicon.single_word_cues.contains(w.as_str()))
    {
        return true;
    }
    lexicon.multiword_cues.iter().any(|cue| {
        cue.len() <= words.len() && words.windows(cue.len()).any(|win| win == cue.as_slice())
    })
}

/// A word token is tagged as a proper noun iff it starts uppercase, looks
/// capitalized (has a lowercase letter, or is all-caps of length >= 2), its
/// lowercase form is not a stopword, and it does not open a sentence.
fn is_proper_noun(token: &Token, sentence_initial: bool, stopwords: &StopwordSet) -> bool {
    if sentence_initial {
        return false;
    }
    let mut chars = token.surface.chars();
    let first = match chars.next() {
        Some(c) => c,
        None => return false,
    };
    if !first.is_uppercase() {
        return false;
    }
    let has_lower = token.surface.chars().any(|c| c.is_lowercase());
    let all_caps = token.surface.chars().count() >= 2
        && token
            .surface
            .chars()
            .filter(|c| c.is_alphabetic())
            .all(|c| c.is_uppercase());
    if !(has_lower || all_caps) {
        return false;
    }
    !stopwords.contains(&token.surface.to_lowercase())
}

/// Compute the seven indices for a span text. Pure: identical text yields a
/// bit-identical vector. Wordless text returns the undefined vector rather
/// than an error.
pub fn compute_index_vector(span_text: &str, lexicons: &LexiconBundle) -> IndexVector {
    let tokens = tokenize(span_text);
    let n_words = tokens.iter().filter(|t| t.is_word).count();
    if n_words == 0 {
        return IndexVector::undefined();
    }
    let segments = sentence_segments(span_text);
    let n_sentences = segments.len().max(1);

    // First word token of each sentence segment, by doc_token_index.
    let mut sentence_initial = vec![false; tokens.len()];
    for &(seg_start, seg_end) in &segments {
        if let Some(t) = tokens
            .iter()
            .find(|t| t.is_word && t.char_start >= seg_start && t.char_start < seg_end)
        {
            sentence_initial[t.doc_token_index] = true;
        }
    }

    let mut total_syllables = 0usize;
    let mut n_stopwords = 0usize;
    let mut n_pronouns = 0usize;
    let mut n_proper = 0usize;
    for t in &tokens {
        if !t.is_word {
            continue;
        }
        total_syllables += count_syllables(&t.surface).expect("word token has a letter");
        let lower = t.surface.to_lowercase();
        if lexicons.stopwords.contains(&lower) {
            n_stopwords += 1;
        }
        if lexicons.pronouns.contains(&lower) {
            n_pronouns += 1;
        }
        if is_proper_noun(t, sentence_initial[t.doc_token_index], &lexicons.stopwords) {
            n_proper += 1;
        }
    }

    let nw = n_words as f64;
    let avg_syllables = total_syllables as f64 / nw;
    let fkgl = FKGL_WORDS_PER_SENTENCE * (nw / n_sentences as f64)
        + FKGL_SYLLABLES_PER_WORD * avg_syllables
        - FKGL_OFFSET;

    IndexVector {
        fkgl,
        avg_syllables,
        prop_proper_nouns: n_proper as f64 / nw,
        prop_stopwords: n_stopwords as f64 / nw,
        prop_pronouns: n_pronouns as f64 / nw,
        hedge_present: u8::from(match_cues(&tokens, &lexicons.hedge)),
        negation_present: u8::from(match_cues(&tokens, &lexicons.negation)),
        n_words,
        n_sentences,
    }
}
