//! Cue lexicons (negation, hedge), the stopword set and the pronoun list.
//!
//! The default lexicons ship as plain-text resources, one cue per line;
//! multiword cues contain spaces. All membership tests are case-insensitive:
//! entries are lowercased at load time and inputs are lowercased before
//! lookup. Duplicate lines collapse into set membership.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const DEFAULT_NEGATION_CUES: &str = include_str!("../../resources/negation_cues.txt");
pub const DEFAULT_HEDGE_CUES: &str = include_str!("../../resources/hedge_cues.txt");
pub const DEFAULT_STOPWORDS: &str = include_str!("../../resources/stopwords.txt");

/// Closed list of personal pronouns used for the pronoun proportion.
pub const PRONOUNS: [&str; 31] = [
    "i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us", "them", "my", "your",
    "his", "its", "our", "their", "mine", "yours", "hers", "ours", "theirs", "myself", "yourself",
    "himself", "herself", "itself", "ourselves", "yourselves", "themselves",
];

/// A cue lexicon: single-word cues plus multiword cues matched as phrases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CueLexicon {
    pub single_word_cues: BTreeSet<String>,
    pub multiword_cues: BTreeSet<Vec<String>>,
}

impl CueLexicon {
    /// Parse from one-cue-per-line text. Lines are trimmed and lowercased;
    /// blank lines are skipped; a line with spaces is a multiword cue.
    pub fn parse(content: &str) -> Self {
        let mut single = BTreeSet::new();
        let mut multi = BTreeSet::new();
        for line in content.lines() {
            let cue = line.trim().to_lowercase();
            if cue.is_empty() {
                continue;
            }
            let words: Vec<String> = cue.split_whitespace().map(str::to_string).collect();
            if words.len() == 1 {
                single.insert(words.into_iter().next().unwrap());
            } else {
                multi.insert(words);
            }
        }
        Self {
            single_word_cues: single,
            multiword_cues: multi,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let content = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(Self::parse(&content))
    }

    pub fn len(&self) -> usize {
        self.single_word_cues.len() + self.multiword_cues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The stopword set; duplicates in the source file collapse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordSet {
    pub words: BTreeSet<String>,
}

impl StopwordSet {
    pub fn parse(content: &str) -> Self {
        Self {
            words: content
                .lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty())
                .collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let content = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(Self::parse(&content))
    }

    pub fn contains(&self, lowercased: &str) -> bool {
        self.words.contains(lowercased)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Everything the index computation needs, loaded once and shared.
#[derive(Debug, Clone)]
pub struct LexiconBundle {
    pub stopwords: StopwordSet,
    pub negation: CueLexicon,
    pub hedge: CueLexicon,
    pub pronouns: BTreeSet<String>,
}

impl LexiconBundle {
    /// The shipped default lexicons.
    pub fn builtin() -> Self {
        Self::from_parts(
            StopwordSet::parse(DEFAULT_STOPWORDS),
            CueLexicon::parse(DEFAULT_NEGATION_CUES),
            CueLexicon::parse(DEFAULT_HEDGE_CUES),
        )
    }

    pub fn from_parts(stopwords: StopwordSet, negation: CueLexicon, hedge: CueLexicon) -> Self {
        Self {
            stopwords,
            negation,
            hedge,
            pronouns: PRONOUNS.iter().map(|p| p.to_string()).collect(),
        }
    }

    /// Pronouns missing from the stopword set. When non-empty the
    /// `prop_pronouns <= prop_stopwords` inequality is not guaranteed.
    pub fn pronouns_not_in_stopwords(&self) -> Vec<&str> {
        self.pronouns
            .iter()
            .filter(|p| !self.stopwords.contains(p))
            .map(String::as_str)
            .collect()
    }

    pub fn pronouns_subset_of_stopwords(&self) -> bool {
        self.pronouns_not_in_stopwords().is_empty()
    }
}

impl Default for LexiconBundle {
    fn default() -> Self {
        Self::builtin()
    }
}
