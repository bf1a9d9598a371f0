//! Tokenization, sentence segmentation and syllable counting.
//!
//! All offsets are char indices into the input text. Tokens are exact,
//! non-overlapping substrings in order, so joining token surfaces with the
//! original inter-token text reconstructs the input.

use crate::error::{Error, Result};

/// A single token with its position in the owning text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub char_start: usize,
    pub char_end: usize,
    /// True when the surface contains at least one alphabetic character.
    pub is_word: bool,
    /// Position in the text's token sequence.
    pub doc_token_index: usize,
}

/// Clitics split off as their own tokens; all are in the stopword list.
const CLITICS: [&str; 7] = ["n't", "'d", "'ll", "'m", "'re", "'s", "'ve"];

fn is_word_surface(s: &str) -> bool {
    s.chars().any(|c| c.is_alphabetic())
}

/// Split text into tokens: whitespace-delimited chunks, with leading and
/// trailing punctuation peeled into one-char tokens and stopword clitics
/// ('s, n't, ...) split off the end of a word.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens: Vec<(usize, usize)> = Vec::new(); // char ranges
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        split_chunk(&chars, start, i, &mut tokens);
    }
    tokens
        .into_iter()
        .enumerate()
        .map(|(idx, (s, e))| {
            let surface: String = chars[s..e].iter().collect();
            let is_word = is_word_surface(&surface);
            Token {
                surface,
                char_start: s,
                char_end: e,
                is_word,
                doc_token_index: idx,
            }
        })
        .collect()
}

/// Split one whitespace-free chunk `[start, end)` into token ranges.
fn split_chunk(chars: &[char], start: usize, end: usize, out: &mut Vec<(usize, usize)>) {
    let mut lo = start;
    let mut hi = end;
    // Leading punctuation, one token per char.
    while lo < hi && !chars[lo].is_alphanumeric() {
        out.push((lo, lo + 1));
        lo += 1;
    }
    // Trailing punctuation, collected then emitted after the core.
    let mut trailing = Vec::new();
    while hi > lo && !chars[hi - 1].is_alphanumeric() {
        trailing.push((hi - 1, hi));
        hi -= 1;
    }
    if lo < hi {
        // Peel clitic suffixes off the core, innermost last ("shouldn't've"
        // yields should / n't / 've).
        let mut parts: Vec<(usize, usize)> = Vec::new();
        let mut core_end = hi;
        'peel: loop {
            let lower: String = chars[lo..core_end]
                .iter()
                .flat_map(|c| c.to_lowercase())
                .collect();
            for clitic in CLITICS {
                if lower.len() > clitic.len() && lower.ends_with(clitic) {
                    let cut = core_end - clitic.chars().count();
                    parts.push((cut, core_end));
                    core_end = cut;
                    continue 'peel;
                }
            }
            break;
        }
        out.push((lo, core_end));
        out.extend(parts.into_iter().rev());
    }
    out.extend(trailing.into_iter().rev());
}

/// Char ranges of sentence segments. Boundaries fall after a run of '.', '!'
/// or '?' that is followed by whitespace or end of text, and at newline runs;
/// only segments with non-whitespace content are returned, so a fragment with
/// no terminator is a single sentence.
pub fn sentence_segments(text: &str) -> Vec<(usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let mut segments = Vec::new();
    let push = |s: usize, e: usize, segs: &mut Vec<(usize, usize)>| {
        if chars[s..e].iter().any(|c| !c.is_whitespace()) {
            segs.push((s, e));
        }
    };
    let mut seg_start = 0;
    let mut i = 0;
    while i < n {
        let c = chars[i];
        if c == '.' || c == '!' || c == '?' {
            let mut j = i;
            while j < n && matches!(chars[j], '.' | '!' | '?') {
                j += 1;
            }
            if j >= n || chars[j].is_whitespace() {
                push(seg_start, j, &mut segments);
                seg_start = j;
            }
            i = j;
        } else if c == '\n' || c == '\r' {
            push(seg_start, i, &mut segments);
            while i < n && matches!(chars[i], '\n' | '\r') {
                i += 1;
            }
            seg_start = i;
        } else {
            i += 1;
        }
    }
    if seg_start < n {
        push(seg_start, n, &mut segments);
    }
    segments
}

/// Number of sentences in the text (see [`sentence_segments`] for the rules).
pub fn split_sentences(text: &str) -> usize {
    sentence_segments(text).len()
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Heuristic syllable count: maximal vowel-letter groups (a e i o u y), minus
/// one for a terminal silent 'e' (an 'e' after a consonant, except syllabic
/// "le" after a consonant), floored at 1.
pub fn count_syllables(word: &str) -> Result<usize> {
    if !is_word_surface(word) {
        return Err(Error::NotAWord(word.to_string()));
    }
    let chars: Vec<char> = word.chars().flat_map(|c| c.to_lowercase()).collect();
    let mut groups = 0usize;
    let mut in_group = false;
    for &c in &chars {
        if is_vowel(c) {
            if !in_group {
                groups += 1;
            }
            in_group = true;
        } else {
            in_group = false;
        }
    }
    let n = chars.len();
    if n >= 2 && chars[n - 1] == 'e' {
        let prev = chars[n - 2];
        let silent = if prev == 'l' {
            // consonant + "le" is syllabic (table, needle); vowel + "le" is not (ale)
            match chars.get(n.wrapping_sub(3)) {
                Some(&b) => is_vowel(b) || !b.is_alphabetic(),
                None => false,
            }
        } else {
            !is_vowel(prev)
        };
        if silent {
            groups = groups.saturating_sub(1);
        }
    }
    Ok(groups.max(1))
}
