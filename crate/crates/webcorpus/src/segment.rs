//! Deterministic rule-based sentence segmentation and low-level text
//! statistics.
//!
//! A sentence boundary is a run of terminal punctuation (optionally
//! followed by closing quotes/brackets) followed by whitespace and then
//! an uppercase letter, a digit, or an opening quote. A small
//! abbreviation list suppresses false splits after tokens like "Dr.".

use std::collections::HashSet;

/// Characters that can end a sentence.
pub const TERMINAL_PUNCT: [char; 4] = ['.', '!', '?', '…'];

/// Closing quotes/brackets that may trail the terminal punctuation.
const CLOSERS: [char; 6] = ['"', '”', '»', ')', ']', '\''];

/// Opening quotes that, like uppercase letters and digits, may begin a
/// new sentence.
const OPENERS: [char; 7] = ['"', '“', '«', '(', '[', '\'', '‘'];

/// Default abbreviation list for Turkish news text.
pub const DEFAULT_ABBREVIATIONS: [&str; 5] = ["Dr.", "Prof.", "vb.", "vs.", "No."];

/// One segmented sentence with cached word/char statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub text: String,
    /// Number of maximal non-whitespace runs in `text`.
    pub word_count: usize,
    /// Number of Unicode scalar values in `text`.
    pub char_count: usize,
}

impl Sentence {
    /// Builds a sentence from raw text, trimming surrounding whitespace.
    pub fn new(text: &str) -> Self {
        let trimmed = text.trim();
        Sentence {
            text: trimmed.to_string(),
            word_count: trimmed.split_whitespace().count(),
            char_count: trimmed.chars().count(),
        }
    }
}

/// Sentence splitter with a configurable abbreviation list.
#[derive(Debug, Clone)]
pub struct Segmenter {
    abbreviations: HashSet<String>,
}

impl Default for Segmenter {
    fn default() -> Self {
        Segmenter::new(DEFAULT_ABBREVIATIONS.iter().copied())
    }
}

impl Segmenter {
    pub fn new<'a>(abbreviations: impl IntoIterator<Item = &'a str>) -> Self {
        Segmenter {
            abbreviations: abbreviations
                .into_iter()
                .map(|a| a.to_lowercase())
                .collect(),
        }
    }

    /// Splits `text` into sentences. Empty input yields an empty list;
    /// no non-whitespace character is ever dropped.
    pub fn split_sentences(&self, text: &str) -> Vec<Sentence> {
        let chars: Vec<char> = text.chars().collect();
        let n = chars.len();
        let mut sentences = Vec::new();
        let mut start = 0usize;
        let mut i = 0usize;
        while i < n {
            if !TERMINAL_PUNCT.contains(&chars[i]) {
                i += 1;
                continue;
            }
            // end of the terminal punctuation run
            let mut punct_end = i + 1;
            while punct_end < n && TERMINAL_PUNCT.contains(&chars[punct_end]) {
                punct_end += 1;
            }
            let mut close_end = punct_end;
            while close_end < n && CLOSERS.contains(&chars[close_end]) {
                close_end += 1;
            }
            if close_end < n && !chars[close_end].is_whitespace() {
                i = close_end;
                continue;
            }
            // next non-whitespace character, if any
            let mut next = close_end;
            while next < n && chars[next].is_whitespace() {
                next += 1;
            }
            let starts_new = next < n
                && (chars[next].is_uppercase()
                    || chars[next].is_numeric()
                    || OPENERS.contains(&chars[next]));
            if starts_new && !self.is_abbreviation(&chars[..punct_end], start) {
                let s = Sentence::new(&chars[start..close_end].iter().collect::<String>());
                if !s.text.is_empty() {
                    sentences.push(s);
                }
                start = next;
                i = next;
            } else {
                i = close_end;
            }
        }
        if start < n {
            let s = Sentence::new(&chars[start..].iter().collect::<String>());
            if !s.text.is_empty() {
                sentences.push(s);
            }
        }
        sentences
    }

    /// Checks whether the token ending at the punctuation run is a known
    /// abbreviation.
    fn is_abbreviation(&self, upto: &[char], sentence_start: usize) -> bool {
        let mut tok_start = upto.len();
        while tok_start > sentence_start && !upto[tok_start - 1].is_whitespace() {
            tok_start -= 1;
        }
        let token: String = upto[tok_start..].iter().collect();
        self.abbreviations.contains(&token.to_lowercase())
    }
}

/// Splits with the default (Turkish) abbreviation list.
pub fn split_sentences(text: &str) -> Vec<Sentence> {
    Segmenter::default().split_sentences(text)
}

/// Fraction of Unicode uppercase letters over all scalar values; 0 for
/// empty text.
pub fn uppercase_ratio(text: &str) -> f64 {
    let total = text.chars().count();
    if total == 0 {
        return 0.0;
    }
    let upper = text.chars().filter(|c| c.is_uppercase()).count();
    upper as f64 / total as f64
}

/// Length in chars of the longest whitespace-split token; 0 for empty
/// text.
pub fn longest_word_len(text: &str) -> usize {
    text.split_whitespace()
        .map(|w| w.chars().count())
        .max()
        .unwrap_or(0)
}
