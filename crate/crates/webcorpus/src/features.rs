//! Per-page anomaly heuristics feeding the Isolation Forest.

use serde::{Deserialize, Serialize};

use crate::segment::{uppercase_ratio, Sentence};
use crate::{Error, Result};

/// The five per-page heuristics: sentence-length statistics (in words),
/// short-sentence ratio, and uppercase-character ratio over the raw
/// page text.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageFeatures {
    pub mean_sentence_len: f64,
    pub std_sentence_len: f64,
    pub max_sentence_len: f64,
    pub short_sentence_ratio: f64,
    pub uppercase_char_ratio: f64,
}

impl PageFeatures {
    pub fn as_array(&self) -> [f64; 5] {
        [
            self.mean_sentence_len,
            self.std_sentence_len,
            self.max_sentence_len,
            self.short_sentence_ratio,
            self.uppercase_char_ratio,
        ]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        PageFeatures {
            mean_sentence_len: a[0],
            std_sentence_len: a[1],
            max_sentence_len: a[2],
            short_sentence_ratio: a[3],
            uppercase_char_ratio: a[4],
        }
    }
}

/// Sentences with fewer than this many words count as "short".
pub const SHORT_SENTENCE_WORDS: usize = 4;

/// Computes the five page features. Sentence length is measured in
/// words; the standard deviation is the population one.
pub fn compute_features(sentences: &[Sentence], page_text: &str) -> Result<PageFeatures> {
    if sentences.is_empty() {
        return Err(Error::EmptyPage);
    }
    let lens: Vec<f64> = sentences.iter().map(|s| s.word_count as f64).collect();
    let n = lens.len() as f64;
    let mean = lens.iter().sum::<f64>() / n;
    let var = lens.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / n;
    let max = lens.iter().cloned().fold(0.0_f64, f64::max);
    let short = sentences
        .iter()
        .filter(|s| s.word_count < SHORT_SENTENCE_WORDS)
        .count() as f64
        / n;
    Ok(PageFeatures {
        mean_sentence_len: mean,
        std_sentence_len: var.sqrt(),
        max_sentence_len: max,
        short_sentence_ratio: short,
        uppercase_char_ratio: uppercase_ratio(page_text),
    })
}
