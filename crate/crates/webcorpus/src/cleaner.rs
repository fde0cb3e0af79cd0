//! Two-level corpus cleaning: anomaly + rule-based page filtering,
//! per-sentence quality rules, and a finalization pass dropping pages
//! with too few surviving sentences.
//!
//! Every rejection is attributed to exactly one rule id — the first
//! rule, in listed order, that the record fails.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::features::compute_features;
use crate::isoforest::{ForestConfig, IsolationForest};
use crate::segment::{longest_word_len, Segmenter, Sentence, TERMINAL_PUNCT};
use crate::{Error, Result};

/// One web document flowing through the pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Page {
    pub id: String,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lang_prob: Option<f64>,
    /// Kept sentences; populated by the pipeline on output.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sentences: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub kept: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule_id: Option<String>,
}

impl Verdict {
    pub fn keep() -> Self {
        Verdict {
            kept: true,
            rule_id: None,
        }
    }

    pub fn reject(rule_id: &str) -> Self {
        Verdict {
            kept: false,
            rule_id: Some(rule_id.to_string()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CleaningConfig {
    /// Pages with a decision score below this are removed.
    pub anomaly_threshold: f64,
    pub anomaly_enabled: bool,
    pub lang_prob_threshold: f64,
    pub min_sentences_per_page: usize,
    pub min_words: usize,
    pub max_words: usize,
    pub max_word_len: usize,
    pub uppercase_frac_limit: f64,
    pub numeric_frac_limit: f64,
    pub duplicate_word_limit: f64,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        CleaningConfig {
            anomaly_threshold: 0.05,
            anomaly_enabled: true,
            lang_prob_threshold: 0.85,
            min_sentences_per_page: 5,
            min_words: 4,
            max_words: 50,
            max_word_len: 30,
            uppercase_frac_limit: 0.5,
            numeric_frac_limit: 1.0 / 3.0,
            duplicate_word_limit: 2.0,
        }
    }
}

/// Case-insensitive substring blocklist. File format: one term per
/// line, UTF-8, `#` comments.
#[derive(Debug, Clone, Default)]
pub struct Blocklist {
    terms: Vec<String>,
}

impl Blocklist {
    pub fn new<'a>(terms: impl IntoIterator<Item = &'a str>) -> Self {
        Blocklist {
            terms: terms.into_iter().map(|t| t.to_lowercase()).collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let mut terms = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            terms.push(t.to_lowercase());
        }
        Ok(Blocklist { terms })
    }

    pub fn matches(&self, text_lower: &str) -> bool {
        self.terms.iter().any(|t| text_lower.contains(t.as_str()))
    }
}

pub const PAGE_RULE_IDS: [&str; 4] = ["anomaly", "blocklist", "lorem_ipsum", "lang_prob"];

/// Page-level filtering, applied after anomaly scoring.
pub fn clean_page(
    page: &Page,
    decision_score: Option<f64>,
    config: &CleaningConfig,
    blocklist: &Blocklist,
) -> Result<Verdict> {
    if config.anomaly_enabled {
        let score = decision_score.ok_or_else(|| Error::MissingScore(page.id.clone()))?;
        if score < config.anomaly_threshold {
            return Ok(Verdict::reject("anomaly"));
        }
    }
    let lower = page.text.to_lowercase();
    if blocklist.matches(&lower) {
        return Ok(Verdict::reject("blocklist"));
    }
    if lower.contains("lorem ipsum") {
        return Ok(Verdict::reject("lorem_ipsum"));
    }
    if let Some(p) = page.lang_prob {
        if p < config.lang_prob_threshold {
            return Ok(Verdict::reject("lang_prob"));
        }
    }
    Ok(Verdict::keep())
}

/// Sentence rule ids, in the order they are applied.
pub const SENTENCE_RULE_IDS: [&str; 12] = [
    "empty",
    "terminal_punct",
    "curly_brace",
    "javascript",
    "privacy_cookies",
    "pipe",
    "word_count",
    "long_word",
    "uppercase",
    "numeric",
    "no_punct",
    "duplicate_words",
];

/// Punctuation beyond ASCII that Turkish web text commonly carries.
const EXTRA_PUNCT: [char; 10] = ['…', '“', '”', '«', '»', '‘', '’', '–', '—', '¿'];

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation() || EXTRA_PUNCT.contains(&c)
}

fn ends_with_terminal_punct(text: &str) -> bool {
    const CLOSERS: [char; 6] = ['"', '”', '»', ')', ']', '\''];
    text.trim_end_matches(CLOSERS)
        .chars()
        .next_back()
        .map(|c| TERMINAL_PUNCT.contains(&c))
        .unwrap_or(false)
}

/// Whether `s` violates the single rule named by `rule_id`.
/// Exposed so each rule can be unit-tested in isolation.
pub fn sentence_rule_violation(rule_id: &str, s: &Sentence, config: &CleaningConfig) -> bool {
    let text = s.text.as_str();
    match rule_id {
        "empty" => text.is_empty(),
        "terminal_punct" => !ends_with_terminal_punct(text),
        "curly_brace" => text.contains('{') || text.contains('}'),
        "javascript" => text.contains("JavaScript"),
        "privacy_cookies" => text.to_lowercase().contains("gizlilik ve çerezler"),
        "pipe" => text.contains('|'),
        "word_count" => s.word_count < config.min_words || s.word_count > config.max_words,
        "long_word" => longest_word_len(text) > config.max_word_len,
        "uppercase" => {
            let upper = text.chars().filter(|c| c.is_uppercase()).count();
            upper as f64 > config.uppercase_frac_limit * s.char_count as f64
        }
        "numeric" => {
            let digits = text.chars().filter(|c| c.is_numeric()).count();
            s.char_count > 0 && digits as f64 >= config.numeric_frac_limit * s.char_count as f64
        }
        "no_punct" => !text.chars().any(is_punct),
        "duplicate_words" => {
            let distinct: HashSet<String> = text
                .split_whitespace()
                .map(|w| w.trim_matches(is_punct).to_lowercase())
                .collect();
            !distinct.is_empty()
                && s.word_count as f64 / distinct.len() as f64 > config.duplicate_word_limit
        }
        other => panic!("unknown sentence rule {other:?}"),
    }
}

/// Applies all 12 sentence rules in order; the first failing rule is
/// reported.
pub fn clean_sentence(s: &Sentence, config: &CleaningConfig) -> Verdict {
    for rule_id in SENTENCE_RULE_IDS {
        if sentence_rule_violation(rule_id, s, config) {
            return Verdict::reject(rule_id);
        }
    }
    Verdict::keep()
}

/// Drops pages with fewer than `min_sentences_per_page` surviving
/// sentences; order preserved.
pub fn finalize(pages: Vec<Page>, config: &CleaningConfig) -> Vec<Page> {
    pages
        .into_iter()
        .filter(|p| {
            p.sentences
                .as_ref()
                .map(|s| s.len() >= config.min_sentences_per_page)
                .unwrap_or(false)
        })
        .collect()
}

/// Per-run counters. Token counts are whitespace words.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Report {
    pub pages_in: u64,
    pub pages_out: u64,
    pub sentences_in: u64,
    pub sentences_out: u64,
    pub tokens_in: u64,
    pub tokens_out: u64,
    pub page_rule_counts: BTreeMap<String, u64>,
    pub sentence_rule_counts: BTreeMap<String, u64>,
    pub pages_dropped_finalize: u64,
    pub pages_without_sentences: u64,
}

impl Report {
    pub fn total_page_rejections(&self) -> u64 {
        self.page_rule_counts.values().sum()
    }

    pub fn total_sentence_rejections(&self) -> u64 {
        self.sentence_rule_counts.values().sum()
    }
}

/// Full cleaning pipeline over an in-memory corpus: segment, feature
/// extraction, two-pass forest fit/score, page filter, sentence filter,
/// finalization. Deterministic for a fixed config and seed, regardless
/// of worker count.
pub fn run_pipeline(
    pages: Vec<Page>,
    config: &CleaningConfig,
    forest_config: ForestConfig,
    blocklist: &Blocklist,
) -> Result<(Vec<Page>, Report)> {
    let mut report = Report::default();
    report.pages_in = pages.len() as u64;
    for id in PAGE_RULE_IDS {
        report.page_rule_counts.insert(id.to_string(), 0);
    }
    for id in SENTENCE_RULE_IDS {
        report.sentence_rule_counts.insert(id.to_string(), 0);
    }

    let segmenter = Segmenter::default();
    let segmented: Vec<(Page, Vec<Sentence>)> = pages
        .into_par_iter()
        .map(|p| {
            let sents = segmenter.split_sentences(&p.text);
            (p, sents)
        })
        .collect();

    for (p, sents) in &segmented {
        report.sentences_in += sents.len() as u64;
        report.tokens_in += p.text.split_whitespace().count() as u64;
    }

    // pages with no sentences cannot be featurized; reject them upfront
    let (featurizable, empty): (Vec<_>, Vec<_>) =
        segmented.into_iter().partition(|(_, s)| !s.is_empty());
    report.pages_without_sentences = empty.len() as u64;

    // two-pass anomaly flow: fit on every feature vector, then score
    let scores: Option<Vec<f64>> = if config.anomaly_enabled && !featurizable.is_empty() {
        let points: Vec<[f64; 5]> = featurizable
            .par_iter()
            .map(|(p, s)| compute_features(s, &p.text).map(|f| f.as_array()))
            .collect::<Result<_>>()?;
        if points.len() < 2 {
            // nothing to isolate against; score neutrally
            Some(vec![0.5; points.len()])
        } else {
            let fc = ForestConfig {
                // small corpora still fit: clamp the subsample to the data
                subsample_size: forest_config.subsample_size.min(points.len()),
                ..forest_config
            };
            let forest = IsolationForest::fit(&points, fc)?;
            Some(
                points
                    .par_iter()
                    .map(|x| forest.decision_score(x))
                    .collect(),
            )
        }
    } else {
        None
    };

    let mut kept_pages = Vec::new();
    for (i, (page, sents)) in featurizable.into_iter().enumerate() {
        let score = scores.as_ref().map(|s| s[i]);
        let verdict = clean_page(&page, score, config, blocklist)?;
        if let Some(rule) = verdict.rule_id {
            *report.page_rule_counts.get_mut(&rule).unwrap() += 1;
            continue;
        }
        let mut kept = Vec::new();
        for s in sents {
            let v = clean_sentence(&s, config);
            if let Some(rule) = v.rule_id {
                *report.sentence_rule_counts.get_mut(&rule).unwrap() += 1;
            } else {
                kept.push(s);
            }
        }
        kept_pages.push(Page {
            sentences: Some(kept.iter().map(|s| s.text.clone()).collect()),
            ..page
        });
    }

    let before_finalize = kept_pages.len();
    let out = finalize(kept_pages, config);
    report.pages_dropped_finalize = (before_finalize - out.len()) as u64;
    report.pages_out = out.len() as u64;
    for p in &out {
        if let Some(sents) = &p.sentences {
            report.sentences_out += sents.len() as u64;
            report.tokens_out += sents
                .iter()
                .map(|s| s.split_whitespace().count() as u64)
                .sum::<u64>();
        }
    }
    Ok((out, report))
}
