//! Tokenizer-efficiency, training-budget, and dataset-intersection
//! calculators.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::{Error, Result};

/// Chinchilla-optimal tokens per parameter.
pub const TOKENS_PER_PARAM: f64 = 20.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TokenizerReport {
    pub name: String,
    pub vocab_size: u64,
    pub total_tokens: u64,
    /// Token count relative to the reference tokenizer.
    pub relative_tokens: f64,
    /// `relative_tokens x vocab_ratio` against the reference.
    pub representation_power: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BudgetReport {
    pub params: u64,
    pub steps: u64,
    pub batch: u64,
    pub ctx: u64,
    pub corpus_tokens: u64,
    pub tokens_seen: u64,
    pub epochs: f64,
    pub chinchilla_ratio: f64,
    pub optimal_steps: f64,
}

pub fn relative_tokens(count: u64, ref_count: u64) -> Result<f64> {
    if ref_count == 0 {
        return Err(Error::DivisionByZero("reference token count"));
    }
    Ok(count as f64 / ref_count as f64)
}

pub fn representation_power(rel_tokens: f64, vocab: u64, ref_vocab: u64) -> f64 {
    rel_tokens * vocab as f64 / ref_vocab as f64
}

pub fn chinchilla_ratio(corpus_tokens: f64, params: f64) -> f64 {
    corpus_tokens / (params * TOKENS_PER_PARAM)
}

pub fn optimal_steps(params: f64, batch: f64, ctx: f64) -> f64 {
    params * TOKENS_PER_PARAM / (batch * ctx)
}

pub fn tokens_seen(steps: u64, batch: u64, ctx: u64) -> u64 {
    steps * batch * ctx
}

pub fn epochs(tokens_seen: f64, corpus_tokens: f64) -> f64 {
    tokens_seen / corpus_tokens
}

pub fn compute_budget(
    params: u64,
    steps: u64,
    batch: u64,
    ctx: u64,
    corpus_tokens: u64,
) -> BudgetReport {
    let seen = tokens_seen(steps, batch, ctx);
    BudgetReport {
        params,
        steps,
        batch,
        ctx,
        corpus_tokens,
        tokens_seen: seen,
        epochs: epochs(seen as f64, corpus_tokens as f64),
        chinchilla_ratio: chinchilla_ratio(seen as f64, params as f64),
        optimal_steps: optimal_steps(params as f64, batch as f64, ctx as f64),
    }
}

/// Precomputed token counts for one tokenizer:
/// `name \t vocab_size \t total_tokens`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizerCounts {
    pub name: String,
    pub vocab_size: u64,
    pub total_tokens: u64,
}

pub fn load_counts_tsv(path: &Path) -> Result<Vec<TokenizerCounts>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = t.split('\t').collect();
        if parts.len() != 3 {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: "expected `name\\tvocab_size\\ttotal_tokens`".into(),
            });
        }
        let parse = |s: &str| -> Result<u64> {
            s.trim().parse().map_err(|e| Error::Parse {
                line: lineno + 1,
                msg: format!("bad integer: {e}"),
            })
        };
        out.push(TokenizerCounts {
            name: parts[0].to_string(),
            vocab_size: parse(parts[1])?,
            total_tokens: parse(parts[2])?,
        });
    }
    Ok(out)
}

/// Builds per-tokenizer reports normalized by the named reference.
pub fn tokenizer_reports(
    counts: &[TokenizerCounts],
    reference: &str,
) -> Result<Vec<TokenizerReport>> {
    let reference = counts
        .iter()
        .find(|c| c.name == reference)
        .ok_or_else(|| Error::InvalidConfig(format!("reference tokenizer {reference:?} not in counts")))?
        .clone();
    counts
        .iter()
        .map(|c| {
            let rel = relative_tokens(c.total_tokens, reference.total_tokens)?;
            Ok(TokenizerReport {
                name: c.name.clone(),
                vocab_size: c.vocab_size,
                total_tokens: c.total_tokens,
                relative_tokens: rel,
                representation_power: representation_power(
                    rel,
                    c.vocab_size,
                    reference.vocab_size,
                ),
            })
        })
        .collect()
}

/// Aligned plain-text table of tokenizer reports.
pub fn render_tokenizer_table(reports: &[TokenizerReport]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<20} {:>12} {:>14} {:>10} {:>8}\n",
        "tokenizer", "vocab_size", "total_tokens", "relative", "power"
    ));
    for r in reports {
        out.push_str(&format!(
            "{:<20} {:>12} {:>14} {:>10.4} {:>8.2}\n",
            r.name, r.vocab_size, r.total_tokens, r.relative_tokens, r.representation_power
        ));
    }
    out
}

/// Canonical record form for intersection counting: trimmed, inner
/// whitespace collapsed to single spaces.
pub fn canonicalize(record: &str) -> String {
    record.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntersectionMatrix {
    pub names: Vec<String>,
    pub sizes: Vec<u64>,
    /// `counts[i][j]` = multiset intersection of datasets i and j.
    pub counts: Vec<Vec<u64>>,
}

/// Pairwise multiset intersections of canonicalized records.
pub fn split_intersections(datasets: &[(String, Vec<String>)]) -> IntersectionMatrix {
    let canon: Vec<HashMap<String, u64>> = datasets
        .iter()
        .map(|(_, records)| {
            let mut m: HashMap<String, u64> = HashMap::new();
            for r in records {
                *m.entry(canonicalize(r)).or_default() += 1;
            }
            m
        })
        .collect();
    let n = datasets.len();
    let mut counts = vec![vec![0u64; n]; n];
    for i in 0..n {
        counts[i][i] = datasets[i].1.len() as u64;
        for j in i + 1..n {
            let inter: u64 = canon[i]
                .iter()
                .map(|(k, &a)| a.min(canon[j].get(k).copied().unwrap_or(0)))
                .sum();
            counts[i][j] = inter;
            counts[j][i] = inter;
        }
    }
    IntersectionMatrix {
        names: datasets.iter().map(|(n, _)| n.clone()).collect(),
        sizes: datasets.iter().map(|(_, r)| r.len() as u64).collect(),
        counts,
    }
}

/// Aligned plain-text intersection table.
pub fn render_intersection_table(m: &IntersectionMatrix) -> String {
    let mut out = String::new();
    out.push_str(&format!("{:<20}", ""));
    for (name, size) in m.names.iter().zip(&m.sizes) {
        out.push_str(&format!("{:>18}", format!("{name}({size})")));
    }
    out.push('\n');
    for (i, name) in m.names.iter().enumerate() {
        out.push_str(&format!("{:<20}", format!("{name}({})", m.sizes[i])));
        for j in 0..m.names.len() {
            out.push_str(&format!("{:>18}", m.counts[i][j]));
        }
        out.push('\n');
    }
    out
}
