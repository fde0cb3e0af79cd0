//! Dynamic pre-training data generator: stochastic chunk selection,
//! sentence permutation, Poisson span infilling at a fixed token
//! budget, and padded example assembly.
//!
//! Every example is a pure function of `(document, config, epoch)`; the
//! record seed is derived from the global seed, the document id and the
//! epoch, so regeneration is reproducible and epoch-varying.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::tokenizer::{BOS_ID, EOS_ID, MASK_ID, PAD_ID};
use crate::util::{record_seed, rng_from};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoisingConfig {
    /// Fraction of chunk tokens removed by span masking.
    pub mask_ratio: f64,
    pub poisson_lambda: f64,
    pub encoder_len: usize,
    pub decoder_len: usize,
    pub global_seed: u64,
}

impl Default for NoisingConfig {
    fn default() -> Self {
        NoisingConfig {
            mask_ratio: 0.30,
            poisson_lambda: 3.5,
            encoder_len: 800,
            decoder_len: 1024,
            global_seed: 0,
        }
    }
}

/// One denoising pair, right-padded to the configured lengths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub encoder_ids: Vec<u32>,
    pub decoder_input_ids: Vec<u32>,
    pub target_ids: Vec<u32>,
    pub n_real_encoder: usize,
    pub n_real_target: usize,
}

/// Masking telemetry accumulated across examples.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct NoisingStats {
    /// Poisson draws before clamping, and their sum.
    pub span_draws: u64,
    pub span_draw_sum: u64,
    pub clamped_spans: u64,
    pub zero_insertions: u64,
    pub spans_placed: u64,
    pub removed_tokens: u64,
    pub chunk_tokens: u64,
    pub truncated_encoders: u64,
    pub skipped_sentences: u64,
    pub examples: u64,
}

impl NoisingStats {
    pub fn mean_span_draw(&self) -> f64 {
        if self.span_draws == 0 {
            0.0
        } else {
            self.span_draw_sum as f64 / self.span_draws as f64
        }
    }

    pub fn removed_fraction(&self) -> f64 {
        if self.chunk_tokens == 0 {
            0.0
        } else {
            self.removed_tokens as f64 / self.chunk_tokens as f64
        }
    }

    pub fn clamp_rate(&self) -> f64 {
        if self.span_draws == 0 {
            0.0
        } else {
            self.clamped_spans as f64 / self.span_draws as f64
        }
    }

    pub fn truncation_rate(&self) -> f64 {
        if self.examples == 0 {
            0.0
        } else {
            self.truncated_encoders as f64 / self.examples as f64
        }
    }
}

/// Poisson variate via Knuth's multiplicative product method
/// (inversion of the CDF through a product of uniforms).
pub fn sample_poisson(lambda: f64, rng: &mut ChaCha8Rng) -> u64 {
    debug_assert!(lambda > 0.0);
    let limit = (-lambda).exp();
    let mut k = 0u64;
    let mut product: f64 = 1.0;
    loop {
        product *= rng.gen_range(0.0..1.0);
        if product <= limit {
            return k;
        }
        k += 1;
    }
}

/// Selects a contiguous run of sentences whose token total fits
/// `decoder_len - 2`. When the whole document fits it is returned
/// unchanged; otherwise the start is uniform over the maximal valid
/// starts (runs not contained in an earlier one). Sentences are never
/// cut.
pub fn select_chunk<'a>(
    sentences: &'a [Vec<u32>],
    config: &NoisingConfig,
    rng: &mut ChaCha8Rng,
) -> Result<&'a [Vec<u32>]> {
    if sentences.is_empty() {
        return Err(Error::EmptyDocument);
    }
    let cap = config.decoder_len - 2; // room for bos/eos
    let total: usize = sentences.iter().map(Vec::len).sum();
    if total <= cap {
        return Ok(sentences);
    }
    // greedy maximal run end for every start; ends are nondecreasing
    let n = sentences.len();
    let mut ends = vec![0usize; n];
    let mut end = 0usize;
    let mut run_total = 0usize;
    for start in 0..n {
        if end < start {
            end = start;
            run_total = 0;
        }
        while end < n && run_total + sentences[end].len() <= cap {
            run_total += sentences[end].len();
            end += 1;
        }
        ends[start] = end;
        run_total -= sentences[start].len();
    }
    // maximal starts: the run from `start` extends past every earlier run
    let starts: Vec<usize> = (0..n)
        .filter(|&s| s == 0 || ends[s] > ends[s - 1])
        .collect();
    let start = starts[rng.gen_range(0..starts.len())];
    Ok(&sentences[start..ends[start]])
}

/// Fisher–Yates shuffle of sentence order; sentences untouched.
pub fn permute_sentences(chunk: &[Vec<u32>], rng: &mut ChaCha8Rng) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = chunk.to_vec();
    for i in (1..out.len()).rev() {
        let j = rng.gen_range(0..=i);
        out.swap(i, j);
    }
    out
}

const MAX_ZERO_INSERTIONS: usize = 10;
const MAX_PLACEMENT_ATTEMPTS: usize = 100;

/// Span infilling: removes exactly `floor(mask_ratio * len)` tokens,
/// replacing each removed span with a single mask token. Zero-length
/// Poisson draws insert a lone mask without consuming budget.
pub fn infill_spans(
    ids: &[u32],
    config: &NoisingConfig,
    rng: &mut ChaCha8Rng,
    stats: &mut NoisingStats,
) -> Vec<u32> {
    let n = ids.len();
    assert!(n > 0, "infill_spans requires non-empty input");
    let budget = (config.mask_ratio * n as f64).floor() as usize;
    stats.chunk_tokens += n as u64;

    // spans as (start, len), non-overlapping
    let mut spans: Vec<(usize, usize)> = Vec::new();
    let mut insertions: Vec<usize> = Vec::new(); // gap index 0..=n
    let mut removed = 0usize;
    let overlaps = |spans: &[(usize, usize)], start: usize, len: usize| {
        spans
            .iter()
            .any(|&(s, l)| start < s + l && s < start + len)
    };
    while removed < budget {
        let draw = sample_poisson(config.poisson_lambda, rng);
        stats.span_draws += 1;
        stats.span_draw_sum += draw;
        let mut len = draw as usize;
        if len > budget - removed {
            len = budget - removed;
            stats.clamped_spans += 1;
        }
        if len == 0 {
            if insertions.len() < MAX_ZERO_INSERTIONS {
                insertions.push(rng.gen_range(0..=n));
                stats.zero_insertions += 1;
            }
            continue;
        }
        // uniform start, rejecting overlaps; shrink on repeated failure
        loop {
            let mut placed = false;
            for _ in 0..MAX_PLACEMENT_ATTEMPTS {
                let start = rng.gen_range(0..=n - len);
                if !overlaps(&spans, start, len) {
                    spans.push((start, len));
                    removed += len;
                    stats.spans_placed += 1;
                    placed = true;
                    break;
                }
            }
            if placed {
                break;
            }
            len -= 1;
            if len == 0 {
                // free single slots always exist while budget remains
                let free: Vec<usize> =
                    (0..n).filter(|&i| !overlaps(&spans, i, 1)).collect();
                let start = free[rng.gen_range(0..free.len())];
                spans.push((start, 1));
                removed += 1;
                stats.spans_placed += 1;
                break;
            }
        }
    }
    stats.removed_tokens += removed as u64;

    spans.sort_unstable();
    let mut insert_counts = vec![0usize; n + 1];
    for &g in &insertions {
        insert_counts[g] += 1;
    }
    let mut out = Vec::with_capacity(n - removed + spans.len() + insertions.len());
    let mut span_iter = spans.iter().peekable();
    let mut i = 0usize;
    while i <= n {
        for _ in 0..insert_counts[i] {
            out.push(MASK_ID);
        }
        if i == n {
            break;
        }
        if let Some(&&(s, l)) = span_iter.peek() {
            if s == i {
                out.push(MASK_ID);
                // swallow insertions inside the span
                for g in i + 1..i + l {
                    for _ in 0..insert_counts[g] {
                        out.push(MASK_ID);
                    }
                }
                i += l;
                span_iter.next();
                continue;
            }
        }
        out.push(ids[i]);
        i += 1;
    }
    out
}

fn pad_to(mut v: Vec<u32>, len: usize) -> Vec<u32> {
    v.resize(len, PAD_ID);
    v
}

/// Builds one denoising example from a tokenized document. All
/// randomness comes from `hash(global_seed, doc_id, epoch)`.
pub fn make_example(
    doc_id: &str,
    sentences: &[Vec<u32>],
    config: &NoisingConfig,
    epoch: u64,
    stats: &mut NoisingStats,
) -> Result<TrainingExample> {
    let cap = config.decoder_len - 2;
    let usable: Vec<Vec<u32>> = sentences
        .iter()
        .filter(|s| {
            let fits = s.len() <= cap && !s.is_empty();
            if !fits {
                stats.skipped_sentences += 1;
            }
            fits
        })
        .cloned()
        .collect();
    if usable.is_empty() {
        return Err(Error::EmptyDocument);
    }
    let mut rng = rng_from(record_seed(config.global_seed, doc_id, epoch));

    let chunk = select_chunk(&usable, config, &mut rng)?;

    // decoder target keeps the original order
    let mut target: Vec<u32> = chunk.iter().flatten().copied().collect();
    target.push(EOS_ID);
    let n_real_target = target.len();
    let mut decoder_input = Vec::with_capacity(n_real_target);
    decoder_input.push(BOS_ID);
    decoder_input.extend_from_slice(&target[..n_real_target - 1]);

    // encoder side gets permuted and infilled
    let permuted: Vec<u32> = permute_sentences(chunk, &mut rng)
        .into_iter()
        .flatten()
        .collect();
    let mut encoder = infill_spans(&permuted, config, &mut rng, stats);
    if encoder.len() > config.encoder_len {
        encoder.truncate(config.encoder_len);
        stats.truncated_encoders += 1;
    }
    let n_real_encoder = encoder.len();
    stats.examples += 1;

    Ok(TrainingExample {
        encoder_ids: pad_to(encoder, config.encoder_len),
        decoder_input_ids: pad_to(decoder_input, config.decoder_len),
        target_ids: pad_to(target, config.decoder_len),
        n_real_encoder,
        n_real_target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn cfg() -> NoisingConfig {
        NoisingConfig::default()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        rng_from(seed)
    }

    #[test]
    fn poisson_mean_and_p0_match_analytics() {
        let mut r = rng(7);
        let n = 100_000u64;
        let mut sum = 0u64;
        let mut zeros = 0u64;
        for _ in 0..n {
            let k = sample_poisson(3.5, &mut r);
            sum += k;
            if k == 0 {
                zeros += 1;
            }
        }
        let mean = sum as f64 / n as f64;
        assert!((mean - 3.5).abs() < 0.05, "mean {mean}");
        let p0 = zeros as f64 / n as f64;
        assert!((p0 - (-3.5f64).exp()).abs() < 0.003, "p0 {p0}");
    }

    #[test]
    fn poisson_is_deterministic() {
        let a: Vec<u64> = {
            let mut r = rng(11);
            (0..100).map(|_| sample_poisson(3.5, &mut r)).collect()
        };
        let b: Vec<u64> = {
            let mut r = rng(11);
            (0..100).map(|_| sample_poisson(3.5, &mut r)).collect()
        };
        assert_eq!(a, b);
    }

    fn sent(tokens: std::ops::Range<u32>) -> Vec<u32> {
        tokens.map(|t| t + 100).collect()
    }

    #[test]
    fn whole_document_is_returned_when_it_fits() {
        let doc: Vec<Vec<u32>> = (0..5).map(|i| sent(i * 100..i * 100 + 100)).collect();
        let chunk = select_chunk(&doc, &cfg(), &mut rng(0)).unwrap();
        assert_eq!(chunk.len(), 5);
    }

    #[test]
    fn oversize_document_yields_maximal_contiguous_run() {
        // 10 sentences x 200 tokens, cap 1022 -> runs of exactly 5
        let doc: Vec<Vec<u32>> = (0..10).map(|_| sent(0..200)).collect();
        for seed in 0..20 {
            let chunk = select_chunk(&doc, &cfg(), &mut rng(seed)).unwrap();
            assert_eq!(chunk.len(), 5);
        }
    }

    #[test]
    fn empty_document_is_an_error() {
        assert!(matches!(
            select_chunk(&[], &cfg(), &mut rng(0)),
            Err(Error::EmptyDocument)
        ));
    }

    #[test]
    fn chunk_start_distribution_is_uniform_over_maximal_starts() {
        // sentence lengths 400, 300, 400, 300, 400: cap 1022.
        // greedy ends: start 0 -> [0,1) end? 400+300 <= 1022, +400 no -> end 2;
        // start 1 -> 300+400 <= 1022 +300 -> 1000 <=1022 -> end 4;
        // start 2 -> 400+300 -> 700 +400 no -> end 4; contained (end not >)
        // start 3 -> 300+400 -> end 5; start 4 -> contained.
        // maximal starts = {0, 1, 3}
        let lens = [400usize, 300, 400, 300, 400];
        let doc: Vec<Vec<u32>> = lens.iter().map(|&l| vec![9; l]).collect();
        let mut counts: HashMap<usize, u64> = HashMap::new();
        let trials = 10_000;
        for seed in 0..trials {
            let chunk = select_chunk(&doc, &cfg(), &mut rng(seed)).unwrap();
            // identify the start by the address of the first sentence
            let start = doc
                .iter()
                .position(|s| std::ptr::eq(s, &chunk[0]))
                .unwrap();
            *counts.entry(start).or_default() += 1;
        }
        let valid: Vec<usize> = vec![0, 1, 3];
        assert_eq!(
            {
                let mut k: Vec<usize> = counts.keys().copied().collect();
                k.sort_unstable();
                k
            },
            valid
        );
        // chi-squared against uniform over 3 starts, 2 dof; 13.8 ~ p=0.001
        let expected = trials as f64 / valid.len() as f64;
        let chi2: f64 = valid
            .iter()
            .map(|s| {
                let o = counts[s] as f64;
                (o - expected).powi(2) / expected
            })
            .sum();
        assert!(chi2 < 13.8, "chi2 {chi2}");
    }

    #[test]
    fn permutation_preserves_multiset_and_singletons() {
        let chunk: Vec<Vec<u32>> = (0..4).map(|i| sent(i * 10..i * 10 + 5)).collect();
        let single = permute_sentences(&chunk[..1], &mut rng(3));
        assert_eq!(single, chunk[..1].to_vec());
        for seed in 0..50 {
            let out = permute_sentences(&chunk, &mut rng(seed));
            let mut a = chunk.clone();
            let mut b = out.clone();
            a.sort();
            b.sort();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn permutation_is_uniform_over_orders() {
        let chunk: Vec<Vec<u32>> = (0..3).map(|i| vec![i]).collect();
        let mut counts: HashMap<Vec<u32>, u64> = HashMap::new();
        let trials = 10_000u64;
        for seed in 0..trials {
            let out = permute_sentences(&chunk, &mut rng(seed));
            let key: Vec<u32> = out.into_iter().flatten().collect();
            *counts.entry(key).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        for (_, c) in counts {
            let frac = c as f64 / trials as f64;
            assert!((frac - 1.0 / 6.0).abs() < 0.02, "frac {frac}");
        }
    }

    #[test]
    fn budget_is_exact() {
        let ids: Vec<u32> = (100..110).collect();
        let mut stats = NoisingStats::default();
        let out = infill_spans(&ids, &cfg(), &mut rng(5), &mut stats);
        assert_eq!(stats.removed_tokens, 3); // floor(0.3 * 10)
        let surviving = out.iter().filter(|&&t| t != MASK_ID).count();
        assert_eq!(surviving, 7);
    }

    #[test]
    fn zero_budget_changes_nothing_but_insertions() {
        let ids: Vec<u32> = (100..103).collect();
        let c = NoisingConfig {
            mask_ratio: 0.1, // floor(0.1*3) = 0
            ..cfg()
        };
        let mut stats = NoisingStats::default();
        let out = infill_spans(&ids, &c, &mut rng(5), &mut stats);
        assert_eq!(stats.removed_tokens, 0);
        let originals: Vec<u32> = out.iter().copied().filter(|&t| t != MASK_ID).collect();
        assert_eq!(originals, ids);
    }

    #[test]
    fn surviving_tokens_keep_relative_order() {
        let ids: Vec<u32> = (100..200).collect();
        for seed in 0..30 {
            let mut stats = NoisingStats::default();
            let out = infill_spans(&ids, &cfg(), &mut rng(seed), &mut stats);
            let kept: Vec<u32> = out.iter().copied().filter(|&t| t != MASK_ID).collect();
            let mut last = 0u32;
            for t in kept {
                assert!(t > last);
                last = t;
            }
        }
    }

    #[test]
    fn infill_statistics_over_many_sequences() {
        let mut stats = NoisingStats::default();
        let c = cfg();
        for seed in 0..1000u64 {
            let ids: Vec<u32> = (0..1000).map(|i| 100 + i).collect();
            let mut r = rng(seed);
            let out = infill_spans(&ids, &c, &mut r, &mut stats);
            let surviving = out.iter().filter(|&&t| t != MASK_ID).count();
            assert_eq!(surviving, 700); // exactly 0.300 removed each time
        }
        assert!((stats.removed_fraction() - 0.300).abs() < 1e-12);
        let mean = stats.mean_span_draw();
        assert!((mean - 3.5).abs() < 0.1, "pre-clamp mean {mean}");
    }

    fn doc(n_sent: usize, sent_len: u32) -> Vec<Vec<u32>> {
        (0..n_sent)
            .map(|i| (0..sent_len).map(|j| 100 + i as u32 * sent_len + j).collect())
            .collect()
    }

    #[test]
    fn identical_inputs_give_identical_examples() {
        let d = doc(10, 50);
        let c = cfg();
        let mut s1 = NoisingStats::default();
        let mut s2 = NoisingStats::default();
        let e1 = make_example("doc-1", &d, &c, 3, &mut s1).unwrap();
        let e2 = make_example("doc-1", &d, &c, 3, &mut s2).unwrap();
        assert_eq!(e1, e2);
    }

    #[test]
    fn different_epochs_give_different_encoders() {
        let d = doc(10, 50); // 500 tokens
        let c = cfg();
        let mut stats = NoisingStats::default();
        let base = make_example("doc-1", &d, &c, 0, &mut stats).unwrap();
        let mut collisions = 0;
        for epoch in 1..=100 {
            let e = make_example("doc-1", &d, &c, epoch, &mut stats).unwrap();
            if e.encoder_ids == base.encoder_ids {
                collisions += 1;
            }
        }
        assert_eq!(collisions, 0);
    }

    #[test]
    fn target_is_unnoised_chunk_with_eos() {
        let d = doc(8, 40);
        let c = cfg();
        let mut stats = NoisingStats::default();
        for epoch in 0..20 {
            let e = make_example("doc-x", &d, &c, epoch, &mut stats).unwrap();
            let real = &e.target_ids[..e.n_real_target];
            assert_eq!(*real.last().unwrap(), EOS_ID);
            let body = &real[..real.len() - 1];
            // the whole document fits, so the chunk is the document
            let want: Vec<u32> = d.iter().flatten().copied().collect();
            assert_eq!(body, want.as_slice());
            // decoder input is the bos-shifted target
            assert_eq!(e.decoder_input_ids[0], BOS_ID);
            assert_eq!(
                &e.decoder_input_ids[1..e.n_real_target],
                &e.target_ids[..e.n_real_target - 1]
            );
        }
    }

    #[test]
    fn padding_is_right_only_and_lengths_bounded() {
        let d = doc(30, 60); // 1800 tokens, forces chunking
        let c = cfg();
        let mut stats = NoisingStats::default();
        for epoch in 0..20 {
            let e = make_example("doc-y", &d, &c, epoch, &mut stats).unwrap();
            assert_eq!(e.encoder_ids.len(), c.encoder_len);
            assert_eq!(e.decoder_input_ids.len(), c.decoder_len);
            assert_eq!(e.target_ids.len(), c.decoder_len);
            assert!(e.n_real_encoder <= c.encoder_len);
            assert!(e.n_real_target <= c.decoder_len);
            for (v, real) in [
                (&e.encoder_ids, e.n_real_encoder),
                (&e.target_ids, e.n_real_target),
            ] {
                assert!(v[..real].iter().all(|&t| t != PAD_ID));
                assert!(v[real..].iter().all(|&t| t == PAD_ID));
            }
        }
    }

    #[test]
    fn chunks_are_contiguous_in_source_order() {
        // per-sentence sequence markers: sentence i is [1000+i; 60]
        let d: Vec<Vec<u32>> = (0..30).map(|i| vec![1000 + i as u32; 60]).collect();
        let c = cfg();
        let mut stats = NoisingStats::default();
        for epoch in 0..50 {
            let e = make_example("doc-z", &d, &c, epoch, &mut stats).unwrap();
            let body = &e.target_ids[..e.n_real_target - 1];
            let mut markers: Vec<u32> = body.to_vec();
            markers.dedup();
            for w in markers.windows(2) {
                assert_eq!(w[1], w[0] + 1, "non-contiguous chunk");
            }
        }
    }

    #[test]
    fn overlong_sentences_are_skipped_with_counter() {
        let mut d = doc(6, 50);
        d.insert(3, vec![7; 2000]); // cannot fit any decoder window
        let c = cfg();
        let mut stats = NoisingStats::default();
        let e = make_example("doc-s", &d, &c, 0, &mut stats).unwrap();
        assert_eq!(stats.skipped_sentences, 1);
        assert!(!e.target_ids.contains(&7));

        let only_long = vec![vec![7; 2000]];
        let mut stats = NoisingStats::default();
        assert!(matches!(
            make_example("doc-t", &only_long, &c, 0, &mut stats),
            Err(Error::EmptyDocument)
        ));
    }
}
