//! Command-line entry point: every pipeline stage and calculator as a
//! subcommand over files. Flag values override config-file values,
//! which override the built-in defaults; all randomness derives from
//! `--seed`.

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::analysis;
use crate::cleaner::{
    clean_page, clean_sentence, Blocklist, CleaningConfig, Page, Report, PAGE_RULE_IDS,
    SENTENCE_RULE_IDS,
};
use crate::enlarge::{apply_enlargement, plan_enlargement};
use crate::features::compute_features;
use crate::isoforest::{ForestConfig, IsolationForest};
use crate::manifest::TensorManifest;
use crate::noising::{make_example, NoisingConfig, NoisingStats};
use crate::segment::Segmenter;
use crate::tokenizer::{encode_unigram, Vocab};
use crate::{Error, Result};

#[derive(Parser)]
#[command(name = "webcorpus", version, about = "Corpus cleaning and pre-training data toolkit")]
struct Cli {
    /// Flat key=value config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed for all randomized stages.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores). Results do not depend on
    /// this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full two-level cleaning pipeline.
    Clean(CleanArgs),
    /// Dump per-page anomaly features as TSV.
    Features(FeaturesArgs),
    /// Fit an isolation forest on a feature dump.
    FitForest(FitForestArgs),
    /// Score a feature dump with a fitted forest.
    Score(ScoreArgs),
    /// Count subword tokens per page.
    Tokenize(TokenizeArgs),
    /// Generate denoising training examples.
    Noise(NoiseArgs),
    /// Compare tokenizers from a precomputed counts file.
    AnalyzeTokenizers(AnalyzeTokenizersArgs),
    /// Training-budget arithmetic: tokens seen, epochs, optimality.
    Budget(BudgetArgs),
    /// Pairwise dataset intersection counts.
    Intersections(IntersectionsArgs),
    /// Depth-double a checkpoint by layer interleaving.
    Enlarge(EnlargeArgs),
}

#[derive(Args)]
struct CleanArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Cleaning report (JSON) with the effective config echoed in.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    blocklist: Option<PathBuf>,
    #[arg(long)]
    anomaly_threshold: Option<f64>,
    #[arg(long)]
    lang_prob_threshold: Option<f64>,
    #[arg(long)]
    min_sentences: Option<usize>,
    #[arg(long)]
    min_words: Option<usize>,
    #[arg(long)]
    max_words: Option<usize>,
    #[arg(long)]
    max_word_len: Option<usize>,
    #[arg(long)]
    uppercase_limit: Option<f64>,
    #[arg(long)]
    numeric_limit: Option<f64>,
    #[arg(long)]
    duplicate_limit: Option<f64>,
    #[arg(long)]
    n_trees: Option<usize>,
    #[arg(long)]
    subsample_size: Option<usize>,
    /// Disable the isolation-forest page filter.
    #[arg(long)]
    no_anomaly: bool,
}

#[derive(Args)]
struct FeaturesArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitForestArgs {
    /// Feature dump TSV (`page_id \t f1..f5`).
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    n_trees: Option<usize>,
    #[arg(long)]
    subsample_size: Option<usize>,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    forest: PathBuf,
    #[arg(long)]
    features: PathBuf,
    /// Output TSV `page_id \t anomaly_score \t decision_score`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TokenizeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    vocab: PathBuf,
    /// Output JSON-lines `{"id", "n_tokens"}`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct NoiseArgs {
    /// Cleaned corpus JSONL (pages with `sentences`).
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    vocab: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Masking telemetry JSON.
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    epoch: u64,
    #[arg(long)]
    mask_ratio: Option<f64>,
    #[arg(long)]
    poisson_lambda: Option<f64>,
    #[arg(long)]
    encoder_len: Option<usize>,
    #[arg(long)]
    decoder_len: Option<usize>,
}

#[derive(Args)]
struct AnalyzeTokenizersArgs {
    /// Counts TSV `name \t vocab_size \t total_tokens`.
    #[arg(long)]
    counts: PathBuf,
    /// Name of the reference tokenizer (relative_tokens = 1.0).
    #[arg(long)]
    reference: String,
    /// Optional JSON report path; the text table always goes to stdout.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long)]
    params: u64,
    #[arg(long)]
    steps: u64,
    #[arg(long)]
    batch: u64,
    #[arg(long)]
    ctx: u64,
    #[arg(long)]
    corpus_tokens: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IntersectionsArgs {
    /// Dataset as `name=path`, one record per line; repeatable.
    #[arg(long = "dataset", required = true)]
    datasets: Vec<String>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct EnlargeArgs {
    #[arg(long)]
    donor: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 12)]
    src_layers: usize,
    #[arg(long, default_value_t = 24)]
    tgt_layers: usize,
    #[arg(long, default_value_t = 0.02)]
    init_std: f64,
    /// Print the plan as JSON and write nothing.
    #[arg(long)]
    dry_run: bool,
}

/// Flat `key = value` config file; `#` comments, UTF-8. Keys mirror
/// the long flag names.
struct FileConfig(BTreeMap<String, String>);

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut map = BTreeMap::new();
        if let Some(path) = path {
            let reader = BufReader::new(File::open(path)?);
            for (lineno, line) in reader.lines().enumerate() {
                let line = line?;
                let t = line.trim();
                if t.is_empty() || t.starts_with('#') {
                    continue;
                }
                let (k, v) = t.split_once('=').ok_or_else(|| Error::Parse {
                    line: lineno + 1,
                    msg: "expected `key = value`".into(),
                })?;
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(FileConfig(map))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| {
                Error::InvalidConfig(format!("config key {key:?} has invalid value {v:?}"))
            }),
        }
    }
}

fn resolve<T: FromStr>(flag: Option<T>, cfg: &FileConfig, key: &str, default: T) -> Result<T> {
    Ok(match flag {
        Some(v) => v,
        None => cfg.get(key)?.unwrap_or(default),
    })
}

fn require_range(name: &str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if !(lo..=hi).contains(&value) || !value.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "{name} = {value} outside [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// Parses argv, runs the requested subcommand, and returns the process
/// exit code: 0 success, 1 validation error, 2 I/O error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own usage text; route errors to stderr
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            if is_help {
                print!("{e}");
                return 0;
            }
            eprint!("{e}");
            return 1;
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers.unwrap_or(0))
        .build();
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let result = pool.install(|| dispatch(&cli));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => 2,
                Error::Json(ref j) if j.is_io() => 2,
                _ => 1,
            }
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    let cfg = FileConfig::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Clean(a) => cmd_clean(a, &cfg, cli.seed),
        Command::Features(a) => cmd_features(a),
        Command::FitForest(a) => cmd_fit_forest(a, &cfg, cli.seed),
        Command::Score(a) => cmd_score(a),
        Command::Tokenize(a) => cmd_tokenize(a),
        Command::Noise(a) => cmd_noise(a, &cfg, cli.seed),
        Command::AnalyzeTokenizers(a) => cmd_analyze_tokenizers(a),
        Command::Budget(a) => cmd_budget(a),
        Command::Intersections(a) => cmd_intersections(a),
        Command::Enlarge(a) => cmd_enlarge(a, cli.seed),
    }
}

fn open_lines(path: &Path) -> Result<impl Iterator<Item = std::io::Result<String>>> {
    Ok(BufReader::new(File::open(path)?).lines())
}

fn parse_page(line: &str, lineno: usize) -> Result<Page> {
    serde_json::from_str(line).map_err(|e| Error::Parse {
        line: lineno + 1,
        msg: format!("bad page record: {e}"),
    })
}

fn build_cleaning_config(a: &CleanArgs, cfg: &FileConfig) -> Result<(CleaningConfig, ForestConfig)> {
    let d = CleaningConfig::default();
    let clean = CleaningConfig {
        anomaly_threshold: resolve(a.anomaly_threshold, cfg, "anomaly-threshold", d.anomaly_threshold)?,
        anomaly_enabled: !a.no_anomaly && resolve(None, cfg, "anomaly-enabled", true)?,
        lang_prob_threshold: resolve(
            a.lang_prob_threshold,
            cfg,
            "lang-prob-threshold",
            d.lang_prob_threshold,
        )?,
        min_sentences_per_page: resolve(a.min_sentences, cfg, "min-sentences", d.min_sentences_per_page)?,
        min_words: resolve(a.min_words, cfg, "min-words", d.min_words)?,
        max_words: resolve(a.max_words, cfg, "max-words", d.max_words)?,
        max_word_len: resolve(a.max_word_len, cfg, "max-word-len", d.max_word_len)?,
        uppercase_frac_limit: resolve(a.uppercase_limit, cfg, "uppercase-limit", d.uppercase_frac_limit)?,
        numeric_frac_limit: resolve(a.numeric_limit, cfg, "numeric-limit", d.numeric_frac_limit)?,
        duplicate_word_limit: resolve(a.duplicate_limit, cfg, "duplicate-limit", d.duplicate_word_limit)?,
    };
    require_range("lang-prob-threshold", clean.lang_prob_threshold, 0.0, 1.0)?;
    require_range("uppercase-limit", clean.uppercase_frac_limit, 0.0, 1.0)?;
    require_range("numeric-limit", clean.numeric_frac_limit, 0.0, 1.0)?;
    if clean.max_words < clean.min_words {
        return Err(Error::InvalidConfig("max-words < min-words".into()));
    }
    let fd = ForestConfig::default();
    let forest = ForestConfig {
        n_trees: resolve(a.n_trees, cfg, "n-trees", fd.n_trees)?,
        subsample_size: resolve(a.subsample_size, cfg, "subsample-size", fd.subsample_size)?,
        seed: 0, // filled by the caller
    };
    if forest.n_trees == 0 || forest.subsample_size < 2 {
        return Err(Error::InvalidConfig(
            "n-trees must be >= 1 and subsample-size >= 2".into(),
        ));
    }
    Ok((clean, forest))
}

#[derive(Serialize)]
struct CleanRunReport<'a> {
    config: &'a CleaningConfig,
    forest: &'a ForestConfig,
    seed: u64,
    report: &'a Report,
}

/// Two streaming passes: fit the forest on every page's features, then
/// score and filter record-at-a-time. Only the 5-float feature vectors
/// are materialized.
fn cmd_clean(a: &CleanArgs, cfg: &FileConfig, seed: u64) -> Result<()> {
    let (clean_cfg, mut forest_cfg) = build_cleaning_config(a, cfg)?;
    forest_cfg.seed = seed;
    let blocklist = match &a.blocklist {
        Some(path) => Blocklist::load(path)?,
        None => Blocklist::default(),
    };

    let segmenter = Segmenter::default();
    let mut report = Report::default();
    for id in PAGE_RULE_IDS {
        report.page_rule_counts.insert(id.to_string(), 0);
    }
    for id in SENTENCE_RULE_IDS {
        report.sentence_rule_counts.insert(id.to_string(), 0);
    }

    // pass 1: features
    let mut points: Vec<[f64; 5]> = Vec::new();
    for (lineno, line) in open_lines(&a.input)?.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let page = parse_page(&line, lineno)?;
        report.pages_in += 1;
        report.tokens_in += page.text.split_whitespace().count() as u64;
        let sents = segmenter.split_sentences(&page.text);
        report.sentences_in += sents.len() as u64;
        if sents.is_empty() {
            report.pages_without_sentences += 1;
        } else if clean_cfg.anomaly_enabled {
            points.push(compute_features(&sents, &page.text)?.as_array());
        }
    }

    let forest = if clean_cfg.anomaly_enabled && points.len() >= 2 {
        let fc = ForestConfig {
            subsample_size: forest_cfg.subsample_size.min(points.len()),
            ..forest_cfg
        };
        Some(IsolationForest::fit(&points, fc)?)
    } else {
        None
    };
    drop(points);

    // pass 2: score + filter + write
    let mut out = BufWriter::new(File::create(&a.out)?);
    for (lineno, line) in open_lines(&a.input)?.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let page = parse_page(&line, lineno)?;
        let sents = segmenter.split_sentences(&page.text);
        if sents.is_empty() {
            continue;
        }
        let score = match &forest {
            Some(f) => Some(f.decision_score(&compute_features(&sents, &page.text)?.as_array())),
            None if clean_cfg.anomaly_enabled => Some(0.5),
            None => None,
        };
        let verdict = clean_page(&page, score, &clean_cfg, &blocklist)?;
        if let Some(rule) = verdict.rule_id {
            *report.page_rule_counts.get_mut(&rule).unwrap() += 1;
            continue;
        }
        let mut kept = Vec::new();
        for s in sents {
            let v = clean_sentence(&s, &clean_cfg);
            if let Some(rule) = v.rule_id {
                *report.sentence_rule_counts.get_mut(&rule).unwrap() += 1;
            } else {
                kept.push(s.text);
            }
        }
        if kept.len() < clean_cfg.min_sentences_per_page {
            report.pages_dropped_finalize += 1;
            continue;
        }
        report.pages_out += 1;
        report.sentences_out += kept.len() as u64;
        report.tokens_out += kept
            .iter()
            .map(|s| s.split_whitespace().count() as u64)
            .sum::<u64>();
        let record = Page {
            sentences: Some(kept),
            ..page
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;

    if let Some(report_path) = &a.report {
        let run_report = CleanRunReport {
            config: &clean_cfg,
            forest: &forest_cfg,
            seed,
            report: &report,
        };
        let mut w = BufWriter::new(File::create(report_path)?);
        serde_json::to_writer_pretty(&mut w, &run_report)?;
        w.flush()?;
    }
    Ok(())
}

fn cmd_features(a: &FeaturesArgs) -> Result<()> {
    let segmenter = Segmenter::default();
    let mut out = BufWriter::new(File::create(&a.out)?);
    for (lineno, line) in open_lines(&a.input)?.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let page = parse_page(&line, lineno)?;
        let sents = segmenter.split_sentences(&page.text);
        if sents.is_empty() {
            continue;
        }
        let f = compute_features(&sents, &page.text)?.as_array();
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            page.id, f[0], f[1], f[2], f[3], f[4]
        )?;
    }
    out.flush()?;
    Ok(())
}

fn read_feature_tsv(path: &Path) -> Result<Vec<(String, [f64; 5])>> {
    let mut out = Vec::new();
    for (lineno, line) in open_lines(path)?.enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let parts: Vec<&str> = t.split('\t').collect();
        if parts.len() != 6 {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: "expected `page_id\\tf1..f5`".into(),
            });
        }
        let mut f = [0.0; 5];
        for (i, p) in parts[1..].iter().enumerate() {
            f[i] = p.parse().map_err(|e| Error::Parse {
                line: lineno + 1,
                msg: format!("bad feature: {e}"),
            })?;
        }
        out.push((parts[0].to_string(), f));
    }
    Ok(out)
}

fn cmd_fit_forest(a: &FitForestArgs, cfg: &FileConfig, seed: u64) -> Result<()> {
    let d = ForestConfig::default();
    let points: Vec<[f64; 5]> = read_feature_tsv(&a.features)?
        .into_iter()
        .map(|(_, f)| f)
        .collect();
    if points.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: points.len(),
        });
    }
    let forest_cfg = ForestConfig {
        n_trees: resolve(a.n_trees, cfg, "n-trees", d.n_trees)?,
        subsample_size: resolve(a.subsample_size, cfg, "subsample-size", d.subsample_size)?
            .min(points.len()),
        seed,
    };
    let forest = IsolationForest::fit(&points, forest_cfg)?;
    forest.save(&a.out)
}

fn cmd_score(a: &ScoreArgs) -> Result<()> {
    let forest = IsolationForest::load(&a.forest)?;
    let rows = read_feature_tsv(&a.features)?;
    let mut out = BufWriter::new(File::create(&a.out)?);
    for (id, f) in rows {
        let s = forest.anomaly_score(&f);
        writeln!(out, "{id}\t{s}\t{}", 0.5 - s)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct TokenCountRecord<'a> {
    id: &'a str,
    n_tokens: usize,
}

fn cmd_tokenize(a: &TokenizeArgs) -> Result<()> {
    let vocab = Vocab::load(&a.vocab)?;
    let mut out = BufWriter::new(File::create(&a.out)?);
    for (lineno, line) in open_lines(&a.input)?.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let page = parse_page(&line, lineno)?;
        let n_tokens = match &page.sentences {
            Some(sents) => sents.iter().map(|s| encode_unigram(&vocab, s).len()).sum(),
            None => encode_unigram(&vocab, &page.text).len(),
        };
        serde_json::to_writer(
            &mut out,
            &TokenCountRecord {
                id: &page.id,
                n_tokens,
            },
        )?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ExampleRecord {
    doc_id: String,
    epoch: u64,
    encoder_ids: Vec<u32>,
    decoder_input_ids: Vec<u32>,
    target_ids: Vec<u32>,
}

#[derive(Serialize)]
struct NoiseStatsReport {
    mask_fraction: f64,
    mean_span_draw: f64,
    clamp_rate: f64,
    truncation_rate: f64,
    examples: u64,
    skipped_documents: u64,
    counters: NoisingStats,
}

fn cmd_noise(a: &NoiseArgs, cfg: &FileConfig, seed: u64) -> Result<()> {
    let d = NoisingConfig::default();
    let noise_cfg = NoisingConfig {
        mask_ratio: resolve(a.mask_ratio, cfg, "mask-ratio", d.mask_ratio)?,
        poisson_lambda: resolve(a.poisson_lambda, cfg, "poisson-lambda", d.poisson_lambda)?,
        encoder_len: resolve(a.encoder_len, cfg, "encoder-len", d.encoder_len)?,
        decoder_len: resolve(a.decoder_len, cfg, "decoder-len", d.decoder_len)?,
        global_seed: seed,
    };
    if !(0.0..1.0).contains(&noise_cfg.mask_ratio) || noise_cfg.mask_ratio <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "mask-ratio = {} outside (0, 1)",
            noise_cfg.mask_ratio
        )));
    }
    if noise_cfg.poisson_lambda <= 0.0 {
        return Err(Error::InvalidConfig("poisson-lambda must be positive".into()));
    }
    if noise_cfg.encoder_len > noise_cfg.decoder_len || noise_cfg.decoder_len < 3 {
        return Err(Error::InvalidConfig(
            "need encoder-len <= decoder-len and decoder-len >= 3".into(),
        ));
    }
    let vocab = Vocab::load(&a.vocab)?;
    let segmenter = Segmenter::default();
    let mut out = BufWriter::new(File::create(&a.out)?);
    let mut stats = NoisingStats::default();
    let mut skipped_documents = 0u64;
    for (lineno, line) in open_lines(&a.input)?.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let page = parse_page(&line, lineno)?;
        let sentences: Vec<String> = match page.sentences {
            Some(s) => s,
            None => segmenter
                .split_sentences(&page.text)
                .into_iter()
                .map(|s| s.text)
                .collect(),
        };
        let token_sents: Vec<Vec<u32>> = sentences
            .iter()
            .map(|s| encode_unigram(&vocab, s))
            .collect();
        match make_example(&page.id, &token_sents, &noise_cfg, a.epoch, &mut stats) {
            Ok(example) => {
                serde_json::to_writer(
                    &mut out,
                    &ExampleRecord {
                        doc_id: page.id,
                        epoch: a.epoch,
                        encoder_ids: example.encoder_ids,
                        decoder_input_ids: example.decoder_input_ids,
                        target_ids: example.target_ids,
                    },
                )?;
                out.write_all(b"\n")?;
            }
            Err(Error::EmptyDocument) => skipped_documents += 1,
            Err(e) => return Err(e),
        }
    }
    out.flush()?;
    if let Some(stats_path) = &a.stats {
        let report = NoiseStatsReport {
            mask_fraction: stats.removed_fraction(),
            mean_span_draw: stats.mean_span_draw(),
            clamp_rate: stats.clamp_rate(),
            truncation_rate: stats.truncation_rate(),
            examples: stats.examples,
            skipped_documents,
            counters: stats,
        };
        let mut w = BufWriter::new(File::create(stats_path)?);
        serde_json::to_writer_pretty(&mut w, &report)?;
        w.flush()?;
    }
    Ok(())
}

fn cmd_analyze_tokenizers(a: &AnalyzeTokenizersArgs) -> Result<()> {
    let counts = analysis::load_counts_tsv(&a.counts)?;
    let reports = analysis::tokenizer_reports(&counts, &a.reference)?;
    print!("{}", analysis::render_tokenizer_table(&reports));
    if let Some(path) = &a.json {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, &reports)?;
        w.flush()?;
    }
    Ok(())
}

fn cmd_budget(a: &BudgetArgs) -> Result<()> {
    if a.params == 0 || a.batch == 0 || a.ctx == 0 || a.corpus_tokens == 0 {
        return Err(Error::InvalidConfig(
            "params, batch, ctx, corpus-tokens must be positive".into(),
        ));
    }
    let report = analysis::compute_budget(a.params, a.steps, a.batch, a.ctx, a.corpus_tokens);
    let json = serde_json::to_string_pretty(&report)?;
    println!("{json}");
    if let Some(path) = &a.out {
        std::fs::write(path, json)?;
    }
    Ok(())
}

fn cmd_intersections(a: &IntersectionsArgs) -> Result<()> {
    let mut datasets = Vec::new();
    for spec in &a.datasets {
        let (name, path) = spec.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("--dataset {spec:?} is not `name=path`"))
        })?;
        let mut records = Vec::new();
        for line in open_lines(Path::new(path))? {
            records.push(line?);
        }
        datasets.push((name.to_string(), records));
    }
    let matrix = analysis::split_intersections(&datasets);
    print!("{}", analysis::render_intersection_table(&matrix));
    if let Some(path) = &a.json {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, &matrix)?;
        w.flush()?;
    }
    Ok(())
}

fn cmd_enlarge(a: &EnlargeArgs, seed: u64) -> Result<()> {
    let donor = TensorManifest::load(&a.donor)?;
    let names: Vec<String> = donor.names().map(String::from).collect();
    let plan = plan_enlargement(a.src_layers, a.tgt_layers, &names, a.init_std)?;
    if a.dry_run {
        println!("{}", serde_json::to_string_pretty(&plan)?);
        return Ok(());
    }
    let out_path = a.out.as_ref().ok_or_else(|| {
        Error::InvalidConfig("--out is required unless --dry-run is given".into())
    })?;
    let enlarged = apply_enlargement(&donor, &plan, seed)?;
    enlarged.save(out_path)
}
