//! Integration tests driving the `webcorpus` binary: exit codes,
//! file round trips, and byte-identical output across worker counts.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_webcorpus"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn webcorpus")
}

fn write_corpus(path: &Path, n: usize) {
    let words = ["ev", "yol", "deniz", "kitap", "okul", "bahçe", "şehir", "kapı"];
    let mut out = String::new();
    for i in 0..n {
        // vary sentence count and length so page features spread out
        let n_sents = 5 + (i * 7) % 5;
        let text: String = (0..n_sents)
            .map(|j| {
                let len = 3 + (i + 5 * j) % 9;
                let s: Vec<&str> = (0..len).map(|k| words[(i + 3 * j + k) % words.len()]).collect();
                format!("Sayfa {i} cümle {j} {} oldu.", s.join(" "))
            })
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(&format!(
            "{{\"id\":\"p{i}\",\"text\":{},\"lang_prob\":0.95}}\n",
            serde_json::to_string(&text).unwrap()
        ));
    }
    std::fs::write(path, out).unwrap();
}

fn write_vocab(path: &Path) {
    let mut out = String::new();
    for w in ["ev", "yol", "deniz", "kitap", "okul", "bahçe", "şehir", "kapı", "Sayfa", "cümle", "oldu"] {
        out.push_str(&format!("▁{w}\t-3.0\n"));
    }
    for c in "abcçdefgğhıijklmnoöprsştuüvyz0123456789.▁SC".chars() {
        out.push_str(&format!("{c}\t-9.0\n"));
    }
    std::fs::write(path, out).unwrap();
}

#[test]
fn exit_codes() {
    // 0: success (help)
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    // 1: validation error, and the output file must not be created
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    write_corpus(&corpus, 5);
    let out_path = dir.path().join("out.jsonl");
    let out = run(&[
        "clean",
        "--in",
        corpus.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
        "--lang-prob-threshold",
        "1.5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out_path.exists(), "validation failure left a partial output");
    // 2: I/O error
    let out = run(&["clean", "--in", "/nonexistent.jsonl", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    write_corpus(&corpus, 8);
    let config = dir.path().join("run.conf");
    std::fs::write(&config, "# run settings\nmin-sentences = 100\nanomaly-enabled = false\n").unwrap();

    // config alone: every page is dropped at finalization
    let out1 = dir.path().join("o1.jsonl");
    let st = run(&[
        "--config", config.to_str().unwrap(),
        "clean", "--in", corpus.to_str().unwrap(), "--out", out1.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out1).unwrap().lines().count(), 0);

    // flag override restores the default threshold
    let out2 = dir.path().join("o2.jsonl");
    let st = run(&[
        "--config", config.to_str().unwrap(),
        "clean", "--in", corpus.to_str().unwrap(), "--out", out2.to_str().unwrap(),
        "--min-sentences", "5",
    ]);
    assert_eq!(st.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out2).unwrap().lines().count(), 8);
}

#[test]
fn clean_noise_round_trip_and_worker_independence() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    let vocab = dir.path().join("v.tsv");
    write_corpus(&corpus, 120);
    write_vocab(&vocab);

    let mut outputs = Vec::new();
    for workers in ["1", "4", "8"] {
        let cleaned = dir.path().join(format!("clean{workers}.jsonl"));
        let examples = dir.path().join(format!("ex{workers}.jsonl"));
        let report = dir.path().join(format!("rep{workers}.json"));
        let st = run(&[
            "--seed", "42", "--workers", workers,
            "clean", "--in", corpus.to_str().unwrap(), "--out", cleaned.to_str().unwrap(),
            "--report", report.to_str().unwrap(),
        ]);
        assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
        let st = run(&[
            "--seed", "42", "--workers", workers,
            "noise", "--in", cleaned.to_str().unwrap(), "--vocab", vocab.to_str().unwrap(),
            "--out", examples.to_str().unwrap(), "--epoch", "2",
        ]);
        assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
        outputs.push((std::fs::read(&cleaned).unwrap(), std::fs::read(&examples).unwrap()));
    }
    assert!(!outputs[0].0.is_empty());
    for w in 1..outputs.len() {
        assert_eq!(outputs[0].0, outputs[w].0, "clean bytes differ across workers");
        assert_eq!(outputs[0].1, outputs[w].1, "noise bytes differ across workers");
    }

    // the report carries the effective config
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("rep1.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["min_sentences_per_page"], 5);
    assert_eq!(report["seed"], 42);
    assert!(report["report"]["pages_in"].as_u64().unwrap() == 120);
}

#[test]
fn feature_forest_score_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    write_corpus(&corpus, 30);
    let feats = dir.path().join("f.tsv");
    let forest = dir.path().join("forest.json");
    let scores = dir.path().join("s.tsv");
    assert!(run(&["features", "--in", corpus.to_str().unwrap(), "--out", feats.to_str().unwrap()]).status.success());
    assert!(run(&["--seed", "9", "fit-forest", "--features", feats.to_str().unwrap(), "--out", forest.to_str().unwrap()]).status.success());
    assert!(run(&["score", "--forest", forest.to_str().unwrap(), "--features", feats.to_str().unwrap(), "--out", scores.to_str().unwrap()]).status.success());
    let scored = std::fs::read_to_string(&scores).unwrap();
    assert_eq!(scored.lines().count(), 30);
    for line in scored.lines() {
        let cols: Vec<&str> = line.split('\t').collect();
        let s: f64 = cols[1].parse().unwrap();
        let d: f64 = cols[2].parse().unwrap();
        assert!(s > 0.0 && s <= 1.0);
        assert!((0.5 - s - d).abs() < 1e-12);
    }
}

#[test]
fn enlarge_dry_run_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let donor_path = dir.path().join("donor.bin");
    let mut donor = webcorpus::manifest::TensorManifest::default();
    for part in ["encoder", "decoder"] {
        for layer in 1..=2 {
            donor
                .push(&format!("{part}.layer.{layer}.w"), &[2, 2], &[1.0, 2.0, 3.0, 4.0])
                .unwrap();
        }
    }
    donor.save(&donor_path).unwrap();

    let out_path = dir.path().join("big.bin");
    let st = run(&[
        "enlarge", "--donor", donor_path.to_str().unwrap(),
        "--src-layers", "2", "--tgt-layers", "4", "--dry-run",
    ]);
    assert!(st.status.success());
    assert!(!out_path.exists());
    let plan: serde_json::Value = serde_json::from_slice(&st.stdout).unwrap();
    assert_eq!(plan["mappings"].as_array().unwrap().len(), 8);

    let st = run(&[
        "--seed", "3",
        "enlarge", "--donor", donor_path.to_str().unwrap(), "--out", out_path.to_str().unwrap(),
        "--src-layers", "2", "--tgt-layers", "4",
    ]);
    assert!(st.status.success());
    let big = webcorpus::manifest::TensorManifest::load(&out_path).unwrap();
    assert_eq!(big.index.len(), 8);
    assert_eq!(
        big.bytes_of("encoder.layer.3.w").unwrap(),
        donor.bytes_of("encoder.layer.2.w").unwrap()
    );
}
