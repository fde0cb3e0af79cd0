//! End-to-end corpus cleaning on a small synthetic corpus: page
//! filters, the 12 sentence rules, and finalization, with a rule-level
//! rejection report.

use webcorpus::cleaner::{run_pipeline, Blocklist, CleaningConfig, Page};
use webcorpus::isoforest::ForestConfig;

fn page(id: &str, text: &str, lang_prob: f64) -> Page {
    Page {
        id: id.to_string(),
        text: text.to_string(),
        lang_prob: Some(lang_prob),
        sentences: None,
    }
}

fn main() -> webcorpus::Result<()> {
    let good_text = |i: usize| {
        (0..6)
            .map(|j| format!("Sayfa {i} için gayet düzgün {j} numaralı cümle burada durmaktadır."))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut pages: Vec<Page> = (0..40).map(|i| page(&format!("p{i}"), &good_text(i), 0.95)).collect();
    // a placeholder page, a non-Turkish page, and a page with one spammy sentence
    pages.push(page("junk-lorem", "Lorem ipsum dolor sit amet consectetur.", 0.95));
    pages.push(page("junk-lang", &good_text(99), 0.40));
    pages.push(page(
        "mixed",
        &format!("{} bedava bonus bedava bonus bedava bonus.", good_text(7)),
        0.95,
    ));

    // the anomaly stage needs a realistically large corpus to be
    // meaningful; see the anomaly_scores example for that stage
    let config = CleaningConfig { anomaly_enabled: false, ..CleaningConfig::default() };
    let (kept, report) = run_pipeline(
        pages,
        &config,
        ForestConfig { seed: 42, ..ForestConfig::default() },
        &Blocklist::new(["casino"]),
    )?;

    println!("pages: {} in, {} out", report.pages_in, report.pages_out);
    println!("sentences: {} in, {} out", report.sentences_in, report.sentences_out);
    for (rule, n) in report.page_rule_counts.iter().filter(|(_, n)| **n > 0) {
        println!("  page rule {rule:<14} removed {n}");
    }
    for (rule, n) in report.sentence_rule_counts.iter().filter(|(_, n)| **n > 0) {
        println!("  sentence rule {rule:<14} removed {n}");
    }
    let mixed = kept.iter().find(|p| p.id == "mixed").expect("mixed page survives");
    println!(
        "page 'mixed' kept with {} of 7 sentences",
        mixed.sentences.as_ref().unwrap().len()
    );
    Ok(())
}
