//! Training-budget arithmetic and tokenizer-efficiency comparison.

use webcorpus::analysis;

fn main() -> webcorpus::Result<()> {
    // a 387.6M-parameter encoder-decoder trained 2.7M steps at batch
    // 256 and context 1024 on an 84B-token corpus
    let report = analysis::compute_budget(387_600_000, 2_700_000, 256, 1024, 83_886_080_000);
    println!("tokens seen:       {}", report.tokens_seen);
    println!("epochs:            {:.1}", report.epochs);
    println!("chinchilla ratio:  {:.2}x optimal", report.chinchilla_ratio);
    println!("optimal steps:     {:.0}", report.optimal_steps);

    // how many tokens each tokenizer spends on the same text
    let counts = vec![
        analysis::TokenizerCounts { name: "dedicated-32k".into(), vocab_size: 32_000, total_tokens: 11_970_000 },
        analysis::TokenizerCounts { name: "multilingual-250k".into(), vocab_size: 250_054, total_tokens: 10_000_000 },
    ];
    let reports = analysis::tokenizer_reports(&counts, "dedicated-32k")?;
    print!("{}", analysis::render_tokenizer_table(&reports));
    Ok(())
}
