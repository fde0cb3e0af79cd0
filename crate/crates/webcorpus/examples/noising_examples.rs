//! Denoising example generation: chunk selection, sentence
//! permutation, and Poisson span infilling, with masking telemetry.

use webcorpus::noising::{make_example, NoisingConfig, NoisingStats};
use webcorpus::tokenizer::encode_whitespace;

fn main() -> webcorpus::Result<()> {
    let config = NoisingConfig { global_seed: 42, ..NoisingConfig::default() };

    // a document of 30 sentences, 20 words each
    let sentences: Vec<Vec<u32>> = (0..30)
        .map(|i| {
            let text: String = (0..20).map(|j| format!("w{i}x{j} ")).collect();
            encode_whitespace(&text)
        })
        .collect();

    let mut stats = NoisingStats::default();
    for epoch in 0..3 {
        let ex = make_example("doc-0", &sentences, &config, epoch, &mut stats)?;
        println!(
            "epoch {epoch}: encoder {} real tokens, target {} tokens, first ids {:?}",
            ex.n_real_encoder,
            ex.n_real_target,
            &ex.encoder_ids[..8]
        );
    }
    println!("mask fraction:  {:.3} (target 0.30 of each chunk)", stats.removed_fraction());
    println!("mean span draw: {:.2} (Poisson lambda 3.5)", stats.mean_span_draw());
    println!("clamp rate:     {:.3}", stats.clamp_rate());
    Ok(())
}
