//! Unigram-LM subword inference: Viterbi segmentation over a small
//! piece vocabulary, with the `▁` word-boundary convention.

use webcorpus::tokenizer::{decode, encode_unigram, Vocab};

fn main() -> webcorpus::Result<()> {
    let entries = [
        ("▁merhaba", -4.0),
        ("▁dünya", -4.5),
        ("▁merha", -6.0),
        ("ba", -3.0),
        ("▁", -2.0),
        ("m", -8.0),
        ("e", -8.0),
        ("r", -8.0),
        ("h", -8.0),
        ("a", -8.0),
        ("d", -8.0),
        ("ü", -8.0),
        ("n", -8.0),
        ("y", -8.0),
    ];
    let vocab = Vocab::from_entries(entries.iter().map(|(p, lp)| (p.to_string(), *lp)))?;

    for text in ["merhaba dünya", "merhaba", "qqq"] {
        let ids = encode_unigram(&vocab, text);
        let pieces: Vec<&str> = ids.iter().map(|&id| vocab.piece(id).unwrap()).collect();
        println!("{text:?} -> {pieces:?} -> {:?}", decode(&vocab, &ids)?);
    }
    Ok(())
}
