//! Subword tokenization: unigram-LM inference (Viterbi) over a
//! piece/log-probability vocabulary, plus a trivial whitespace
//! tokenizer for tests.
//!
//! Whitespace is replaced by the word-boundary meta-symbol `▁` prefixed
//! to each word; the returned segmentation maximizes the summed piece
//! log-probabilities. Ties break toward fewer tokens, then the
//! lexicographically smaller first piece.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::{Error, Result};

pub const PAD_ID: u32 = 0;
pub const UNK_ID: u32 = 1;
pub const BOS_ID: u32 = 2;
pub const EOS_ID: u32 = 3;
pub const MASK_ID: u32 = 4;
pub const NUM_SPECIALS: u32 = 5;

pub const BOUNDARY: char = '▁';

/// Log-probability charged per character covered by `<unk>`.
pub const UNK_LOG_PROB: f64 = -20.0;

const SPECIAL_PIECES: [&str; 5] = ["<pad>", "<unk>", "<s>", "</s>", "<mask>"];

/// Immutable piece vocabulary. Ids are dense; ids 0-4 are the
/// specials, real pieces start at 5 in file order.
#[derive(Debug, Clone)]
pub struct Vocab {
    pieces: Vec<(String, f64)>,
    piece_to_id: HashMap<String, u32>,
    max_piece_chars: usize,
}

impl Vocab {
    /// Builds a vocabulary from `(piece, log_prob)` entries; specials
    /// are prepended automatically.
    pub fn from_entries(entries: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let mut pieces: Vec<(String, f64)> = SPECIAL_PIECES
            .iter()
            .map(|p| (p.to_string(), 0.0))
            .collect();
        let mut piece_to_id = HashMap::new();
        for (i, (p, _)) in pieces.iter().enumerate() {
            piece_to_id.insert(p.clone(), i as u32);
        }
        let mut max_piece_chars = 1;
        for (piece, log_prob) in entries {
            if piece.is_empty() {
                return Err(Error::Parse {
                    line: 0,
                    msg: "empty piece".into(),
                });
            }
            if piece_to_id.contains_key(&piece) {
                return Err(Error::DuplicatePiece(piece));
            }
            let id = pieces.len() as u32;
            max_piece_chars = max_piece_chars.max(piece.chars().count());
            piece_to_id.insert(piece.clone(), id);
            pieces.push((piece, log_prob));
        }
        Ok(Vocab {
            pieces,
            piece_to_id,
            max_piece_chars,
        })
    }

    /// Loads a TSV vocabulary: one `piece \t log_prob` per line, UTF-8,
    /// `#` comments and blank lines allowed.
    pub fn load(path: &Path) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let mut entries = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim_end_matches(['\r', '\n']);
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (piece, lp) = trimmed.split_once('\t').ok_or_else(|| Error::Parse {
                line: lineno + 1,
                msg: "expected `piece\\tlog_prob`".into(),
            })?;
            let log_prob: f64 = lp.trim().parse().map_err(|e| Error::Parse {
                line: lineno + 1,
                msg: format!("bad log_prob: {e}"),
            })?;
            if log_prob > 0.0 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("log_prob {log_prob} is positive"),
                });
            }
            entries.push((piece.to_string(), log_prob));
        }
        Vocab::from_entries(entries)
    }

    pub fn size(&self) -> usize {
        self.pieces.len()
    }

    pub fn piece(&self, id: u32) -> Result<&str> {
        self.pieces
            .get(id as usize)
            .map(|(p, _)| p.as_str())
            .ok_or(Error::UnknownId(id))
    }

    pub fn id(&self, piece: &str) -> Option<u32> {
        self.piece_to_id.get(piece).copied()
    }

    fn lookup(&self, piece: &str) -> Option<(u32, f64)> {
        self.piece_to_id
            .get(piece)
            .map(|&id| (id, self.pieces[id as usize].1))
    }
}

pub fn is_special(id: u32) -> bool {
    id < NUM_SPECIALS
}

/// Applies the `▁` word-boundary transform: each whitespace-separated
/// word is prefixed with `▁` and the words are concatenated.
fn boundary_transform(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 8);
    for word in text.split_whitespace() {
        out.push(BOUNDARY);
        out.push_str(word);
    }
    out
}

#[derive(Clone, Copy)]
struct Cell {
    log_prob: f64,
    tokens: u32,
    // first piece of the best suffix segmentation
    piece_id: u32,
    piece_chars: usize,
}

/// Viterbi segmentation maximizing summed log-probabilities.
/// Characters no piece covers are emitted as `<unk>` at
/// [`UNK_LOG_PROB`] each.
pub fn encode_unigram(vocab: &Vocab, text: &str) -> Vec<u32> {
    let chars: Vec<char> = boundary_transform(text).chars().collect();
    let n = chars.len();
    if n == 0 {
        return Vec::new();
    }
    // best[i] = best segmentation of chars[i..]
    let mut best: Vec<Option<Cell>> = vec![None; n + 1];
    best[n] = Some(Cell {
        log_prob: 0.0,
        tokens: 0,
        piece_id: u32::MAX,
        piece_chars: 0,
    });
    for i in (0..n).rev() {
        let mut chosen: Option<Cell> = None;
        let mut consider = |cand: Cell, cand_piece: &str, vocab: &Vocab| {
            let better = match chosen {
                None => true,
                Some(cur) => {
                    let cur_piece = vocab.pieces[cur.piece_id as usize].0.as_str();
                    (cand.log_prob, std::cmp::Reverse(cand.tokens), cur_piece)
                        > (cur.log_prob, std::cmp::Reverse(cur.tokens), cand_piece)
                }
            };
            if better {
                chosen = Some(cand);
            }
        };
        let max_len = vocab.max_piece_chars.min(n - i);
        let mut buf = String::new();
        for len in 1..=max_len {
            buf.clear();
            buf.extend(&chars[i..i + len]);
            if let Some((id, lp)) = vocab.lookup(&buf) {
                if let Some(next) = best[i + len] {
                    let cand = Cell {
                        log_prob: lp + next.log_prob,
                        tokens: next.tokens + 1,
                        piece_id: id,
                        piece_chars: len,
                    };
                    consider(cand, &vocab.pieces[id as usize].0.clone(), vocab);
                }
            }
        }
        // single-character unk fallback keeps the lattice total
        if let Some(next) = best[i + 1] {
            let cand = Cell {
                log_prob: UNK_LOG_PROB + next.log_prob,
                tokens: next.tokens + 1,
                piece_id: UNK_ID,
                piece_chars: 1,
            };
            consider(cand, SPECIAL_PIECES[UNK_ID as usize], vocab);
        }
        best[i] = chosen;
    }
    let mut ids = Vec::new();
    let mut i = 0;
    while i < n {
        let cell = best[i].expect("lattice is total");
        ids.push(cell.piece_id);
        i += cell.piece_chars;
    }
    ids
}

/// Inverse of [`encode_unigram`] up to whitespace normalization:
/// specials are dropped, `▁` maps back to a space.
pub fn decode(vocab: &Vocab, ids: &[u32]) -> Result<String> {
    let mut out = String::new();
    for &id in ids {
        let piece = vocab.piece(id)?;
        if is_special(id) {
            continue;
        }
        for c in piece.chars() {
            out.push(if c == BOUNDARY { ' ' } else { c });
        }
    }
    Ok(out.trim_start().to_string())
}

/// Test tokenizer: hashes each whitespace token into a fixed id space
/// above the specials.
pub fn encode_whitespace(text: &str) -> Vec<u32> {
    const TEST_ID_SPACE: u64 = 32_000;
    text.split_whitespace()
        .map(|w| NUM_SPECIALS + (crate::util::hash_bytes(0, w.as_bytes()) % TEST_ID_SPACE) as u32)
        .collect()
}
