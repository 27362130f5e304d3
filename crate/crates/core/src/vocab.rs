//! Frequency-ranked vocabulary with UNK/PAD specials, and sequence encoding.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::fnv1a64_parts;
use crate::ingest::{MethodSequence, RawMethod, WindowSlot};
use crate::scalar::Scalar;

/// Frequency-ranked token table. Rank slots come first (most frequent first),
/// then UNK, then PAD; the total encoding dimension is `size_base + 2`.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    entries: Vec<String>,
    index: HashMap<String, usize>,
    coverage: f64,
}

impl Vocabulary {
    pub fn from_entries(entries: Vec<String>, coverage: f64) -> Self {
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, lexeme)| (lexeme.clone(), i))
            .collect();
        Vocabulary {
            entries,
            index,
            coverage,
        }
    }

    /// Retained entries in rank order.
    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    /// Number of retained lexemes (excludes UNK and PAD).
    pub fn size_base(&self) -> usize {
        self.entries.len()
    }

    pub fn unk_index(&self) -> usize {
        self.entries.len()
    }

    pub fn pad_index(&self) -> usize {
        self.entries.len() + 1
    }

    /// Total encoding dimension: retained entries plus UNK and PAD.
    pub fn dim(&self) -> usize {
        self.entries.len() + 2
    }

    /// Fraction of corpus token occurrences covered by the retained entries.
    pub fn coverage(&self) -> f64 {
        self.coverage
    }

    /// Rank of a lexeme, or the UNK slot when it was not retained.
    pub fn index_of(&self, lexeme: &str) -> usize {
        self.index.get(lexeme).copied().unwrap_or(self.unk_index())
    }

    /// Encoding slot of a window entry; padding maps to the PAD slot.
    pub fn slot_of(&self, slot: &WindowSlot) -> usize {
        match slot {
            WindowSlot::Token(t) => self.index_of(&t.lexeme),
            WindowSlot::Pad => self.pad_index(),
        }
    }

    /// Indicator vector with a single 1 at the entry's encoding slot.
    pub fn one_hot<S: Scalar>(&self, slot: &WindowSlot) -> Vec<S> {
        let mut v = vec![S::zero(); self.dim()];
        v[self.slot_of(slot)] = S::one();
        v
    }

    /// Stable fingerprint of the retained entries, used to tie model
    /// checkpoints to the vocabulary they were trained with.
    pub fn fingerprint(&self) -> String {
        format!(
            "{:016x}",
            fnv1a64_parts(self.entries.iter().map(|e| e.as_str()))
        )
    }
}

/// Builds the vocabulary of the `size` most frequent lexemes across all
/// lexical classes of the corpus, ties broken lexicographically.
pub fn build_vocabulary(corpus: &[RawMethod], size: usize) -> Result<Vocabulary> {
    if size < 1 {
        return Err(Error::InvalidVocabSize(size));
    }
    let mut counts: HashMap<&str, u64> = HashMap::new();
    let mut total: u64 = 0;
    for method in corpus {
        for token in &method.tokens {
            *counts.entry(token.lexeme.as_str()).or_insert(0) += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::EmptyCorpus);
    }

    let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(size);

    let retained: u64 = ranked.iter().map(|(_, c)| c).sum();
    let entries: Vec<String> = ranked.into_iter().map(|(l, _)| l.to_string()).collect();
    Ok(Vocabulary::from_entries(
        entries,
        retained as f64 / total as f64,
    ))
}

/// A window encoded as vocabulary indices, ready for the model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedSequence {
    pub method_id: String,
    pub label: u8,
    pub indices: Vec<u32>,
}

/// Encodes a token window into vocabulary indices; position `i` holds the
/// encoding slot of window entry `i`.
pub fn encode(seq: &MethodSequence, vocab: &Vocabulary, label: u8) -> EncodedSequence {
    debug_assert!(label <= 1);
    EncodedSequence {
        method_id: seq.method_id.clone(),
        label,
        indices: seq
            .window
            .iter()
            .map(|slot| vocab.slot_of(slot) as u32)
            .collect(),
    }
}
