//! Sequence-side representation: a byte-level BPE tokenizer and skip-gram
//! embeddings over its symbols.

mod bpe;
mod sgns;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use bpe::{chunks, decode, encode, train_bpe, BpeFile, BpeVocab, Merge, BASE_ALPHABET};
pub use sgns::{pair_gradients, pair_loss, train_sgns, EmbeddingTable, PairGradients, SgnsConfig};

use crate::graph::GraphNode;

pub const DEFAULT_VOCAB_SIZE: usize = 2048;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    pub unit_id: String,
    pub tokens: Vec<u32>,
    pub surface: Vec<String>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TokenError {
    #[error("corpus contains no text")]
    EmptyCorpus,
    #[error("vocabulary size {requested} is below the base alphabet ({minimum})")]
    VocabTooSmall { requested: usize, minimum: usize },
    #[error("corpus has {tokens} tokens, need at least {needed}")]
    InsufficientCorpus { tokens: usize, needed: usize },
    #[error("token id {id} outside vocabulary of {vocab_size}")]
    TokenOutOfRange { id: u32, vocab_size: usize },
    #[error("merge at rank {rank} refers to an unknown symbol or repeats a pair")]
    InvalidMerge { rank: usize },
    #[error("empty token sequence")]
    EmptySequence,
    #[error("training loss became non-finite")]
    NonFiniteLoss,
}

/// Mean of the input vectors of the sequence's tokens.
pub fn embed_mean(seq: &TokenSequence, table: &EmbeddingTable) -> Result<Vec<f64>, TokenError> {
    embed_ids(&seq.tokens, table)
}

fn embed_ids(ids: &[u32], table: &EmbeddingTable) -> Result<Vec<f64>, TokenError> {
    if ids.is_empty() {
        return Err(TokenError::EmptySequence);
    }
    let mut acc = vec![0.0; table.dim()];
    for &id in ids {
        let row = table.row(id).ok_or(TokenError::TokenOutOfRange {
            id,
            vocab_size: table.vocab_size,
        })?;
        for (a, x) in acc.iter_mut().zip(row) {
            *a += x;
        }
    }
    let n = ids.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(acc)
}

/// Leaves embed their token text; interior nodes embed their label string.
pub fn node_embedding(node: &GraphNode, vocab: &BpeVocab, table: &EmbeddingTable) -> Result<Vec<f64>, TokenError> {
    let text = match &node.token_text {
        Some(t) if node.is_leaf => t.as_str(),
        _ => node.label.as_str(),
    };
    embed_ids(&vocab.encode_ids(text), table)
}
