//! Byte-level BPE.
//!
//! Text is first split into chunks (identifier-like runs, whitespace runs,
//! single punctuation bytes) and merges never cross a chunk boundary. The
//! base alphabet is all 256 byte values, so every input is encodable and
//! decoding is exact.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{TokenError, TokenSequence};

pub const BASE_ALPHABET: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Merge {
    pub left: u32,
    pub right: u32,
    /// Symbol produced; may be an existing symbol when two derivations
    /// yield the same bytes.
    pub result: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpeVocab {
    merges: Vec<Merge>,
    symbols: Vec<Vec<u8>>,
    ids: BTreeMap<Vec<u8>, u32>,
    ranks: BTreeMap<(u32, u32), usize>,
}

/// Serialized form: the base alphabet and the ranked merge list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BpeFile {
    pub version: u32,
    pub base_alphabet: usize,
    pub merges: Vec<(u32, u32)>,
}

impl Default for BpeVocab {
    fn default() -> Self {
        Self::byte_level()
    }
}

impl BpeVocab {
    /// No merges: one token per byte.
    pub fn byte_level() -> Self {
        let symbols: Vec<Vec<u8>> = (0..=255u8).map(|b| vec![b]).collect();
        let ids = symbols.iter().enumerate().map(|(i, s)| (s.clone(), i as u32)).collect();
        BpeVocab {
            merges: Vec::new(),
            symbols,
            ids,
            ranks: BTreeMap::new(),
        }
    }

    /// Replays `merges` from the byte alphabet.
    pub fn from_merges(merges: &[(u32, u32)]) -> Result<Self, TokenError> {
        let mut vocab = Self::byte_level();
        for (rank, &(left, right)) in merges.iter().enumerate() {
            if left as usize >= vocab.symbols.len() || right as usize >= vocab.symbols.len() {
                return Err(TokenError::InvalidMerge { rank });
            }
            if vocab.ranks.contains_key(&(left, right)) {
                return Err(TokenError::InvalidMerge { rank });
            }
            vocab.push_merge(left, right);
        }
        Ok(vocab)
    }

    fn push_merge(&mut self, left: u32, right: u32) -> u32 {
        let mut bytes = self.symbols[left as usize].clone();
        bytes.extend_from_slice(&self.symbols[right as usize]);
        let result = match self.ids.get(&bytes) {
            Some(&id) => id,
            None => {
                let id = self.symbols.len() as u32;
                self.symbols.push(bytes.clone());
                self.ids.insert(bytes, id);
                id
            }
        };
        self.ranks.insert((left, right), self.merges.len());
        self.merges.push(Merge { left, right, result });
        result
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn symbol(&self, id: u32) -> Option<&[u8]> {
        self.symbols.get(id as usize).map(Vec::as_slice)
    }

    pub fn id(&self, bytes: &[u8]) -> Option<u32> {
        self.ids.get(bytes).copied()
    }

    /// Symbol bytes to id.
    pub fn vocab(&self) -> &BTreeMap<Vec<u8>, u32> {
        &self.ids
    }

    pub fn to_file(&self) -> BpeFile {
        BpeFile {
            version: 1,
            base_alphabet: BASE_ALPHABET,
            merges: self.merges.iter().map(|m| (m.left, m.right)).collect(),
        }
    }

    pub fn from_file(file: &BpeFile) -> Result<Self, TokenError> {
        if file.base_alphabet != BASE_ALPHABET {
            return Err(TokenError::InvalidMerge { rank: 0 });
        }
        Self::from_merges(&file.merges)
    }

    /// Symbol ids for `text`.
    pub fn encode_ids(&self, text: &str) -> Vec<u32> {
        self.encode_bytes(text.as_bytes())
    }

    /// Symbol ids for arbitrary bytes; `decode_bytes` inverts it exactly.
    pub fn encode_bytes(&self, bytes: &[u8]) -> Vec<u32> {
        let mut out = Vec::new();
        for chunk in chunks(bytes) {
            out.extend(self.encode_chunk(chunk));
        }
        out
    }

    fn encode_chunk(&self, chunk: &[u8]) -> Vec<u32> {
        let mut syms: Vec<u32> = chunk.iter().map(|&b| u32::from(b)).collect();
        loop {
            let best = syms
                .windows(2)
                .enumerate()
                .filter_map(|(i, w)| self.ranks.get(&(w[0], w[1])).map(|&r| (r, i)))
                .min();
            let Some((rank, _)) = best else { break };
            let m = self.merges[rank];
            let mut next = Vec::with_capacity(syms.len());
            let mut i = 0;
            while i < syms.len() {
                if i + 1 < syms.len() && syms[i] == m.left && syms[i + 1] == m.right {
                    next.push(m.result);
                    i += 2;
                } else {
                    next.push(syms[i]);
                    i += 1;
                }
            }
            syms = next;
        }
        syms
    }

    pub fn decode_bytes(&self, ids: &[u32]) -> Vec<u8> {
        ids.iter()
            .flat_map(|&id| self.symbols.get(id as usize).map(Vec::as_slice).unwrap_or(&[]))
            .copied()
            .collect()
    }

    pub fn decode(&self, ids: &[u32]) -> String {
        String::from_utf8_lossy(&self.decode_bytes(ids)).into_owned()
    }
}

pub fn encode(unit_id: &str, text: &str, vocab: &BpeVocab) -> TokenSequence {
    let tokens = vocab.encode_ids(text);
    let surface = tokens
        .iter()
        .map(|&t| String::from_utf8_lossy(vocab.symbol(t).unwrap_or(&[])).into_owned())
        .collect();
    TokenSequence {
        unit_id: unit_id.into(),
        tokens,
        surface,
    }
}

pub fn decode(seq: &TokenSequence, vocab: &BpeVocab) -> String {
    vocab.decode(&seq.tokens)
}

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b >= 0x80
}

/// Pre-tokenization: word runs, whitespace runs and single other bytes.
pub fn chunks(bytes: &[u8]) -> Vec<&[u8]> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let mut j = i + 1;
        if is_word_byte(b) {
            while j < bytes.len() && is_word_byte(bytes[j]) {
                j += 1;
            }
        } else if b.is_ascii_whitespace() {
            while j < bytes.len() && bytes[j].is_ascii_whitespace() {
                j += 1;
            }
        }
        out.push(&bytes[i..j]);
        i = j;
    }
    out
}

/// Greedy merge training: repeatedly merge the most frequent adjacent pair
/// until `vocab_size` symbols exist or no pair occurs at least twice. Ties go
/// to the lexicographically smallest merged byte string.
pub fn train_bpe<'a, I>(texts: I, vocab_size: usize) -> Result<BpeVocab, TokenError>
where
    I: IntoIterator<Item = &'a str>,
{
    if vocab_size < BASE_ALPHABET {
        return Err(TokenError::VocabTooSmall {
            requested: vocab_size,
            minimum: BASE_ALPHABET,
        });
    }
    let mut chunk_counts: BTreeMap<&'a [u8], u64> = BTreeMap::new();
    let mut any = false;
    for text in texts {
        any |= !text.is_empty();
        for c in chunks(text.as_bytes()) {
            *chunk_counts.entry(c).or_insert(0) += 1;
        }
    }
    if !any {
        return Err(TokenError::EmptyCorpus);
    }

    let mut words: Vec<(Vec<u32>, u64)> = chunk_counts
        .into_iter()
        .map(|(c, n)| (c.iter().map(|&b| u32::from(b)).collect(), n))
        .collect();
    let mut pair_counts: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    let mut where_: BTreeMap<(u32, u32), BTreeSet<usize>> = BTreeMap::new();
    for (wi, (syms, n)) in words.iter().enumerate() {
        for w in syms.windows(2) {
            *pair_counts.entry((w[0], w[1])).or_insert(0) += n;
            where_.entry((w[0], w[1])).or_default().insert(wi);
        }
    }

    let mut vocab = BpeVocab::byte_level();
    while vocab.len() < vocab_size {
        let mut best: Option<((u32, u32), u64, Vec<u8>)> = None;
        for (&pair, &count) in &pair_counts {
            if count < 2 {
                continue;
            }
            let better = match &best {
                None => true,
                Some((_, bc, bbytes)) => {
                    count > *bc || (count == *bc && merged_bytes(&vocab, pair).as_slice() < bbytes.as_slice())
                }
            };
            if better {
                best = Some((pair, count, merged_bytes(&vocab, pair)));
            }
        }
        let Some((pair, _, _)) = best else { break };
        let result = vocab.push_merge(pair.0, pair.1);
        let affected: Vec<usize> = where_.get(&pair).map(|s| s.iter().copied().collect()).unwrap_or_default();
        for wi in affected {
            let (syms, n) = &mut words[wi];
            for w in syms.windows(2) {
                let key = (w[0], w[1]);
                if let Some(c) = pair_counts.get_mut(&key) {
                    *c -= *n;
                    if *c == 0 {
                        pair_counts.remove(&key);
                    }
                }
                if let Some(set) = where_.get_mut(&key) {
                    set.remove(&wi);
                }
            }
            let mut next = Vec::with_capacity(syms.len());
            let mut i = 0;
            while i < syms.len() {
                if i + 1 < syms.len() && (syms[i], syms[i + 1]) == pair {
                    next.push(result);
                    i += 2;
                } else {
                    next.push(syms[i]);
                    i += 1;
                }
            }
            *syms = next;
            for w in syms.windows(2) {
                *pair_counts.entry((w[0], w[1])).or_insert(0) += *n;
                where_.entry((w[0], w[1])).or_default().insert(wi);
            }
        }
    }
    Ok(vocab)
}

fn merged_bytes(vocab: &BpeVocab, (a, b): (u32, u32)) -> Vec<u8> {
    let mut v = vocab.symbols[a as usize].clone();
    v.extend_from_slice(&vocab.symbols[b as usize]);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_simulated_single_merge() {
        // Pairs in "aaab": (a,a) twice, (a,b) once.
        let v = train_bpe(["aaab"], BASE_ALPHABET + 1).unwrap();
        assert_eq!(v.merges().len(), 1);
        assert_eq!(v.merges()[0].left, u32::from(b'a'));
        assert_eq!(v.merges()[0].right, u32::from(b'a'));
        assert_eq!(v.encode_ids("aaab"), [256, u32::from(b'a'), u32::from(b'b')]);
    }

    #[test]
    fn no_budget_means_byte_tokens() {
        let v = train_bpe(["num = 5"], BASE_ALPHABET).unwrap();
        assert!(v.merges().is_empty());
        let seq = encode("u", "num = 5", &v);
        assert_eq!(seq.tokens.len(), 7);
        assert_eq!(seq.surface.concat(), "num = 5");
    }

    #[test]
    fn ties_break_on_merged_bytes() {
        // "ab" and "cd" both occur twice; "ab" < "cd".
        let v = train_bpe(["ab cd ab cd"], BASE_ALPHABET + 1).unwrap();
        assert_eq!(v.symbol(v.merges()[0].result), Some(&b"ab"[..]));
    }

    #[test]
    fn stops_when_no_pair_repeats() {
        let v = train_bpe(["abcdef"], 1000).unwrap();
        assert!(v.merges().is_empty());
    }

    #[test]
    fn errors() {
        assert_eq!(train_bpe(["x"], 10).unwrap_err(), TokenError::VocabTooSmall { requested: 10, minimum: 256 });
        assert_eq!(train_bpe(Vec::<&str>::new(), 300).unwrap_err(), TokenError::EmptyCorpus);
        assert_eq!(train_bpe([""], 300).unwrap_err(), TokenError::EmptyCorpus);
        assert!(BpeVocab::from_merges(&[(999, 1)]).is_err());
    }

    #[test]
    fn empty_text_encodes_to_nothing() {
        let v = BpeVocab::byte_level();
        assert!(encode("u", "", &v).tokens.is_empty());
    }

    #[test]
    fn chunking() {
        let c: Vec<&[u8]> = chunks(b"foo_1(x)  +=y");
        assert_eq!(c, [&b"foo_1"[..], b"(", b"x", b")", b"  ", b"+", b"=", b"y"]);
    }
}
