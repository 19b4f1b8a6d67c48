//! Pair features for the two detectors.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::wl::{multiset_jaccard, wl_level_similarities, wl_signature_with, LeafMode, DEFAULT_WL_ITERATIONS};
use super::DetectError;
use crate::graph::{CodePropertyGraph, Stage};
use crate::math::cosine;
use crate::tokens::{embed_mean, EmbeddingTable, TokenError, TokenSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Sequence,
    Graph,
}

pub const SEQUENCE_FEATURES: [&str; 4] = ["token_jaccard", "bigram_jaccard", "embedding_cosine", "log_length_ratio"];

pub const GRAPH_FEATURES: [&str; 11] = [
    "wl_tokens_0",
    "wl_tokens_1",
    "wl_tokens_2",
    "wl_tokens_3",
    "wl_labels_0",
    "wl_labels_1",
    "wl_labels_2",
    "wl_labels_3",
    "dfg_pair_jaccard",
    "label_histogram_cosine",
    "log_node_ratio",
];

impl FeatureKind {
    pub fn names(self) -> &'static [&'static str] {
        match self {
            FeatureKind::Sequence => &SEQUENCE_FEATURES,
            FeatureKind::Graph => &GRAPH_FEATURES,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Sequence => "sequence",
            FeatureKind::Graph => "graph",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairFeatures {
    pub kind: FeatureKind,
    /// In the order of [`FeatureKind::names`].
    pub values: Vec<f64>,
}

impl PairFeatures {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.kind.names().iter().position(|n| *n == name).map(|i| self.values[i])
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

fn set_jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        1.0
    } else {
        a.intersection(b).count() as f64 / union as f64
    }
}

/// `|ln(a / b)|`, computed as `ln(max / min)` so swapping is exact.
fn folded_log_ratio(a: usize, b: usize) -> f64 {
    libm::log(a.max(b) as f64 / a.min(b) as f64)
}

/// Token-set and bigram Jaccard, pooled-embedding cosine rescaled to `[0,1]`
/// as `(1 + cos) / 2`, and `|ln(len a / len b)|`.
pub fn sequence_features(a: &TokenSequence, b: &TokenSequence, emb: &EmbeddingTable) -> Result<PairFeatures, DetectError> {
    if a.is_empty() || b.is_empty() {
        return Err(DetectError::Token(TokenError::EmptySequence));
    }
    let set = |s: &TokenSequence| s.tokens.iter().copied().collect::<BTreeSet<u32>>();
    let bigrams = |s: &TokenSequence| s.tokens.windows(2).map(|w| (w[0], w[1])).collect::<BTreeSet<_>>();
    let ea = embed_mean(a, emb)?;
    let eb = embed_mean(b, emb)?;
    let values = alloc::vec![
        set_jaccard(&set(a), &set(b)),
        set_jaccard(&bigrams(a), &bigrams(b)),
        (1.0 + cosine(&ea, &eb)) / 2.0,
        folded_log_ratio(a.len(), b.len()),
    ];
    Ok(PairFeatures {
        kind: FeatureKind::Sequence,
        values,
    })
}

/// WL similarities per iteration (token-aware then label-only), DFG
/// label-pair Jaccard, label histogram cosine and `|ln(nodes a / nodes b)|`.
pub fn graph_features(a: &CodePropertyGraph, b: &CodePropertyGraph) -> Result<PairFeatures, DetectError> {
    a.expect_stage(Stage::StandardCpg)?;
    b.expect_stage(Stage::StandardCpg)?;
    let mut values = Vec::with_capacity(GRAPH_FEATURES.len());
    for mode in [LeafMode::WithTokens, LeafMode::LabelOnly] {
        let sa = wl_signature_with(a, DEFAULT_WL_ITERATIONS, mode)?;
        let sb = wl_signature_with(b, DEFAULT_WL_ITERATIONS, mode)?;
        values.extend(wl_level_similarities(&sa, &sb)?);
    }
    values.push(multiset_jaccard(&dfg_label_pairs(a), &dfg_label_pairs(b)));
    values.push(histogram_cosine(a, b));
    values.push(folded_log_ratio(a.nodes.len().max(1), b.nodes.len().max(1)));
    Ok(PairFeatures {
        kind: FeatureKind::Graph,
        values,
    })
}

fn dfg_label_pairs(g: &CodePropertyGraph) -> BTreeMap<(&str, &str), usize> {
    let mut m = BTreeMap::new();
    for e in g.dfg_edges() {
        *m.entry((g.nodes[e.src].label.as_str(), g.nodes[e.dst].label.as_str())).or_insert(0) += 1;
    }
    m
}

/// Cosine between the two label-count vectors.
pub fn histogram_cosine(a: &CodePropertyGraph, b: &CodePropertyGraph) -> f64 {
    let ha = a.label_histogram();
    let hb = b.label_histogram();
    let keys: BTreeSet<&str> = ha.keys().chain(hb.keys()).copied().collect();
    let va: Vec<f64> = keys.iter().map(|k| ha.get(k).copied().unwrap_or(0) as f64).collect();
    let vb: Vec<f64> = keys.iter().map(|k| hb.get(k).copied().unwrap_or(0) as f64).collect();
    cosine(&va, &vb)
}
