//! Weisfeiler-Lehman label refinement over AST and DFG edges.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::DetectError;
use crate::graph::{CodePropertyGraph, EdgeKind, Stage};
use crate::hash::Fnv64;

pub const DEFAULT_WL_ITERATIONS: usize = 3;

/// Whether leaves contribute their token text to the starting labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafMode {
    WithTokens,
    LabelOnly,
}

/// One hashed-label multiset per iteration, `0..=iterations`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WlSignature {
    pub mode: LeafMode,
    pub levels: Vec<BTreeMap<u64, usize>>,
}

impl WlSignature {
    pub fn iterations(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }
}

/// Token-aware signature of a standard CPG.
pub fn wl_signature(graph: &CodePropertyGraph, iterations: usize) -> Result<WlSignature, DetectError> {
    wl_signature_with(graph, iterations, LeafMode::WithTokens)
}

pub fn wl_signature_with(graph: &CodePropertyGraph, iterations: usize, mode: LeafMode) -> Result<WlSignature, DetectError> {
    graph.expect_stage(Stage::StandardCpg)?;
    Ok(raw_wl_signature(graph, iterations, mode))
}

/// Same refinement on a graph of any stage (raw grammar kinds included).
pub fn raw_wl_signature(graph: &CodePropertyGraph, iterations: usize, mode: LeafMode) -> WlSignature {
    let n = graph.nodes.len();
    let mut labels: Vec<u64> = graph
        .nodes
        .iter()
        .map(|node| {
            let mut h = Fnv64::new();
            h.write_str(&node.label);
            if let (LeafMode::WithTokens, Some(t)) = (mode, &node.token_text) {
                h.write_str(t);
            }
            h.finish()
        })
        .collect();
    // Neighbor tags: (edge kind, outgoing?, neighbor).
    let mut adj: Vec<Vec<(u64, usize)>> = alloc::vec![Vec::new(); n];
    for e in &graph.edges {
        let kind = match e.kind {
            EdgeKind::Ast => 0,
            EdgeKind::Dfg => 2,
        };
        adj[e.src].push((kind, e.dst));
        adj[e.dst].push((kind + 1, e.src));
    }
    let mut levels = Vec::with_capacity(iterations + 1);
    levels.push(multiset(&labels));
    let mut tags = Vec::new();
    for _ in 0..iterations {
        let next: Vec<u64> = (0..n)
            .map(|v| {
                tags.clear();
                tags.extend(adj[v].iter().map(|&(k, u)| (k, labels[u])));
                tags.sort_unstable();
                let mut h = Fnv64::new();
                h.write_u64(labels[v]);
                h.write_u64(tags.len() as u64);
                for &(k, l) in &tags {
                    h.write_u64(k);
                    h.write_u64(l);
                }
                h.finish()
            })
            .collect();
        labels = next;
        levels.push(multiset(&labels));
    }
    WlSignature { mode, levels }
}

fn multiset(labels: &[u64]) -> BTreeMap<u64, usize> {
    let mut m = BTreeMap::new();
    for &l in labels {
        *m.entry(l).or_insert(0) += 1;
    }
    m
}

/// `sum min / sum max` over the union of keys; two empty multisets are equal.
pub fn multiset_jaccard<K: Ord>(a: &BTreeMap<K, usize>, b: &BTreeMap<K, usize>) -> f64 {
    let mut inter = 0usize;
    let mut union = 0usize;
    for (k, &x) in a {
        let y = b.get(k).copied().unwrap_or(0);
        inter += x.min(y);
        union += x.max(y);
    }
    for (k, &y) in b {
        if !a.contains_key(k) {
            union += y;
        }
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Per-iteration multiset Jaccard.
pub fn wl_level_similarities(a: &WlSignature, b: &WlSignature) -> Result<Vec<f64>, DetectError> {
    if a.levels.len() != b.levels.len() {
        return Err(DetectError::IterationMismatch {
            left: a.iterations(),
            right: b.iterations(),
        });
    }
    Ok(a.levels.iter().zip(&b.levels).map(|(x, y)| multiset_jaccard(x, y)).collect())
}

/// Mean over iterations of the per-level multiset Jaccard.
pub fn wl_similarity(a: &WlSignature, b: &WlSignature) -> Result<f64, DetectError> {
    let levels = wl_level_similarities(a, b)?;
    Ok(levels.iter().sum::<f64>() / levels.len() as f64)
}
