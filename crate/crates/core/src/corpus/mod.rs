//! Corpus handling: size filters, clone/non-clone pair sampling, clone
//! synthesis by type, split management and dataset mixing.

mod filter;
mod generator;
mod pairs;
mod synth;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

pub use filter::{filter_units, FilterConfig, FilterOutcome, FilterReport, RejectReason, Rejection};
pub use generator::{cluster_index, generate_corpus, program_for_cluster, GeneratorConfig, Program};
pub use pairs::{mix_datasets, sample_pairs, split_dataset, ClassCounts, SplitSizes};
pub use synth::{insert_unused_assignment, rename_identifiers, synthesize_clones, SynthOutcome, SyntheticVariant, TransformFailure};

use crate::ast::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CloneLabel {
    Clone,
    NotClone,
}

impl CloneLabel {
    pub fn is_clone(self) -> bool {
        self == CloneLabel::Clone
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CloneType {
    I,
    II,
    III,
    IV,
}

impl CloneType {
    pub fn as_str(self) -> &'static str {
        match self {
            CloneType::I => "I",
            CloneType::II => "II",
            CloneType::III => "III",
            CloneType::IV => "IV",
        }
    }
}

impl fmt::Display for CloneType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairExample {
    pub pair_id: String,
    pub unit_a: String,
    pub unit_b: String,
    pub label: CloneLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clone_type: Option<CloneType>,
    /// Name of the dataset the pair was drawn from, set when mixing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl PairExample {
    /// Orders the two ids so that `(a, b)` and `(b, a)` give the same pair.
    pub fn new(a: &str, b: &str, label: CloneLabel) -> Self {
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        PairExample {
            pair_id: alloc::format!("{x}|{y}"),
            unit_a: x.into(),
            unit_b: y.into(),
            label,
            clone_type: None,
            source: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SplitCounts {
    pub total: usize,
    pub positive: usize,
    pub negative: usize,
}

impl SplitCounts {
    pub fn of(pairs: &[PairExample]) -> Self {
        let positive = pairs.iter().filter(|p| p.label.is_clone()).count();
        SplitCounts {
            total: pairs.len(),
            positive,
            negative: pairs.len() - positive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Split {
    pub counts: SplitCounts,
    pub pairs: Vec<PairExample>,
    /// Pairs per source dataset; empty unless mixed.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub provenance: BTreeMap<String, usize>,
}

impl Split {
    pub fn new(pairs: Vec<PairExample>) -> Self {
        let mut provenance = BTreeMap::new();
        for p in &pairs {
            if let Some(s) = &p.source {
                *provenance.entry(s.clone()).or_insert(0) += 1;
            }
        }
        Split {
            counts: SplitCounts::of(&pairs),
            pairs,
            provenance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Splits {
    pub train: Split,
    pub valid: Split,
    pub test: Split,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub languages: Vec<Language>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterConfig>,
    pub seed: u64,
    pub splits: Splits,
    /// Units that appear in pairs of more than one split.
    pub unit_leakage: usize,
}

impl DatasetManifest {
    pub fn split(&self, name: &str) -> Option<&Split> {
        match name {
            "train" => Some(&self.splits.train),
            "valid" => Some(&self.splits.valid),
            "test" => Some(&self.splits.test),
            _ => None,
        }
    }

    pub fn all_pairs(&self) -> impl Iterator<Item = &PairExample> + '_ {
        self.splits
            .train
            .pairs
            .iter()
            .chain(&self.splits.valid.pairs)
            .chain(&self.splits.test.pairs)
    }

    /// Checks count bookkeeping and pair-disjointness across splits.
    pub fn validate(&self) -> Result<(), String> {
        let mut seen = BTreeMap::new();
        for (name, split) in [("train", &self.splits.train), ("valid", &self.splits.valid), ("test", &self.splits.test)] {
            if split.counts != SplitCounts::of(&split.pairs) {
                return Err(alloc::format!("{name}: counts do not match pair list"));
            }
            for p in &split.pairs {
                if p.unit_a == p.unit_b {
                    return Err(alloc::format!("{name}: pair {} joins a unit with itself", p.pair_id));
                }
                if let Some(prev) = seen.insert(p.pair_id.as_str(), name) {
                    return Err(alloc::format!("pair {} in both {prev} and {name}", p.pair_id));
                }
            }
        }
        Ok(())
    }
}

/// Counts units used by more than one split.
pub(crate) fn unit_leakage(splits: &Splits) -> usize {
    let mut by_unit: BTreeMap<&str, u8> = BTreeMap::new();
    for (bit, split) in [(1u8, &splits.train), (2, &splits.valid), (4, &splits.test)] {
        for p in &split.pairs {
            *by_unit.entry(p.unit_a.as_str()).or_insert(0) |= bit;
            *by_unit.entry(p.unit_b.as_str()).or_insert(0) |= bit;
        }
    }
    by_unit.values().filter(|m| m.count_ones() > 1).count()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("not enough pairs: requested {requested_positive} positive / {requested_negative} negative, available {available_positive} / {available_negative}")]
    InsufficientPairs {
        requested_positive: usize,
        requested_negative: usize,
        available_positive: usize,
        available_negative: usize,
    },
    #[error("invalid filter config: {0}")]
    InvalidFilter(String),
    #[error("incompatible manifests: {0}")]
    Incompatible(String),
}

#[cfg(test)]
mod tests;
