//! Training and scoring for the two detectors over unit stores and pair
//! lists. Token sequences and graphs are computed once per unit.

use std::collections::BTreeMap;

use crossclone_core::corpus::PairExample;
use crossclone_core::detect::{
    graph_features, predict_with_threshold, sequence_features, train_classifier_with_validation, ClassifierModel,
    FeatureKind, PairFeatures, Prediction, TrainConfig,
};
use crossclone_core::tokens::{encode, train_bpe, train_sgns, BpeVocab, EmbeddingTable, SgnsConfig, TokenSequence};
use crossclone_core::{build_cpg, CodePropertyGraph, SourceUnit};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    Sequence,
    Graph,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 2] = [DetectorKind::Sequence, DetectorKind::Graph];

    pub fn as_str(self) -> &'static str {
        match self {
            DetectorKind::Sequence => "sequence",
            DetectorKind::Graph => "graph",
        }
    }

    pub fn feature_kind(self) -> FeatureKind {
        match self {
            DetectorKind::Sequence => FeatureKind::Sequence,
            DetectorKind::Graph => FeatureKind::Graph,
        }
    }
}

impl std::fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DetectorKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sequence" => Ok(DetectorKind::Sequence),
            "graph" => Ok(DetectorKind::Graph),
            other => Err(LabError::Config(format!("unknown detector `{other}`"))),
        }
    }
}

/// The graph classifier's training loss is still falling after the core
/// default of 60 epochs on the generated suite.
pub const CLASSIFIER_EPOCHS: usize = 200;

/// Hyperparameters shared by both detectors. The classifier seed is the only
/// source of randomness on the graph side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorSettings {
    pub vocab_size: usize,
    pub sgns: SgnsConfig,
    pub classifier: TrainConfig,
    pub threshold: f64,
}

impl DetectorSettings {
    /// Core defaults, except that the classifier runs for
    /// [`CLASSIFIER_EPOCHS`].
    pub fn with_seeds(embedding_seed: u64, classifier_seed: u64) -> Self {
        DetectorSettings {
            vocab_size: crossclone_core::tokens::DEFAULT_VOCAB_SIZE,
            sgns: SgnsConfig::with_seed(embedding_seed),
            classifier: TrainConfig {
                epochs: CLASSIFIER_EPOCHS,
                ..TrainConfig::with_seed(classifier_seed)
            },
            threshold: crossclone_core::detect::DEFAULT_THRESHOLD,
        }
    }
}

/// All units reachable from a set of unit stores, keyed by id.
#[derive(Debug, Clone, Default)]
pub struct UnitIndex {
    units: BTreeMap<String, SourceUnit>,
}

impl UnitIndex {
    pub fn new(units: impl IntoIterator<Item = SourceUnit>) -> Self {
        UnitIndex {
            units: units.into_iter().map(|u| (u.id.clone(), u)).collect(),
        }
    }

    pub fn get(&self, id: &str) -> Result<&SourceUnit> {
        self.units.get(id).ok_or_else(|| LabError::UnknownUnit(id.into()))
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SourceUnit> + '_ {
        self.units.values()
    }

    /// Units referenced by `pairs`, each once, in id order.
    pub fn referenced<'a>(&'a self, pairs: &[PairExample]) -> Result<Vec<&'a SourceUnit>> {
        let mut ids: Vec<&str> = pairs.iter().flat_map(|p| [p.unit_a.as_str(), p.unit_b.as_str()]).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.into_iter().map(|id| self.get(id)).collect()
    }

    pub fn texts(&self) -> BTreeMap<String, String> {
        self.units.iter().map(|(k, u)| (k.clone(), u.text.clone())).collect()
    }
}

/// Tokenizer and embedding table fitted on training units only.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceEncoder {
    pub vocab: BpeVocab,
    pub embeddings: EmbeddingTable,
}

impl SequenceEncoder {
    pub fn train(units: &[&SourceUnit], settings: &DetectorSettings) -> Result<Self> {
        let vocab = train_bpe(units.iter().map(|u| u.text.as_str()), settings.vocab_size)?;
        let seqs: Vec<TokenSequence> = units.iter().map(|u| encode(&u.id, &u.text, &vocab)).collect();
        let embeddings = train_sgns(&seqs, vocab.len(), settings.sgns)?;
        Ok(SequenceEncoder { vocab, embeddings })
    }
}

/// Computes pair features with per-unit caching.
pub struct Featurizer<'a> {
    index: &'a UnitIndex,
    encoder: Option<&'a SequenceEncoder>,
    sequences: BTreeMap<String, TokenSequence>,
    graphs: BTreeMap<String, CodePropertyGraph>,
}

impl<'a> Featurizer<'a> {
    pub fn new(index: &'a UnitIndex, encoder: Option<&'a SequenceEncoder>) -> Self {
        Featurizer {
            index,
            encoder,
            sequences: BTreeMap::new(),
            graphs: BTreeMap::new(),
        }
    }

    fn sequence(&mut self, id: &str) -> Result<&TokenSequence> {
        let encoder = self
            .encoder
            .ok_or_else(|| LabError::Config("sequence features need a trained tokenizer".into()))?;
        if !self.sequences.contains_key(id) {
            let unit = self.index.get(id)?;
            self.sequences.insert(id.into(), encode(&unit.id, &unit.text, &encoder.vocab));
        }
        Ok(&self.sequences[id])
    }

    pub fn graph(&mut self, id: &str) -> Result<&CodePropertyGraph> {
        if !self.graphs.contains_key(id) {
            let g = build_cpg(self.index.get(id)?)?;
            self.graphs.insert(id.into(), g);
        }
        Ok(&self.graphs[id])
    }

    pub fn features(&mut self, kind: DetectorKind, pair: &PairExample) -> Result<PairFeatures> {
        match kind {
            DetectorKind::Sequence => {
                self.sequence(&pair.unit_a)?;
                self.sequence(&pair.unit_b)?;
                let emb = &self.encoder.expect("checked by sequence()").embeddings;
                Ok(sequence_features(&self.sequences[&pair.unit_a], &self.sequences[&pair.unit_b], emb)?)
            }
            DetectorKind::Graph => {
                self.graph(&pair.unit_a)?;
                self.graph(&pair.unit_b)?;
                Ok(graph_features(&self.graphs[&pair.unit_a], &self.graphs[&pair.unit_b])?)
            }
        }
    }

    pub fn all(&mut self, kind: DetectorKind, pairs: &[PairExample]) -> Result<Vec<PairFeatures>> {
        pairs.iter().map(|p| self.features(kind, p)).collect()
    }
}

/// A trained detector: the classifier plus, for the sequence side, the
/// tokenizer and embeddings it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedDetector {
    pub kind: DetectorKind,
    pub encoder: Option<SequenceEncoder>,
    pub model: ClassifierModel,
}

fn labels(pairs: &[PairExample]) -> Vec<bool> {
    pairs.iter().map(|p| p.label.is_clone()).collect()
}

impl TrainedDetector {
    /// Fits the tokenizer and embeddings (sequence only) on the units of
    /// `train`, then the classifier on `train` with epoch selection on
    /// `valid`.
    pub fn train(
        kind: DetectorKind,
        index: &UnitIndex,
        train: &[PairExample],
        valid: &[PairExample],
        settings: &DetectorSettings,
    ) -> Result<Self> {
        let encoder = match kind {
            DetectorKind::Sequence => Some(SequenceEncoder::train(&index.referenced(train)?, settings)?),
            DetectorKind::Graph => None,
        };
        Self::fit(kind, encoder, index, train, valid, settings)
    }

    /// Trains only the classifier, reusing a fitted encoder.
    pub fn fit(
        kind: DetectorKind,
        encoder: Option<SequenceEncoder>,
        index: &UnitIndex,
        train: &[PairExample],
        valid: &[PairExample],
        settings: &DetectorSettings,
    ) -> Result<Self> {
        let mut fz = Featurizer::new(index, encoder.as_ref());
        let xs = fz.all(kind, train)?;
        let vs = fz.all(kind, valid)?;
        let mut model = train_classifier_with_validation(&xs, &labels(train), (&vs, &labels(valid)), settings.classifier)?;
        model.threshold = settings.threshold;
        Ok(TrainedDetector { kind, encoder, model })
    }

    pub fn predict(&self, index: &UnitIndex, pairs: &[PairExample]) -> Result<Vec<Prediction>> {
        let mut fz = Featurizer::new(index, self.encoder.as_ref());
        pairs
            .iter()
            .map(|p| {
                let f = fz.features(self.kind, p)?;
                Ok(predict_with_threshold(&self.model, &p.pair_id, &f, self.model.threshold))
            })
            .collect()
    }
}
