//! Detector checkpoints: `model.json`, plus `tokenizer.json` and
//! `embeddings.json` for the sequence detector, each with its SHA-256.

use std::collections::BTreeMap;
use std::path::Path;

use crossclone_core::detect::{ClassifierModel, FeatureKind};
use crossclone_core::tokens::{BpeFile, BpeVocab, EmbeddingTable};

use crate::canonical::{file_sha256, read_json, write_json};
use crate::detectors::{DetectorKind, SequenceEncoder, TrainedDetector};
use crate::error::{LabError, Result};

pub const MODEL_FILE: &str = "model.json";
pub const TOKENIZER_FILE: &str = "tokenizer.json";
pub const EMBEDDINGS_FILE: &str = "embeddings.json";

/// File name to checksum, for one checkpoint directory.
pub type Checksums = BTreeMap<String, String>;

pub fn save_encoder(dir: &Path, encoder: &SequenceEncoder) -> Result<Checksums> {
    let mut sums = Checksums::new();
    sums.insert(TOKENIZER_FILE.into(), write_json(&dir.join(TOKENIZER_FILE), &encoder.vocab.to_file())?);
    sums.insert(EMBEDDINGS_FILE.into(), write_json(&dir.join(EMBEDDINGS_FILE), &encoder.embeddings)?);
    Ok(sums)
}

pub fn load_tokenizer(path: &Path) -> Result<BpeVocab> {
    let file: BpeFile = read_json(path)?;
    Ok(BpeVocab::from_file(&file)?)
}

pub fn load_encoder(dir: &Path) -> Result<SequenceEncoder> {
    let vocab = load_tokenizer(&dir.join(TOKENIZER_FILE))?;
    let embeddings: EmbeddingTable = read_json(&dir.join(EMBEDDINGS_FILE))?;
    if embeddings.vocab_size != vocab.len() {
        return Err(LabError::Config(format!(
            "{}: embedding table has {} rows, tokenizer has {} symbols",
            dir.display(),
            embeddings.vocab_size,
            vocab.len()
        )));
    }
    Ok(SequenceEncoder { vocab, embeddings })
}

pub fn save_detector(dir: &Path, detector: &TrainedDetector) -> Result<Checksums> {
    let mut sums = match &detector.encoder {
        Some(enc) => save_encoder(dir, enc)?,
        None => Checksums::new(),
    };
    sums.insert(MODEL_FILE.into(), write_json(&dir.join(MODEL_FILE), &detector.model)?);
    Ok(sums)
}

pub fn load_detector(dir: &Path) -> Result<TrainedDetector> {
    let model: ClassifierModel = read_json(&dir.join(MODEL_FILE))?;
    let (kind, encoder) = match model.kind {
        FeatureKind::Sequence => (DetectorKind::Sequence, Some(load_encoder(dir)?)),
        FeatureKind::Graph => (DetectorKind::Graph, None),
    };
    Ok(TrainedDetector { kind, encoder, model })
}

/// Re-hashes the files listed in `sums`.
pub fn checksum_files(dir: &Path, names: impl IntoIterator<Item = String>) -> Result<Checksums> {
    names
        .into_iter()
        .map(|n| {
            let sum = file_sha256(&dir.join(&n))?;
            Ok((n, sum))
        })
        .collect()
}
