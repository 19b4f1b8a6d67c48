//! Logistic pair classifier with cross-entropy or focal loss.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{FeatureKind, PairFeatures};
use super::DetectError;
use crate::math::{dot, log_sigmoid, sigmoid};

pub const FEATURE_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LossKind {
    CrossEntropy,
    Focal { gamma: f64 },
}

impl LossKind {
    pub fn focal() -> Self {
        LossKind::Focal { gamma: 2.0 }
    }

    /// Loss of one example with logit `z`.
    pub fn loss(self, z: f64, clone: bool) -> f64 {
        let s = if clone { z } else { -z };
        match self {
            LossKind::CrossEntropy => -log_sigmoid(s),
            // p_t = s(s z), 1 - p_t = s(-s z)
            LossKind::Focal { gamma } => -libm::pow(sigmoid(-s), gamma) * log_sigmoid(s),
        }
    }

    /// `d loss / d z`.
    pub fn grad(self, z: f64, clone: bool) -> f64 {
        let sign = if clone { 1.0 } else { -1.0 };
        let s = sign * z;
        match self {
            LossKind::CrossEntropy => sigmoid(z) - if clone { 1.0 } else { 0.0 },
            LossKind::Focal { gamma } => {
                let pt = sigmoid(s);
                let q = sigmoid(-s);
                sign * libm::pow(q, gamma) * (gamma * pt * log_sigmoid(s) - q)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub loss: LossKind,
    pub l2: f64,
}

impl TrainConfig {
    pub fn with_seed(seed: u64) -> Self {
        TrainConfig {
            learning_rate: 0.1,
            epochs: 60,
            batch_size: 16,
            seed,
            loss: LossKind::CrossEntropy,
            l2: 1e-4,
        }
    }
}

/// Per-feature standardization fitted on the training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl FeatureScaler {
    pub fn identity(dim: usize) -> Self {
        FeatureScaler {
            mean: vec![0.0; dim],
            scale: vec![1.0; dim],
        }
    }

    pub fn fit(rows: &[&[f64]]) -> Self {
        let dim = rows.first().map_or(0, |r| r.len());
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, x) in mean.iter_mut().zip(r.iter()) {
                *m += x / n;
            }
        }
        let mut var = vec![0.0; dim];
        for r in rows {
            for ((v, x), m) in var.iter_mut().zip(r.iter()).zip(&mean) {
                *v += (x - m) * (x - m) / n;
            }
        }
        let scale = var
            .iter()
            .map(|&v| {
                let s = libm::sqrt(v);
                if s > 1e-12 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        FeatureScaler { mean, scale }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mean).zip(&self.scale).map(|((x, m), s)| (x - m) / s).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub kind: FeatureKind,
    pub schema_version: u32,
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub scaler: FeatureScaler,
    pub config: TrainConfig,
    pub threshold: f64,
    /// Mean training loss after the last applied epoch.
    pub final_loss: f64,
    /// Epoch (1-based) whose weights were kept, when selected on validation.
    pub selected_epoch: Option<usize>,
    #[serde(default)]
    pub history: Vec<EpochRecord>,
}

/// Training loss after each epoch, and validation macro-F1 when a
/// validation set was given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_f1: Option<f64>,
}

impl ClassifierModel {
    /// All-zero weights: every pair scores exactly 0.5.
    pub fn zeros(kind: FeatureKind, config: TrainConfig) -> Self {
        let dim = kind.names().len();
        ClassifierModel {
            kind,
            schema_version: FEATURE_SCHEMA_VERSION,
            feature_names: kind.names().iter().map(|s| s.to_string()).collect(),
            weights: vec![0.0; dim],
            bias: 0.0,
            scaler: FeatureScaler::identity(dim),
            config,
            threshold: DEFAULT_THRESHOLD,
            final_loss: f64::NAN,
            selected_epoch: None,
            history: Vec::new(),
        }
    }

    pub fn logit(&self, features: &PairFeatures) -> f64 {
        dot(&self.weights, &self.scaler.apply(&features.values)) + self.bias
    }

    pub fn probability(&self, features: &PairFeatures) -> f64 {
        sigmoid(self.logit(features))
    }

    pub fn is_finite(&self) -> bool {
        self.bias.is_finite() && self.weights.iter().all(|w| w.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub pair_id: String,
    pub probability: f64,
    pub clone: bool,
    pub threshold: f64,
}

pub fn predict(model: &ClassifierModel, pair_id: &str, features: &PairFeatures) -> Prediction {
    predict_with_threshold(model, pair_id, features, model.threshold)
}

pub fn predict_with_threshold(model: &ClassifierModel, pair_id: &str, features: &PairFeatures, threshold: f64) -> Prediction {
    let probability = model.probability(features);
    Prediction {
        pair_id: pair_id.into(),
        probability,
        clone: probability >= threshold,
        threshold,
    }
}

/// Mean loss over `(scaled features, label)` plus the L2 penalty on weights.
pub fn batch_loss(weights: &[f64], bias: f64, batch: &[(Vec<f64>, bool)], loss: LossKind, l2: f64) -> f64 {
    let n = batch.len().max(1) as f64;
    let data: f64 = batch.iter().map(|(x, y)| loss.loss(dot(weights, x) + bias, *y)).sum::<f64>() / n;
    data + 0.5 * l2 * dot(weights, weights)
}

/// Gradient of [`batch_loss`] as `(d weights, d bias)`.
pub fn batch_gradient(weights: &[f64], bias: f64, batch: &[(Vec<f64>, bool)], loss: LossKind, l2: f64) -> (Vec<f64>, f64) {
    let n = batch.len().max(1) as f64;
    let mut gw: Vec<f64> = weights.iter().map(|w| l2 * w).collect();
    let mut gb = 0.0;
    for (x, y) in batch {
        let g = loss.grad(dot(weights, x) + bias, *y) / n;
        for (a, xi) in gw.iter_mut().zip(x) {
            *a += g * xi;
        }
        gb += g;
    }
    (gw, gb)
}

fn check_inputs(features: &[PairFeatures], labels: &[bool]) -> Result<FeatureKind, DetectError> {
    if features.len() != labels.len() {
        return Err(DetectError::LengthMismatch {
            left: features.len(),
            right: labels.len(),
        });
    }
    if features.len() < 2 {
        return Err(DetectError::TooFewExamples { found: features.len() });
    }
    if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
        return Err(DetectError::DegenerateLabels);
    }
    let kind = features[0].kind;
    if features.iter().any(|f| f.kind != kind || f.values.len() != kind.names().len()) {
        return Err(DetectError::MixedFeatures);
    }
    Ok(kind)
}

pub fn train_classifier(features: &[PairFeatures], labels: &[bool], config: TrainConfig) -> Result<ClassifierModel, DetectError> {
    train_inner(features, labels, None, config)
}

/// Trains for `config.epochs` and keeps the weights of the epoch with the
/// best validation macro-F1 (earliest on ties).
pub fn train_classifier_with_validation(
    features: &[PairFeatures],
    labels: &[bool],
    valid: (&[PairFeatures], &[bool]),
    config: TrainConfig,
) -> Result<ClassifierModel, DetectError> {
    if valid.0.len() != valid.1.len() {
        return Err(DetectError::LengthMismatch {
            left: valid.0.len(),
            right: valid.1.len(),
        });
    }
    train_inner(features, labels, Some(valid), config)
}

fn train_inner(
    features: &[PairFeatures],
    labels: &[bool],
    valid: Option<(&[PairFeatures], &[bool])>,
    config: TrainConfig,
) -> Result<ClassifierModel, DetectError> {
    let kind = check_inputs(features, labels)?;
    let rows: Vec<&[f64]> = features.iter().map(|f| f.values.as_slice()).collect();
    let mut model = ClassifierModel::zeros(kind, config);
    model.scaler = FeatureScaler::fit(&rows);
    let data: Vec<(Vec<f64>, bool)> = rows.iter().zip(labels).map(|(r, &y)| (model.scaler.apply(r), y)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let batch_size = config.batch_size.max(1);
    let mut best: Option<(f64, usize, Vec<f64>, f64, f64)> = None;
    let mut batch = Vec::with_capacity(batch_size);
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for idx in order.chunks(batch_size) {
            batch.clear();
            batch.extend(idx.iter().map(|&i| data[i].clone()));
            let (gw, gb) = batch_gradient(&model.weights, model.bias, &batch, config.loss, config.l2);
            for (w, g) in model.weights.iter_mut().zip(&gw) {
                *w -= config.learning_rate * g;
            }
            model.bias -= config.learning_rate * gb;
        }
        let loss = batch_loss(&model.weights, model.bias, &data, config.loss, config.l2);
        if !loss.is_finite() || !model.is_finite() {
            return Err(DetectError::NonFiniteLoss);
        }
        model.final_loss = loss;
        let mut valid_f1 = None;
        if let Some((vf, vl)) = valid {
            let f1 = macro_f1(&model, vf, vl);
            valid_f1 = Some(f1);
            if best.as_ref().is_none_or(|b| f1 > b.0) {
                best = Some((f1, epoch, model.weights.clone(), model.bias, loss));
            }
        }
        model.history.push(EpochRecord {
            epoch,
            train_loss: loss,
            valid_f1,
        });
    }
    if let Some((_, epoch, w, b, loss)) = best {
        model.weights = w;
        model.bias = b;
        model.final_loss = loss;
        model.selected_epoch = Some(epoch);
    }
    Ok(model)
}

fn macro_f1(model: &ClassifierModel, features: &[PairFeatures], labels: &[bool]) -> f64 {
    let (mut tp, mut fp, mut fne, mut tn) = (0usize, 0usize, 0usize, 0usize);
    for (f, &y) in features.iter().zip(labels) {
        match (model.probability(f) >= model.threshold, y) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fne += 1,
            (false, false) => tn += 1,
        }
    }
    let f1 = |tp: usize, fp: usize, fne: usize| {
        let denom = 2 * tp + fp + fne;
        if denom == 0 {
            0.0
        } else {
            2.0 * tp as f64 / denom as f64
        }
    };
    (f1(tp, fp, fne) + f1(tn, fne, fp)) / 2.0
}
