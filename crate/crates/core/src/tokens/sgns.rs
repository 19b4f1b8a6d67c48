//! Skip-gram with negative sampling.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{TokenError, TokenSequence};
use crate::math::{dot, log_sigmoid, sigmoid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgnsConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl SgnsConfig {
    /// d=64, window 5, k=5, lr 0.025 (linearly decayed), 5 epochs.
    pub fn with_seed(seed: u64) -> Self {
        SgnsConfig {
            dim: 64,
            window: 5,
            negatives: 5,
            learning_rate: 0.025,
            epochs: 5,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTable {
    pub config: SgnsConfig,
    pub vocab_size: usize,
    /// Row-major `vocab_size x dim`.
    pub input_vectors: Vec<f64>,
    pub output_vectors: Vec<f64>,
    /// Mean pair loss per epoch, as observed during training.
    pub loss_history: Vec<f64>,
}

impl EmbeddingTable {
    pub fn zeros(vocab_size: usize, config: SgnsConfig) -> Self {
        EmbeddingTable {
            config,
            vocab_size,
            input_vectors: vec![0.0; vocab_size * config.dim],
            output_vectors: vec![0.0; vocab_size * config.dim],
            loss_history: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn row(&self, id: u32) -> Option<&[f64]> {
        let d = self.config.dim;
        let i = id as usize;
        (i < self.vocab_size).then(|| &self.input_vectors[i * d..(i + 1) * d])
    }

    pub fn output_row(&self, id: u32) -> Option<&[f64]> {
        let d = self.config.dim;
        let i = id as usize;
        (i < self.vocab_size).then(|| &self.output_vectors[i * d..(i + 1) * d])
    }

    pub fn is_finite(&self) -> bool {
        self.input_vectors.iter().chain(&self.output_vectors).all(|x| x.is_finite())
    }
}

/// `-log s(u_o . v_c) - sum_i log s(-u_ni . v_c)`
pub fn pair_loss(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> f64 {
    let mut loss = -log_sigmoid(dot(context, center));
    for n in negatives {
        loss -= log_sigmoid(-dot(n, center));
    }
    loss
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairGradients {
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    /// One gradient per negative, in input order.
    pub negatives: Vec<Vec<f64>>,
}

/// Analytic gradients of [`pair_loss`].
pub fn pair_gradients(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> PairGradients {
    let g = sigmoid(dot(context, center)) - 1.0;
    let mut grad_center: Vec<f64> = context.iter().map(|u| g * u).collect();
    let grad_context = center.iter().map(|v| g * v).collect();
    let mut grad_negs = Vec::with_capacity(negatives.len());
    for n in negatives {
        let g = sigmoid(dot(n, center));
        for (gc, u) in grad_center.iter_mut().zip(n.iter()) {
            *gc += g * u;
        }
        grad_negs.push(center.iter().map(|v| g * v).collect());
    }
    PairGradients {
        center: grad_center,
        context: grad_context,
        negatives: grad_negs,
    }
}

/// Samples ids in proportion to `count^0.75`.
struct NegativeSampler {
    cumulative: Vec<f64>,
}

impl NegativeSampler {
    fn new(counts: &[u64]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += libm::pow(c as f64, 0.75);
                acc
            })
            .collect();
        NegativeSampler { cumulative }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> u32 {
        let total = *self.cumulative.last().unwrap_or(&0.0);
        let x = rng.gen::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= x);
        i.min(self.cumulative.len() - 1) as u32
    }
}

pub fn train_sgns(sequences: &[TokenSequence], vocab_size: usize, config: SgnsConfig) -> Result<EmbeddingTable, TokenError> {
    let total: usize = sequences.iter().map(|s| s.tokens.len()).sum();
    if total < config.window + 1 || config.dim == 0 {
        return Err(TokenError::InsufficientCorpus {
            tokens: total,
            needed: config.window + 1,
        });
    }
    let mut counts = vec![0u64; vocab_size];
    for s in sequences {
        for &t in &s.tokens {
            *counts.get_mut(t as usize).ok_or(TokenError::TokenOutOfRange { id: t, vocab_size })? += 1;
        }
    }
    let sampler = NegativeSampler::new(&counts);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let d = config.dim;
    let mut table = EmbeddingTable::zeros(vocab_size, config);
    for x in table.input_vectors.iter_mut() {
        *x = (rng.gen::<f64>() - 0.5) / d as f64;
    }

    let steps = (config.epochs * total).max(1) as f64;
    let mut step = 0usize;
    let mut grad_center = vec![0.0; d];
    for _ in 0..config.epochs {
        let mut epoch_loss = 0.0;
        let mut pairs = 0usize;
        for seq in sequences {
            let toks = &seq.tokens;
            for (i, &c) in toks.iter().enumerate() {
                let lr = config.learning_rate * (1.0 - step as f64 / steps).max(1e-4);
                step += 1;
                let lo = i.saturating_sub(config.window);
                let hi = (i + config.window + 1).min(toks.len());
                let c = c as usize;
                for (j, &o) in toks.iter().enumerate().take(hi).skip(lo) {
                    if j == i {
                        continue;
                    }
                    grad_center.iter_mut().for_each(|g| *g = 0.0);
                    let vc: Vec<f64> = table.input_vectors[c * d..(c + 1) * d].to_vec();
                    let update = |target: usize, positive: bool, table: &mut EmbeddingTable, grad_center: &mut [f64]| {
                        let u = &mut table.output_vectors[target * d..(target + 1) * d];
                        let z = dot(u, &vc);
                        let (g, loss) = if positive {
                            (sigmoid(z) - 1.0, -log_sigmoid(z))
                        } else {
                            (sigmoid(z), -log_sigmoid(-z))
                        };
                        for k in 0..d {
                            grad_center[k] += g * u[k];
                            u[k] -= lr * g * vc[k];
                        }
                        loss
                    };
                    let mut loss = update(o as usize, true, &mut table, &mut grad_center);
                    for _ in 0..config.negatives {
                        let n = sampler.sample(&mut rng) as usize;
                        if n == o as usize {
                            continue;
                        }
                        loss += update(n, false, &mut table, &mut grad_center);
                    }
                    let v = &mut table.input_vectors[c * d..(c + 1) * d];
                    for k in 0..d {
                        v[k] -= lr * grad_center[k];
                    }
                    epoch_loss += loss;
                    pairs += 1;
                }
            }
        }
        let mean = if pairs == 0 { 0.0 } else { epoch_loss / pairs as f64 };
        if !mean.is_finite() {
            return Err(TokenError::NonFiniteLoss);
        }
        table.loss_history.push(mean);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_vectors_give_two_ln_two() {
        let z = [0.0; 4];
        let loss = pair_loss(&z, &z, &[&z]);
        assert!((loss - 2.0 * core::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn sampler_respects_zero_counts() {
        let s = NegativeSampler::new(&[0, 3, 0, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let id = s.sample(&mut rng);
            assert!(id == 1 || id == 3);
        }
    }
}
