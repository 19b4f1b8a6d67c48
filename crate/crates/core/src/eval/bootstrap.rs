use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_lengths, ConfusionMatrix, EvalError, MetricsReport};

pub const DEFAULT_RESAMPLES: usize = 10_000;
const MIN_RESAMPLES: usize = 1_000;

/// Macro-averaged metric compared by the bootstrap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    F1,
    Accuracy,
    Precision,
    Recall,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::F1 => "f1",
            Metric::Accuracy => "accuracy",
            Metric::Precision => "precision",
            Metric::Recall => "recall",
        }
    }

    pub fn of(self, report: &MetricsReport) -> f64 {
        match self {
            Metric::F1 => report.f1,
            Metric::Accuracy => report.accuracy,
            Metric::Precision => report.precision,
            Metric::Recall => report.recall,
        }
    }

    fn on(self, m: ConfusionMatrix) -> f64 {
        self.of(&MetricsReport::from_confusion(m))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub metric: Metric,
    pub metric_a: f64,
    pub metric_b: f64,
    /// `metric_a - metric_b` on the full evaluation set.
    pub observed_delta: f64,
    pub resamples: usize,
    /// One-sided: small when A is reliably better than B.
    pub p_value: f64,
    pub seed: u64,
}

impl BootstrapResult {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Paired bootstrap: both systems are scored on the same resampled indices.
/// `p = (#{Δ_b ≤ 0} + 1) / (B + 1)`.
pub fn bootstrap_compare(
    preds_a: &[bool],
    preds_b: &[bool],
    actual: &[bool],
    metric: Metric,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapResult, EvalError> {
    check_lengths(preds_a, actual)?;
    check_lengths(preds_b, actual)?;
    if actual.is_empty() {
        return Err(EvalError::EmptyEval);
    }
    if resamples < MIN_RESAMPLES {
        return Err(EvalError::TooFewResamples {
            found: resamples,
            min: MIN_RESAMPLES,
        });
    }
    let n = actual.len();
    // Each example reduces to one of eight outcomes, so a resample only
    // needs outcome counts.
    let codes: alloc::vec::Vec<u8> = (0..n)
        .map(|i| (preds_a[i] as u8) << 2 | (preds_b[i] as u8) << 1 | actual[i] as u8)
        .collect();
    let matrices = |counts: &[usize; 8]| {
        let (mut a, mut b) = (ConfusionMatrix::default(), ConfusionMatrix::default());
        for (code, &c) in counts.iter().enumerate() {
            let (pa, pb, y) = (code & 4 != 0, code & 2 != 0, code & 1 != 0);
            for m in [(&mut a, pa), (&mut b, pb)] {
                let cell = match (m.1, y) {
                    (true, true) => &mut m.0.tp,
                    (true, false) => &mut m.0.fp,
                    (false, true) => &mut m.0.fn_,
                    (false, false) => &mut m.0.tn,
                };
                *cell += c;
            }
        }
        (a, b)
    };

    let mut full = [0usize; 8];
    for &c in &codes {
        full[c as usize] += 1;
    }
    let (ma, mb) = matrices(&full);
    let (metric_a, metric_b) = (metric.on(ma), metric.on(mb));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut not_better = 0usize;
    for _ in 0..resamples {
        let mut counts = [0usize; 8];
        for _ in 0..n {
            counts[codes[rng.gen_range(0..n)] as usize] += 1;
        }
        let (a, b) = matrices(&counts);
        if metric.on(a) - metric.on(b) <= 0.0 {
            not_better += 1;
        }
    }
    Ok(BootstrapResult {
        metric,
        metric_a,
        metric_b,
        observed_delta: metric_a - metric_b,
        resamples,
        p_value: (not_better + 1) as f64 / (resamples + 1) as f64,
        seed,
    })
}
