//! Binary clone-detection metrics, a paired bootstrap test between two
//! systems, and the false-positive/false-negative analysis report.
//!
//! Clone is the positive class throughout. Headline precision, recall and F1
//! are macro averages over the two classes; weighted and positive-class
//! averages are carried alongside.

mod bootstrap;
mod errors;

pub use bootstrap::{bootstrap_compare, BootstrapResult, Metric, DEFAULT_RESAMPLES};
pub use errors::{error_report, BucketCount, ErrorEntry, ErrorReport, ErrorSections, DEFAULT_BUCKETS};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("nothing to evaluate")]
    EmptyEval,
    #[error("bootstrap needs at least {min} resamples, got {found}")]
    TooFewResamples { found: usize, min: usize },
    #[error("bucket edges must be at least two increasing values")]
    InvalidBuckets,
    #[error("pair {0} has no prediction from one of the detectors")]
    MissingPrediction(alloc::string::String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn n(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.n())
    }

    pub fn clone_class(&self) -> ClassMetrics {
        ClassMetrics::from_counts(self.tp, self.fp, self.fn_)
    }

    /// The negative class seen as positive: its true positives are our TNs.
    pub fn not_clone_class(&self) -> ClassMetrics {
        ClassMetrics::from_counts(self.tn, self.fn_, self.fp)
    }

    pub(crate) fn add(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }
}

/// 0 when the denominator is 0.
fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Number of gold examples of the class.
    pub support: usize,
}

impl ClassMetrics {
    fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        ClassMetrics {
            precision,
            recall,
            f1: harmonic(precision, recall),
            support: tp + fn_,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n: usize,
    pub accuracy: f64,
    /// Macro averages.
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub clone: ClassMetrics,
    pub not_clone: ClassMetrics,
    pub weighted: Averages,
    pub positive: Averages,
    pub confusion: ConfusionMatrix,
}

impl MetricsReport {
    pub fn from_confusion(confusion: ConfusionMatrix) -> Self {
        let clone = confusion.clone_class();
        let not_clone = confusion.not_clone_class();
        let n = confusion.n();
        let (wc, wn) = (ratio(clone.support, n), ratio(not_clone.support, n));
        MetricsReport {
            n,
            accuracy: confusion.accuracy(),
            precision: (clone.precision + not_clone.precision) / 2.0,
            recall: (clone.recall + not_clone.recall) / 2.0,
            f1: (clone.f1 + not_clone.f1) / 2.0,
            weighted: Averages {
                precision: wc * clone.precision + wn * not_clone.precision,
                recall: wc * clone.recall + wn * not_clone.recall,
                f1: wc * clone.f1 + wn * not_clone.f1,
            },
            positive: Averages {
                precision: clone.precision,
                recall: clone.recall,
                f1: clone.f1,
            },
            clone,
            not_clone,
            confusion,
        }
    }
}

fn check_lengths(predicted: &[bool], actual: &[bool]) -> Result<(), EvalError> {
    if predicted.len() != actual.len() {
        return Err(EvalError::LengthMismatch {
            left: predicted.len(),
            right: actual.len(),
        });
    }
    Ok(())
}

/// `true` means Clone in both vectors.
pub fn confusion_matrix(predicted: &[bool], actual: &[bool]) -> Result<ConfusionMatrix, EvalError> {
    check_lengths(predicted, actual)?;
    let mut m = ConfusionMatrix::default();
    for (&p, &a) in predicted.iter().zip(actual) {
        m.add(p, a);
    }
    Ok(m)
}

pub fn evaluate(predicted: &[bool], actual: &[bool]) -> Result<MetricsReport, EvalError> {
    check_lengths(predicted, actual)?;
    if predicted.is_empty() {
        return Err(EvalError::EmptyEval);
    }
    Ok(MetricsReport::from_confusion(confusion_matrix(predicted, actual)?))
}

#[cfg(test)]
mod tests;
