use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::corpus::{CloneLabel, PairExample};
use crate::detect::Prediction;

pub const DEFAULT_BUCKETS: [f64; 7] = [0.0, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

/// One misclassified pair. Confidence is the probability the wrong detector
/// gave to its own (wrong) answer; with both wrong, the larger of the two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEntry {
    pub pair_id: String,
    pub unit_a: String,
    pub unit_b: String,
    pub label: CloneLabel,
    pub sequence_probability: f64,
    pub graph_probability: f64,
    pub confidence: f64,
    pub snippet_a: Option<String>,
    pub snippet_b: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorSections {
    pub both_wrong: Vec<ErrorEntry>,
    pub only_sequence_wrong: Vec<ErrorEntry>,
    pub only_graph_wrong: Vec<ErrorEntry>,
}

impl ErrorSections {
    pub fn len(&self) -> usize {
        self.both_wrong.len() + self.only_sequence_wrong.len() + self.only_graph_wrong.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn sort(&mut self) {
        for s in [&mut self.both_wrong, &mut self.only_sequence_wrong, &mut self.only_graph_wrong] {
            s.sort_by(|x, y| y.confidence.total_cmp(&x.confidence).then_with(|| x.pair_id.cmp(&y.pair_id)));
        }
    }
}

/// Wrong predictions per detector whose confidence falls in `[lower, upper)`
/// (the last bucket is closed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketCount {
    pub lower: f64,
    pub upper: f64,
    pub sequence: usize,
    pub graph: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub false_positives: ErrorSections,
    pub false_negatives: ErrorSections,
    pub histogram: Vec<BucketCount>,
    pub sequence_errors: usize,
    pub graph_errors: usize,
}

fn confidence(p: &Prediction) -> f64 {
    if p.clone {
        p.probability
    } else {
        1.0 - p.probability
    }
}

fn bucket_of(edges: &[f64], x: f64) -> usize {
    let last = edges.len() - 2;
    edges[1..edges.len() - 1].iter().take_while(|&&e| x >= e).count().min(last)
}

/// Cross-tabulates the errors of the two detectors over the same pairs.
/// `sources` maps unit ids to source text for inlined snippets.
pub fn error_report(
    pairs: &[PairExample],
    sequence: &[Prediction],
    graph: &[Prediction],
    sources: &BTreeMap<String, String>,
    buckets: &[f64],
) -> Result<ErrorReport, EvalError> {
    if buckets.len() < 2 || buckets.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(EvalError::InvalidBuckets);
    }
    let index = |preds: &[Prediction]| -> BTreeMap<String, Prediction> { preds.iter().map(|p| (p.pair_id.clone(), p.clone())).collect() };
    let (seq, gr) = (index(sequence), index(graph));
    let mut histogram: Vec<BucketCount> = buckets
        .windows(2)
        .map(|w| BucketCount {
            lower: w[0],
            upper: w[1],
            sequence: 0,
            graph: 0,
        })
        .collect();
    let mut report = ErrorReport {
        false_positives: ErrorSections::default(),
        false_negatives: ErrorSections::default(),
        histogram: Vec::new(),
        sequence_errors: 0,
        graph_errors: 0,
    };
    for pair in pairs {
        let missing = || EvalError::MissingPrediction(pair.pair_id.clone());
        let s = seq.get(&pair.pair_id).ok_or_else(missing)?;
        let g = gr.get(&pair.pair_id).ok_or_else(missing)?;
        let truth = pair.label.is_clone();
        let (s_wrong, g_wrong) = (s.clone != truth, g.clone != truth);
        if s_wrong {
            report.sequence_errors += 1;
            histogram[bucket_of(buckets, confidence(s))].sequence += 1;
        }
        if g_wrong {
            report.graph_errors += 1;
            histogram[bucket_of(buckets, confidence(g))].graph += 1;
        }
        if !s_wrong && !g_wrong {
            continue;
        }
        let conf = match (s_wrong, g_wrong) {
            (true, true) => confidence(s).max(confidence(g)),
            (true, false) => confidence(s),
            _ => confidence(g),
        };
        let entry = ErrorEntry {
            pair_id: pair.pair_id.clone(),
            unit_a: pair.unit_a.clone(),
            unit_b: pair.unit_b.clone(),
            label: pair.label,
            sequence_probability: s.probability,
            graph_probability: g.probability,
            confidence: conf,
            snippet_a: sources.get(&pair.unit_a).cloned(),
            snippet_b: sources.get(&pair.unit_b).cloned(),
        };
        let sections = if truth { &mut report.false_negatives } else { &mut report.false_positives };
        match (s_wrong, g_wrong) {
            (true, true) => sections.both_wrong.push(entry),
            (true, false) => sections.only_sequence_wrong.push(entry),
            _ => sections.only_graph_wrong.push(entry),
        }
    }
    report.false_positives.sort();
    report.false_negatives.sort();
    report.histogram = histogram;
    Ok(report)
}

impl ErrorReport {
    /// Plain-text rendering with the sources inlined.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "errors: sequence {}, graph {}", self.sequence_errors, self.graph_errors);
        let _ = writeln!(out, "\nconfidence histogram (sequence / graph)");
        for b in &self.histogram {
            let _ = writeln!(out, "  [{:.2}, {:.2}{}  {:>5} {:>5}", b.lower, b.upper, if b.upper >= 1.0 { "]" } else { ")" }, b.sequence, b.graph);
        }
        for (title, sections) in [("FALSE POSITIVES", &self.false_positives), ("FALSE NEGATIVES", &self.false_negatives)] {
            let _ = writeln!(out, "\n== {title} ({}) ==", sections.len());
            for (name, entries) in [
                ("both wrong", &sections.both_wrong),
                ("only sequence wrong", &sections.only_sequence_wrong),
                ("only graph wrong", &sections.only_graph_wrong),
            ] {
                let _ = writeln!(out, "\n-- {name} ({}) --", entries.len());
                for e in entries {
                    let _ = writeln!(
                        out,
                        "\n{}  confidence {:.4}  sequence p={:.4}  graph p={:.4}",
                        e.pair_id, e.confidence, e.sequence_probability, e.graph_probability
                    );
                    for (id, snippet) in [(&e.unit_a, &e.snippet_a), (&e.unit_b, &e.snippet_b)] {
                        let _ = writeln!(out, "  {id}:");
                        match snippet {
                            Some(text) => {
                                for line in text.lines() {
                                    let _ = writeln!(out, "    | {line}");
                                }
                            }
                            None => out.push_str("    (source unavailable)\n"),
                        }
                    }
                }
            }
        }
        out
    }
}
