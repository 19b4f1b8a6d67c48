use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::corpus::{CloneLabel, PairExample};
use crate::detect::Prediction;

fn bits(s: &str) -> Vec<bool> {
    s.bytes().map(|b| b == b'1').collect()
}

fn assert_identities(r: &MetricsReport) {
    let c = r.confusion;
    assert_eq!(c.n(), r.n);
    assert!((r.accuracy - (c.tp + c.tn) as f64 / r.n as f64).abs() < 1e-15);
    for k in [r.clone, r.not_clone] {
        let h = if k.precision + k.recall == 0.0 { 0.0 } else { 2.0 * k.precision * k.recall / (k.precision + k.recall) };
        assert!((k.f1 - h).abs() < 1e-15);
    }
    assert!((r.f1 - (r.clone.f1 + r.not_clone.f1) / 2.0).abs() < 1e-15);
    assert!((r.precision - (r.clone.precision + r.not_clone.precision) / 2.0).abs() < 1e-15);
    assert!((r.recall - (r.clone.recall + r.not_clone.recall) / 2.0).abs() < 1e-15);
}

#[test]
fn perfect_and_constant_predictions() {
    let actual: Vec<bool> = (0..4000).map(|i| i % 2 == 0).collect();
    let r = evaluate(&actual, &actual).unwrap();
    assert_eq!((r.accuracy, r.precision, r.recall, r.f1), (1.0, 1.0, 1.0, 1.0));
    assert_identities(&r);

    let r = evaluate(&vec![true; 4000], &actual).unwrap();
    assert_eq!(r.accuracy, 0.5);
    assert_eq!(r.clone.recall, 1.0);
    assert_eq!(r.not_clone.recall, 0.0);
    assert_eq!(r.not_clone.precision, 0.0);
    assert_identities(&r);
}

#[test]
fn hand_counted_twenty() {
    let pred = bits("11010011101000110101");
    let gold = bits("10011010110100101101");
    let m = confusion_matrix(&pred, &gold).unwrap();
    assert_eq!(m, ConfusionMatrix { tp: 7, fp: 4, fn_: 4, tn: 5 });
    let r = evaluate(&pred, &gold).unwrap();
    assert_eq!(r.accuracy, 12.0 / 20.0);
    assert!((r.clone.f1 - 7.0 / 11.0).abs() < 1e-15);
    assert!((r.not_clone.precision - 5.0 / 9.0).abs() < 1e-15);
    assert!((r.f1 - (7.0 / 11.0 + 5.0 / 9.0) / 2.0).abs() < 1e-15);
    // Supports are 11 clones and 9 non-clones.
    let w = 11.0 / 20.0 * (7.0 / 11.0) + 9.0 / 20.0 * (5.0 / 9.0);
    assert!((r.weighted.f1 - w).abs() < 1e-15);
    assert_eq!(r.positive.f1, r.clone.f1);
    assert_identities(&r);
}

#[test]
fn confusion_cells() {
    assert_eq!(confusion_matrix(&[false; 6], &[false; 6]).unwrap(), ConfusionMatrix { tp: 0, fp: 0, fn_: 0, tn: 6 });
    // Gold alternates clone/not; predictions are right on even indices only.
    let gold: Vec<bool> = (0..8).map(|i| i % 2 == 0).collect();
    let pred: Vec<bool> = (0..8).map(|i| if i % 4 < 2 { gold[i] } else { !gold[i] }).collect();
    let m = confusion_matrix(&pred, &gold).unwrap();
    assert_eq!(m, ConfusionMatrix { tp: 2, fp: 2, fn_: 2, tn: 2 });
    assert_eq!(m.accuracy(), evaluate(&pred, &gold).unwrap().accuracy);
}

#[test]
fn evaluation_errors() {
    assert_eq!(evaluate(&[], &[]), Err(EvalError::EmptyEval));
    assert_eq!(evaluate(&[true], &[true, false]), Err(EvalError::LengthMismatch { left: 1, right: 2 }));
    assert!(confusion_matrix(&[true], &[]).is_err());
}

fn random_bits(n: usize, seed: u64) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_bool(0.5)).collect()
}

#[test]
fn bootstrap_sanity() {
    let gold = random_bits(1000, 1);
    let noise = random_bits(1000, 2);
    let same = bootstrap_compare(&noise, &noise, &gold, Metric::F1, 10_000, 3).unwrap();
    assert_eq!(same.observed_delta, 0.0);
    assert!(same.p_value >= 0.5);

    let r = bootstrap_compare(&gold, &noise, &gold, Metric::F1, 10_000, 3).unwrap();
    assert!(r.p_value < 0.001, "{}", r.p_value);
    assert_eq!(r.p_value, 1.0 / 10_001.0);
    let again = bootstrap_compare(&gold, &noise, &gold, Metric::F1, 10_000, 3).unwrap();
    assert_eq!(r.p_value.to_bits(), again.p_value.to_bits());
    assert_eq!(r, again);
    assert!(r.significant(0.05));
}

#[test]
fn bootstrap_p_is_bounded_and_monotone() {
    let gold = random_bits(200, 4);
    let b = random_bits(200, 5);
    let mut a = random_bits(200, 6);
    let mut last = f64::INFINITY;
    // Fix A's mistakes one at a time; p never rises.
    for i in 0..gold.len() {
        if a[i] != gold[i] {
            a[i] = gold[i];
            let r = bootstrap_compare(&a, &b, &gold, Metric::Accuracy, 2000, 9).unwrap();
            assert!(r.p_value >= 1.0 / 2001.0 && r.p_value <= 1.0);
            assert!(r.p_value <= last + 1e-12, "{} > {last}", r.p_value);
            last = r.p_value;
        }
    }
    assert_eq!(
        bootstrap_compare(&a, &b, &gold, Metric::F1, 999, 0),
        Err(EvalError::TooFewResamples { found: 999, min: 1000 })
    );
    assert!(bootstrap_compare(&a[1..], &b, &gold, Metric::F1, 1000, 0).is_err());
}

fn pred(id: &str, probability: f64) -> Prediction {
    Prediction {
        pair_id: id.into(),
        probability,
        clone: probability >= 0.5,
        threshold: 0.5,
    }
}

#[test]
fn error_report_sections() {
    let pairs = vec![
        PairExample::new("a", "b", CloneLabel::NotClone),
        PairExample::new("c", "d", CloneLabel::NotClone),
        PairExample::new("e", "f", CloneLabel::Clone),
        PairExample::new("g", "h", CloneLabel::Clone),
        PairExample::new("i", "j", CloneLabel::NotClone),
    ];
    let seq = [pred("a|b", 0.91), pred("c|d", 0.95), pred("e|f", 0.2), pred("g|h", 0.9), pred("i|j", 0.1)];
    let graph = [pred("a|b", 0.59), pred("c|d", 0.3), pred("e|f", 0.45), pred("g|h", 0.3), pred("i|j", 0.7)];
    let sources = BTreeMap::from([(String::from("a"), String::from("x = 1\nprint(x)"))]);
    let r = error_report(&pairs, &seq, &graph, &sources, &DEFAULT_BUCKETS).unwrap();

    let ids = |v: &[ErrorEntry]| v.iter().map(|e| e.pair_id.clone()).collect::<Vec<_>>();
    assert_eq!(ids(&r.false_positives.both_wrong), ["a|b"]);
    assert_eq!(r.false_positives.both_wrong[0].confidence, 0.91);
    assert_eq!(ids(&r.false_positives.only_sequence_wrong), ["c|d"]);
    assert_eq!(ids(&r.false_positives.only_graph_wrong), ["i|j"]);
    assert_eq!(ids(&r.false_negatives.both_wrong), ["e|f"]);
    assert!((r.false_negatives.both_wrong[0].confidence - 0.8).abs() < 1e-12);
    assert_eq!(ids(&r.false_negatives.only_graph_wrong), ["g|h"]);
    assert_eq!((r.sequence_errors, r.graph_errors), (3, 4));
    let total: usize = r.histogram.iter().map(|b| b.sequence + b.graph).sum();
    assert_eq!(total, r.sequence_errors + r.graph_errors);
    assert_eq!(r.false_positives.both_wrong[0].snippet_a.as_deref(), Some("x = 1\nprint(x)"));
    let text = r.render();
    assert!(text.contains("    | print(x)"));
    assert!(text.contains("a|b  confidence 0.9100"));
}

#[test]
fn error_report_orders_by_confidence() {
    let pairs = vec![
        PairExample::new("a", "b", CloneLabel::NotClone),
        PairExample::new("c", "d", CloneLabel::NotClone),
        PairExample::new("e", "f", CloneLabel::NotClone),
    ];
    let seq = [pred("a|b", 0.59), pred("c|d", 0.91), pred("e|f", 0.75)];
    let r = error_report(&pairs, &seq, &seq, &BTreeMap::new(), &DEFAULT_BUCKETS).unwrap();
    let conf: Vec<f64> = r.false_positives.both_wrong.iter().map(|e| e.confidence).collect();
    assert_eq!(conf, [0.91, 0.75, 0.59]);
    let counts: Vec<usize> = r.histogram.iter().map(|b| b.sequence).collect();
    assert_eq!(counts, [0, 1, 0, 1, 0, 1]);
}

#[test]
fn perfect_predictions_have_no_errors() {
    let pairs = vec![PairExample::new("a", "b", CloneLabel::Clone), PairExample::new("c", "d", CloneLabel::NotClone)];
    let p = [pred("a|b", 0.8), pred("c|d", 0.1)];
    let r = error_report(&pairs, &p, &p, &BTreeMap::new(), &DEFAULT_BUCKETS).unwrap();
    assert!(r.false_positives.is_empty() && r.false_negatives.is_empty());
    assert!(r.histogram.iter().all(|b| b.sequence + b.graph == 0));
    assert_eq!(error_report(&pairs, &p, &p[..1], &BTreeMap::new(), &DEFAULT_BUCKETS), Err(EvalError::MissingPrediction("c|d".into())));
    assert_eq!(error_report(&pairs, &p, &p, &BTreeMap::new(), &[0.5]), Err(EvalError::InvalidBuckets));
}
