//! Plain-text rendering of a run directory, and the per-epoch training CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crossclone_core::detect::ClassifierModel;

use crate::canonical::read_json;
use crate::error::{IoContext, Result};
use crate::experiment::{Comparison, DetectorReport, ExperimentSpec, SIGNIFICANCE};

/// `epoch,train_loss,valid_f1`; the selected epoch is marked in a fourth
/// column.
pub fn training_csv(model: &ClassifierModel) -> String {
    let mut out = String::from("epoch,train_loss,valid_f1,selected\n");
    for r in &model.history {
        let f1 = r.valid_f1.map(|v| format!("{v:.6}")).unwrap_or_default();
        let selected = model.selected_epoch == Some(r.epoch);
        let _ = writeln!(out, "{},{:.6},{},{}", r.epoch, r.train_loss, f1, selected as u8);
    }
    out
}

fn json_files(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| crate::LabError::Io {
            path: dir.into(),
            source: e.into(),
        })?;
        if entry.file_type().is_file() && entry.path().extension().is_some_and(|e| e == "json") {
            out.push(entry.into_path());
        }
    }
    Ok(out)
}

fn pct(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

/// Table of accuracy, macro precision, recall and F1 per (train, eval,
/// detector), with `*` on the F1 of a detector that beats the other one on
/// the same eval set at p < 0.05, followed by the bootstrap lines.
pub fn render_run(run_dir: &Path) -> Result<String> {
    let spec: ExperimentSpec = read_json(&run_dir.join("spec.json"))?;
    let mut reports: Vec<DetectorReport> = json_files(&run_dir.join("reports"))?
        .iter()
        .map(|p| read_json(p))
        .collect::<Result<_>>()?;
    reports.sort_by(|a, b| a.eval.cmp(&b.eval).then(a.detector.cmp(&b.detector)));
    let comparisons: Vec<Comparison> = json_files(&run_dir.join("bootstrap"))?
        .iter()
        .map(|p| read_json(p))
        .collect::<Result<_>>()?;

    let mut out = String::new();
    let train = reports.first().map(|r| r.train.join("+")).unwrap_or_default();
    let _ = writeln!(out, "{}: train on {}\n", spec.id.as_str(), if train.is_empty() { "-" } else { &train });
    let _ = writeln!(
        out,
        "{:<16} {:<16} {:<10} {:>7} {:>7} {:>7} {:>8}  Epoch",
        "Train Dataset", "Eval Dataset", "Model", "A", "P", "R", "F1"
    );
    for r in &reports {
        let star = comparisons
            .iter()
            .any(|c| c.eval == r.eval && c.better == r.detector && c.significant);
        let m = &r.metrics;
        let epoch = r.selected_epoch.map(|e| e.to_string()).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{:<16} {:<16} {:<10} {:>7} {:>7} {:>7} {:>8}  {}",
            r.train.join("+"),
            r.eval,
            r.detector.as_str(),
            pct(m.accuracy),
            pct(m.precision),
            pct(m.recall),
            format!("{}{}", pct(m.f1), if star { "*" } else { " " }),
            epoch
        );
    }
    if !comparisons.is_empty() {
        let _ = writeln!(
            out,
            "\n* better on that eval set by paired bootstrap (one-sided, {}, B={}, p < {SIGNIFICANCE})\n",
            spec.bootstrap.metric.as_str(),
            spec.bootstrap.resamples
        );
        for c in &comparisons {
            let _ = writeln!(
                out,
                "{}: {} - {} = {:+.2} {} points, p = {:.4}",
                c.eval,
                c.better.as_str(),
                c.other.as_str(),
                100.0 * c.result.observed_delta,
                c.result.metric.as_str(),
                c.result.p_value
            );
        }
    }
    Ok(out)
}

/// Re-renders `summary.txt` from the JSON files of a run directory.
pub fn rewrite_summary(run_dir: &Path) -> Result<String> {
    let text = render_run(run_dir)?;
    let path = run_dir.join("summary.txt");
    fs::write(&path, &text).at(&path)?;
    Ok(text)
}
