use std::fs;
use std::path::Path;

use crossclone::canonical::{file_sha256, read_json};
use crossclone::checkpoint::load_detector;
use crossclone::detectors::DetectorKind;
use crossclone::experiment::{run_experiment, ExperimentId, ExperimentSpec, RunChecksums};
use crossclone::report::render_run;
use crossclone::suite::{build_suite, Suite, SuiteConfig};
use crossclone::LabError;
use crossclone_core::corpus::SplitSizes;
use tempfile::TempDir;

fn small_suite() -> (TempDir, Suite) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SuiteConfig {
        clusters: 24,
        variants: 4,
        sizes: SplitSizes::balanced(120, 40, 60),
        mixed_sizes: SplitSizes::balanced(60, 20, 30),
        ..SuiteConfig::default()
    };
    let suite = build_suite(dir.path(), &cfg).unwrap();
    (dir, suite)
}

fn quick(id: ExperimentId, train: &[&str], eval: &[&str]) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(id, train, eval);
    spec.bootstrap.resamples = 1000;
    spec.overrides.classifier_epochs = Some(20);
    spec.overrides.embedding_epochs = Some(1);
    spec.overrides.embedding_dim = Some(16);
    spec
}

#[test]
fn zero_shot_rejects_overlapping_languages() {
    let (dir, suite) = small_suite();
    let run = dir.path().join("runs/overlap");
    for eval in ["python.manifest.json", "mixed.manifest.json"] {
        let spec = quick(ExperimentId::Exp3, &["python.manifest.json"], &[eval]);
        let e = run_experiment(&spec, &suite.dir, &run, false).unwrap_err();
        assert!(matches!(e, LabError::Config(_)), "{e}");
        assert!(e.to_string().contains("python"), "{e}");
    }
    assert!(!run.exists());
}

#[test]
fn zero_shot_run_keeps_checkpoints_unchanged() {
    let (dir, suite) = small_suite();
    let run = dir.path().join("runs/exp3");
    let spec = quick(ExperimentId::Exp3, &["java.manifest.json"], &["python.manifest.json"]);
    let out = run_experiment(&spec, &suite.dir, &run, false).unwrap();
    assert_eq!(out.reports.len(), 2);
    assert_eq!(out.checksums.checkpoints, out.checksums.checkpoints_after_eval);

    let stored: RunChecksums = read_json(&run.join("checksums.json")).unwrap();
    assert_eq!(stored, out.checksums);
    for (file, sum) in &stored.checkpoints {
        assert_eq!(&file_sha256(&run.join(file)).unwrap(), sum, "{file}");
    }
    for (file, sum) in &stored.reports {
        assert_eq!(&file_sha256(&run.join(file)).unwrap(), sum, "{file}");
    }

    let seq = load_detector(&run.join("checkpoints/sequence")).unwrap();
    assert_eq!(seq.kind, DetectorKind::Sequence);
    let text = fs::read_to_string(run.join("predictions/python/graph.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 60);
}

#[test]
fn existing_run_directory_needs_overwrite() {
    let (dir, suite) = small_suite();
    let run = dir.path().join("runs/exp1");
    let spec = quick(ExperimentId::Exp1, &["python.manifest.json"], &["python.manifest.json"]);
    run_experiment(&spec, &suite.dir, &run, false).unwrap();
    let before = fs::read(run.join("reports/python/graph.json")).unwrap();
    let e = run_experiment(&spec, &suite.dir, &run, false).unwrap_err();
    assert!(matches!(e, LabError::Config(_)), "{e}");
    run_experiment(&spec, &suite.dir, &run, true).unwrap();
    assert_eq!(fs::read(run.join("reports/python/graph.json")).unwrap(), before);
}

fn has_absolute_paths(root: &Path, needle: &str) -> Vec<String> {
    walkdir::WalkDir::new(root)
        .into_iter()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file())
        .filter(|e| fs::read_to_string(e.path()).map(|t| t.contains(needle)).unwrap_or(false))
        .map(|e| e.path().display().to_string())
        .collect()
}

#[test]
fn mixed_run_reports_every_eval_set_and_renders() {
    let (dir, suite) = small_suite();
    let run = dir.path().join("runs/exp2");
    let spec = quick(
        ExperimentId::Exp2,
        &["mixed.manifest.json"],
        &["mixed.manifest.json", "python.manifest.json", "java.manifest.json"],
    );
    let out = run_experiment(&spec, &suite.dir, &run, false).unwrap();
    assert_eq!(out.reports.len(), 6);
    assert_eq!(out.comparisons.len(), 3);
    for eval in ["mixed", "python", "java"] {
        for kind in DetectorKind::ALL {
            assert!(out.report(eval, kind).is_some(), "{eval}/{kind}");
        }
        let cmp = out.comparison(eval).unwrap();
        let better = out.report(eval, cmp.better).unwrap().metrics.f1;
        let other = out.report(eval, cmp.other).unwrap().metrics.f1;
        assert!(better >= other);
    }

    let summary = fs::read_to_string(run.join("summary.txt")).unwrap();
    assert_eq!(render_run(&run).unwrap(), summary);
    for header in ["Train Dataset", "Eval Dataset", "Model", "F1", "Epoch"] {
        assert!(summary.contains(header), "{header}");
    }
    assert_eq!(summary.matches("graph").count(), summary.matches("sequence").count());
    assert!(has_absolute_paths(&run, &dir.path().display().to_string()).is_empty());
}
