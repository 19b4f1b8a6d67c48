//! End-to-end experiments: train the requested detectors on the train
//! manifests, evaluate on the test split of every eval manifest, compare the
//! detectors by paired bootstrap and write a self-contained run directory.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use crossclone_core::corpus::PairExample;
use crossclone_core::detect::Prediction;
use crossclone_core::eval::{bootstrap_compare, error_report, evaluate, BootstrapResult, Metric, MetricsReport, DEFAULT_BUCKETS, DEFAULT_RESAMPLES};
use crossclone_core::Language;
use serde::{Deserialize, Serialize};

use crate::canonical::{file_sha256, read_json, write_json, write_text};
use crate::checkpoint::{checksum_files, save_detector, Checksums};
use crate::detectors::{DetectorKind, DetectorSettings, TrainedDetector, UnitIndex};
use crate::error::{IoContext, LabError, Result};
use crate::report::{render_run, training_csv};
use crate::store::StoredDataset;

/// Environment variable naming the directory that holds run directories.
pub const RUNS_ENV: &str = "CROSSCLONE_RUNS";
pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExperimentId {
    #[serde(rename = "exp1", alias = "Exp1")]
    Exp1,
    #[serde(rename = "exp2", alias = "Exp2")]
    Exp2,
    #[serde(rename = "exp3", alias = "Exp3")]
    Exp3,
}

impl ExperimentId {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::Exp1 => "exp1",
            ExperimentId::Exp2 => "exp2",
            ExperimentId::Exp3 => "exp3",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub embedding: u64,
    pub classifier: u64,
    pub bootstrap: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds {
            embedding: 1,
            classifier: 2,
            bootstrap: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapSpec {
    #[serde(rename = "B")]
    pub resamples: usize,
    pub metric: Metric,
}

impl Default for BootstrapSpec {
    fn default() -> Self {
        BootstrapSpec {
            resamples: DEFAULT_RESAMPLES,
            metric: Metric::F1,
        }
    }
}

/// Optional hyperparameter overrides; unset fields keep the defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocab_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding_epochs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classifier_epochs: Option<usize>,
}

fn default_detectors() -> Vec<DetectorKind> {
    DetectorKind::ALL.to_vec()
}

fn default_threshold() -> f64 {
    crossclone_core::detect::DEFAULT_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    /// Run directory name; defaults to the experiment id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Manifest paths, relative to the spec file.
    pub train: Vec<String>,
    pub eval: Vec<String>,
    #[serde(default = "default_detectors")]
    pub detectors: Vec<DetectorKind>,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub bootstrap: BootstrapSpec,
    #[serde(default)]
    pub overrides: Overrides,
}

impl ExperimentSpec {
    pub fn new(id: ExperimentId, train: &[&str], eval: &[&str]) -> Self {
        ExperimentSpec {
            id,
            name: None,
            train: train.iter().map(|s| s.to_string()).collect(),
            eval: eval.iter().map(|s| s.to_string()).collect(),
            detectors: default_detectors(),
            seeds: Seeds::default(),
            threshold: default_threshold(),
            bootstrap: BootstrapSpec::default(),
            overrides: Overrides::default(),
        }
    }

    pub fn run_name(&self) -> &str {
        self.name.as_deref().unwrap_or(self.id.as_str())
    }

    pub fn settings(&self) -> DetectorSettings {
        let mut s = DetectorSettings::with_seeds(self.seeds.embedding, self.seeds.classifier);
        s.threshold = self.threshold;
        let o = self.overrides;
        if let Some(v) = o.vocab_size {
            s.vocab_size = v;
        }
        if let Some(v) = o.embedding_dim {
            s.sgns.dim = v;
        }
        if let Some(v) = o.embedding_epochs {
            s.sgns.epochs = v;
        }
        if let Some(v) = o.classifier_epochs {
            s.classifier.epochs = v;
        }
        s
    }

    fn validate(&self) -> Result<()> {
        if self.train.is_empty() || self.eval.is_empty() {
            return Err(LabError::Config("experiment needs at least one train and one eval manifest".into()));
        }
        if self.detectors.is_empty() {
            return Err(LabError::Config("experiment needs at least one detector".into()));
        }
        let distinct: BTreeSet<_> = self.detectors.iter().collect();
        if distinct.len() != self.detectors.len() {
            return Err(LabError::Config("detectors are listed twice".into()));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(LabError::Config(format!("threshold {} outside [0, 1]", self.threshold)));
        }
        Ok(())
    }
}

/// One metrics file per (detector, eval set).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorReport {
    pub experiment: ExperimentId,
    pub train: Vec<String>,
    pub eval: String,
    pub detector: DetectorKind,
    pub selected_epoch: Option<usize>,
    pub threshold: f64,
    pub metrics: MetricsReport,
}

/// Bootstrap comparison on one eval set, with the better system first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub eval: String,
    pub better: DetectorKind,
    pub other: DetectorKind,
    pub significant: bool,
    pub result: BootstrapResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunChecksums {
    /// Manifest path as written in the spec, to its checksum.
    pub manifests: BTreeMap<String, String>,
    /// Checkpoint files relative to the run directory, hashed after training.
    pub checkpoints: BTreeMap<String, String>,
    /// The same files hashed again after evaluation.
    pub checkpoints_after_eval: BTreeMap<String, String>,
    /// Every report file relative to the run directory.
    pub reports: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub reports: Vec<DetectorReport>,
    pub comparisons: Vec<Comparison>,
    pub checksums: RunChecksums,
}

impl RunOutcome {
    pub fn report(&self, eval: &str, detector: DetectorKind) -> Option<&DetectorReport> {
        self.reports.iter().find(|r| r.eval == eval && r.detector == detector)
    }

    pub fn comparison(&self, eval: &str) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.eval == eval)
    }
}

/// `$CROSSCLONE_RUNS`, or `runs` in the working directory.
pub fn runs_root() -> PathBuf {
    std::env::var_os(RUNS_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"))
}

fn languages(ds: &StoredDataset, index: &UnitIndex) -> Result<BTreeSet<Language>> {
    if !ds.manifest.languages.is_empty() {
        return Ok(ds.manifest.languages.iter().copied().collect());
    }
    let mut langs = BTreeSet::new();
    for p in ds.manifest.all_pairs() {
        langs.insert(index.get(&p.unit_a)?.language);
        langs.insert(index.get(&p.unit_b)?.language);
    }
    Ok(langs)
}

fn merged_split(sets: &[StoredDataset], split: &str) -> Result<Vec<PairExample>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for ds in sets {
        for p in ds.split(split)? {
            if seen.insert(p.pair_id.clone()) {
                out.push(p.clone());
            }
        }
    }
    Ok(out)
}

fn eval_names(sets: &[StoredDataset]) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for ds in sets {
        let base = ds.manifest.name.replace(['/', '\\'], "_");
        let mut name = base.clone();
        let mut k = 2;
        while names.contains(&name) {
            name = format!("{base}-{k}");
            k += 1;
        }
        names.push(name);
    }
    names
}

fn write_predictions(path: &Path, preds: &[Prediction]) -> Result<String> {
    let mut text = String::new();
    for p in preds {
        text.push_str(&serde_json::to_string(p).map_err(|source| LabError::Json { path: path.into(), source })?);
        text.push('\n');
    }
    write_text(path, &text)
}

/// Loads the spec at `spec_path` and runs it under `runs_root`.
pub fn run_spec_file(spec_path: &Path, runs_root: &Path, overwrite: bool) -> Result<RunOutcome> {
    let spec: ExperimentSpec = read_json(spec_path)?;
    let base = spec_path.parent().unwrap_or(Path::new(""));
    run_experiment(&spec, base, &runs_root.join(spec.run_name()), overwrite)
}

/// Manifest paths in `spec` are resolved against `base`. The run directory
/// must not exist unless `overwrite` is set, in which case it is replaced.
pub fn run_experiment(spec: &ExperimentSpec, base: &Path, run_dir: &Path, overwrite: bool) -> Result<RunOutcome> {
    spec.validate()?;
    let load = |paths: &[String]| -> Result<Vec<StoredDataset>> { paths.iter().map(|p| StoredDataset::load(&base.join(p))).collect() };
    let train_sets = load(&spec.train)?;
    let eval_sets = load(&spec.eval)?;

    let mut train_units = Vec::new();
    for ds in &train_sets {
        train_units.extend(ds.units()?);
    }
    let train_index = UnitIndex::new(train_units);
    let train_pairs = merged_split(&train_sets, "train")?;
    let valid_pairs = merged_split(&train_sets, "valid")?;
    let mut train_langs = BTreeSet::new();
    for ds in &train_sets {
        train_langs.extend(languages(ds, &train_index)?);
    }
    let eval_indices: Vec<UnitIndex> = eval_sets.iter().map(|ds| ds.index()).collect::<Result<_>>()?;

    if spec.id == ExperimentId::Exp3 {
        for (ds, idx) in eval_sets.iter().zip(&eval_indices) {
            let shared: Vec<&str> = languages(ds, idx)?.intersection(&train_langs).map(|l| l.as_str()).collect();
            if !shared.is_empty() {
                return Err(LabError::Config(format!(
                    "zero-shot experiment trains and evaluates on {} (eval manifest `{}`)",
                    shared.join(", "),
                    ds.manifest.name
                )));
            }
        }
        // Guard against manifests whose language tags disagree with their pairs.
        for p in train_pairs.iter().chain(&valid_pairs) {
            for id in [&p.unit_a, &p.unit_b] {
                let lang = train_index.get(id)?.language;
                if !train_langs.contains(&lang) {
                    return Err(LabError::Config(format!("training unit `{id}` is {}", lang.as_str())));
                }
            }
        }
    }

    if run_dir.exists() {
        if !overwrite {
            return Err(LabError::Config(format!("run directory {} already exists", run_dir.display())));
        }
        fs::remove_dir_all(run_dir).at(run_dir)?;
    }
    fs::create_dir_all(run_dir).at(run_dir)?;
    write_json(&run_dir.join("spec.json"), spec)?;

    let settings = spec.settings();
    let mut detectors = Vec::new();
    let mut checkpoints = BTreeMap::new();
    for &kind in &spec.detectors {
        let det = TrainedDetector::train(kind, &train_index, &train_pairs, &valid_pairs, &settings)?;
        let dir = run_dir.join("checkpoints").join(kind.as_str());
        for (file, sum) in save_detector(&dir, &det)? {
            checkpoints.insert(format!("checkpoints/{kind}/{file}"), sum);
        }
        write_text(&run_dir.join("training").join(format!("{kind}.csv")), &training_csv(&det.model))?;
        detectors.push(det);
    }

    let train_names: Vec<String> = train_sets.iter().map(|d| d.manifest.name.clone()).collect();
    let mut reports = Vec::new();
    let mut comparisons = Vec::new();
    for ((ds, index), name) in eval_sets.iter().zip(&eval_indices).zip(eval_names(&eval_sets)) {
        let pairs = ds.split("test")?;
        let actual: Vec<bool> = pairs.iter().map(|p| p.label.is_clone()).collect();
        let mut by_kind: BTreeMap<DetectorKind, Vec<Prediction>> = BTreeMap::new();
        for det in &detectors {
            let preds = det.predict(index, pairs)?;
            let predicted: Vec<bool> = preds.iter().map(|p| p.clone).collect();
            let report = DetectorReport {
                experiment: spec.id,
                train: train_names.clone(),
                eval: name.clone(),
                detector: det.kind,
                selected_epoch: det.model.selected_epoch,
                threshold: det.model.threshold,
                metrics: evaluate(&predicted, &actual)?,
            };
            write_json(&run_dir.join("reports").join(&name).join(format!("{}.json", det.kind)), &report)?;
            write_predictions(&run_dir.join("predictions").join(&name).join(format!("{}.jsonl", det.kind)), &preds)?;
            reports.push(report);
            by_kind.insert(det.kind, preds);
        }
        if let (Some(seq), Some(graph)) = (by_kind.get(&DetectorKind::Sequence), by_kind.get(&DetectorKind::Graph)) {
            let metric = spec.bootstrap.metric;
            let score = |k: DetectorKind| {
                reports
                    .iter()
                    .find(|r| r.eval == name && r.detector == k)
                    .map(|r| metric.of(&r.metrics))
                    .unwrap_or(0.0)
            };
            let (better, other) = if score(DetectorKind::Graph) >= score(DetectorKind::Sequence) {
                (DetectorKind::Graph, DetectorKind::Sequence)
            } else {
                (DetectorKind::Sequence, DetectorKind::Graph)
            };
            let flags = |k: DetectorKind| by_kind[&k].iter().map(|p| p.clone).collect::<Vec<bool>>();
            let result = bootstrap_compare(&flags(better), &flags(other), &actual, metric, spec.bootstrap.resamples, spec.seeds.bootstrap)?;
            let comparison = Comparison {
                eval: name.clone(),
                better,
                other,
                significant: result.significant(SIGNIFICANCE) && result.observed_delta > 0.0,
                result,
            };
            write_json(&run_dir.join("bootstrap").join(format!("{name}.json")), &comparison)?;
            comparisons.push(comparison);

            let errors = error_report(pairs, seq, graph, &index.texts(), &DEFAULT_BUCKETS)?;
            write_json(&run_dir.join("errors").join(format!("{name}.json")), &errors)?;
            write_text(&run_dir.join("errors").join(format!("{name}.txt")), &errors.render())?;
        }
    }

    let checkpoints_after_eval = checksum_files(run_dir, checkpoints.keys().cloned())?;
    if checkpoints_after_eval != checkpoints {
        let path = checkpoints
            .iter()
            .find(|(k, v)| checkpoints_after_eval.get(*k) != Some(v))
            .map(|(k, _)| run_dir.join(k))
            .unwrap_or_else(|| run_dir.into());
        return Err(LabError::ChecksumMismatch {
            path,
            expected: "checkpoint unchanged by evaluation".into(),
            found: "modified".into(),
        });
    }

    write_text(&run_dir.join("summary.txt"), &render_run(run_dir)?)?;

    let mut manifests = BTreeMap::new();
    for p in spec.train.iter().chain(&spec.eval) {
        manifests.insert(p.clone(), file_sha256(&base.join(p))?);
    }
    let checksums = RunChecksums {
        manifests,
        reports: report_checksums(run_dir)?,
        checkpoints,
        checkpoints_after_eval,
    };
    write_json(&run_dir.join("checksums.json"), &checksums)?;
    Ok(RunOutcome {
        dir: run_dir.into(),
        reports,
        comparisons,
        checksums,
    })
}

fn report_checksums(run_dir: &Path) -> Result<Checksums> {
    let mut sums = Checksums::new();
    for sub in ["reports", "bootstrap", "errors", "predictions", "training"] {
        let dir = run_dir.join(sub);
        if !dir.exists() {
            continue;
        }
        for entry in walkdir::WalkDir::new(&dir).sort_by_file_name() {
            let entry = entry.map_err(|e| LabError::Io {
                path: dir.clone(),
                source: e.into(),
            })?;
            if entry.file_type().is_file() {
                let rel = entry.path().strip_prefix(run_dir).unwrap_or(entry.path());
                let key = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
                sums.insert(key, file_sha256(entry.path())?);
            }
        }
    }
    sums.insert("summary.txt".into(), file_sha256(&run_dir.join("summary.txt"))?);
    Ok(sums)
}
