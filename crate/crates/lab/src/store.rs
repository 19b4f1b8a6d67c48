//! On-disk formats: unit stores are JSON Lines of `SourceUnit`; a dataset is
//! a `<name>.manifest.json` header plus `<name>.pairs.jsonl`, one pair per
//! line tagged with its split.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crossclone_core::corpus::{DatasetManifest, FilterConfig, PairExample, Split, SplitCounts, Splits};
use crossclone_core::{Language, SourceUnit};
use serde::{Deserialize, Serialize};

use crate::canonical::{ensure_parent, read_json, write_json};
use crate::detectors::UnitIndex;
use crate::error::{IoContext, LabError, Result};

pub const SPLITS: [&str; 3] = ["train", "valid", "test"];

fn json_err(path: &Path) -> impl FnOnce(serde_json::Error) -> LabError + '_ {
    move |source| LabError::Json { path: path.into(), source }
}

fn write_lines<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    ensure_parent(path)?;
    let mut out = Vec::new();
    for row in rows {
        serde_json::to_writer(&mut out, &row).map_err(json_err(path))?;
        out.push(b'\n');
    }
    fs::File::create(path).and_then(|mut f| f.write_all(&out)).at(path)
}

fn read_lines<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = fs::File::open(path).at(path)?;
    let mut rows = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.at(path)?;
        if !line.trim().is_empty() {
            rows.push(serde_json::from_str(&line).map_err(json_err(path))?);
        }
    }
    Ok(rows)
}

/// Units sorted by id.
pub fn write_units(path: &Path, units: &[SourceUnit]) -> Result<()> {
    let mut sorted: Vec<&SourceUnit> = units.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    write_lines(path, sorted)
}

pub fn read_units(path: &Path) -> Result<Vec<SourceUnit>> {
    read_lines(path)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitHeader {
    pub counts: SplitCounts,
    #[serde(default, skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    pub provenance: std::collections::BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub name: String,
    pub languages: Vec<Language>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterConfig>,
    pub seed: u64,
    pub unit_leakage: usize,
    pub train: SplitHeader,
    pub valid: SplitHeader,
    pub test: SplitHeader,
    /// Paths relative to the manifest's directory.
    pub unit_stores: Vec<String>,
    pub pairs_file: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct PairRow {
    split: String,
    #[serde(flatten)]
    pair: PairExample,
}

/// A manifest loaded from disk together with where its units live.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredDataset {
    pub path: PathBuf,
    pub manifest: DatasetManifest,
    pub unit_stores: Vec<PathBuf>,
}

impl StoredDataset {
    pub fn load(path: &Path) -> Result<Self> {
        let header: ManifestHeader = read_json(path)?;
        let dir = path.parent().unwrap_or(Path::new(""));
        let rows: Vec<PairRow> = read_lines(&dir.join(&header.pairs_file))?;
        let mut by_split: [Vec<PairExample>; 3] = Default::default();
        for row in rows {
            let i = SPLITS
                .iter()
                .position(|s| *s == row.split)
                .ok_or_else(|| LabError::Config(format!("{}: unknown split `{}`", path.display(), row.split)))?;
            by_split[i].push(row.pair);
        }
        let [train, valid, test] = by_split;
        let manifest = DatasetManifest {
            name: header.name,
            languages: header.languages,
            filter: header.filter,
            seed: header.seed,
            splits: Splits {
                train: Split::new(train),
                valid: Split::new(valid),
                test: Split::new(test),
            },
            unit_leakage: header.unit_leakage,
        };
        manifest
            .validate()
            .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Ok(StoredDataset {
            path: path.into(),
            manifest,
            unit_stores: header.unit_stores.iter().map(|s| dir.join(s)).collect(),
        })
    }

    pub fn units(&self) -> Result<Vec<SourceUnit>> {
        let mut all = Vec::new();
        for store in &self.unit_stores {
            all.extend(read_units(store)?);
        }
        Ok(all)
    }

    pub fn index(&self) -> Result<UnitIndex> {
        Ok(UnitIndex::new(self.units()?))
    }

    pub fn split(&self, name: &str) -> Result<&[PairExample]> {
        self.manifest
            .split(name)
            .map(|s| s.pairs.as_slice())
            .ok_or_else(|| LabError::Config(format!("unknown split `{name}`")))
    }
}

fn relative(from_dir: &Path, target: &Path) -> String {
    let rel = target.strip_prefix(from_dir).unwrap_or(target);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

/// Writes `<dir>/<name>.manifest.json` and `<dir>/<name>.pairs.jsonl`.
/// Unit store paths are recorded relative to `dir` when they lie under it.
pub fn write_dataset(dir: &Path, manifest: &DatasetManifest, unit_stores: &[PathBuf]) -> Result<PathBuf> {
    let pairs_file = format!("{}.pairs.jsonl", manifest.name);
    let split_header = |s: &Split| SplitHeader {
        counts: s.counts,
        provenance: s.provenance.clone(),
    };
    let header = ManifestHeader {
        name: manifest.name.clone(),
        languages: manifest.languages.clone(),
        filter: manifest.filter,
        seed: manifest.seed,
        unit_leakage: manifest.unit_leakage,
        train: split_header(&manifest.splits.train),
        valid: split_header(&manifest.splits.valid),
        test: split_header(&manifest.splits.test),
        unit_stores: unit_stores.iter().map(|p| relative(dir, p)).collect(),
        pairs_file: pairs_file.clone(),
    };
    let rows = SPLITS.iter().flat_map(|&name| {
        manifest
            .split(name)
            .into_iter()
            .flat_map(move |s| s.pairs.iter().map(move |p| PairRow { split: name.into(), pair: p.clone() }))
    });
    write_lines(&dir.join(&pairs_file), rows)?;
    let path = dir.join(format!("{}.manifest.json", manifest.name));
    write_json(&path, &header)?;
    Ok(path)
}
