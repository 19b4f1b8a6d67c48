//! Directory ingestion: every `.py` / `.java` file becomes one unit whose
//! cluster comes from the configured scheme.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crossclone_core::{parse, Language, SourceUnit};
use serde::{Deserialize, Serialize};

use crate::error::{IoContext, LabError, Result};

/// How a file's cluster (functionality) id is derived from its path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum ClusterScheme {
    /// Relative directory of the file: `<functionality>/<file>`, the layout
    /// of per-functionality benchmark dumps.
    ParentDir,
    /// File stem up to the first separator: `p042_alice.py` → `p042`.
    FilePrefix { separator: char },
    /// Every file is its own cluster.
    File,
}

impl FromStr for ClusterScheme {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parent-dir" => Ok(ClusterScheme::ParentDir),
            "file" => Ok(ClusterScheme::File),
            "file-prefix" => Ok(ClusterScheme::FilePrefix { separator: '_' }),
            _ => match s.strip_prefix("file-prefix:").map(|r| r.chars().collect::<Vec<_>>()) {
                Some(sep) if sep.len() == 1 => Ok(ClusterScheme::FilePrefix { separator: sep[0] }),
                _ => Err(LabError::Config(format!(
                    "unknown cluster scheme `{s}` (expected parent-dir, file, file-prefix or file-prefix:<char>)"
                ))),
            },
        }
    }
}

impl ClusterScheme {
    fn cluster(&self, rel: &str) -> String {
        let (dir, file) = rel.rsplit_once('/').unwrap_or(("", rel));
        let stem = file.rsplit_once('.').map(|(s, _)| s).unwrap_or(file);
        match self {
            ClusterScheme::ParentDir if !dir.is_empty() => dir.to_string(),
            ClusterScheme::ParentDir | ClusterScheme::File => rel.to_string(),
            ClusterScheme::FilePrefix { separator } => {
                let prefix = stem.split(*separator).next().unwrap_or(stem);
                if dir.is_empty() {
                    prefix.to_string()
                } else {
                    format!("{dir}/{prefix}")
                }
            }
        }
    }
}

/// Shape of an ingested unit. Benchmark dumps differ in whether methods keep
/// their enclosing class; both parse, and the report records which occurred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitForm {
    ClassWrapped,
    BareMethod,
    Script,
    Unparsed,
}

pub fn unit_form(unit: &SourceUnit) -> UnitForm {
    let Ok(ast) = parse(unit) else {
        return UnitForm::Unparsed;
    };
    let top = &ast.node(ast.root).children;
    let has = |kind: &str| top.iter().any(|&c| ast.node(c).kind == kind);
    match unit.language {
        Language::Java if has("class_declaration") => UnitForm::ClassWrapped,
        Language::Java => UnitForm::BareMethod,
        Language::Python if has("function_definition") => UnitForm::BareMethod,
        Language::Python => UnitForm::Script,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IngestReport {
    pub files_seen: usize,
    pub units: usize,
    pub clusters: usize,
    pub scheme: Option<ClusterScheme>,
    pub languages: BTreeMap<String, usize>,
    pub forms: BTreeMap<String, usize>,
    /// Files skipped for an unknown extension or non-UTF-8 content.
    pub skipped: BTreeMap<String, usize>,
}

fn is_hidden(entry: &walkdir::DirEntry) -> bool {
    entry.depth() > 0 && entry.file_name().to_string_lossy().starts_with('.')
}

/// Units are returned sorted by id; ids are `/`-separated paths relative to
/// `root`.
pub fn ingest_dir(root: &Path, scheme: &ClusterScheme) -> Result<(Vec<SourceUnit>, IngestReport)> {
    if !root.is_dir() {
        return Err(LabError::NoFilesFound(root.into()));
    }
    let mut report = IngestReport {
        scheme: Some(scheme.clone()),
        ..Default::default()
    };
    let mut units = Vec::new();
    let walker = walkdir::WalkDir::new(root).sort_by_file_name().into_iter().filter_entry(|e| !is_hidden(e));
    for entry in walker {
        let entry = entry.map_err(|e| LabError::Io {
            path: root.into(),
            source: e.into(),
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        report.files_seen += 1;
        let path = entry.path();
        let Some(lang) = path.extension().and_then(|e| e.to_str()).and_then(Language::from_extension) else {
            *report.skipped.entry("extension".into()).or_insert(0) += 1;
            continue;
        };
        let Ok(text) = String::from_utf8(fs::read(path).at(path)?) else {
            *report.skipped.entry("utf8".into()).or_insert(0) += 1;
            continue;
        };
        let rel = path.strip_prefix(root).unwrap_or(path);
        let id = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        let mut unit = SourceUnit::new(id.clone(), lang, text, scheme.cluster(&id));
        unit.path = Some(id);
        *report.languages.entry(lang.as_str().into()).or_insert(0) += 1;
        let form = serde_json::to_value(unit_form(&unit)).ok().and_then(|v| v.as_str().map(String::from));
        *report.forms.entry(form.unwrap_or_default()).or_insert(0) += 1;
        units.push(unit);
    }
    if units.is_empty() {
        return Err(LabError::NoFilesFound(root.into()));
    }
    units.sort_by(|a, b| a.id.cmp(&b.id));
    report.units = units.len();
    report.clusters = units.iter().map(|u| u.cluster_id.as_str()).collect::<std::collections::BTreeSet<_>>().len();
    Ok((units, report))
}
