use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{CodePropertyGraph, GraphError, Stage};
use crate::ast::Language;

const STANDARD_TABLE: &str = include_str!("../../data/standard_labels.tsv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelAction {
    /// Relabel with this standard label (starts with `_`).
    Label(String),
    /// Remove the node and splice its children into its parent.
    Splice,
    /// Remove the node and its subtree.
    Drop,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("label table line {line}: {message}")]
pub struct TableError {
    pub line: usize,
    pub message: String,
}

/// `(language or None for both, parent kind, kind)`.
type Key = (Option<Language>, Option<String>, String);

/// Language-indexed map from raw kinds to prune actions and standard labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelTable {
    version: u32,
    rules: BTreeMap<Key, LabelAction>,
    /// `(language, qualifier, final name or "*")`
    collapse: Vec<(Language, String, String)>,
}

impl LabelTable {
    /// The table shipped in `data/standard_labels.tsv`.
    pub fn standard() -> Self {
        match Self::parse(STANDARD_TABLE) {
            Ok(t) => t,
            Err(e) => panic!("bundled label table is invalid: {e}"),
        }
    }

    pub fn standard_source() -> &'static str {
        STANDARD_TABLE
    }

    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut version = None;
        let mut rules = BTreeMap::new();
        let mut collapse = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: &str| TableError {
                line: line_no,
                message: message.to_string(),
            };
            if let Some(rest) = line.strip_prefix("# version ") {
                version = Some(rest.trim().parse().map_err(|_| err("bad version"))?);
                continue;
            }
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(err("expected three tab-separated columns"));
            }
            let lang = match cols[0] {
                "*" => None,
                other => Some(other.parse::<Language>().map_err(|_| err("unknown language"))?),
            };
            let (selector, action) = (cols[1], cols[2]);
            if let Some(callee) = selector.strip_prefix("callee:") {
                let (Some(lang), "collapse") = (lang, action) else {
                    return Err(err("callee rows need a language and the collapse action"));
                };
                let Some((qualifier, name)) = callee.rsplit_once('.') else {
                    return Err(err("callee must be qualified"));
                };
                collapse.push((lang, qualifier.to_string(), name.to_string()));
                continue;
            }
            let action = match action {
                "-" => LabelAction::Splice,
                "drop" => LabelAction::Drop,
                a if a.len() > 1 && a.starts_with('_') => LabelAction::Label(a.to_string()),
                _ => return Err(err("action must be `-`, `drop` or a `_label`")),
            };
            let (parent, kind) = split_selector(selector);
            if kind.is_empty() {
                return Err(err("empty selector"));
            }
            let key = (lang, parent.map(str::to_string), kind.to_string());
            if rules.insert(key, action).is_some() {
                return Err(err("duplicate selector"));
            }
        }
        Ok(LabelTable {
            version: version.ok_or(TableError {
                line: 1,
                message: "missing `# version` header".into(),
            })?,
            rules,
            collapse,
        })
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    /// Most specific rule for `kind` under `parent` in `lang`.
    pub fn lookup(&self, lang: Language, parent: Option<&str>, kind: &str) -> Option<&LabelAction> {
        let kind = kind.to_string();
        let mut keys: Vec<Key> = Vec::with_capacity(4);
        if let Some(p) = parent {
            keys.push((Some(lang), Some(p.to_string()), kind.clone()));
            keys.push((None, Some(p.to_string()), kind.clone()));
        }
        keys.push((Some(lang), None, kind.clone()));
        keys.push((None, None, kind));
        keys.iter().find_map(|k| self.rules.get(k))
    }

    /// True if a call through `qualifier.name` is a collapsible builtin.
    pub fn collapses(&self, lang: Language, qualifier: &str, name: &str) -> bool {
        self.collapse
            .iter()
            .any(|(l, q, n)| *l == lang && q == qualifier && (n == "*" || n == name))
    }

    /// Every standard label the table can produce.
    pub fn standard_labels(&self) -> alloc::collections::BTreeSet<&str> {
        self.rules
            .values()
            .filter_map(|a| match a {
                LabelAction::Label(l) => Some(l.as_str()),
                _ => None,
            })
            .collect()
    }
}

/// `parent/kind` when the prefix is a grammar name; otherwise the whole
/// selector is the kind (so `/`, `//` and `//=` stay unqualified).
fn split_selector(selector: &str) -> (Option<&str>, &str) {
    if let Some(idx) = selector.find('/') {
        let (parent, rest) = (&selector[..idx], &selector[idx + 1..]);
        if !parent.is_empty() && !rest.is_empty() && parent.bytes().all(|b| b.is_ascii_lowercase() || b == b'_') {
            return (Some(parent), rest);
        }
    }
    (None, selector)
}

pub(super) fn standardize(graph: &CodePropertyGraph, table: &LabelTable) -> Result<CodePropertyGraph, GraphError> {
    if graph.stage == Stage::StandardCpg {
        return Ok(graph.clone());
    }
    graph.expect_stage(Stage::Pruned)?;
    let parents = graph.parents();
    let mut out = graph.clone();
    for (i, node) in out.nodes.iter_mut().enumerate() {
        let parent = parents[i].map(|p| graph.nodes[p].label.as_str());
        match table.lookup(graph.language, parent, &graph.nodes[i].label) {
            Some(LabelAction::Label(l)) => node.label = l.clone(),
            _ => {
                return Err(GraphError::UnmappedLabel {
                    language: graph.language,
                    label: graph.nodes[i].label.clone(),
                })
            }
        }
    }
    out.stage = Stage::StandardCpg;
    Ok(out)
}
