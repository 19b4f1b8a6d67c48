//! Normalized abstract syntax trees for Java and Python.
//!
//! Both front ends are hand-written recursive-descent parsers over a defined
//! language subset. They emit the same tree shape: every token that survives
//! lexing becomes a leaf whose `kind` is either a named token class
//! (`identifier`, `integer`, `string_literal`, ...) or, for punctuation,
//! operators and keywords, the token text itself. Whitespace, comments and
//! Python's layout tokens never appear in the tree.
//!
//! The raw kind vocabulary of each language is documented in
//! `data/standard_labels.tsv`, which is also the table the graph builder
//! standardizes against.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

mod java;
mod lexer;
mod python;

/// Source language of a unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Java,
    Python,
}

impl Language {
    pub fn as_str(self) -> &'static str {
        match self {
            Language::Java => "java",
            Language::Python => "python",
        }
    }

    /// Conventional file extension, without the dot.
    pub fn extension(self) -> &'static str {
        match self {
            Language::Java => "java",
            Language::Python => "py",
        }
    }

    pub fn from_extension(ext: &str) -> Option<Language> {
        match ext {
            "java" => Some(Language::Java),
            "py" => Some(Language::Python),
            _ => None,
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Language {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "java" => Ok(Language::Java),
            "python" | "py" => Ok(Language::Python),
            _ => Err(ParseError::UnsupportedLanguage(s.to_string())),
        }
    }
}

/// One method or snippet file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceUnit {
    pub id: String,
    pub language: Language,
    pub text: String,
    /// Functionality label; two units with the same cluster are clones.
    pub cluster_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl SourceUnit {
    pub fn new(
        id: impl Into<String>,
        language: Language,
        text: impl Into<String>,
        cluster_id: impl Into<String>,
    ) -> Self {
        SourceUnit {
            id: id.into(),
            language,
            text: text.into(),
            cluster_id: cluster_id.into(),
            path: None,
        }
    }
}

/// Half-open byte range `[start, end)` into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AstNode {
    pub node_id: usize,
    pub kind: String,
    pub span: Span,
    pub children: Vec<usize>,
    /// Present exactly on leaves.
    pub token_text: Option<String>,
}

impl AstNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedAst {
    pub unit_id: String,
    pub language: Language,
    /// Pre-order; `nodes[i].node_id == i`.
    pub nodes: Vec<AstNode>,
    pub root: usize,
}

impl NormalizedAst {
    pub fn node(&self, id: usize) -> &AstNode {
        &self.nodes[id]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &AstNode> + '_ {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    /// Parent of every node, `None` for the root.
    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut parents = alloc::vec![None; self.nodes.len()];
        for node in &self.nodes {
            for &c in &node.children {
                parents[c] = Some(node.node_id);
            }
        }
        parents
    }

    /// Checks the structural invariants of the tree against `text`.
    pub fn validate(&self, text: &str) -> Result<(), String> {
        let n = self.nodes.len();
        if n == 0 {
            return Err("empty tree".into());
        }
        if self.root >= n {
            return Err("root out of range".into());
        }
        let mut parent_count = alloc::vec![0usize; n];
        for (i, node) in self.nodes.iter().enumerate() {
            if node.node_id != i {
                return Err(alloc::format!("node {i} has id {}", node.node_id));
            }
            if node.span.end > text.len() || node.span.start > node.span.end {
                return Err(alloc::format!("node {i} span out of range"));
            }
            match (&node.token_text, node.children.is_empty()) {
                (Some(t), true) if !t.is_empty() => {}
                (None, false) => {}
                _ => return Err(alloc::format!("node {i}: token text must be present iff leaf")),
            }
            let mut prev_end = node.span.start;
            for &c in &node.children {
                if c >= n {
                    return Err(alloc::format!("node {i} has dangling child {c}"));
                }
                parent_count[c] += 1;
                let cs = self.nodes[c].span;
                if !node.span.contains(&cs) {
                    return Err(alloc::format!("child {c} escapes parent {i}"));
                }
                if cs.start < prev_end {
                    return Err(alloc::format!("children of {i} overlap or are unordered"));
                }
                prev_end = cs.end;
            }
        }
        for (i, &count) in parent_count.iter().enumerate() {
            let expected = usize::from(i != self.root);
            if count != expected {
                return Err(alloc::format!("node {i} has {count} parents"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("invalid UTF-8 at byte {offset}")]
    InvalidUtf8 { offset: usize },
    #[error("unsupported language `{0}`")]
    UnsupportedLanguage(String),
    #[error("source is empty")]
    EmptySource,
}

impl ParseError {
    /// First offending byte, when the error has one.
    pub fn offset(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::InvalidUtf8 { offset } => Some(*offset),
            _ => None,
        }
    }

    pub(crate) fn at(offset: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            offset,
            message: message.into(),
        }
    }
}

pub fn parse(unit: &SourceUnit) -> Result<NormalizedAst, ParseError> {
    parse_source(&unit.id, unit.language, &unit.text)
}

pub fn parse_source(unit_id: &str, language: Language, text: &str) -> Result<NormalizedAst, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::EmptySource);
    }
    let root = match language {
        Language::Python => python::parse(text)?,
        Language::Java => java::parse(text)?,
    };
    Ok(flatten(unit_id, language, root))
}

/// Parses raw bytes; invalid UTF-8 is an error, never replaced.
pub fn parse_bytes(unit_id: &str, language: Language, bytes: &[u8]) -> Result<NormalizedAst, ParseError> {
    let text = core::str::from_utf8(bytes).map_err(|e| ParseError::InvalidUtf8 {
        offset: e.valid_up_to(),
    })?;
    parse_source(unit_id, language, text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StaticMetrics {
    pub lines: usize,
    pub chars: usize,
}

/// Line and byte counts. A trailing newline does not open a new line.
pub fn static_metrics(unit: &SourceUnit) -> StaticMetrics {
    StaticMetrics {
        lines: unit.text.lines().count(),
        chars: unit.text.len(),
    }
}

/// Parser output before flattening into dense ids.
#[derive(Debug, Clone)]
pub(crate) struct RawNode {
    pub kind: String,
    pub span: Span,
    pub children: Vec<RawNode>,
    pub token: Option<String>,
}

impl RawNode {
    pub fn leaf(kind: impl Into<String>, span: Span, text: &str) -> RawNode {
        RawNode {
            kind: kind.into(),
            span,
            children: Vec::new(),
            token: Some(text.to_string()),
        }
    }

    /// Interior node spanning its children. `children` must be non-empty.
    pub fn inner(kind: impl Into<String>, children: Vec<RawNode>) -> RawNode {
        debug_assert!(!children.is_empty());
        let start = children.first().map_or(0, |c| c.span.start);
        let end = children.last().map_or(0, |c| c.span.end);
        RawNode {
            kind: kind.into(),
            span: Span::new(start, end),
            children,
            token: None,
        }
    }
}

fn flatten(unit_id: &str, language: Language, root: RawNode) -> NormalizedAst {
    let mut nodes = Vec::new();
    push_preorder(root, &mut nodes);
    NormalizedAst {
        unit_id: unit_id.to_string(),
        language,
        nodes,
        root: 0,
    }
}

fn push_preorder(raw: RawNode, out: &mut Vec<AstNode>) -> usize {
    let id = out.len();
    out.push(AstNode {
        node_id: id,
        kind: raw.kind,
        span: raw.span,
        children: Vec::new(),
        token_text: raw.token,
    });
    let mut children = Vec::with_capacity(raw.children.len());
    for child in raw.children {
        children.push(push_preorder(child, out));
    }
    out[id].children = children;
    id
}

#[cfg(test)]
mod tests;
