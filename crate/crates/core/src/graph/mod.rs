//! Code property graphs: AST plus data-flow edges, pruned and relabeled with a
//! language-neutral label vocabulary.
//!
//! The pipeline is `parse -> build_dfg -> prune -> standardize_labels`. Each
//! step returns a new graph tagged with its [`Stage`]; steps refuse graphs of
//! the wrong stage instead of guessing.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::ast::{parse, Language, NormalizedAst, ParseError, SourceUnit};

mod dfg;
mod labels;
mod prune;

pub use dfg::build_dfg;
pub use labels::{LabelAction, LabelTable, TableError};

/// Pipeline stage a graph has reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Ast,
    Dfg,
    Pruned,
    StandardCpg,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ast => "ast",
            Stage::Dfg => "dfg",
            Stage::Pruned => "pruned",
            Stage::StandardCpg => "standard_cpg",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    #[serde(rename = "AST")]
    Ast,
    #[serde(rename = "DFG")]
    Dfg,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    #[serde(rename = "id")]
    pub node_id: usize,
    /// Raw grammar kind before standardization, standard label after.
    pub label: String,
    #[serde(rename = "token", default, skip_serializing_if = "Option::is_none")]
    pub token_text: Option<String>,
    /// True for nodes that came from source tokens.
    #[serde(rename = "leaf")]
    pub is_leaf: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GraphEdge {
    pub src: usize,
    pub dst: usize,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodePropertyGraph {
    pub unit_id: String,
    pub language: Language,
    pub stage: Stage,
    /// Node `i` has `node_id == i`; AST edges point parent to child and
    /// list children in source order.
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GraphMetrics {
    pub nodes: usize,
    pub leaf_nodes: usize,
    pub ast_edges: usize,
    pub dfg_edges: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("expected a graph at stage {expected}, found {found}")]
    InvalidStage { expected: Stage, found: Stage },
    #[error("no standard label for {language} kind `{label}`")]
    UnmappedLabel { language: Language, label: String },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl CodePropertyGraph {
    /// Wraps a parsed tree as a stage-`Ast` graph.
    pub fn from_ast(ast: &NormalizedAst) -> Self {
        let nodes = ast
            .nodes
            .iter()
            .map(|n| GraphNode {
                node_id: n.node_id,
                label: n.kind.clone(),
                token_text: n.token_text.clone(),
                is_leaf: n.is_leaf(),
            })
            .collect();
        let edges = ast
            .nodes
            .iter()
            .flat_map(|n| {
                n.children.iter().map(move |&c| GraphEdge {
                    src: n.node_id,
                    dst: c,
                    kind: EdgeKind::Ast,
                })
            })
            .collect();
        CodePropertyGraph {
            unit_id: ast.unit_id.clone(),
            language: ast.language,
            stage: Stage::Ast,
            nodes,
            edges,
        }
    }

    pub fn expect_stage(&self, expected: Stage) -> Result<(), GraphError> {
        if self.stage == expected {
            Ok(())
        } else {
            Err(GraphError::InvalidStage {
                expected,
                found: self.stage,
            })
        }
    }

    pub fn ast_edges(&self) -> impl Iterator<Item = &GraphEdge> + '_ {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Ast)
    }

    pub fn dfg_edges(&self) -> impl Iterator<Item = &GraphEdge> + '_ {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Dfg)
    }

    /// Ordered AST children of every node.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut children = alloc::vec![Vec::new(); self.nodes.len()];
        for e in self.ast_edges() {
            children[e.src].push(e.dst);
        }
        children
    }

    /// AST parent of every node, `None` for the root.
    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut parents = alloc::vec![None; self.nodes.len()];
        for e in self.ast_edges() {
            parents[e.dst] = Some(e.src);
        }
        parents
    }

    /// The unique node without an AST parent.
    pub fn root(&self) -> Option<usize> {
        self.parents().iter().position(Option::is_none)
    }

    pub fn metrics(&self) -> GraphMetrics {
        graph_metrics(self)
    }

    /// Node labels as a sorted multiset (label -> count).
    pub fn label_histogram(&self) -> BTreeMap<&str, usize> {
        let mut hist = BTreeMap::new();
        for n in &self.nodes {
            *hist.entry(n.label.as_str()).or_insert(0) += 1;
        }
        hist
    }

    /// Checks ids, endpoints, duplicates, self-loops, the AST tree shape and
    /// that DFG edges join leaves.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.nodes.len();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.node_id != i {
                return Err(alloc::format!("node {i} has id {}", node.node_id));
            }
        }
        let mut seen = alloc::collections::BTreeSet::new();
        let mut parent_count = alloc::vec![0usize; n];
        for e in &self.edges {
            if e.src >= n || e.dst >= n {
                return Err(alloc::format!("dangling edge {e:?}"));
            }
            if e.src == e.dst {
                return Err(alloc::format!("self-loop {e:?}"));
            }
            if !seen.insert(*e) {
                return Err(alloc::format!("duplicate edge {e:?}"));
            }
            match e.kind {
                EdgeKind::Ast => parent_count[e.dst] += 1,
                EdgeKind::Dfg => {
                    if !self.nodes[e.src].is_leaf || !self.nodes[e.dst].is_leaf {
                        return Err(alloc::format!("DFG edge {e:?} touches a non-leaf"));
                    }
                }
            }
        }
        if n == 0 {
            return Err("empty graph".into());
        }
        let roots = parent_count.iter().filter(|&&c| c == 0).count();
        if roots != 1 || parent_count.iter().any(|&c| c > 1) {
            return Err("AST edges do not form a tree".into());
        }
        // n - 1 edges and a single root; reachability rules out cycles.
        let children = self.children();
        let root = parent_count.iter().position(|&c| c == 0).unwrap_or(0);
        let mut stack = alloc::vec![root];
        let mut reached = 0;
        while let Some(v) = stack.pop() {
            reached += 1;
            stack.extend(children[v].iter().copied());
        }
        if reached != n {
            return Err("AST edges are not connected".into());
        }
        Ok(())
    }
}

pub fn graph_metrics(graph: &CodePropertyGraph) -> GraphMetrics {
    GraphMetrics {
        nodes: graph.nodes.len(),
        leaf_nodes: graph.nodes.iter().filter(|n| n.is_leaf).count(),
        ast_edges: graph.ast_edges().count(),
        dfg_edges: graph.dfg_edges().count(),
    }
}

/// Runs the graph pipeline with a fixed label table.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    table: LabelTable,
}

impl Default for GraphBuilder {
    fn default() -> Self {
        GraphBuilder {
            table: LabelTable::standard(),
        }
    }
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_table(table: LabelTable) -> Self {
        GraphBuilder { table }
    }

    pub fn table(&self) -> &LabelTable {
        &self.table
    }

    pub fn build_dfg(&self, ast: &NormalizedAst) -> CodePropertyGraph {
        build_dfg(ast)
    }

    pub fn prune(&self, graph: &CodePropertyGraph) -> Result<CodePropertyGraph, GraphError> {
        prune::prune(graph, &self.table)
    }

    pub fn standardize_labels(&self, graph: &CodePropertyGraph) -> Result<CodePropertyGraph, GraphError> {
        labels::standardize(graph, &self.table)
    }

    /// Graph of `unit` at `stage`.
    pub fn build_stage(&self, unit: &SourceUnit, stage: Stage) -> Result<CodePropertyGraph, GraphError> {
        let ast = parse(unit)?;
        if stage == Stage::Ast {
            return Ok(CodePropertyGraph::from_ast(&ast));
        }
        let dfg = build_dfg(&ast);
        if stage == Stage::Dfg {
            return Ok(dfg);
        }
        let pruned = self.prune(&dfg)?;
        if stage == Stage::Pruned {
            return Ok(pruned);
        }
        self.standardize_labels(&pruned)
    }

    pub fn build_cpg(&self, unit: &SourceUnit) -> Result<CodePropertyGraph, GraphError> {
        self.build_stage(unit, Stage::StandardCpg)
    }
}

/// Prunes with the standard label table.
pub fn prune(graph: &CodePropertyGraph) -> Result<CodePropertyGraph, GraphError> {
    prune::prune(graph, &LabelTable::standard())
}

/// Standardizes with the standard label table.
pub fn standardize_labels(graph: &CodePropertyGraph) -> Result<CodePropertyGraph, GraphError> {
    labels::standardize(graph, &LabelTable::standard())
}

/// `standardize_labels(prune(build_dfg(parse(unit))))` with the standard table.
pub fn build_cpg(unit: &SourceUnit) -> Result<CodePropertyGraph, GraphError> {
    GraphBuilder::new().build_cpg(unit)
}

#[cfg(test)]
mod tests;
