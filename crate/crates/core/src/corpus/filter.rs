use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::ast::{static_metrics, SourceUnit};
use crate::graph::{build_cpg, GraphError};

/// Inclusive size bounds; node counts are taken on the standard CPG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub min_lines: usize,
    pub max_lines: usize,
    pub max_chars: usize,
    pub max_nodes: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            min_lines: 5,
            max_lines: 100,
            max_chars: 2000,
            max_nodes: 100,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.min_lines == 0 || self.max_lines == 0 || self.max_chars == 0 || self.max_nodes == 0 {
            return Err(CorpusError::InvalidFilter("bounds must be positive".into()));
        }
        if self.min_lines > self.max_lines {
            return Err(CorpusError::InvalidFilter("min_lines exceeds max_lines".into()));
        }
        Ok(())
    }
}

/// First failed predicate, in evaluation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    MinLines,
    MaxLines,
    MaxChars,
    ParseError,
    UnmappedLabel,
    MaxNodes,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::MinLines => "min_lines",
            RejectReason::MaxLines => "max_lines",
            RejectReason::MaxChars => "max_chars",
            RejectReason::ParseError => "parse_error",
            RejectReason::UnmappedLabel => "unmapped_label",
            RejectReason::MaxNodes => "max_nodes",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub unit_id: String,
    pub reason: RejectReason,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FilterOutcome {
    pub accepted: Vec<SourceUnit>,
    pub rejected: Vec<Rejection>,
    /// Standard-CPG node count of every accepted unit.
    pub node_counts: BTreeMap<String, usize>,
}

/// Accounting in the shape of an actual-vs-filtered table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub actual_count: usize,
    pub filtered_count: usize,
    pub rejection_histogram: BTreeMap<String, usize>,
}

impl FilterOutcome {
    pub fn report(&self) -> FilterReport {
        let mut rejection_histogram = BTreeMap::new();
        for r in &self.rejected {
            *rejection_histogram.entry(r.reason.as_str().to_string()).or_insert(0) += 1;
        }
        FilterReport {
            actual_count: self.accepted.len() + self.rejected.len(),
            filtered_count: self.accepted.len(),
            rejection_histogram,
        }
    }
}

pub fn filter_units(units: &[SourceUnit], cfg: &FilterConfig) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    for unit in units {
        match check(unit, cfg) {
            Ok(nodes) => {
                out.node_counts.insert(unit.id.clone(), nodes);
                out.accepted.push(unit.clone());
            }
            Err((reason, detail)) => out.rejected.push(Rejection {
                unit_id: unit.id.clone(),
                reason,
                detail,
            }),
        }
    }
    out
}

fn check(unit: &SourceUnit, cfg: &FilterConfig) -> Result<usize, (RejectReason, String)> {
    let m = static_metrics(unit);
    if m.lines < cfg.min_lines {
        return Err((RejectReason::MinLines, alloc::format!("{} lines", m.lines)));
    }
    if m.lines > cfg.max_lines {
        return Err((RejectReason::MaxLines, alloc::format!("{} lines", m.lines)));
    }
    if m.chars > cfg.max_chars {
        return Err((RejectReason::MaxChars, alloc::format!("{} chars", m.chars)));
    }
    let graph = build_cpg(unit).map_err(|e| match e {
        GraphError::UnmappedLabel { .. } => (RejectReason::UnmappedLabel, e.to_string()),
        _ => (RejectReason::ParseError, e.to_string()),
    })?;
    let nodes = graph.nodes.len();
    if nodes > cfg.max_nodes {
        return Err((RejectReason::MaxNodes, alloc::format!("{nodes} nodes")));
    }
    Ok(nodes)
}
