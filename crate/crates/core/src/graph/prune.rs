use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::labels::{LabelAction, LabelTable};
use super::{CodePropertyGraph, EdgeKind, GraphEdge, GraphError, Stage};

/// Removes valueless nodes and splices their surviving descendants into the
/// nearest surviving ancestor, keeping order. Nodes touched by a DFG edge are
/// always kept. Ids are re-densified in pre-order.
pub(super) fn prune(graph: &CodePropertyGraph, table: &LabelTable) -> Result<CodePropertyGraph, GraphError> {
    graph.expect_stage(Stage::Dfg)?;
    let n = graph.nodes.len();
    let children = graph.children();
    let Some(root) = graph.root() else {
        return Ok(CodePropertyGraph {
            stage: Stage::Pruned,
            ..graph.clone()
        });
    };
    let mut has_dfg = vec![false; n];
    for e in graph.dfg_edges() {
        has_dfg[e.src] = true;
        has_dfg[e.dst] = true;
    }
    let mut subtree_dfg = has_dfg.clone();
    for v in (0..n).rev() {
        // Pre-order ids: children have larger ids than their parent.
        for &c in &children[v] {
            subtree_dfg[v] |= subtree_dfg[c];
        }
    }

    let mut keep = vec![true; n];
    let mut stack = vec![(root, None::<usize>)];
    while let Some((v, parent)) = stack.pop() {
        let parent_kind = parent.map(|p| graph.nodes[p].label.as_str());
        let action = table.lookup(graph.language, parent_kind, &graph.nodes[v].label);
        if v != root && !has_dfg[v] {
            match action {
                Some(LabelAction::Drop) if !subtree_dfg[v] => {
                    mark_subtree(v, &children, &mut keep);
                    continue;
                }
                Some(LabelAction::Drop) | Some(LabelAction::Splice) => keep[v] = false,
                _ => {}
            }
        }
        for &c in children[v].iter().rev() {
            stack.push((c, Some(v)));
        }
    }

    collapse_builtin_callees(graph, table, &children, &has_dfg, &mut keep);

    let mut new_id = vec![usize::MAX; n];
    let mut out = CodePropertyGraph {
        unit_id: graph.unit_id.clone(),
        language: graph.language,
        stage: Stage::Pruned,
        nodes: Vec::new(),
        edges: Vec::new(),
    };
    emit(root, None, graph, &children, &keep, &mut new_id, &mut out);
    for e in graph.dfg_edges() {
        out.edges.push(GraphEdge {
            src: new_id[e.src],
            dst: new_id[e.dst],
            kind: EdgeKind::Dfg,
        });
    }
    Ok(out)
}

fn mark_subtree(v: usize, children: &[Vec<usize>], keep: &mut [bool]) {
    let mut stack = vec![v];
    while let Some(x) = stack.pop() {
        keep[x] = false;
        stack.extend(children[x].iter().copied());
    }
}

fn emit(
    v: usize,
    parent: Option<usize>,
    graph: &CodePropertyGraph,
    children: &[Vec<usize>],
    keep: &[bool],
    new_id: &mut [usize],
    out: &mut CodePropertyGraph,
) {
    let attach = if keep[v] {
        let id = out.nodes.len();
        new_id[v] = id;
        let mut node = graph.nodes[v].clone();
        node.node_id = id;
        out.nodes.push(node);
        if let Some(p) = parent {
            out.edges.push(GraphEdge {
                src: p,
                dst: id,
                kind: EdgeKind::Ast,
            });
        }
        Some(id)
    } else {
        parent
    };
    for &c in &children[v] {
        emit(c, attach, graph, children, keep, new_id, out);
    }
}

/// `System.out.println(x)` and friends: the qualified callee subtree is
/// replaced by its final name leaf, so library calls read like a plain call.
fn collapse_builtin_callees(
    graph: &CodePropertyGraph,
    table: &LabelTable,
    children: &[Vec<usize>],
    has_dfg: &[bool],
    keep: &mut [bool],
) {
    for (v, node) in graph.nodes.iter().enumerate() {
        if !keep[v] || !matches!(node.label.as_str(), "call" | "method_invocation") {
            continue;
        }
        let Some(&callee) = children[v].first() else { continue };
        let Some((qualifier, name_leaf, chain)) = qualified_name(graph, children, callee) else {
            continue;
        };
        let name = graph.nodes[name_leaf].token_text.as_deref().unwrap_or("");
        if !table.collapses(graph.language, &qualifier, name) {
            continue;
        }
        if chain.iter().any(|&x| x != name_leaf && has_dfg[x]) {
            continue;
        }
        for x in chain {
            if x != name_leaf {
                keep[x] = false;
            }
        }
    }
}

/// For `a.b.c`, returns ("a.b", leaf of `c`, every node of the callee).
fn qualified_name(graph: &CodePropertyGraph, children: &[Vec<usize>], callee: usize) -> Option<(String, usize, Vec<usize>)> {
    if !matches!(graph.nodes[callee].label.as_str(), "attribute" | "field_access") {
        return None;
    }
    let mut chain = vec![callee];
    let mut parts = Vec::new();
    let mut cur = callee;
    loop {
        let kids = &children[cur];
        match graph.nodes[cur].label.as_str() {
            "attribute" | "field_access" if kids.len() == 3 => {
                chain.extend(kids.iter().copied());
                parts.push(kids[2]);
                cur = kids[0];
            }
            "identifier" => {
                parts.push(cur);
                break;
            }
            _ => return None,
        }
    }
    parts.reverse();
    let name_leaf = *parts.last()?;
    let qualifier: Vec<&str> = parts[..parts.len() - 1]
        .iter()
        .map(|&p| graph.nodes[p].token_text.as_deref().unwrap_or(""))
        .collect();
    chain.sort_unstable();
    chain.dedup();
    Some((qualifier.join("."), name_leaf, chain))
}
