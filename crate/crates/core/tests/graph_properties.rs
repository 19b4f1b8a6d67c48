use std::collections::{BTreeMap, VecDeque};

use crossclone_core::ast::{Language, SourceUnit};
use crossclone_core::corpus::{generate_corpus, GeneratorConfig};
use crossclone_core::fixtures::all_fixtures;
use crossclone_core::graph::{build_cpg, CodePropertyGraph, GraphBuilder, Stage};
use proptest::prelude::*;

type Endpoint = (String, Option<String>);

fn dfg_multiset(g: &CodePropertyGraph) -> BTreeMap<(Endpoint, Endpoint), usize> {
    let key = |i: usize| (g.nodes[i].label.clone(), g.nodes[i].token_text.clone());
    let mut m = BTreeMap::new();
    for e in g.dfg_edges() {
        *m.entry((key(e.src), key(e.dst))).or_insert(0) += 1;
    }
    m
}

fn check_tree(g: &CodePropertyGraph) {
    let n = g.nodes.len();
    let ast: Vec<_> = g.ast_edges().collect();
    assert_eq!(ast.len(), n - 1, "{}", g.unit_id);
    let mut indegree = vec![0; n];
    let mut adj = vec![Vec::new(); n];
    for e in &ast {
        indegree[e.dst] += 1;
        adj[e.src].push(e.dst);
    }
    let roots: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    assert_eq!(roots.len(), 1, "{}", g.unit_id);
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([roots[0]]);
    while let Some(v) = queue.pop_front() {
        assert!(!seen[v]);
        seen[v] = true;
        queue.extend(adj[v].iter().copied());
    }
    assert!(seen.iter().all(|&s| s), "{}", g.unit_id);
}

fn check_unit(builder: &GraphBuilder, unit: &SourceUnit) {
    let dfg = builder.build_stage(unit, Stage::Dfg).unwrap();
    let pruned = builder.build_stage(unit, Stage::Pruned).unwrap();
    let standard = builder.build_stage(unit, Stage::StandardCpg).unwrap();

    // Pruning keeps every data-flow edge and both of its endpoints.
    assert_eq!(dfg_multiset(&dfg), dfg_multiset(&pruned), "{}", unit.id);
    assert!(pruned.nodes.len() <= dfg.nodes.len());
    check_tree(&pruned);

    // Standardization relabels and nothing else.
    assert_eq!(pruned.edges, standard.edges);
    assert_eq!(pruned.nodes.len(), standard.nodes.len());
    for (p, s) in pruned.nodes.iter().zip(&standard.nodes) {
        assert_eq!((p.node_id, &p.token_text, p.is_leaf), (s.node_id, &s.token_text, s.is_leaf));
        assert!(s.label.starts_with('_'), "{}: {}", unit.id, s.label);
    }
    standard.validate().unwrap();

    let a = serde_json::to_string(&build_cpg(unit).unwrap()).unwrap();
    let b = serde_json::to_string(&build_cpg(unit).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_eq!(serde_json::to_string(&standard).unwrap(), a);
}

#[test]
fn fixtures_satisfy_graph_invariants() {
    let builder = GraphBuilder::new();
    for f in all_fixtures() {
        check_unit(&builder, &f.unit());
    }
}

#[test]
fn round_trips_through_json() {
    for f in all_fixtures() {
        let g = build_cpg(&f.unit()).unwrap();
        let back: CodePropertyGraph = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_programs_satisfy_graph_invariants(seed in any::<u64>(), java in any::<bool>()) {
        let lang = if java { Language::Java } else { Language::Python };
        let builder = GraphBuilder::new();
        for unit in generate_corpus(&GeneratorConfig::new(2, 2, seed), lang) {
            check_unit(&builder, &unit);
        }
    }
}
