use alloc::string::String;
use alloc::vec::Vec;

use super::*;
use crate::ast::parse_source;

fn unit(lang: Language, text: &str) -> SourceUnit {
    SourceUnit::new("u", lang, text, "c")
}

fn labels(g: &CodePropertyGraph) -> Vec<&str> {
    g.nodes.iter().map(|n| n.label.as_str()).collect()
}

const FIG1: &str = "num = 5\nprint(\"hello\", num)\n";

#[test]
fn first_figure_dfg_has_exactly_two_edges() {
    let ast = parse_source("u", Language::Python, FIG1).unwrap();
    let g = build_dfg(&ast);
    g.validate().unwrap();
    let described: Vec<(&str, usize, &str, usize)> = g
        .dfg_edges()
        .map(|e| {
            let a = &g.nodes[e.src];
            let b = &g.nodes[e.dst];
            (
                a.token_text.as_deref().unwrap(),
                ast.nodes[e.src].span.start,
                b.token_text.as_deref().unwrap(),
                ast.nodes[e.dst].span.start,
            )
        })
        .collect();
    assert_eq!(described, [("num", 0, "num", 23), ("5", 6, "num", 0)]);
    assert_eq!(g.metrics(), GraphMetrics { nodes: 15, leaf_nodes: 9, ast_edges: 14, dfg_edges: 2 });
}

#[test]
fn first_figure_standard_cpg() {
    let g = build_cpg(&unit(Language::Python, FIG1)).unwrap();
    g.validate().unwrap();
    assert_eq!(
        labels(&g),
        [
            "_program",
            "_statement",
            "_assign",
            "_identifier",
            "_integer",
            "_statement",
            "_call",
            "_identifier",
            "_arguments",
            "_string",
            "_identifier",
        ]
    );
    assert_eq!(g.metrics(), GraphMetrics { nodes: 11, leaf_nodes: 5, ast_edges: 10, dfg_edges: 2 });
}

#[test]
fn pruning_call_brackets_removes_exactly_two_nodes() {
    let b = GraphBuilder::new();
    let dfg = b.build_stage(&unit(Language::Python, "print(num)"), Stage::Dfg).unwrap();
    let pruned = b.prune(&dfg).unwrap();
    assert_eq!(dfg.nodes.len() - pruned.nodes.len(), 2);
    assert!(pruned.nodes.iter().all(|n| n.label != "(" && n.label != ")"));
    pruned.validate().unwrap();
}

#[test]
fn pruning_without_prunable_labels_is_identity() {
    let b = GraphBuilder::new();
    let dfg = b.build_stage(&unit(Language::Python, "x"), Stage::Dfg).unwrap();
    let pruned = b.prune(&dfg).unwrap();
    assert_eq!(pruned.nodes, dfg.nodes);
    assert_eq!(pruned.edges, dfg.edges);
}

#[test]
fn minimal_program_is_three_nodes() {
    let g = build_cpg(&unit(Language::Python, "x")).unwrap();
    assert_eq!(labels(&g), ["_program", "_statement", "_identifier"]);
}

#[test]
fn stages_are_enforced() {
    let b = GraphBuilder::new();
    let ast = b.build_stage(&unit(Language::Python, "x = 1"), Stage::Ast).unwrap();
    assert_eq!(
        b.prune(&ast).unwrap_err(),
        GraphError::InvalidStage { expected: Stage::Dfg, found: Stage::Ast }
    );
    assert!(matches!(b.standardize_labels(&ast), Err(GraphError::InvalidStage { .. })));
    let cpg = b.build_cpg(&unit(Language::Python, "x = 1")).unwrap();
    assert_eq!(b.standardize_labels(&cpg).unwrap(), cpg);
}

#[test]
fn standardization_keeps_topology() {
    let b = GraphBuilder::new();
    let u = unit(Language::Java, "int f(int a) { if (a > 0) { return a * 2; } else { return -a; } }");
    let pruned = b.build_stage(&u, Stage::Pruned).unwrap();
    let cpg = b.standardize_labels(&pruned).unwrap();
    assert_eq!(pruned.edges, cpg.edges);
    assert_eq!(pruned.nodes.len(), cpg.nodes.len());
    for (p, c) in pruned.nodes.iter().zip(&cpg.nodes) {
        assert_eq!((p.node_id, &p.token_text, p.is_leaf), (c.node_id, &c.token_text, c.is_leaf));
    }
    assert!(cpg.nodes.iter().all(|n| n.label.starts_with('_')));
}

#[test]
fn unmapped_kinds_are_errors() {
    let table = LabelTable::parse("# version 1\n*\tidentifier\t_identifier\n").unwrap();
    let b = GraphBuilder::with_table(table);
    let err = b.build_cpg(&unit(Language::Python, "x")).unwrap_err();
    assert_eq!(
        err,
        GraphError::UnmappedLabel { language: Language::Python, label: String::from("module") }
    );
}

#[test]
fn roots_and_integers_share_labels_across_languages() {
    let t = LabelTable::standard();
    let label = |lang, kind| match t.lookup(lang, None, kind) {
        Some(LabelAction::Label(l)) => l.clone(),
        other => panic!("{kind}: {other:?}"),
    };
    assert_eq!(label(Language::Python, "module"), "_program");
    assert_eq!(label(Language::Java, "program"), "_program");
    assert_eq!(label(Language::Python, "integer"), "_integer");
    assert_eq!(label(Language::Java, "decimal_integer_literal"), "_integer");
}

#[test]
fn hello_name_pair_converges() {
    let py = build_cpg(&unit(Language::Python, "def hello(name):\n    print(\"hello, \" + name)\n")).unwrap();
    let java = build_cpg(&unit(
        Language::Java,
        "public static void hello(String name) {\n    System.out.println(\"hello, \" + name);\n}\n",
    ))
    .unwrap();
    assert_eq!(labels(&py), labels(&java));
    assert_eq!(py.edges, java.edges);
}

#[test]
fn builtin_collapse_respects_data_flow() {
    // `Math` is a local here, so the qualifier is a bound use and stays.
    let b = GraphBuilder::new();
    let g = b.build_cpg(&unit(Language::Java, "void f(int Math) { g(Math.abs(1)); }")).unwrap();
    assert!(g.nodes.iter().any(|n| n.label == "_attribute"));
    let g = b.build_cpg(&unit(Language::Java, "void f(int x) { g(Math.abs(x)); }")).unwrap();
    assert!(g.nodes.iter().all(|n| n.label != "_attribute"));
}

#[test]
fn types_and_modifiers_are_dropped_whole() {
    let g = build_cpg(&unit(
        Language::Java,
        "@Override public java.util.List<String> names(final Map<String, Integer> m) throws IOException { return null; }",
    ))
    .unwrap();
    assert_eq!(
        labels(&g),
        ["_program", "_function_def", "_identifier", "_parameters", "_identifier", "_block", "_return", "_null"]
    );
}

#[test]
fn is_leaf_survives_emptied_interior_nodes() {
    let g = build_cpg(&unit(Language::Python, "f()")).unwrap();
    let args = g.nodes.iter().find(|n| n.label == "_arguments").unwrap();
    assert!(!args.is_leaf && args.token_text.is_none());
}
