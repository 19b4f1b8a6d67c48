use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::*;
use crate::ast::{Language, SourceUnit};
use crate::detect::{wl_level_similarities, wl_signature_with, LeafMode};
use crate::graph::{build_cpg, CodePropertyGraph};

fn py(id: &str, text: &str) -> SourceUnit {
    SourceUnit::new(id, Language::Python, text, "c")
}

fn label_sim(a: &CodePropertyGraph, b: &CodePropertyGraph) -> Vec<f64> {
    let sa = wl_signature_with(a, 3, LeafMode::LabelOnly).unwrap();
    let sb = wl_signature_with(b, 3, LeafMode::LabelOnly).unwrap();
    wl_level_similarities(&sa, &sb).unwrap()
}

/// `a` assignments (4 nodes each) and `b` prints (5 nodes each) under the
/// 1-node root.
fn sized(a: usize, b: usize) -> String {
    let mut s = String::new();
    for _ in 0..a {
        s.push_str("x = 0\n");
    }
    for _ in 0..b {
        s.push_str("print(x)\n");
    }
    s
}

#[test]
fn filter_boundaries() {
    let cfg = FilterConfig::default();
    let five = sized(5, 0);
    let four = sized(4, 0);
    let hundred_lines = format!("x = 0\n{}", "#\n".repeat(99));
    let hundred_one = format!("x = 0\n{}", "#\n".repeat(100));
    let pad = |total: usize| {
        let head = "x = 0\nx = 0\nx = 0\nx = 0\n#";
        format!("{head}{}\n", "a".repeat(total - head.len() - 1))
    };
    let units = [
        py("five", &five),
        py("four", &four),
        py("l100", &hundred_lines),
        py("l101", &hundred_one),
        py("c2000", &pad(2000)),
        py("c2001", &pad(2001)),
        py("n100", &sized(21, 3)),
        py("n101", &sized(25, 0)),
        py("bad", "x = (\n\n\n\n\n"),
    ];
    let out = filter_units(&units, &cfg);
    let accepted: Vec<&str> = out.accepted.iter().map(|u| u.id.as_str()).collect();
    assert_eq!(accepted, ["five", "l100", "c2000", "n100"]);
    assert_eq!(out.node_counts["n100"], 100);
    let reasons: Vec<(&str, RejectReason)> = out.rejected.iter().map(|r| (r.unit_id.as_str(), r.reason)).collect();
    assert_eq!(
        reasons,
        [
            ("four", RejectReason::MinLines),
            ("l101", RejectReason::MaxLines),
            ("c2001", RejectReason::MaxChars),
            ("n101", RejectReason::MaxNodes),
            ("bad", RejectReason::ParseError),
        ]
    );
    let report = out.report();
    assert_eq!((report.actual_count, report.filtered_count), (9, 4));
    assert_eq!(report.rejection_histogram.values().sum::<usize>(), 5);
    assert!(FilterConfig { min_lines: 10, max_lines: 5, ..cfg }.validate().is_err());
}

fn clustered(spec: &[(&str, usize)]) -> Vec<SourceUnit> {
    spec.iter()
        .flat_map(|&(c, n)| (0..n).map(move |i| SourceUnit::new(format!("{c}{i}"), Language::Python, "x", c)))
        .collect()
}

#[test]
fn exhaustive_small_sampling() {
    let units = clustered(&[("A", 2), ("B", 1)]);
    let pairs = sample_pairs(&units, 1, 2, 3).unwrap();
    let ids: Vec<(&str, CloneLabel)> = pairs.iter().map(|p| (p.pair_id.as_str(), p.label)).collect();
    assert_eq!(
        ids,
        [("A0|A1", CloneLabel::Clone), ("A0|B0", CloneLabel::NotClone), ("A1|B0", CloneLabel::NotClone)]
    );
    assert_eq!(
        sample_pairs(&units, 2, 0, 3).unwrap_err(),
        CorpusError::InsufficientPairs {
            requested_positive: 2,
            requested_negative: 0,
            available_positive: 1,
            available_negative: 2,
        }
    );
}

#[test]
fn sampling_is_valid_and_deterministic() {
    let units = clustered(&[("A", 6), ("B", 5), ("C", 7), ("D", 4)]);
    let cluster: BTreeMap<&str, &str> = units.iter().map(|u| (u.id.as_str(), u.cluster_id.as_str())).collect();
    // Small requests take the rejection path, large ones the enumeration path.
    for (np, nn) in [(5, 5), (40, 150)] {
        let a = sample_pairs(&units, np, nn, 11).unwrap();
        assert_eq!(a, sample_pairs(&units, np, nn, 11).unwrap());
        let mut reversed = units.clone();
        reversed.reverse();
        assert_eq!(a, sample_pairs(&reversed, np, nn, 11).unwrap());
        assert_eq!(a.iter().filter(|p| p.label.is_clone()).count(), np);
        assert_eq!(a.len(), np + nn);
        for p in &a {
            assert_ne!(p.unit_a, p.unit_b);
            assert_eq!(cluster[p.unit_a.as_str()] == cluster[p.unit_b.as_str()], p.label.is_clone());
        }
        let mut ids: Vec<&str> = a.iter().map(|p| p.pair_id.as_str()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), a.len());
    }
}

#[test]
fn splits_cover_disjointly() {
    let units = clustered(&[("A", 4), ("B", 4)]);
    let pairs = sample_pairs(&units, 5, 5, 1).unwrap();
    let sizes = SplitSizes {
        train: ClassCounts::new(3, 3),
        valid: ClassCounts::new(1, 1),
        test: ClassCounts::new(1, 1),
    };
    let m = split_dataset("toy", &pairs, sizes, 9).unwrap();
    m.validate().unwrap();
    assert_eq!(m.all_pairs().count(), 10);
    let mut all: Vec<&PairExample> = m.all_pairs().collect();
    all.sort();
    let mut orig: Vec<&PairExample> = pairs.iter().collect();
    orig.sort();
    assert_eq!(all, orig);
    assert_eq!(m, split_dataset("toy", &pairs, sizes, 9).unwrap());
    assert!(m.unit_leakage > 0);
    assert!(split_dataset("toy", &pairs, SplitSizes::balanced(12, 0, 0), 9).is_err());
}

#[test]
fn mixing() {
    let a_units: Vec<SourceUnit> = clustered(&[("A", 6), ("B", 6)]);
    let b_units: Vec<SourceUnit> = clustered(&[("C", 6), ("D", 6)]);
    let sizes = SplitSizes::balanced(20, 4, 4);
    let mut ma = split_dataset("left", &sample_pairs(&a_units, 14, 14, 1).unwrap(), sizes, 2).unwrap();
    ma.languages = alloc::vec![Language::Java];
    let mut mb = split_dataset("right", &sample_pairs(&b_units, 14, 14, 1).unwrap(), sizes, 2).unwrap();
    mb.languages = alloc::vec![Language::Python];

    let mixed = mix_datasets("mix", &ma, &mb, sizes, 4).unwrap();
    mixed.validate().unwrap();
    assert_eq!(mixed.splits.train.provenance["left"], 10);
    assert_eq!(mixed.splits.train.provenance["right"], 10);
    assert_eq!(mixed.languages, [Language::Java, Language::Python]);
    for split in [&mixed.splits.train, &mixed.splits.valid, &mixed.splits.test] {
        let mut recount = BTreeMap::new();
        for p in &split.pairs {
            *recount.entry(p.source.clone().unwrap()).or_insert(0) += 1;
        }
        assert_eq!(recount, split.provenance);
    }

    let same = mix_datasets("self", &ma, &ma, sizes, 4).unwrap();
    let ids = |m: &DatasetManifest| {
        let mut v: Vec<String> = m.all_pairs().map(|p| p.pair_id.clone()).collect();
        v.sort();
        v
    };
    assert_eq!(ids(&same), ids(&ma));
    assert!(mix_datasets("big", &ma, &mb, SplitSizes::balanced(44, 4, 4), 4).is_err());
}

const FIG1: &str = "num = 5\nprint(\"hello\", num)\n";

#[test]
fn layout_variants_have_identical_graphs() {
    let seeds = [
        py("p1", "def f(a, b):\n    s = a + b\n    if s > 10:\n        print(s)\n    return s\n"),
        SourceUnit::new(
            "j1",
            Language::Java,
            "static int f(int a) {\n    int s = a * 2;\n    while (s < 10) {\n        s += 3;\n    }\n    return s;\n}\n",
            "c",
        ),
    ];
    let out = synthesize_clones(&seeds, CloneType::I, 5);
    assert!(out.failures.is_empty());
    for (seed, v) in seeds.iter().zip(&out.variants) {
        assert_ne!(seed.text, v.unit.text);
        let (a, b) = (build_cpg(seed).unwrap(), build_cpg(&v.unit).unwrap());
        assert_eq!((a.nodes, a.edges), (b.nodes, b.edges));
    }
}

#[test]
fn renaming_keeps_structure() {
    let unit = py("f1", FIG1);
    let renamed = rename_identifiers(&unit, &BTreeMap::from([("num".into(), "counter".into())])).unwrap();
    assert_eq!(renamed, "counter = 5\nprint(\"hello\", counter)\n");
    let a = build_cpg(&unit).unwrap();
    let b = build_cpg(&py("f2", &renamed)).unwrap();
    assert_eq!(a.edges, b.edges);
    let changed: Vec<(&str, &str)> = a
        .nodes
        .iter()
        .zip(&b.nodes)
        .filter(|(x, y)| x != y)
        .map(|(x, y)| (x.token_text.as_deref().unwrap(), y.token_text.as_deref().unwrap()))
        .collect();
    assert_eq!(changed, [("num", "counter"), ("num", "counter")]);

    let out = synthesize_clones(&[py("s", "def f(xs):\n    t = 0\n    t += len(xs)\n    print(t)\n    return t\n")], CloneType::II, 1);
    let v = &out.variants[0];
    assert_eq!(v.renames.keys().collect::<Vec<_>>(), ["t", "xs"]);
    assert!(v.unit.text.contains("len(") && v.unit.text.contains("print("));
    let a = build_cpg(&py("s", "def f(xs):\n    t = 0\n    t += len(xs)\n    print(t)\n    return t\n")).unwrap();
    let b = build_cpg(&v.unit).unwrap();
    assert_eq!(label_sim(&a, &b), [1.0; 4]);
}

#[test]
fn inserted_statement_adds_its_subtree() {
    let unit = py("u", "def f(a):\n    b = a\n    return b\n");
    let before = build_cpg(&unit).unwrap().nodes.len();
    let edited = insert_unused_assignment(&unit, 1, "unused", 0).unwrap();
    assert_eq!(edited, "def f(a):\n    b = a\n    unused = 0\n    return b\n");
    let after = build_cpg(&py("v", &edited)).unwrap().nodes.len();
    assert_eq!(after - before, 4);

    let java = SourceUnit::new("j", Language::Java, "int f(int a) {\n    return a;\n}\n", "c");
    let before = build_cpg(&java).unwrap().nodes.len();
    let edited = insert_unused_assignment(&java, 0, "unused", 0).unwrap();
    let after = build_cpg(&SourceUnit::new("k", Language::Java, edited, "c")).unwrap().nodes.len();
    assert_eq!(after - before, 4);
}

#[test]
fn statement_variants_are_near_but_not_equal() {
    let seeds: Vec<SourceUnit> = (0..6)
        .map(|i| py(&format!("s{i}"), "def f(a, b):\n    s = a + b\n    print(s, a)\n    if s > b:\n        s -= 1\n    return s\n"))
        .collect();
    let out = synthesize_clones(&seeds, CloneType::III, 21);
    assert_eq!(out.variants.len(), 6);
    for v in &out.variants {
        let a = build_cpg(&seeds[0]).unwrap();
        let b = build_cpg(&v.unit).unwrap();
        let sims = label_sim(&a, &b);
        let mean = sims.iter().sum::<f64>() / 4.0;
        assert!(mean > 0.0 && mean < 1.0, "{mean}");
    }
    let none = synthesize_clones(&[py("x", "print(1)")], CloneType::II, 0);
    assert_eq!(none.failures.len(), 1);
    assert!(synthesize_clones(&seeds[..1], CloneType::IV, 0).failures.len() == 1);
}

#[test]
fn synthesis_is_deterministic_and_order_free() {
    let seeds = [py("a", FIG1), py("b", "def g(n):\n    m = n * 2\n    return m\n")];
    for ty in [CloneType::I, CloneType::II, CloneType::III] {
        let x = synthesize_clones(&seeds, ty, 8);
        let y = synthesize_clones(&[seeds[1].clone(), seeds[0].clone()], ty, 8);
        assert_eq!(x.variants[0], y.variants[1]);
        assert_eq!(x, synthesize_clones(&seeds, ty, 8));
    }
}

#[test]
fn generated_corpus_is_well_formed() {
    let cfg = GeneratorConfig::new(6, 4, 17);
    for lang in [Language::Python, Language::Java] {
        let units = generate_corpus(&cfg, lang);
        assert_eq!(units.len(), 6 * 5);
        assert_eq!(units, generate_corpus(&cfg, lang));
        let out = filter_units(&units, &FilterConfig::default());
        assert_eq!(out.rejected, []);
    }
}

#[test]
fn generated_programs_converge_across_languages() {
    let cfg = GeneratorConfig::new(12, 0, 5);
    for c in 0..cfg.clusters {
        let p = program_for_cluster(&cfg, c, Language::Python);
        let a = build_cpg(&SourceUnit::new("p", Language::Python, p.render(Language::Python), "c")).unwrap();
        let b = build_cpg(&SourceUnit::new("j", Language::Java, p.render(Language::Java), "c")).unwrap();
        assert_eq!(label_sim(&a, &b), [1.0; 4], "{}", p.render(Language::Python));
    }
}

fn words(text: &str) -> Vec<&str> {
    let mut w: Vec<&str> = text.split(|c: char| !c.is_ascii_alphanumeric()).filter(|s| !s.is_empty()).collect();
    w.sort_unstable();
    w
}

/// Every reference names a parameter or an earlier top-level declaration.
fn references_in_scope(p: &Program) -> bool {
    use super::generator::{Cond, Expr, Stmt};
    fn expr_ok(e: &Expr, scope: &[String]) -> bool {
        match e {
            Expr::Var(v) => scope.contains(v),
            Expr::Int(_) => true,
            Expr::Abs(a) => expr_ok(a, scope),
            Expr::Bin(_, a, b) | Expr::Max(a, b) | Expr::Min(a, b) => expr_ok(a, scope) && expr_ok(b, scope),
        }
    }
    fn stmt_ok(s: &Stmt, scope: &[String]) -> bool {
        match s {
            Stmt::Let(_, e) | Stmt::Print(e) | Stmt::Return(e) => expr_ok(e, scope),
            Stmt::Assign(v, e) | Stmt::Update(v, _, e) => scope.contains(v) && expr_ok(e, scope),
            Stmt::If(Cond(_, l, r), a, b) => {
                expr_ok(l, scope) && expr_ok(r, scope) && a.iter().chain(b).all(|s| stmt_ok(s, scope))
            }
            Stmt::While(Cond(_, l, r), a) => expr_ok(l, scope) && expr_ok(r, scope) && a.iter().all(|s| stmt_ok(s, scope)),
        }
    }
    let mut scope = p.params.clone();
    p.body.iter().all(|s| {
        let ok = stmt_ok(s, &scope);
        if let Stmt::Let(v, _) = s {
            scope.push(v.clone());
        }
        ok
    })
}

#[test]
fn family_siblings_share_tokens_but_not_data_flow() {
    let mut cfg = GeneratorConfig::new(24, 0, 3);
    cfg.family_size = 4;
    let mut flow_differs = 0;
    let mut siblings = 0;
    for family in 0..cfg.clusters / cfg.family_size {
        let members: Vec<Program> = (0..cfg.family_size)
            .map(|m| program_for_cluster(&cfg, family * cfg.family_size + m, Language::Python))
            .collect();
        for (i, p) in members.iter().enumerate() {
            assert!(references_in_scope(p), "{}", p.render(Language::Python));
            for q in &members[i + 1..] {
                assert_ne!(p, q);
            }
        }
        let base = members[0].render(Language::Python);
        let base_graph = build_cpg(&py("b", &base)).unwrap();
        for sib in &members[1..] {
            let text = sib.render(Language::Python);
            assert_eq!(words(&text), words(&base));
            let sims = label_sim(&base_graph, &build_cpg(&py("s", &text)).unwrap());
            assert_eq!(sims[0], 1.0);
            siblings += 1;
            flow_differs += (sims[3] < 1.0) as usize;
        }
    }
    // A swap between structurally symmetric positions can leave the graph
    // unchanged; it must stay rare.
    assert!(flow_differs * 10 >= siblings * 9, "{flow_differs} of {siblings}");
}

#[test]
fn family_size_one_matches_plain_generation() {
    let plain = GeneratorConfig::new(5, 2, 9);
    let mut single = plain;
    single.family_size = 1;
    assert_eq!(generate_corpus(&plain, Language::Java), generate_corpus(&single, Language::Java));
    assert_eq!(plain.family_of(4), 4);
    let mut grouped = plain;
    grouped.family_size = 3;
    assert_eq!((grouped.family_of(2), grouped.family_of(3)), (0, 1));
}

#[test]
fn cluster_index_parses_generated_ids() {
    let units = generate_corpus(&GeneratorConfig::new(3, 0, 1), Language::Python);
    let idx: Vec<Option<usize>> = units.iter().map(|u| cluster_index(&u.cluster_id)).collect();
    assert_eq!(idx, [Some(0), Some(1), Some(2)]);
    assert_eq!(cluster_index("misc/abc"), None);
}
