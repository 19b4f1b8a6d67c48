//! Acceptance checks. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any failed.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crossclone::detectors::DetectorKind;
use crossclone::experiment::{run_experiment, ExperimentId, ExperimentSpec, RunOutcome};
use crossclone::ingest::{ingest_dir, ClusterScheme};
use crossclone::store::{write_dataset, write_units, StoredDataset};
use crossclone::suite::{build_suite, suite_specs, Suite, SuiteConfig};
use crossclone_core::corpus::{
    filter_units, generate_corpus, sample_pairs, split_dataset, FilterConfig, GeneratorConfig, RejectReason, SplitSizes,
};
use crossclone_core::detect::{batch_gradient, batch_loss, wl_level_similarities, wl_signature_with, LeafMode, LossKind};
use crossclone_core::eval::{bootstrap_compare, Metric};
use crossclone_core::fixtures::{hello_pair, PRINT_NUM};
use crossclone_core::ast::parse_source;
use crossclone_core::graph::build_dfg;
use crossclone_core::tokens::{encode, pair_gradients, pair_loss, train_sgns, BpeVocab, SgnsConfig};
use crossclone_core::{build_cpg, Language, SourceUnit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, detail: String) -> Check {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn ms(d: Duration) -> String {
    format!("{:.0} ms", d.as_secs_f64() * 1e3)
}

/// The generated suite and the experiment runs over it, built on first use.
#[derive(Default)]
struct Lab {
    dir: Option<tempfile::TempDir>,
    suite: Option<Suite>,
    build_time: Duration,
    runs: BTreeMap<String, (RunOutcome, Duration)>,
}

impl Lab {
    fn suite(&mut self) -> Result<&Suite, String> {
        if self.suite.is_none() {
            let dir = tempfile::tempdir().map_err(err)?;
            let start = Instant::now();
            let suite = build_suite(dir.path(), &SuiteConfig::default()).map_err(err)?;
            self.build_time = start.elapsed();
            self.dir = Some(dir);
            self.suite = Some(suite);
        }
        Ok(self.suite.as_ref().unwrap())
    }

    fn run(&mut self, name: &str) -> Result<(&RunOutcome, Duration), String> {
        if !self.runs.contains_key(name) {
            let base = self.suite()?.dir.clone();
            let spec = suite_specs()
                .into_iter()
                .find(|s| s.run_name() == name)
                .ok_or_else(|| format!("no spec named {name}"))?;
            let start = Instant::now();
            let out = run_experiment(&spec, &base, &base.join("runs").join(name), true).map_err(err)?;
            self.runs.insert(name.into(), (out, start.elapsed()));
        }
        let (out, t) = &self.runs[name];
        Ok((out, *t))
    }
}

fn f1(run: &RunOutcome, eval: &str, kind: DetectorKind) -> Result<f64, String> {
    run.report(eval, kind)
        .map(|r| r.metrics.f1)
        .ok_or_else(|| format!("missing {kind} report on {eval}"))
}

fn dfg_of_print_num(_: &mut Lab) -> Check {
    let start = Instant::now();
    let ast = parse_source("print_num", Language::Python, PRINT_NUM.text).map_err(err)?;
    let g = build_dfg(&ast);
    let name = |i: usize| {
        let n = &ast.nodes[i];
        format!("{}@{}", n.token_text.as_deref().unwrap_or(&n.kind), n.span.start)
    };
    let mut edges: Vec<String> = g.dfg_edges().map(|e| format!("{} -> {}", name(e.src), name(e.dst))).collect();
    edges.sort();
    let elapsed = start.elapsed();
    // `num = 5` puts the literal at byte 6 and the definition at 0; the use
    // in `print("hello", num)` starts at byte 23.
    let expected = ["5@6 -> num@0", "num@0 -> num@23"];
    ensure(
        edges == expected && elapsed < Duration::from_secs(1),
        format!("edges {edges:?}, {}", ms(elapsed)),
    )
}

fn hello_converges_across_languages(_: &mut Lab) -> Check {
    let start = Instant::now();
    let pair = hello_pair();
    let a = build_cpg(&pair.a.unit()).map_err(err)?;
    let b = build_cpg(&pair.b.unit()).map_err(err)?;
    let mut la: Vec<&str> = a.nodes.iter().map(|n| n.label.as_str()).collect();
    let mut lb: Vec<&str> = b.nodes.iter().map(|n| n.label.as_str()).collect();
    la.sort_unstable();
    lb.sort_unstable();
    let sa = wl_signature_with(&a, 3, LeafMode::LabelOnly).map_err(err)?;
    let sb = wl_signature_with(&b, 3, LeafMode::LabelOnly).map_err(err)?;
    let sims = wl_level_similarities(&sa, &sb).map_err(err)?;
    let elapsed = start.elapsed();
    ensure(
        la == lb && sims == [1.0; 4] && elapsed < Duration::from_secs(1),
        format!("{} labels each, equal multisets: {}, WL 0..3 {sims:?}, {}", la.len(), la == lb, ms(elapsed)),
    )
}

fn filter_boundaries(_: &mut Lab) -> Check {
    let py = |id: &str, text: String| SourceUnit::new(id, Language::Python, text, "c");
    // `x = 0` is 4 standard-CPG nodes, `print(x)` is 5, the module root 1.
    let sized = |assigns: usize, prints: usize| format!("{}{}", "x = 0\n".repeat(assigns), "print(x)\n".repeat(prints));
    let padded = |total: usize| {
        let head = "x = 0\nx = 0\nx = 0\nx = 0\n#";
        format!("{head}{}\n", "a".repeat(total - head.len() - 1))
    };
    let units = [
        py("lines_5", sized(5, 0)),
        py("lines_4", sized(4, 0)),
        py("lines_100", format!("x = 0\n{}", "#\n".repeat(99))),
        py("lines_101", format!("x = 0\n{}", "#\n".repeat(100))),
        py("chars_2000", padded(2000)),
        py("chars_2001", padded(2001)),
        py("nodes_100", sized(21, 3)),
        py("nodes_101", sized(25, 0)),
    ];
    let out = filter_units(&units, &FilterConfig::default());
    let accepted: Vec<&str> = out.accepted.iter().map(|u| u.id.as_str()).collect();
    let rejected: Vec<(&str, RejectReason)> = out.rejected.iter().map(|r| (r.unit_id.as_str(), r.reason)).collect();
    let ok = accepted == ["lines_5", "lines_100", "chars_2000", "nodes_100"]
        && rejected
            == [
                ("lines_4", RejectReason::MinLines),
                ("lines_101", RejectReason::MaxLines),
                ("chars_2001", RejectReason::MaxChars),
                ("nodes_101", RejectReason::MaxNodes),
            ]
        && out.node_counts.get("nodes_100") == Some(&100)
        && units[4].text.len() == 2000;
    ensure(ok, format!("accepted {accepted:?}, rejected {rejected:?}"))
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

fn sgns_gradients(_: &mut Lab) -> Check {
    let vocab = BpeVocab::byte_level();
    let seqs: Vec<_> = ["abcde", "edcba", "abcab", "deabc"]
        .iter()
        .enumerate()
        .map(|(i, t)| encode(&format!("t{i}"), t, &vocab))
        .collect();
    let cfg = SgnsConfig {
        dim: 8,
        window: 2,
        negatives: 3,
        learning_rate: 0.05,
        epochs: 30,
        seed: 5,
    };
    let table = train_sgns(&seqs, vocab.len(), cfg).map_err(err)?;
    let row = |c: u8| table.row(u32::from(c)).unwrap().to_vec();
    let out = |c: u8| table.output_row(u32::from(c)).unwrap().to_vec();
    let params = [row(b'c'), out(b'd'), out(b'a'), out(b'e')];
    let g = pair_gradients(&params[0], &params[1], &[&params[2], &params[3]]);
    let analytic = [&g.center, &g.context, &g.negatives[0], &g.negatives[1]];
    let eps = 1e-4;
    let mut worst: f64 = 0.0;
    for (which, grad) in analytic.iter().enumerate() {
        for k in 0..params[0].len() {
            let at = |d: f64| {
                let mut p = params.clone();
                p[which][k] += d;
                pair_loss(&p[0], &p[1], &[&p[2], &p[3]])
            };
            worst = worst.max(rel_err(grad[k], (at(eps) - at(-eps)) / (2.0 * eps)));
        }
    }
    let zero = vec![0.0; 8];
    let initial = pair_loss(&zero, &zero, &[&zero]);
    let gap = (initial - 2.0 * std::f64::consts::LN_2).abs();
    ensure(
        worst <= 1e-5 && gap <= 1e-12,
        format!("max relative gradient error {worst:.2e}, |zero-init loss - 2 ln 2| = {gap:.1e}"),
    )
}

fn focal_matches_cross_entropy(_: &mut Lab) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let batch: Vec<(Vec<f64>, bool)> = (0..12)
        .map(|i| ((0..4).map(|_| rng.gen_range(-2.0..2.0)).collect(), i % 3 == 0))
        .collect();
    let w = [0.4, -0.8, 0.25, 0.1];
    let bias = 0.1;
    let ce = batch_loss(&w, bias, &batch, LossKind::CrossEntropy, 0.0);
    let fl = batch_loss(&w, bias, &batch, LossKind::Focal { gamma: 0.0 }, 0.0);
    let identity = (ce - fl).abs();
    let mut worst: f64 = 0.0;
    for loss in [LossKind::CrossEntropy, LossKind::focal()] {
        let (gw, gb) = batch_gradient(&w, bias, &batch, loss, 1e-3);
        let eps = 1e-6;
        for k in 0..=w.len() {
            let at = |d: f64| {
                let mut w2 = w.to_vec();
                let mut b2 = bias;
                if k < w.len() {
                    w2[k] += d;
                } else {
                    b2 += d;
                }
                batch_loss(&w2, b2, &batch, loss, 1e-3)
            };
            let numeric = (at(eps) - at(-eps)) / (2.0 * eps);
            worst = worst.max(rel_err(if k < w.len() { gw[k] } else { gb }, numeric));
        }
    }
    ensure(
        identity <= 1e-12 && worst <= 1e-6,
        format!("|focal(0) - CE| = {identity:.1e}, max relative gradient error {worst:.2e}"),
    )
}

fn in_domain(lab: &mut Lab) -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    lab.suite()?;
    let mut total = lab.build_time;
    for lang in ["python", "java"] {
        let ds = StoredDataset::load(&lab.suite()?.dir.join(format!("{lang}.manifest.json"))).map_err(err)?;
        let test = ds.manifest.splits.test.counts;
        let typed = ds.split("test").map_err(err)?.iter().filter(|p| p.clone_type.is_some()).count();
        let (run, t) = lab.run(&format!("exp1-{lang}"))?;
        total += t;
        let g = f1(run, lang, DetectorKind::Graph)?;
        let s = f1(run, lang, DetectorKind::Sequence)?;
        let cmp = run.comparison(lang).ok_or("missing bootstrap")?;
        let this = test.positive >= 200
            && test.negative >= 200
            && typed == test.positive
            && g - s >= 0.05
            && cmp.better == DetectorKind::Graph
            && cmp.result.p_value < 0.05
            && cmp.result.resamples == 10_000;
        ok &= this;
        parts.push(format!(
            "{lang}: {}+/{}- test pairs, graph {:.2} vs sequence {:.2} (+{:.2}), p = {:.4}",
            test.positive,
            test.negative,
            100.0 * g,
            100.0 * s,
            100.0 * (g - s),
            cmp.result.p_value
        ));
    }
    ok &= total < Duration::from_secs(120);
    parts.push(format!("{:.1} s including suite generation", total.as_secs_f64()));
    ensure(ok, parts.join("; "))
}

fn zero_shot(lab: &mut Lab) -> Check {
    let (run, _) = lab.run("exp3")?;
    let g = f1(run, "python", DetectorKind::Graph)?;
    let s = f1(run, "python", DetectorKind::Sequence)?;
    ensure(
        g > s && run.reports.len() == 2,
        format!("java -> python: graph {:.2} vs sequence {:.2}", 100.0 * g, 100.0 * s),
    )
}

fn mixed_training(lab: &mut Lab) -> Check {
    let exp1: BTreeMap<&str, f64> = [
        ("python", f1(lab.run("exp1-python")?.0, "python", DetectorKind::Graph)?),
        ("java", f1(lab.run("exp1-java")?.0, "java", DetectorKind::Graph)?),
    ]
    .into();
    let (run, _) = lab.run("exp2")?;
    let mut grid: Vec<(String, DetectorKind)> = run.reports.iter().map(|r| (r.eval.clone(), r.detector)).collect();
    grid.sort();
    let expected: Vec<(String, DetectorKind)> = ["java", "mixed", "python"]
        .iter()
        .flat_map(|e| DetectorKind::ALL.iter().map(move |k| (e.to_string(), *k)))
        .collect();
    let mut ok = grid == expected && run.comparisons.len() == 3;
    let mut parts = vec![format!("{} reports", run.reports.len())];
    for (lang, before) in exp1 {
        let after = f1(run, lang, DetectorKind::Graph)?;
        ok &= after >= before - 0.01;
        parts.push(format!("{lang}: graph {:.2} after mixing vs {:.2} ({:+.2})", 100.0 * after, 100.0 * before, 100.0 * (after - before)));
    }
    ensure(ok, parts.join("; "))
}

fn bootstrap_sanity(_: &mut Lab) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let actual: Vec<bool> = (0..1000).map(|i| i % 2 == 0).collect();
    let random: Vec<bool> = (0..1000).map(|_| rng.gen_bool(0.5)).collect();
    let same = bootstrap_compare(&random, &random, &actual, Metric::F1, 10_000, 1).map_err(err)?;
    let perfect = bootstrap_compare(&actual, &random, &actual, Metric::F1, 10_000, 1).map_err(err)?;
    let again = bootstrap_compare(&actual, &random, &actual, Metric::F1, 10_000, 1).map_err(err)?;
    ensure(
        same.p_value >= 0.5 && perfect.p_value < 0.001 && perfect.p_value.to_bits() == again.p_value.to_bits(),
        format!(
            "identical p = {:.4}, perfect vs random p = {:.5}, repeat bit-exact: {}",
            same.p_value,
            perfect.p_value,
            perfect.p_value.to_bits() == again.p_value.to_bits()
        ),
    )
}

/// Ingest, filter, pair, train, evaluate and report under `root`.
fn pipeline(root: &Path) -> Result<(), String> {
    let mut gen = GeneratorConfig::new(40, 4, 21);
    gen.family_size = 4;
    for lang in [Language::Python, Language::Java] {
        for u in generate_corpus(&gen, lang) {
            let path = root.join("src").join(&u.id);
            fs::create_dir_all(path.parent().unwrap()).map_err(err)?;
            fs::write(path, &u.text).map_err(err)?;
        }
    }
    let (units, report) = ingest_dir(&root.join("src"), &ClusterScheme::ParentDir).map_err(err)?;
    crossclone::canonical::write_json(&root.join("ingest.json"), &report).map_err(err)?;
    let outcome = filter_units(&units, &FilterConfig::default());
    crossclone::canonical::write_json(&root.join("filter.json"), &outcome.report()).map_err(err)?;
    let mut manifests = Vec::new();
    for lang in [Language::Python, Language::Java] {
        let mine: Vec<SourceUnit> = outcome.accepted.iter().filter(|u| u.language == lang).cloned().collect();
        let store = root.join("data").join(format!("{}.jsonl", lang.as_str()));
        write_units(&store, &mine).map_err(err)?;
        let sizes = SplitSizes::balanced(300, 100, 200);
        let pairs = sample_pairs(&mine, 300, 300, 5).map_err(err)?;
        let mut m = split_dataset(lang.as_str(), &pairs, sizes, 6).map_err(err)?;
        m.languages = vec![lang];
        manifests.push(write_dataset(&root.join("data"), &m, &[store]).map_err(err)?);
    }
    let mut spec = ExperimentSpec::new(ExperimentId::Exp3, &["java.manifest.json"], &["python.manifest.json"]);
    spec.bootstrap.resamples = 1000;
    run_experiment(&spec, &root.join("data"), &root.join("run"), false).map_err(err)?;
    Ok(())
}

fn files(root: &Path) -> Result<BTreeMap<PathBuf, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    for e in walkdir::WalkDir::new(root).sort_by_file_name() {
        let e = e.map_err(err)?;
        if e.file_type().is_file() {
            out.insert(e.path().strip_prefix(root).unwrap().to_path_buf(), fs::read(e.path()).map_err(err)?);
        }
    }
    Ok(out)
}

fn determinism(_: &mut Lab) -> Check {
    let a = tempfile::tempdir().map_err(err)?;
    let b = tempfile::tempdir().map_err(err)?;
    pipeline(a.path())?;
    pipeline(b.path())?;
    let (fa, fb) = (files(a.path())?, files(b.path())?);
    let differing: Vec<String> = fa
        .keys()
        .chain(fb.keys())
        .filter(|k| fa.get(*k) != fb.get(*k))
        .map(|k| k.display().to_string())
        .collect();
    let count = |pred: &dyn Fn(&str) -> bool| fa.keys().filter(|k| pred(&k.to_string_lossy())).count();
    let manifests = count(&|k| k.ends_with(".manifest.json"));
    let checkpoints = count(&|k| k.contains("checkpoints"));
    let reports = count(&|k| k.contains("reports"));
    ensure(
        differing.is_empty() && manifests == 2 && checkpoints == 4 && reports == 2,
        format!(
            "{} files compared ({manifests} manifests, {checkpoints} checkpoint files, {reports} reports), differing: {differing:?}",
            fa.len()
        ),
    )
}

fn throughput(_: &mut Lab) -> Check {
    let mut units = Vec::new();
    for (lang, seed) in [(Language::Python, 1), (Language::Java, 2)] {
        units.extend(generate_corpus(&GeneratorConfig::new(72, 6, seed), lang));
    }
    units.truncate(1000);
    if units.len() < 1000 {
        return Err(format!("only {} snippets", units.len()));
    }
    let start = Instant::now();
    let mut largest = 0;
    for u in &units {
        largest = largest.max(build_cpg(u).map_err(err)?.nodes.len());
    }
    let elapsed = start.elapsed();
    ensure(
        largest <= 100 && elapsed < Duration::from_secs(10),
        format!("1000 standard CPGs in {} (largest {largest} nodes)", ms(elapsed)),
    )
}

type Criterion = (&'static str, fn(&mut Lab) -> Check);

fn main() {
    let criteria: [Criterion; 11] = [
        ("data flow of the print-num program", dfg_of_print_num),
        ("java/python hello programs converge", hello_converges_across_languages),
        ("filter size boundaries", filter_boundaries),
        ("skip-gram gradients and initial loss", sgns_gradients),
        ("focal loss at gamma 0 equals cross-entropy", focal_matches_cross_entropy),
        ("in-domain: graph beats sequence by 5 F1, p < 0.05", in_domain),
        ("zero-shot java -> python: graph beats sequence", zero_shot),
        ("mixed training keeps graph F1 within 1 point", mixed_training),
        ("bootstrap sanity", bootstrap_sanity),
        ("end-to-end determinism", determinism),
        ("standard CPG throughput", throughput),
    ];
    let mut lab = Lab::default();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| check(&mut lab)))
            .unwrap_or_else(|_| Err("panicked".into()));
        let (tag, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {:>2} {name}: {detail}", i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
