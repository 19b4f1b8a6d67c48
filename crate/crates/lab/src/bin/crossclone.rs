use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use crossclone::canonical::{read_json, to_bytes, write_json};
use crossclone::checkpoint::{load_encoder, load_tokenizer, save_detector, EMBEDDINGS_FILE, TOKENIZER_FILE};
use crossclone::detectors::{DetectorKind, DetectorSettings, SequenceEncoder, TrainedDetector, UnitIndex};
use crossclone::experiment::{run_spec_file, runs_root, RUNS_ENV};
use crossclone::ingest::{ingest_dir, ClusterScheme};
use crossclone::report::rewrite_summary;
use crossclone::store::{read_units, write_dataset, write_units, StoredDataset};
use crossclone::suite::{build_suite, write_suite_specs, SuiteConfig};
use crossclone_core::corpus::{
    filter_units, mix_datasets, sample_pairs, split_dataset, synthesize_clones, CloneLabel, CloneType, FilterConfig,
    PairExample, SplitSizes,
};
use crossclone_core::graph::{GraphBuilder, Stage};
use crossclone_core::tokens::{encode, train_bpe, train_sgns, SgnsConfig, TokenSequence};
use crossclone_core::{parse, Language, NormalizedAst, SourceUnit};

#[derive(Parser)]
#[command(name = "crossclone", version, about = "Cross-language code clone detection lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the normalized syntax tree of one file as JSON.
    Ast(SourceArgs),
    /// Build the code property graph of a file, or of every source file
    /// under a directory, at a pipeline stage.
    Cpg {
        path: PathBuf,
        #[arg(long)]
        lang: Option<Language>,
        #[arg(long, value_enum, default_value_t = StageArg::Standard)]
        stage: StageArg,
        /// Write `<relative path>.json` files here instead of printing.
        /// Required for directories.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Walk a directory of sources into a unit store.
    Ingest {
        root: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// parent-dir, file, file-prefix or file-prefix:<char>
        #[arg(long, default_value = "parent-dir")]
        cluster_scheme: String,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Apply the size and parse filters to a unit store.
    Filter {
        #[arg(long)]
        units: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        bounds: FilterArgs,
        /// Also write the filter report here (it is always printed).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Sample clone / non-clone pairs and split them into a dataset.
    Pairs {
        #[arg(long, required = true)]
        units: Vec<PathBuf>,
        #[arg(long)]
        name: String,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        sizes: SizeArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Produce one synthetic clone of the given type per unit.
    Synth {
        #[arg(long)]
        units: PathBuf,
        #[arg(long, value_enum)]
        clone_type: CloneTypeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Write (seed, variant) clone pairs as JSON Lines.
        #[arg(long)]
        pairs: Option<PathBuf>,
    },
    /// Mix two datasets half and half per class and split.
    Mix {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        name: String,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        sizes: SizeArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    #[command(subcommand)]
    Train(TrainCommand),
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    #[command(subcommand)]
    Report(ReportCommand),
    #[command(subcommand)]
    Fixtures(FixturesCommand),
}

#[derive(Subcommand)]
enum TrainCommand {
    /// Byte-level BPE on the given unit stores.
    Tokenizer {
        #[arg(long, required = true)]
        units: Vec<PathBuf>,
        #[arg(long, default_value_t = crossclone_core::tokens::DEFAULT_VOCAB_SIZE)]
        vocab_size: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Skip-gram embeddings over tokenized unit stores.
    Embeddings {
        #[arg(long)]
        tokenizer: PathBuf,
        #[arg(long, required = true)]
        units: Vec<PathBuf>,
        #[arg(long, default_value_t = 64)]
        dim: usize,
        #[arg(long, default_value_t = 5)]
        epochs: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pair classifier on a dataset's train split, epochs chosen on valid.
    Detector {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Directory holding tokenizer.json and embeddings.json; when absent
        /// the sequence detector fits both on the train split.
        #[arg(long)]
        encoder: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        embedding_seed: u64,
        #[arg(long, default_value_t = 2)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Run an experiment spec; the run directory is created under the runs root.
    Run {
        spec: PathBuf,
        #[arg(long, env = RUNS_ENV)]
        runs_root: Option<PathBuf>,
        /// Replace an existing run directory.
        #[arg(long)]
        force: bool,
    },
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Rebuild summary.txt from a run directory's JSON reports.
    Render { run_dir: PathBuf },
}

#[derive(Subcommand)]
enum FixturesCommand {
    /// Build the generated benchmark suite and its experiment specs.
    Generate {
        #[arg(long)]
        out_dir: PathBuf,
        /// Suite configuration JSON; defaults are used when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct SourceArgs {
    file: PathBuf,
    /// Defaults to the file extension.
    #[arg(long)]
    lang: Option<Language>,
}

#[derive(Args)]
struct FilterArgs {
    #[arg(long, default_value_t = 5)]
    min_lines: usize,
    #[arg(long, default_value_t = 100)]
    max_lines: usize,
    #[arg(long, default_value_t = 2000)]
    max_chars: usize,
    #[arg(long, default_value_t = 100)]
    max_nodes: usize,
}

/// Balanced split totals.
#[derive(Args)]
struct SizeArgs {
    #[arg(long)]
    train: usize,
    #[arg(long)]
    valid: usize,
    #[arg(long)]
    test: usize,
}

impl SizeArgs {
    fn sizes(&self) -> SplitSizes {
        SplitSizes::balanced(self.train, self.valid, self.test)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StageArg {
    Ast,
    Dfg,
    Pruned,
    #[value(alias = "cpg")]
    Standard,
}

#[derive(Clone, Copy, ValueEnum)]
enum CloneTypeArg {
    #[value(name = "I")]
    I,
    #[value(name = "II")]
    II,
    #[value(name = "III")]
    III,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Sequence,
    Graph,
}

fn print_json<T: serde::Serialize>(value: &T) {
    print!("{}", String::from_utf8_lossy(&to_bytes(value)));
}

fn load_source(args: &SourceArgs) -> Result<SourceUnit> {
    let id = args.file.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    load_file(&args.file, args.lang, id)
}

fn load_file(file: &Path, lang: Option<Language>, id: String) -> Result<SourceUnit> {
    let lang = match lang {
        Some(l) => l,
        None => file
            .extension()
            .and_then(|e| e.to_str())
            .and_then(Language::from_extension)
            .with_context(|| format!("cannot tell the language of {}; pass --lang", file.display()))?,
    };
    let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    Ok(SourceUnit::new(id.clone(), lang, text, id))
}

#[derive(serde::Serialize)]
struct AstDump<'a> {
    unit_id: &'a str,
    language: Language,
    nodes: Vec<AstDumpNode<'a>>,
    root: usize,
}

#[derive(serde::Serialize)]
struct AstDumpNode<'a> {
    id: usize,
    kind: &'a str,
    start: usize,
    end: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    token: Option<&'a str>,
    children: &'a [usize],
}

fn ast_dump(ast: &NormalizedAst) -> AstDump<'_> {
    let nodes = ast
        .nodes
        .iter()
        .map(|n| AstDumpNode {
            id: n.node_id,
            kind: &n.kind,
            start: n.span.start,
            end: n.span.end,
            token: n.token_text.as_deref(),
            children: &n.children,
        })
        .collect();
    AstDump { unit_id: &ast.unit_id, language: ast.language, nodes, root: ast.root }
}

fn build_graphs(path: &Path, lang: Option<Language>, stage: Stage, out: Option<&Path>) -> Result<()> {
    let builder = GraphBuilder::new();
    if path.is_file() {
        let id = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let graph = builder.build_stage(&load_file(path, lang, id.clone())?, stage)?;
        match out {
            Some(dir) => {
                write_json(&dir.join(format!("{id}.json")), &graph)?;
            }
            None => print_json(&graph),
        }
        return Ok(());
    }
    let Some(out) = out else { bail!("{} is a directory; pass --out", path.display()) };
    let mut written = 0;
    for entry in walkdir::WalkDir::new(path).sort_by_file_name() {
        let entry = entry?;
        let file = entry.path();
        let known = file.extension().and_then(|e| e.to_str()).and_then(Language::from_extension);
        if !entry.file_type().is_file() || (lang.is_none() && known.is_none()) {
            continue;
        }
        let rel = file.strip_prefix(path)?.to_string_lossy().replace('\\', "/");
        let graph = builder.build_stage(&load_file(file, lang, rel.clone())?, stage)?;
        write_json(&out.join(format!("{rel}.json")), &graph)?;
        written += 1;
    }
    println!("{written} graphs written to {}", out.display());
    Ok(())
}

fn read_all_units(paths: &[PathBuf]) -> Result<Vec<SourceUnit>> {
    let mut all = Vec::new();
    for p in paths {
        all.extend(read_units(p)?);
    }
    Ok(all)
}

fn languages(units: &[SourceUnit]) -> Vec<Language> {
    let mut langs: Vec<Language> = units.iter().map(|u| u.language).collect();
    langs.sort();
    langs.dedup();
    langs
}

fn write_json_lines<T: serde::Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut text = String::new();
    for r in rows {
        text.push_str(&serde_json::to_string(r)?);
        text.push('\n');
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ast(args) => print_json(&ast_dump(&parse(&load_source(&args)?)?)),
        Command::Cpg { path, lang, stage, out } => {
            let stage = match stage {
                StageArg::Ast => Stage::Ast,
                StageArg::Dfg => Stage::Dfg,
                StageArg::Pruned => Stage::Pruned,
                StageArg::Standard => Stage::StandardCpg,
            };
            build_graphs(&path, lang, stage, out.as_deref())?;
        }
        Command::Ingest { root, out, cluster_scheme, report } => {
            let scheme: ClusterScheme = cluster_scheme.parse()?;
            let (units, rep) = ingest_dir(&root, &scheme)?;
            write_units(&out, &units)?;
            if let Some(p) = report {
                write_json(&p, &rep)?;
            }
            print_json(&rep);
        }
        Command::Filter { units, out, bounds, report } => {
            let cfg = FilterConfig {
                min_lines: bounds.min_lines,
                max_lines: bounds.max_lines,
                max_chars: bounds.max_chars,
                max_nodes: bounds.max_nodes,
            };
            cfg.validate()?;
            let outcome = filter_units(&read_units(&units)?, &cfg);
            write_units(&out, &outcome.accepted)?;
            let rep = outcome.report();
            if let Some(p) = report {
                write_json(&p, &rep)?;
            }
            print_json(&rep);
        }
        Command::Pairs { units, name, out_dir, sizes, seed } => {
            let all = read_all_units(&units)?;
            let s = sizes.sizes();
            let pos = s.train.positive + s.valid.positive + s.test.positive;
            let neg = s.train.negative + s.valid.negative + s.test.negative;
            let pairs = sample_pairs(&all, pos, neg, seed)?;
            let mut manifest = split_dataset(&name, &pairs, s, seed.wrapping_add(1))?;
            manifest.languages = languages(&all);
            let path = write_dataset(&out_dir, &manifest, &units)?;
            println!("{}", path.display());
        }
        Command::Synth { units, clone_type, seed, out, pairs } => {
            let ty = match clone_type {
                CloneTypeArg::I => CloneType::I,
                CloneTypeArg::II => CloneType::II,
                CloneTypeArg::III => CloneType::III,
            };
            let seeds = read_units(&units)?;
            let outcome = synthesize_clones(&seeds, ty, seed);
            let variants: Vec<SourceUnit> = outcome.variants.iter().map(|v| v.unit.clone()).collect();
            write_units(&out, &variants)?;
            if let Some(p) = pairs {
                let rows: Vec<PairExample> = outcome
                    .variants
                    .iter()
                    .map(|v| {
                        let mut pair = PairExample::new(&v.seed_id, &v.unit.id, CloneLabel::Clone);
                        pair.clone_type = Some(ty);
                        pair
                    })
                    .collect();
                write_json_lines(&p, &rows)?;
            }
            for f in &outcome.failures {
                eprintln!("skipped {}: {}", f.unit_id, f.reason);
            }
            println!("{} variants, {} failures", outcome.variants.len(), outcome.failures.len());
        }
        Command::Mix { a, b, name, out_dir, sizes, seed } => {
            let da = StoredDataset::load(&a)?;
            let db = StoredDataset::load(&b)?;
            let mixed = mix_datasets(&name, &da.manifest, &db.manifest, sizes.sizes(), seed)?;
            let mut stores = da.unit_stores.clone();
            stores.extend(db.unit_stores.iter().cloned());
            stores.dedup();
            let path = write_dataset(&out_dir, &mixed, &stores)?;
            println!("{}", path.display());
        }
        Command::Train(cmd) => train(cmd)?,
        Command::Experiment(ExperimentCommand::Run { spec, runs_root: root, force }) => {
            let root = root.unwrap_or_else(runs_root);
            let outcome = run_spec_file(&spec, &root, force)?;
            print!("{}", std::fs::read_to_string(outcome.dir.join("summary.txt"))?);
            println!("\nrun directory: {}", outcome.dir.display());
        }
        Command::Report(ReportCommand::Render { run_dir }) => print!("{}", rewrite_summary(&run_dir)?),
        Command::Fixtures(FixturesCommand::Generate { out_dir, config, seed }) => {
            let mut cfg: SuiteConfig = match config {
                Some(p) => read_json(&p)?,
                None => SuiteConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let suite = build_suite(&out_dir, &cfg)?;
            for p in [&suite.python, &suite.java, &suite.mixed] {
                println!("{}", p.display());
            }
            for p in write_suite_specs(&out_dir)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn train(cmd: TrainCommand) -> Result<()> {
    match cmd {
        TrainCommand::Tokenizer { units, vocab_size, out } => {
            let all = read_all_units(&units)?;
            let vocab = train_bpe(all.iter().map(|u| u.text.as_str()), vocab_size)?;
            let sum = write_json(&out, &vocab.to_file())?;
            println!("{} symbols, sha256 {sum}", vocab.len());
        }
        TrainCommand::Embeddings { tokenizer, units, dim, epochs, seed, out } => {
            let vocab = load_tokenizer(&tokenizer)?;
            let all = read_all_units(&units)?;
            let seqs: Vec<TokenSequence> = all.iter().map(|u| encode(&u.id, &u.text, &vocab)).collect();
            let mut cfg = SgnsConfig::with_seed(seed);
            cfg.dim = dim;
            cfg.epochs = epochs;
            let table = train_sgns(&seqs, vocab.len(), cfg)?;
            let sum = write_json(&out, &table)?;
            println!("{} x {}, sha256 {sum}", table.vocab_size, table.dim());
        }
        TrainCommand::Detector { manifest, kind, encoder, embedding_seed, seed, out } => {
            let ds = StoredDataset::load(&manifest)?;
            let index: UnitIndex = ds.index()?;
            let settings = DetectorSettings::with_seeds(embedding_seed, seed);
            let kind = match kind {
                KindArg::Sequence => DetectorKind::Sequence,
                KindArg::Graph => DetectorKind::Graph,
            };
            let (train, valid) = (ds.split("train")?, ds.split("valid")?);
            let det = match (kind, encoder) {
                (DetectorKind::Sequence, Some(dir)) => {
                    let enc: SequenceEncoder = load_encoder(&dir)
                        .with_context(|| format!("expected {TOKENIZER_FILE} and {EMBEDDINGS_FILE} in {}", dir.display()))?;
                    TrainedDetector::fit(kind, Some(enc), &index, train, valid, &settings)?
                }
                (DetectorKind::Graph, Some(_)) => bail!("the graph detector takes no encoder"),
                _ => TrainedDetector::train(kind, &index, train, valid, &settings)?,
            };
            for (file, sum) in save_detector(&out, &det)? {
                println!("{file} sha256 {sum}");
            }
            println!("selected epoch {:?}", det.model.selected_epoch);
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
