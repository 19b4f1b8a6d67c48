//! Seeded generator of small abstract programs rendered as Python functions
//! or Java methods. Each program is one cluster; its members are the plain
//! rendering plus renamed and edited variants.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{synthesize_clones, CloneType};
use crate::ast::{Language, SourceUnit};
use crate::graph::build_cpg;
use crate::hash::Fnv64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub clusters: usize,
    /// Derived variants per cluster, on top of the plain rendering.
    pub variants: usize,
    pub min_statements: usize,
    pub max_statements: usize,
    /// Standard-CPG node budget for the plain rendering, leaving headroom for
    /// inserted statements.
    pub max_nodes: usize,
    pub seed: u64,
    /// Consecutive clusters per family. Members after the first keep the
    /// family's program text up to swapped variable references, so they share
    /// identifiers and tokens with their siblings but not data flow.
    #[serde(default = "one")]
    pub family_size: usize,
}

fn one() -> usize {
    1
}

impl GeneratorConfig {
    pub fn new(clusters: usize, variants: usize, seed: u64) -> Self {
        GeneratorConfig {
            clusters,
            variants,
            min_statements: 4,
            max_statements: 7,
            max_nodes: 84,
            seed,
            family_size: 1,
        }
    }

    pub fn family_of(&self, cluster: usize) -> usize {
        cluster / self.family_size.max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Mod,
}

impl Op {
    fn symbol(self) -> &'static str {
        match self {
            Op::Add => "+",
            Op::Sub => "-",
            Op::Mul => "*",
            Op::Mod => "%",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
}

impl Cmp {
    fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Gt => ">",
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Eq => "==",
            Cmp::Ne => "!=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expr {
    Var(String),
    Int(u32),
    Bin(Op, Box<Expr>, Box<Expr>),
    Abs(Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cond(pub Cmp, pub Expr, pub Expr);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stmt {
    /// First assignment of a variable (a declaration in Java).
    Let(String, Expr),
    Assign(String, Expr),
    Update(String, Op, Expr),
    If(Cond, Vec<Stmt>, Vec<Stmt>),
    While(Cond, Vec<Stmt>),
    Print(Expr),
    Return(Expr),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Program {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
}

const VARS: [&str; 14] = ["a", "b", "c", "n", "m", "x", "y", "z", "i", "j", "k", "t", "s", "v"];
const FUNCS: [&str; 8] = ["solve", "compute", "run", "calc", "process", "work", "eval_case", "answer"];

struct Gen<'r> {
    rng: &'r mut ChaCha8Rng,
    vars: Vec<String>,
}

impl Gen<'_> {
    fn var(&mut self) -> String {
        self.vars[self.rng.gen_range(0..self.vars.len())].clone()
    }

    fn expr(&mut self, depth: usize) -> Expr {
        let roll = if depth >= 2 { self.rng.gen_range(0..2) } else { self.rng.gen_range(0..7) };
        match roll {
            0 => Expr::Var(self.var()),
            1 => Expr::Int(self.rng.gen_range(0..20)),
            2 | 3 => {
                let op = [Op::Add, Op::Sub, Op::Mul, Op::Mod][self.rng.gen_range(0..4)];
                Expr::Bin(op, Box::new(self.expr(depth + 1)), Box::new(self.expr(depth + 1)))
            }
            4 => Expr::Abs(Box::new(self.expr(depth + 1))),
            5 => Expr::Max(Box::new(self.expr(depth + 1)), Box::new(self.expr(depth + 1))),
            _ => Expr::Min(Box::new(self.expr(depth + 1)), Box::new(self.expr(depth + 1))),
        }
    }

    fn cond(&mut self) -> Cond {
        let cmp = [Cmp::Lt, Cmp::Gt, Cmp::Le, Cmp::Ge, Cmp::Eq, Cmp::Ne][self.rng.gen_range(0..6)];
        let left = Expr::Var(self.var());
        let right = self.expr(1);
        Cond(cmp, left, right)
    }

    fn fresh_var(&mut self) -> Option<String> {
        let unused: Vec<&str> = VARS.iter().copied().filter(|v| !self.vars.iter().any(|x| x == v)).collect();
        (!unused.is_empty()).then(|| unused[self.rng.gen_range(0..unused.len())].to_string())
    }

    fn stmt(&mut self, depth: usize, top: bool) -> Stmt {
        loop {
            match self.rng.gen_range(0..10) {
                0 | 1 if top => {
                    if let Some(v) = self.fresh_var() {
                        let e = self.expr(0);
                        self.vars.push(v.clone());
                        return Stmt::Let(v, e);
                    }
                }
                2 => return Stmt::Assign(self.var(), self.expr(0)),
                3 | 4 => {
                    let op = [Op::Add, Op::Sub, Op::Mul][self.rng.gen_range(0..3)];
                    return Stmt::Update(self.var(), op, self.expr(1));
                }
                5 | 6 if depth < 2 => {
                    let c = self.cond();
                    let then = self.block(depth + 1);
                    let other = if self.rng.gen_bool(0.5) { self.block(depth + 1) } else { Vec::new() };
                    return Stmt::If(c, then, other);
                }
                7 if depth < 2 => {
                    let c = self.cond();
                    return Stmt::While(c, self.block(depth + 1));
                }
                8 | 9 => return Stmt::Print(self.expr(1)),
                _ => {}
            }
        }
    }

    fn block(&mut self, depth: usize) -> Vec<Stmt> {
        let n = self.rng.gen_range(1..=2);
        (0..n).map(|_| self.stmt(depth, false)).collect()
    }
}

impl Program {
    pub fn random(rng: &mut ChaCha8Rng, min_statements: usize, max_statements: usize) -> Self {
        let n_params = rng.gen_range(1..=3);
        let mut params: Vec<String> = Vec::new();
        while params.len() < n_params {
            let v = VARS[rng.gen_range(0..VARS.len())].to_string();
            if !params.contains(&v) {
                params.push(v);
            }
        }
        let name = FUNCS[rng.gen_range(0..FUNCS.len())].to_string();
        let mut g = Gen {
            rng,
            vars: params.clone(),
        };
        let n = g.rng.gen_range(min_statements..=max_statements.max(min_statements));
        let mut body: Vec<Stmt> = (0..n).map(|_| g.stmt(0, true)).collect();
        let tail = if g.rng.gen_bool(0.7) {
            Stmt::Return(g.expr(1))
        } else {
            Stmt::Print(g.expr(1))
        };
        body.push(tail);
        Program { name, params, body }
    }

    pub fn render(&self, lang: Language) -> String {
        let mut out = String::new();
        match lang {
            Language::Python => {
                out.push_str(&format!("def {}({}):\n", self.name, self.params.join(", ")));
                render_py(&self.body, 1, &mut out);
            }
            Language::Java => {
                let params: Vec<String> = self.params.iter().map(|p| format!("int {p}")).collect();
                out.push_str(&format!("static int {}({}) {{\n", self.name, params.join(", ")));
                render_java(&self.body, 1, &mut out);
                out.push_str("}\n");
            }
        }
        out
    }

    /// Every variable name the program mentions.
    pub fn names(&self) -> BTreeSet<String> {
        let mut s: BTreeSet<String> = self.params.iter().cloned().collect();
        fn walk(body: &[Stmt], s: &mut BTreeSet<String>) {
            for st in body {
                match st {
                    Stmt::Let(v, _) | Stmt::Assign(v, _) | Stmt::Update(v, _, _) => {
                        s.insert(v.clone());
                    }
                    Stmt::If(_, a, b) => {
                        walk(a, s);
                        walk(b, s);
                    }
                    Stmt::While(_, a) => walk(a, s),
                    _ => {}
                }
            }
        }
        walk(&self.body, &mut s);
        s
    }
}

fn expr_text(e: &Expr, lang: Language) -> String {
    let call = |name: &str, args: &[&Expr]| {
        let args: Vec<String> = args.iter().map(|a| expr_text(a, lang)).collect();
        match lang {
            Language::Python => format!("{name}({})", args.join(", ")),
            Language::Java => format!("Math.{name}({})", args.join(", ")),
        }
    };
    match e {
        Expr::Var(v) => v.clone(),
        Expr::Int(i) => i.to_string(),
        Expr::Bin(op, a, b) => {
            let side = |x: &Expr| match x {
                Expr::Bin(..) => format!("({})", expr_text(x, lang)),
                _ => expr_text(x, lang),
            };
            format!("{} {} {}", side(a), op.symbol(), side(b))
        }
        Expr::Abs(a) => call("abs", &[a]),
        Expr::Max(a, b) => call("max", &[a, b]),
        Expr::Min(a, b) => call("min", &[a, b]),
    }
}

fn cond_text(c: &Cond, lang: Language) -> String {
    format!("{} {} {}", expr_text(&c.1, lang), c.0.symbol(), expr_text(&c.2, lang))
}

fn indent(depth: usize) -> String {
    "    ".repeat(depth)
}

fn render_py(body: &[Stmt], depth: usize, out: &mut String) {
    let pad = indent(depth);
    for st in body {
        match st {
            Stmt::Let(v, e) | Stmt::Assign(v, e) => out.push_str(&format!("{pad}{v} = {}\n", expr_text(e, Language::Python))),
            Stmt::Update(v, op, e) => {
                out.push_str(&format!("{pad}{v} {}= {}\n", op.symbol(), expr_text(e, Language::Python)))
            }
            Stmt::If(c, a, b) => {
                out.push_str(&format!("{pad}if {}:\n", cond_text(c, Language::Python)));
                render_py(a, depth + 1, out);
                if !b.is_empty() {
                    out.push_str(&format!("{pad}else:\n"));
                    render_py(b, depth + 1, out);
                }
            }
            Stmt::While(c, a) => {
                out.push_str(&format!("{pad}while {}:\n", cond_text(c, Language::Python)));
                render_py(a, depth + 1, out);
            }
            Stmt::Print(e) => out.push_str(&format!("{pad}print({})\n", expr_text(e, Language::Python))),
            Stmt::Return(e) => out.push_str(&format!("{pad}return {}\n", expr_text(e, Language::Python))),
        }
    }
}

fn render_java(body: &[Stmt], depth: usize, out: &mut String) {
    let pad = indent(depth);
    for st in body {
        match st {
            Stmt::Let(v, e) => out.push_str(&format!("{pad}int {v} = {};\n", expr_text(e, Language::Java))),
            Stmt::Assign(v, e) => out.push_str(&format!("{pad}{v} = {};\n", expr_text(e, Language::Java))),
            Stmt::Update(v, op, e) => out.push_str(&format!("{pad}{v} {}= {};\n", op.symbol(), expr_text(e, Language::Java))),
            Stmt::If(c, a, b) => {
                out.push_str(&format!("{pad}if ({}) {{\n", cond_text(c, Language::Java)));
                render_java(a, depth + 1, out);
                if b.is_empty() {
                    out.push_str(&format!("{pad}}}\n"));
                } else {
                    out.push_str(&format!("{pad}}} else {{\n"));
                    render_java(b, depth + 1, out);
                    out.push_str(&format!("{pad}}}\n"));
                }
            }
            Stmt::While(c, a) => {
                out.push_str(&format!("{pad}while ({}) {{\n", cond_text(c, Language::Java)));
                render_java(a, depth + 1, out);
                out.push_str(&format!("{pad}}}\n"));
            }
            Stmt::Print(e) => out.push_str(&format!("{pad}System.out.println({});\n", expr_text(e, Language::Java))),
            Stmt::Return(e) => out.push_str(&format!("{pad}return {};\n", expr_text(e, Language::Java))),
        }
    }
}

fn cluster_rng(seed: u64, cluster: usize, salt: &str) -> ChaCha8Rng {
    let mut h = Fnv64::new();
    h.write_u64(seed);
    h.write_u64(cluster as u64);
    h.write_str(salt);
    ChaCha8Rng::seed_from_u64(h.finish())
}

fn fits(p: &Program, lang: Language, max_nodes: usize) -> bool {
    let unit = SourceUnit::new("probe", lang, p.render(lang), "probe");
    crate::ast::static_metrics(&unit).lines >= 5 && build_cpg(&unit).map(|g| g.nodes.len() <= max_nodes).unwrap_or(false)
}

fn base_program(cfg: &GeneratorConfig, family: usize, lang: Language) -> Program {
    let mut rng = cluster_rng(cfg.seed, family, "program");
    let mut hi = cfg.max_statements;
    loop {
        for _ in 0..8 {
            let p = Program::random(&mut rng, cfg.min_statements.min(hi), hi);
            if fits(&p, lang, cfg.max_nodes) && (cfg.family_size <= 1 || swap_candidates(&p) >= 2 * cfg.family_size) {
                return p;
            }
        }
        hi = hi.saturating_sub(1).max(1);
    }
}

fn swap_candidates(p: &Program) -> usize {
    let mut probe = p.clone();
    swap_references(&mut probe, &mut ChaCha8Rng::seed_from_u64(0))
}

/// Draws a program whose plain rendering fits the node budget in `lang`.
/// The first cluster of a family gets the family's base program; later ones
/// get the base with variable references swapped until it differs from every
/// earlier sibling.
pub fn program_for_cluster(cfg: &GeneratorConfig, cluster: usize, lang: Language) -> Program {
    let family = cfg.family_of(cluster);
    let base = base_program(cfg, family, lang);
    let member = cluster % cfg.family_size.max(1);
    if member == 0 {
        return base;
    }
    let earlier: Vec<Program> = (1..member)
        .map(|m| program_for_cluster(cfg, family * cfg.family_size + m, lang))
        .collect();
    let mut rng = cluster_rng(cfg.seed, cluster, "sibling");
    for _ in 0..32 {
        let mut p = base.clone();
        for _ in 0..SIBLING_SWAPS {
            swap_references(&mut p, &mut rng);
        }
        if p != base && !earlier.contains(&p) {
            return p;
        }
    }
    // No distinct swap exists: fall back to an unrelated program.
    let mut rng = cluster_rng(cfg.seed, cluster, "program");
    loop {
        let p = Program::random(&mut rng, cfg.min_statements, cfg.max_statements);
        if fits(&p, lang, cfg.max_nodes) {
            return p;
        }
    }
}

const SIBLING_SWAPS: usize = 2;

/// A variable slot: an expression reference or an assignment target, with
/// the names in scope there.
struct Slot<'p> {
    name: &'p mut String,
    scope: BTreeSet<String>,
}

fn expr_slots<'p>(e: &'p mut Expr, scope: &BTreeSet<String>, out: &mut Vec<Slot<'p>>) {
    match e {
        Expr::Var(v) => out.push(Slot { name: v, scope: scope.clone() }),
        Expr::Int(_) => {}
        Expr::Abs(a) => expr_slots(a, scope, out),
        Expr::Bin(_, a, b) | Expr::Max(a, b) | Expr::Min(a, b) => {
            expr_slots(a, scope, out);
            expr_slots(b, scope, out);
        }
    }
}

fn stmt_slots<'p>(st: &'p mut Stmt, scope: &BTreeSet<String>, out: &mut Vec<Slot<'p>>) {
    match st {
        Stmt::Let(_, e) | Stmt::Print(e) | Stmt::Return(e) => expr_slots(e, scope, out),
        Stmt::Assign(v, e) | Stmt::Update(v, _, e) => {
            out.push(Slot { name: v, scope: scope.clone() });
            expr_slots(e, scope, out);
        }
        Stmt::If(Cond(_, l, r), a, b) => {
            expr_slots(l, scope, out);
            expr_slots(r, scope, out);
            for s in a.iter_mut().chain(b.iter_mut()) {
                stmt_slots(s, scope, out);
            }
        }
        Stmt::While(Cond(_, l, r), a) => {
            expr_slots(l, scope, out);
            expr_slots(r, scope, out);
            for s in a.iter_mut() {
                stmt_slots(s, scope, out);
            }
        }
    }
}

/// Exchanges two references to different variables where each name is in
/// scope at the other's position. Returns how many such pairs there were.
fn swap_references(p: &mut Program, rng: &mut ChaCha8Rng) -> usize {
    let mut scope: BTreeSet<String> = p.params.iter().cloned().collect();
    let mut slots = Vec::new();
    for st in p.body.iter_mut() {
        let declared = match st {
            Stmt::Let(v, _) => Some(v.clone()),
            _ => None,
        };
        stmt_slots(st, &scope, &mut slots);
        scope.extend(declared);
    }
    let mut candidates = Vec::new();
    for i in 0..slots.len() {
        for j in i + 1..slots.len() {
            let (a, b) = (&slots[i], &slots[j]);
            if a.name != b.name && a.scope.contains(b.name.as_str()) && b.scope.contains(a.name.as_str()) {
                candidates.push((i, j));
            }
        }
    }
    if candidates.is_empty() {
        return 0;
    }
    let (i, j) = candidates[rng.gen_range(0..candidates.len())];
    let (left, right) = slots.split_at_mut(j);
    core::mem::swap(left[i].name, right[0].name);
    candidates.len()
}

/// Cluster number of an id produced by [`generate_corpus`].
pub fn cluster_index(cluster_id: &str) -> Option<usize> {
    cluster_id.rsplit('/').next()?.strip_prefix('c')?.parse().ok()
}

/// Units for `cfg.clusters` programs. Unit ids look like
/// `python/c007/v2.py`; the cluster id is `python/c007`. Variant 0 is the
/// plain rendering, odd variants are renamed, even variants are renamed and
/// then edited at statement level.
pub fn generate_corpus(cfg: &GeneratorConfig, lang: Language) -> Vec<SourceUnit> {
    let mut units = Vec::new();
    for c in 0..cfg.clusters {
        let program = program_for_cluster(cfg, c, lang);
        let cluster_id = format!("{}/c{:03}", lang.as_str(), c);
        let base = SourceUnit::new(format!("{cluster_id}/v0.{}", lang.extension()), lang, program.render(lang), cluster_id.clone());
        let mut members = alloc::vec![base.clone()];
        for k in 1..=cfg.variants {
            let salt = cfg.seed.wrapping_mul(1_000_003).wrapping_add((c * 64 + k) as u64);
            let renamed = synthesize_clones(core::slice::from_ref(&base), CloneType::II, salt);
            let Some(v) = renamed.variants.into_iter().next() else { continue };
            let mut unit = v.unit;
            if k % 2 == 0 {
                let edited = synthesize_clones(core::slice::from_ref(&unit), CloneType::III, salt);
                if let Some(e) = edited.variants.into_iter().next() {
                    unit = e.unit;
                }
            }
            unit.id = format!("{cluster_id}/v{k}.{}", lang.extension());
            members.push(unit);
        }
        units.extend(members);
    }
    units
}
