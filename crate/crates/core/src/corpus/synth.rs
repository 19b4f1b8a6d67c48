//! Mechanical clone synthesis. Every transform edits the source text and the
//! result must parse again, otherwise the unit is skipped with a reason.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CloneType;
use crate::ast::{parse, Language, NormalizedAst, SourceUnit};
use crate::graph::build_dfg;
use crate::hash::Fnv64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticVariant {
    pub seed_id: String,
    pub unit: SourceUnit,
    pub clone_type: CloneType,
    /// Old name to new name, for renaming transforms.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub renames: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformFailure {
    pub unit_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SynthOutcome {
    pub variants: Vec<SyntheticVariant>,
    pub failures: Vec<TransformFailure>,
}

const NAME_POOL: [&str; 48] = [
    "acc", "val", "item", "tmp", "cnt", "res", "buf", "key", "idx", "cur", "nxt", "lhs", "rhs", "out", "arg", "elem",
    "part", "node", "step", "head", "tail", "total", "value", "count", "result", "amount", "score", "limit", "level",
    "width", "height", "size", "index", "flag", "mark", "base", "delta", "factor", "sum", "prod", "left", "right", "low",
    "high", "first", "last", "data", "state",
];

const RESERVED: [&str; 40] = [
    "and", "as", "assert", "break", "class", "continue", "def", "del", "elif", "else", "except", "for", "from", "if",
    "import", "in", "is", "lambda", "not", "or", "pass", "return", "while", "with", "yield", "int", "new", "this",
    "static", "void", "public", "private", "final", "print", "input", "len", "range", "str", "abs", "max",
];

/// One variant of the requested type per seed unit. Each unit draws from its
/// own generator keyed by `seed` and the unit id, so results do not depend on
/// input order.
pub fn synthesize_clones(seed_units: &[SourceUnit], ty: CloneType, seed: u64) -> SynthOutcome {
    let mut out = SynthOutcome::default();
    for unit in seed_units {
        let mut h = Fnv64::new();
        h.write_u64(seed);
        h.write_str(&unit.id);
        let mut rng = ChaCha8Rng::seed_from_u64(h.finish());
        let result = parse(unit)
            .map_err(|e| format!("seed does not parse: {e}"))
            .and_then(|ast| match ty {
                CloneType::I => layout_variant(unit, &ast, &mut rng).map(|t| (t, BTreeMap::new())),
                CloneType::II => rename_variant(unit, &ast, &mut rng),
                CloneType::III => statement_variant(unit, &ast, &mut rng).map(|t| (t, BTreeMap::new())),
                CloneType::IV => Err("type IV clones cannot be produced mechanically".to_string()),
            })
            .and_then(|(text, renames)| {
                let variant = SourceUnit {
                    id: format!("{}~{}{}", unit.id, ty, seed),
                    language: unit.language,
                    text,
                    cluster_id: unit.cluster_id.clone(),
                    path: None,
                };
                parse(&variant).map_err(|e| format!("variant no longer parses: {e}"))?;
                Ok((variant, renames))
            });
        match result {
            Ok((variant, renames)) => out.variants.push(SyntheticVariant {
                seed_id: unit.id.clone(),
                unit: variant,
                clone_type: ty,
                renames,
            }),
            Err(reason) => out.failures.push(TransformFailure {
                unit_id: unit.id.clone(),
                reason,
            }),
        }
    }
    out
}

/// `(position, bytes to delete, text to insert)`, applied back to front.
type Edit = (usize, usize, String);

fn apply_edits(text: &str, mut edits: Vec<Edit>) -> String {
    edits.sort_by_key(|a| (a.0, a.1));
    let mut out = String::with_capacity(text.len() + 64);
    let mut at = 0;
    for (pos, del, ins) in edits {
        if pos < at {
            continue;
        }
        out.push_str(&text[at..pos]);
        out.push_str(&ins);
        at = pos + del;
    }
    out.push_str(&text[at..]);
    out
}

fn line_comment(lang: Language) -> &'static str {
    match lang {
        Language::Python => "#",
        Language::Java => "//",
    }
}

const COMMENTS: [&str; 6] = ["note", "check this", "main step", "see above", "keep", "todo: tidy"];

/// Extra spaces between tokens, trailing comments and blank lines.
fn layout_variant(unit: &SourceUnit, ast: &NormalizedAst, rng: &mut ChaCha8Rng) -> Result<String, String> {
    let text = unit.text.as_str();
    let bytes = text.as_bytes();
    let mut in_token = vec![false; bytes.len() + 1];
    for leaf in ast.leaves() {
        for flag in &mut in_token[leaf.span.start + 1..leaf.span.end] {
            *flag = true;
        }
    }
    let mut edits: Vec<Edit> = Vec::new();
    for leaf in ast.leaves() {
        let end = leaf.span.end;
        if end < bytes.len() && bytes[end] != b'\n' && bytes[end] != b'\r' && rng.gen_bool(0.3) {
            edits.push((end, 0, " ".into()));
        }
    }
    let mut line_ends: Vec<usize> = bytes.iter().enumerate().filter(|(_, &b)| b == b'\n').map(|(i, _)| i).collect();
    if !text.ends_with('\n') {
        line_ends.push(bytes.len());
    }
    let eligible: Vec<usize> = line_ends
        .into_iter()
        .filter(|&p| !in_token[p] && !text[..p].trim_end().ends_with('\\') && !text[..p].trim().is_empty())
        .collect();
    let marker = line_comment(unit.language);
    for &p in &eligible {
        if rng.gen_bool(0.35) {
            let c = COMMENTS[rng.gen_range(0..COMMENTS.len())];
            edits.push((p, 0, format!("  {marker} {c}")));
        } else if p < bytes.len() && rng.gen_bool(0.2) {
            edits.push((p, 0, "\n".into()));
        }
    }
    if edits.is_empty() {
        let &p = eligible.first().ok_or("no line to annotate")?;
        edits.push((p, 0, format!("  {marker} note")));
    }
    Ok(apply_edits(text, edits))
}

fn is_member_position(ast: &NormalizedAst, parents: &[Option<usize>], id: usize) -> bool {
    let Some(p) = parents[id] else { return false };
    let parent = &ast.nodes[p];
    match parent.kind.as_str() {
        "attribute" | "field_access" => parent.children.first() != Some(&id),
        "keyword_argument" => parent.children.first() == Some(&id),
        _ => false,
    }
}

/// Identifiers that take part in data flow: locals, parameters and their uses.
fn bound_names(ast: &NormalizedAst) -> BTreeSet<String> {
    let g = build_dfg(ast);
    let mut names = BTreeSet::new();
    for e in g.dfg_edges() {
        // Definitions and resolved uses are always edge targets; free names
        // such as callees only ever appear as value sources.
        let node = &ast.nodes[e.dst];
        if node.kind == "identifier" {
            if let Some(t) = &node.token_text {
                names.insert(t.clone());
            }
        }
    }
    names
}

fn identifier_texts(ast: &NormalizedAst) -> BTreeSet<&str> {
    ast.leaves()
        .filter(|l| l.kind == "identifier")
        .filter_map(|l| l.token_text.as_deref())
        .collect()
}

/// Draws names absent from `taken`, marking each as taken.
fn fresh_name(rng: &mut ChaCha8Rng, taken: &mut BTreeSet<String>) -> String {
    for _ in 0..32 {
        let n = NAME_POOL[rng.gen_range(0..NAME_POOL.len())];
        if !taken.contains(n) {
            taken.insert(n.into());
            return n.into();
        }
    }
    let mut i = 2;
    loop {
        let n = format!("{}{}", NAME_POOL[rng.gen_range(0..NAME_POOL.len())], i);
        if !taken.contains(&n) {
            taken.insert(n.clone());
            return n;
        }
        i += 1;
    }
}

/// Renames every occurrence of the given variables, leaving member names
/// and keyword-argument names alone. Names outside the data flow and fresh
/// names that would collide are rejected.
pub fn rename_identifiers(unit: &SourceUnit, renames: &BTreeMap<String, String>) -> Result<String, String> {
    let ast = parse(unit).map_err(|e| e.to_string())?;
    let bound = bound_names(&ast);
    let present = identifier_texts(&ast);
    for (old, new) in renames {
        if !bound.contains(old) {
            return Err(format!("`{old}` is not a variable of {}", unit.id));
        }
        if old != new && (present.contains(new.as_str()) || RESERVED.contains(&new.as_str())) {
            return Err(format!("`{new}` is already in use in {}", unit.id));
        }
    }
    Ok(rename_with(unit, &ast, renames))
}

fn rename_with(unit: &SourceUnit, ast: &NormalizedAst, renames: &BTreeMap<String, String>) -> String {
    let parents = ast.parents();
    let edits = ast
        .leaves()
        .filter(|l| l.kind == "identifier" && !is_member_position(ast, &parents, l.node_id))
        .filter_map(|l| {
            let new = renames.get(l.token_text.as_deref()?)?;
            Some((l.span.start, l.span.len(), new.clone()))
        })
        .collect();
    apply_edits(&unit.text, edits)
}

fn rename_variant(
    unit: &SourceUnit,
    ast: &NormalizedAst,
    rng: &mut ChaCha8Rng,
) -> Result<(String, BTreeMap<String, String>), String> {
    let bound = bound_names(ast);
    if bound.is_empty() {
        return Err("no renamable identifiers".into());
    }
    let mut taken: BTreeSet<String> = identifier_texts(ast).into_iter().map(String::from).collect();
    taken.extend(RESERVED.iter().map(|s| s.to_string()));
    let renames: BTreeMap<String, String> = bound.into_iter().map(|old| (old, fresh_name(rng, &mut taken))).collect();
    Ok((rename_with(unit, ast, &renames), renames))
}

/// Statements that sit directly in a block, or at the top level when the
/// unit has no blocks.
fn statement_starts(ast: &NormalizedAst) -> Vec<usize> {
    let collect = |kinds: &[&str]| {
        let mut out: Vec<usize> = ast
            .nodes
            .iter()
            .filter(|n| kinds.contains(&n.kind.as_str()))
            .flat_map(|n| n.children.iter().map(|&c| &ast.nodes[c]))
            .filter(|c| !c.is_leaf())
            .map(|c| c.span.start)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    };
    let in_blocks = collect(&["block"]);
    if in_blocks.is_empty() {
        collect(&["module", "program"])
    } else {
        in_blocks
    }
}

/// Text that declares `name` with an integer value, ready to sit before a
/// statement starting at `pos`.
fn unused_assignment(lang: Language, text: &str, pos: usize, name: &str, value: u32) -> Option<String> {
    let line_start = text[..pos].rfind('\n').map_or(0, |i| i + 1);
    let indent = &text[line_start..pos];
    let own_line = indent.bytes().all(|b| b == b' ' || b == b'\t');
    match (lang, own_line) {
        (Language::Python, true) => Some(format!("{name} = {value}\n{indent}")),
        (Language::Python, false) => None,
        (Language::Java, true) => Some(format!("int {name} = {value};\n{indent}")),
        (Language::Java, false) => Some(format!("int {name} = {value}; ")),
    }
}

/// Inserts `name = value` before the `index`-th top-level or block statement.
pub fn insert_unused_assignment(unit: &SourceUnit, index: usize, name: &str, value: u32) -> Result<String, String> {
    let ast = parse(unit).map_err(|e| e.to_string())?;
    let starts = statement_starts(&ast);
    let &pos = starts.get(index).ok_or("no such statement")?;
    let ins = unused_assignment(unit.language, &unit.text, pos, name, value).ok_or("statement does not start a line")?;
    Ok(apply_edits(&unit.text, vec![(pos, 0, ins)]))
}

/// Byte range covering the last argument of a print call (and the comma
/// before it when there are several).
fn print_argument_deletions(ast: &NormalizedAst) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for node in &ast.nodes {
        let callee_is_print = match (node.kind.as_str(), node.children.first()) {
            ("call", Some(&c)) => ast.nodes[c].token_text.as_deref() == Some("print"),
            ("method_invocation", Some(&c)) => {
                let callee = &ast.nodes[c];
                callee.kind == "field_access"
                    && callee
                        .children
                        .last()
                        .and_then(|&l| ast.nodes[l].token_text.as_deref())
                        .is_some_and(|n| n == "println")
            }
            _ => false,
        };
        if !callee_is_print {
            continue;
        }
        let Some(&args) = node.children.iter().find(|&&c| ast.nodes[c].kind == "argument_list") else {
            continue;
        };
        let items: Vec<&crate::ast::AstNode> = ast.nodes[args]
            .children
            .iter()
            .map(|&c| &ast.nodes[c])
            .filter(|c| !matches!(c.kind.as_str(), "(" | ")" | ","))
            .collect();
        match items.as_slice() {
            [] => {}
            [only] => out.push((only.span.start, only.span.end)),
            [.., prev, last] => out.push((prev.span.end, last.span.end)),
        }
    }
    out
}

/// Inserts one or two unused assignments and sometimes drops a print argument.
fn statement_variant(unit: &SourceUnit, ast: &NormalizedAst, rng: &mut ChaCha8Rng) -> Result<String, String> {
    let text = unit.text.as_str();
    let mut taken: BTreeSet<String> = identifier_texts(ast).into_iter().map(String::from).collect();
    taken.extend(RESERVED.iter().map(|s| s.to_string()));

    let mut edits: Vec<Edit> = Vec::new();
    let deletions = print_argument_deletions(ast);
    let mut deleted: Option<(usize, usize)> = None;
    if !deletions.is_empty() && rng.gen_bool(0.5) {
        let (s, e) = deletions[rng.gen_range(0..deletions.len())];
        edits.push((s, e - s, String::new()));
        deleted = Some((s, e));
    }
    let mut starts: Vec<usize> = statement_starts(ast)
        .into_iter()
        .filter(|&p| deleted.is_none_or(|(s, e)| p < s || p >= e))
        .filter(|&p| unused_assignment(unit.language, text, p, "x", 0).is_some())
        .collect();
    starts.shuffle(rng);
    let inserts = rng.gen_range(1..=2usize).min(starts.len());
    for &pos in starts.iter().take(inserts) {
        let name = fresh_name(rng, &mut taken);
        let value = rng.gen_range(0..100);
        if let Some(ins) = unused_assignment(unit.language, text, pos, &name, value) {
            edits.push((pos, 0, ins));
        }
    }
    if edits.is_empty() {
        return Err("no statement position to edit".into());
    }
    Ok(apply_edits(text, edits))
}
