//! Intra-unit def-use edges over the raw syntax tree.
//!
//! A single left-to-right walk keeps, for every name, the set of definition
//! leaves that may reach the current point. Conditional branches are walked
//! on copies of the environment and merged at the join; loop bodies are
//! walked once and merged with the environment before the loop. Function,
//! lambda, class and comprehension bodies see the enclosing environment but
//! their definitions do not leak out.
//!
//! Edges:
//! * value leaf -> defined identifier, for every identifier or literal leaf
//!   on the right-hand side of an assignment (and for iterables of loop
//!   targets, defaults of parameters);
//! * definition -> use, from each live definition of a name to each later use.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use super::{CodePropertyGraph, EdgeKind, GraphEdge, Stage};
use crate::ast::NormalizedAst;

type Env = BTreeMap<String, Vec<usize>>;

const LITERAL_KINDS: &[&str] = &[
    "integer",
    "float",
    "string",
    "true",
    "false",
    "none",
    "decimal_integer_literal",
    "hex_integer_literal",
    "octal_integer_literal",
    "binary_integer_literal",
    "decimal_floating_point_literal",
    "string_literal",
    "character_literal",
    "null_literal",
];

/// Subtrees that never hold data flow: types, annotations, imports, labels.
const OPAQUE_KINDS: &[&str] = &[
    "type",
    "annotation",
    "modifiers",
    "global_statement",
    "nonlocal_statement",
    "import_statement",
    "import_from_statement",
    "import_declaration",
    "package_declaration",
    "break_statement",
    "continue_statement",
    "class_literal",
    "keyword_separator",
    "positional_separator",
];

pub fn build_dfg(ast: &NormalizedAst) -> CodePropertyGraph {
    let mut graph = CodePropertyGraph::from_ast(ast);
    graph.stage = Stage::Dfg;
    let mut walker = Walker {
        ast,
        edges: BTreeSet::new(),
    };
    let mut env = Env::new();
    walker.visit(ast.root, &mut env);
    graph.edges.extend(walker.edges.into_iter().map(|(src, dst)| GraphEdge {
        src,
        dst,
        kind: EdgeKind::Dfg,
    }));
    graph
}

fn union(a: &Env, b: &Env) -> Env {
    let mut out = a.clone();
    for (name, defs) in b {
        let slot = out.entry(name.clone()).or_default();
        for &d in defs {
            if !slot.contains(&d) {
                slot.push(d);
            }
        }
        slot.sort_unstable();
    }
    out
}

fn union_all(envs: &[Env]) -> Env {
    let mut it = envs.iter();
    let first = it.next().cloned().unwrap_or_default();
    it.fold(first, |acc, e| union(&acc, e))
}

struct Walker<'a> {
    ast: &'a NormalizedAst,
    edges: BTreeSet<(usize, usize)>,
}

impl<'a> Walker<'a> {
    fn kind(&self, id: usize) -> &'a str {
        &self.ast.nodes[id].kind
    }

    fn kids(&self, id: usize) -> &'a [usize] {
        &self.ast.nodes[id].children
    }

    fn name(&self, id: usize) -> &'a str {
        self.ast.nodes[id].token_text.as_deref().unwrap_or("")
    }

    fn is_ident(&self, id: usize) -> bool {
        self.ast.nodes[id].is_leaf() && self.kind(id) == "identifier"
    }

    fn is_value_leaf(&self, id: usize) -> bool {
        self.ast.nodes[id].is_leaf() && (self.kind(id) == "identifier" || LITERAL_KINDS.contains(&self.kind(id)))
    }

    fn child_of_kind(&self, id: usize, kind: &str) -> Option<usize> {
        self.kids(id).iter().copied().find(|&c| self.kind(c) == kind)
    }

    fn position(&self, id: usize, kind: &str) -> Option<usize> {
        self.kids(id).iter().position(|&c| self.kind(c) == kind)
    }

    fn edge(&mut self, src: usize, dst: usize) {
        if src != dst {
            self.edges.insert((src, dst));
        }
    }

    fn use_ident(&mut self, id: usize, env: &Env) {
        if let Some(defs) = env.get(self.name(id)) {
            for &d in defs {
                self.edge(d, id);
            }
        }
    }

    fn define(&mut self, id: usize, env: &mut Env) {
        env.insert(self.name(id).into(), alloc::vec![id]);
    }

    /// Identifier and literal leaves that contribute a value, skipping member
    /// names, keyword-argument names and opaque subtrees. A member chain whose
    /// root name is unbound (`Math.abs`, `System.out.println`) is a namespace
    /// path, so its final member name stands in for it.
    fn value_leaves(&self, id: usize, env: &Env) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_values(id, env, &mut out);
        out
    }

    fn chain_root(&self, mut id: usize) -> usize {
        while matches!(self.kind(id), "attribute" | "field_access") {
            id = self.kids(id)[0];
        }
        id
    }

    fn collect_values(&self, id: usize, env: &Env, out: &mut Vec<usize>) {
        if self.is_value_leaf(id) {
            out.push(id);
            return;
        }
        let kind = self.kind(id);
        if OPAQUE_KINDS.contains(&kind) {
            return;
        }
        let kids = self.kids(id);
        match kind {
            "attribute" | "field_access" => {
                let root = self.chain_root(id);
                let member = kids[kids.len() - 1];
                if self.is_ident(root) && !env.contains_key(self.name(root)) && self.is_ident(member) {
                    out.push(member);
                } else {
                    self.collect_values(kids[0], env, out);
                }
            }
            "method_reference" => self.collect_values(kids[0], env, out),
            "keyword_argument" => {
                for &c in &kids[1..] {
                    self.collect_values(c, env, out);
                }
            }
            _ => {
                for &c in kids {
                    self.collect_values(c, env, out);
                }
            }
        }
    }

    fn visit_all(&mut self, ids: &[usize], env: &mut Env) {
        for &c in ids {
            self.visit(c, env);
        }
    }

    fn visit(&mut self, id: usize, env: &mut Env) {
        if self.ast.nodes[id].is_leaf() {
            if self.is_ident(id) {
                self.use_ident(id, env);
            }
            return;
        }
        let kind = self.kind(id);
        if OPAQUE_KINDS.contains(&kind) {
            return;
        }
        let kids = self.kids(id);
        match kind {
            "attribute" | "field_access" | "method_reference" => self.visit(kids[0], env),
            "keyword_argument" => self.visit_all(&kids[1..], env),
            "labeled_statement" => self.visit_all(&kids[2..], env),

            "assignment" | "assignment_expression" | "named_expression" => self.assignment(id, env),
            "augmented_assignment" => {
                let (target, value) = (kids[0], kids[kids.len() - 1]);
                self.visit(value, env);
                let values = self.value_leaves(value, env);
                self.bind_partial(target, &values, env, true);
            }
            "update_expression" => {
                let operand = if self.ast.nodes[kids[0]].is_leaf() && !self.is_ident(kids[0]) { kids[1] } else { kids[0] };
                self.bind_partial(operand, &[], env, true);
            }
            "variable_declarator" => {
                let name = kids[0];
                if let Some(eq) = self.position(id, "=") {
                    let value = kids[eq + 1];
                    self.visit(value, env);
                    for v in self.value_leaves(value, env) {
                        self.edge(v, name);
                    }
                }
                self.define(name, env);
            }
            "resource" => {
                let eq = self.position(id, "=").unwrap_or(kids.len() - 2);
                let (name, value) = (kids[eq - 1], kids[eq + 1]);
                self.visit(value, env);
                for v in self.value_leaves(value, env) {
                    self.edge(v, name);
                }
                self.define(name, env);
            }
            "with_item" => {
                self.visit(kids[0], env);
                if let Some(as_pos) = self.position(id, "as") {
                    let values = self.value_leaves(kids[0], env);
                    self.bind_target(kids[as_pos + 1], &values, env);
                }
            }

            "if_statement" => self.if_statement(id, env),
            "conditional_expression" => {
                // a if cond else b
                self.visit(kids[2], env);
                let mut a = env.clone();
                self.visit(kids[0], &mut a);
                let mut b = env.clone();
                self.visit(kids[4], &mut b);
                *env = union(&a, &b);
            }
            "ternary_expression" => {
                self.visit(kids[0], env);
                let mut a = env.clone();
                self.visit(kids[2], &mut a);
                let mut b = env.clone();
                self.visit(kids[4], &mut b);
                *env = union(&a, &b);
            }
            "switch_statement" => {
                self.visit(kids[1], env);
                let start = env.clone();
                let mut results = alloc::vec![start.clone()];
                for &group in self.kids(kids[2]) {
                    if !self.ast.nodes[group].is_leaf() {
                        let mut branch = start.clone();
                        self.visit(group, &mut branch);
                        results.push(branch);
                    }
                }
                *env = union_all(&results);
            }

            "while_statement" => {
                self.visit(kids[1], env);
                let pre = env.clone();
                let else_pos = self.position(id, "else_clause");
                let body_end = else_pos.unwrap_or(kids.len());
                self.visit_all(&kids[2..body_end], env);
                *env = union(&pre, env);
                if let Some(e) = else_pos {
                    self.visit(kids[e], env);
                }
            }
            "do_statement" => {
                let pre = env.clone();
                self.visit(kids[1], env);
                self.visit(kids[3], env);
                *env = union(&pre, env);
            }
            "for_statement" => {
                if self.position(id, "in").is_some() {
                    self.python_for(id, env);
                } else {
                    self.java_for(id, env);
                }
            }
            "enhanced_for_statement" => {
                let colon = self.position(id, ":").unwrap_or(0);
                let (name, iter, body) = (kids[colon - 1], kids[colon + 1], kids[kids.len() - 1]);
                self.visit(iter, env);
                let pre = env.clone();
                for v in self.value_leaves(iter, env) {
                    self.edge(v, name);
                }
                self.define(name, env);
                self.visit(body, env);
                *env = union(&pre, env);
            }

            "try_statement" => self.try_statement(id, env),
            "except_clause" => {
                let as_pos = self.position(id, "as");
                for (i, &c) in kids.iter().enumerate() {
                    if Some(i) == as_pos.map(|p| p + 1) && self.is_ident(c) {
                        self.define(c, env);
                    } else {
                        self.visit(c, env);
                    }
                }
            }
            "catch_clause" => {
                if let Some(param) = self.child_of_kind(id, "catch_formal_parameter") {
                    if let Some(&name) = self.kids(param).iter().rev().find(|&&c| self.is_ident(c)) {
                        self.define(name, env);
                    }
                }
                if let Some(&body) = kids.last() {
                    self.visit(body, env);
                }
            }

            "function_definition" | "method_declaration" | "constructor_declaration" => {
                if let Some(&name) = kids.iter().find(|&&c| self.is_ident(c)) {
                    self.define(name, env);
                }
                let mut inner = env.clone();
                for &c in kids {
                    match self.kind(c) {
                        "parameters" | "formal_parameters" => self.parameters(c, &mut inner),
                        "block" => self.visit(c, &mut inner),
                        _ => {}
                    }
                }
            }
            "lambda" | "lambda_expression" => {
                let mut inner = env.clone();
                for &c in kids {
                    match self.kind(c) {
                        "lambda_parameters" | "formal_parameters" | "inferred_parameters" => self.parameters(c, &mut inner),
                        "identifier" if kind == "lambda_expression" && c == kids[0] => self.define(c, &mut inner),
                        _ => self.visit(c, &mut inner),
                    }
                }
            }
            "class_definition" | "class_declaration" => {
                let mut named = false;
                for &c in kids {
                    if !named && self.is_ident(c) {
                        self.define(c, env);
                        named = true;
                    } else if matches!(self.kind(c), "block" | "class_body") {
                        let mut inner = env.clone();
                        self.visit(c, &mut inner);
                    } else {
                        self.visit(c, env);
                    }
                }
            }
            "class_body" => {
                let mut inner = env.clone();
                self.visit_all(kids, &mut inner);
            }
            "instanceof_expression" => {
                self.visit(kids[0], env);
                let last = kids[kids.len() - 1];
                if kids.len() > 3 && self.is_ident(last) {
                    self.define(last, env);
                }
            }

            "list_comprehension" | "set_comprehension" | "dictionary_comprehension" | "generator_expression" => {
                let mut inner = env.clone();
                let mut rest = Vec::new();
                for &c in kids {
                    match self.kind(c) {
                        "for_in_clause" => {
                            let ck = self.kids(c);
                            let in_pos = self.position(c, "in").unwrap_or(2);
                            self.visit_all(&ck[in_pos + 1..], &mut inner);
                            let values: Vec<usize> = ck[in_pos + 1..].iter().flat_map(|&x| self.value_leaves(x, &inner)).collect();
                            self.bind_target(ck[1], &values, &mut inner);
                        }
                        "if_clause" => self.visit(c, &mut inner),
                        _ => rest.push(c),
                    }
                }
                self.visit_all(&rest, &mut inner);
            }

            _ => self.visit_all(kids, env),
        }
    }

    fn assignment(&mut self, id: usize, env: &mut Env) {
        let mut targets = alloc::vec![self.kids(id)[0]];
        let mut value = self.assigned_value(id);
        // Chained `a = b = v` nests to the right.
        while let Some(v) = value {
            if matches!(self.kind(v), "assignment" | "assignment_expression") {
                targets.push(self.kids(v)[0]);
                value = self.assigned_value(v);
            } else {
                break;
            }
        }
        let values = match value {
            Some(v) => {
                self.visit(v, env);
                self.value_leaves(v, env)
            }
            None => Vec::new(),
        };
        for t in targets {
            self.bind_target(t, &values, env);
        }
    }

    fn assigned_value(&self, id: usize) -> Option<usize> {
        let kids = self.kids(id);
        let eq = kids.iter().position(|&c| matches!(self.kind(c), "=" | ":="))?;
        kids.get(eq + 1).copied()
    }

    fn bind_target(&mut self, target: usize, values: &[usize], env: &mut Env) {
        match self.kind(target) {
            "identifier" if self.ast.nodes[target].is_leaf() => {
                for &v in values {
                    self.edge(v, target);
                }
                self.define(target, env);
            }
            "pattern_list" | "tuple" | "list" | "expression_list" | "parenthesized_expression" | "list_splat" => {
                for &c in self.kids(target) {
                    self.bind_target(c, values, env);
                }
            }
            "attribute" | "field_access" | "subscript" | "array_access" => self.bind_partial(target, values, env, false),
            _ => {
                if !self.ast.nodes[target].is_leaf() {
                    self.visit(target, env);
                }
            }
        }
    }

    /// Writes through a name (`x += v`, `a[i] = v`, `o.f = v`): the base
    /// identifier is both a use and a definition. `replace` is true when the
    /// whole variable is rewritten.
    fn bind_partial(&mut self, target: usize, values: &[usize], env: &mut Env, replace: bool) {
        let kids = self.kids(target);
        match self.kind(target) {
            "identifier" if self.ast.nodes[target].is_leaf() => {
                self.use_ident(target, env);
                for &v in values {
                    self.edge(v, target);
                }
                if replace {
                    self.define(target, env);
                } else {
                    let slot = env.entry(self.name(target).into()).or_default();
                    slot.push(target);
                    slot.sort_unstable();
                }
            }
            "subscript" | "array_access" => {
                self.visit_all(&kids[1..], env);
                self.bind_partial(kids[0], values, env, false);
            }
            "attribute" | "field_access" => self.bind_partial(kids[0], values, env, false),
            "parenthesized_expression" => self.bind_partial(kids[1], values, env, replace),
            _ => self.visit(target, env),
        }
    }

    fn parameters(&mut self, id: usize, env: &mut Env) {
        for &p in self.kids(id) {
            match self.kind(p) {
                "identifier" if self.ast.nodes[p].is_leaf() => self.define(p, env),
                "default_parameter" | "typed_default_parameter" => {
                    let pk = self.kids(p);
                    let name = pk[0];
                    if let Some(eq) = self.position(p, "=") {
                        let value = pk[eq + 1];
                        self.visit(value, env);
                        for v in self.value_leaves(value, env) {
                            self.edge(v, name);
                        }
                    }
                    self.define(name, env);
                }
                "typed_parameter" | "list_splat_pattern" | "dictionary_splat_pattern" | "formal_parameter"
                | "spread_parameter" => {
                    if let Some(&name) = self.kids(p).iter().rev().find(|&&c| self.is_ident(c)) {
                        self.define(name, env);
                    }
                }
                _ => {}
            }
        }
    }

    fn if_statement(&mut self, id: usize, env: &mut Env) {
        let kids = self.kids(id);
        self.visit(kids[1], env);
        let mut start = env.clone();
        let mut results = Vec::new();
        let mut has_else = false;
        let mut then = start.clone();
        self.visit(kids[2], &mut then);
        for &c in &kids[3..] {
            match self.kind(c) {
                "elif_clause" => {
                    let ck = self.kids(c);
                    self.visit(ck[1], &mut start);
                    let mut branch = start.clone();
                    self.visit_all(&ck[2..], &mut branch);
                    results.push(branch);
                }
                "else_clause" => {
                    has_else = true;
                    let mut branch = start.clone();
                    self.visit_all(&self.kids(c)[1..], &mut branch);
                    results.push(branch);
                }
                // Python: `:` and the block after it.
                _ => self.visit(c, &mut then),
            }
        }
        results.push(then);
        if !has_else {
            results.push(start);
        }
        *env = union_all(&results);
    }

    fn python_for(&mut self, id: usize, env: &mut Env) {
        let kids = self.kids(id);
        let in_pos = self.position(id, "in").unwrap_or(2);
        let iter = kids[in_pos + 1];
        self.visit(iter, env);
        let pre = env.clone();
        let values = self.value_leaves(iter, env);
        self.bind_target(kids[1], &values, env);
        let else_pos = self.position(id, "else_clause");
        let body_end = else_pos.unwrap_or(kids.len());
        self.visit_all(&kids[in_pos + 2..body_end], env);
        *env = union(&pre, env);
        if let Some(e) = else_pos {
            self.visit(kids[e], env);
        }
    }

    fn java_for(&mut self, id: usize, env: &mut Env) {
        let kids = self.kids(id);
        let semis: Vec<usize> = (0..kids.len()).filter(|&i| self.kind(kids[i]) == ";").collect();
        let close = kids.len() - 2;
        if semis.len() != 2 {
            self.visit_all(kids, env);
            return;
        }
        self.visit_all(&kids[2..semis[0]], env);
        self.visit_all(&kids[semis[0] + 1..semis[1]], env);
        let pre = env.clone();
        self.visit(kids[kids.len() - 1], env);
        self.visit_all(&kids[semis[1] + 1..close], env);
        *env = union(&pre, env);
    }

    fn try_statement(&mut self, id: usize, env: &mut Env) {
        let pre = env.clone();
        let mut body = env.clone();
        let mut handlers = Vec::new();
        let mut finally = None;
        for &c in self.kids(id) {
            match self.kind(c) {
                "except_clause" | "catch_clause" => handlers.push(c),
                "finally_clause" => finally = Some(c),
                "else_clause" => self.visit(c, &mut body),
                _ => self.visit(c, &mut body),
            }
        }
        let handler_start = union(&pre, &body);
        let mut results = alloc::vec![body];
        for h in handlers {
            let mut branch = handler_start.clone();
            self.visit(h, &mut branch);
            results.push(branch);
        }
        *env = union_all(&results);
        if let Some(f) = finally {
            self.visit(f, env);
        }
    }
}

#[cfg(test)]
mod tests {
    use alloc::vec;

    use super::*;
    use crate::ast::{parse_source, Language};

    /// DFG edges rendered as `src_text@offset -> dst_text@offset`.
    fn edges(lang: Language, src: &str) -> Vec<String> {
        let ast = parse_source("t", lang, src).unwrap();
        let g = build_dfg(&ast);
        g.dfg_edges()
            .map(|e| {
                let a = &ast.nodes[e.src];
                let b = &ast.nodes[e.dst];
                alloc::format!(
                    "{}@{} -> {}@{}",
                    a.token_text.as_deref().unwrap(),
                    a.span.start,
                    b.token_text.as_deref().unwrap(),
                    b.span.start
                )
            })
            .collect()
    }

    fn sorted(mut v: Vec<String>) -> Vec<String> {
        v.sort();
        v
    }

    fn expect(lang: Language, src: &str, want: &[&str]) {
        let got = sorted(edges(lang, src));
        let want = sorted(want.iter().map(|s| String::from(*s)).collect());
        assert_eq!(got, want, "source:\n{src}");
    }

    #[test]
    fn no_variables_no_edges() {
        expect(Language::Python, "print(\"hi\")", &[]);
    }

    #[test]
    fn reassignment_replaces_definition() {
        expect(
            Language::Python,
            "x = 1\nx = 2\ny = x\n",
            &["1@4 -> x@0", "2@10 -> x@6", "x@6 -> x@16", "x@16 -> y@12"],
        );
    }

    #[test]
    fn branches_merge_at_join() {
        expect(
            Language::Python,
            "if c:\n    x = 1\nelse:\n    x = 2\ny = x\n",
            &["1@14 -> x@10", "2@30 -> x@26", "x@10 -> x@36", "x@26 -> x@36", "x@36 -> y@32"],
        );
    }

    #[test]
    fn if_without_else_keeps_prior_definition() {
        expect(
            Language::Python,
            "x = 0\nif c:\n    x = 1\nprint(x)\n",
            &["0@4 -> x@0", "1@20 -> x@16", "x@0 -> x@28", "x@16 -> x@28"],
        );
    }

    #[test]
    fn loop_body_runs_once_and_merges() {
        expect(
            Language::Python,
            "s = 0\nfor v in xs:\n    s += v\nprint(s)\n",
            &["0@4 -> s@0", "xs@15 -> v@10", "v@10 -> v@28", "v@28 -> s@23", "s@0 -> s@23", "s@0 -> s@36", "s@23 -> s@36"],
        );
    }

    #[test]
    fn functions_define_parameters_locally() {
        expect(
            Language::Python,
            "def f(a, b=3):\n    return a + b\nprint(a)\n",
            &["3@11 -> b@9", "a@6 -> a@26", "b@9 -> b@30"],
        );
    }

    #[test]
    fn attribute_members_and_keywords_are_not_uses() {
        // `o` is unbound, so the member name carries the value.
        expect(Language::Python, "a = 1\nb = o.a(k=a)\n", &["1@4 -> a@0", "a@0 -> a@16", "a@12 -> b@6", "a@16 -> b@6"]);
    }

    #[test]
    fn bound_receivers_carry_the_value() {
        expect(Language::Python, "o = 1\nb = o.f()\n", &["1@4 -> o@0", "o@0 -> o@10", "o@10 -> b@6"]);
        expect(
            Language::Java,
            "void f(int z) { int x = Math.abs(z); }",
            &["abs@29 -> x@20", "z@33 -> x@20", "z@11 -> z@33"],
        );
    }

    #[test]
    fn subscript_writes_are_partial() {
        expect(
            Language::Python,
            "a = []\na[0] = 5\nprint(a)\n",
            &["a@0 -> a@7", "5@14 -> a@7", "a@0 -> a@22", "a@7 -> a@22"],
        );
    }

    #[test]
    fn java_declarations_updates_and_loops() {
        expect(
            Language::Java,
            "int f(int n) { int s = 0; for (int i = 0; i < n; i++) { s += i; } return s; }",
            &[
                "0@23 -> s@19",
                "0@39 -> i@35",
                "i@35 -> i@42",
                "n@10 -> n@46",
                "i@35 -> i@61",
                "i@61 -> s@56",
                "s@19 -> s@56",
                "i@35 -> i@49",
                "s@19 -> s@73",
                "s@56 -> s@73",
            ],
        );
    }

    #[test]
    fn java_fields_of_this_are_not_locals() {
        expect(Language::Java, "void set(int n) { this.n = n; }", &["n@13 -> n@27"]);
    }

    #[test]
    fn dfg_edges_join_leaves_without_duplicates() {
        let ast = parse_source("t", Language::Python, "a = b = c\nd = a + a + b\n").unwrap();
        let g = build_dfg(&ast);
        g.validate().unwrap();
        let e = vec!["c@8 -> a@0", "c@8 -> b@4", "a@0 -> a@14", "a@0 -> a@18", "b@4 -> b@22", "a@14 -> d@10", "a@18 -> d@10", "b@22 -> d@10"];
        assert_eq!(sorted(edges(Language::Python, "a = b = c\nd = a + a + b\n")), sorted(e.into_iter().map(String::from).collect()));
    }
}
