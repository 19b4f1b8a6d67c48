//! Recursive-descent parser for a Java subset.
//!
//! Accepts full compilation units (package, imports, classes) as well as bare
//! method or constructor declarations and loose statements, which is how
//! method-level clone corpora store their units. Kinds follow the tree-sitter
//! Java grammar with three normalizations:
//!
//! * a qualified call `a.b(x)` is `method_invocation(field_access(a, ., b), argument_list)`
//!   so the callee is a single subtree, as in Python's `call(attribute, argument_list)`;
//! * the class named in `new Foo(..)` is an `identifier` (it is the callee), not a type;
//! * compound assignments (`+=`, ...) are `augmented_assignment` and `else`
//!   branches are wrapped in `else_clause`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::lexer::{lex_java, Cursor, Tok};
use super::{ParseError, RawNode, Span};

type PResult = Result<RawNode, ParseError>;

pub(crate) fn parse(src: &str) -> PResult {
    let toks = lex_java(src)?;
    let mut p = Parser { c: Cursor::new(src, toks) };
    let mut items = Vec::new();
    while !p.c.is(Tok::Eof) {
        items.push(p.top_level()?);
    }
    if items.is_empty() {
        return Err(ParseError::EmptySource);
    }
    Ok(RawNode::inner("program", items))
}

struct Parser<'a> {
    c: Cursor<'a>,
}

const MODIFIERS: &[&str] = &[
    "public", "private", "protected", "static", "final", "abstract", "synchronized", "native", "transient",
    "volatile", "strictfp", "default",
];

const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="];

fn precedence(op: &str) -> Option<u8> {
    Some(match op {
        "||" => 1,
        "&&" => 2,
        "|" => 3,
        "^" => 4,
        "&" => 5,
        "==" | "!=" => 6,
        "<" | ">" | "<=" | ">=" | "instanceof" => 7,
        "<<" | ">>" | ">>>" => 8,
        "+" | "-" => 9,
        "*" | "/" | "%" => 10,
        _ => return None,
    })
}

impl<'a> Parser<'a> {
    fn leaf(&mut self) -> RawNode {
        let t = self.c.bump();
        let text = self.c.text(t);
        let kind = match t.tok {
            Tok::Ident => "identifier",
            Tok::Int => integer_kind(text),
            Tok::Float => "decimal_floating_point_literal",
            Tok::Str => "string_literal",
            Tok::Char => "character_literal",
            Tok::Keyword if text == "null" => "null_literal",
            _ => text,
        };
        RawNode::leaf(kind, t.span, text)
    }

    fn leaf_as(&mut self, kind: &str) -> RawNode {
        let t = self.c.bump();
        RawNode::leaf(kind, t.span, self.c.text(t))
    }

    fn expect(&mut self, s: &str) -> PResult {
        if self.c.at(s) {
            Ok(self.leaf())
        } else {
            Err(self.c.error(alloc::format!("expected `{s}`")))
        }
    }

    fn identifier(&mut self) -> PResult {
        if self.c.is(Tok::Ident) {
            Ok(self.leaf())
        } else {
            Err(self.c.error("expected identifier"))
        }
    }

    /// Index of the `)` matching the `(` at token index `open`.
    fn matching_paren(&self, open: usize) -> Option<usize> {
        let mut depth = 0usize;
        for i in open..self.c.toks.len() {
            let t = self.c.toks[i];
            if t.tok != Tok::Punct {
                continue;
            }
            match self.c.text(t) {
                "(" => depth += 1,
                ")" => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(i);
                    }
                }
                _ => {}
            }
        }
        None
    }

    fn tok_text_at(&self, idx: usize) -> &'a str {
        let t = self.c.toks[idx.min(self.c.toks.len() - 1)];
        if matches!(t.tok, Tok::Punct | Tok::Keyword) {
            self.c.text(t)
        } else {
            ""
        }
    }

    // ---- declarations ----

    fn top_level(&mut self) -> PResult {
        if self.c.at("package") {
            let mut ch = vec![self.leaf(), self.qualified_name()?];
            ch.push(self.expect(";")?);
            return Ok(RawNode::inner("package_declaration", ch));
        }
        if self.c.at("import") {
            let mut ch = vec![self.leaf()];
            if self.c.at("static") {
                ch.push(self.leaf());
            }
            ch.push(self.qualified_name()?);
            if self.c.at(".") && self.c.at_ahead(1, "*") {
                ch.push(self.leaf());
                ch.push(RawNode::inner("asterisk", vec![self.leaf()]));
            }
            ch.push(self.expect(";")?);
            return Ok(RawNode::inner("import_declaration", ch));
        }
        let save = self.c.pos;
        if let Some(member) = self.try_member()? {
            return Ok(member);
        }
        self.c.pos = save;
        self.statement()
    }

    /// `a.b.c` as nested `scoped_identifier`s.
    fn qualified_name(&mut self) -> PResult {
        let mut node = self.identifier()?;
        while self.c.at(".") && self.c.peek_at(1).tok == Tok::Ident {
            let dot = self.leaf();
            let name = self.identifier()?;
            node = RawNode::inner("scoped_identifier", vec![node, dot, name]);
        }
        Ok(node)
    }

    fn modifiers(&mut self) -> Result<Option<RawNode>, ParseError> {
        let mut ch = Vec::new();
        loop {
            if self.c.at("@") && !self.c.at_ahead(1, "interface") {
                ch.push(self.annotation()?);
            } else if self.c.is(Tok::Keyword) && MODIFIERS.contains(&self.c.peek_text()) {
                ch.push(self.leaf());
            } else {
                break;
            }
        }
        Ok(if ch.is_empty() { None } else { Some(RawNode::inner("modifiers", ch)) })
    }

    fn annotation(&mut self) -> PResult {
        let mut ch = vec![self.leaf(), self.qualified_name()?];
        if self.c.at("(") {
            let mut args = vec![self.leaf()];
            while !self.c.at(")") {
                if self.c.is(Tok::Ident) && self.c.at_ahead(1, "=") {
                    let name = self.leaf();
                    let eq = self.leaf();
                    let value = self.element_value()?;
                    args.push(RawNode::inner("element_value_pair", vec![name, eq, value]));
                } else {
                    args.push(self.element_value()?);
                }
                if self.c.at(",") {
                    args.push(self.leaf());
                } else {
                    break;
                }
            }
            args.push(self.expect(")")?);
            ch.push(RawNode::inner("annotation_argument_list", args));
        }
        Ok(RawNode::inner("annotation", ch))
    }

    fn element_value(&mut self) -> PResult {
        if self.c.at("{") {
            self.array_initializer()
        } else {
            self.ternary()
        }
    }

    /// Class, method, constructor or field declaration; `None` when the
    /// tokens do not start one (the caller then parses a statement).
    fn try_member(&mut self) -> Result<Option<RawNode>, ParseError> {
        let mods = self.modifiers()?;
        if self.c.at("class") {
            return self.class_declaration(mods).map(Some);
        }
        if self.c.at("interface") || self.c.at("enum") || self.c.at("@") {
            return Err(self.c.error("interfaces, enums and annotation types are not supported"));
        }
        let type_params = if self.c.at("<") { Some(self.type_parameters()?) } else { None };
        // Constructor: Name ( ... ) followed by `{` or `throws`.
        if self.c.is(Tok::Ident) && self.c.at_ahead(1, "(") {
            if let Some(close) = self.matching_paren(self.c.pos + 1) {
                let after = self.tok_text_at(close + 1);
                if after == "{" || after == "throws" {
                    let mut ch: Vec<RawNode> = mods.into_iter().chain(type_params).collect();
                    ch.push(self.identifier()?);
                    ch.push(self.formal_parameters()?);
                    if self.c.at("throws") {
                        ch.push(self.throws()?);
                    }
                    ch.push(self.block()?);
                    return Ok(Some(RawNode::inner("constructor_declaration", ch)));
                }
            }
        }
        let save = self.c.pos;
        let ty = match self.ty() {
            Ok(t) => t,
            Err(e) => {
                if mods.is_some() || type_params.is_some() {
                    return Err(e);
                }
                self.c.pos = save;
                return Ok(None);
            }
        };
        if !self.c.is(Tok::Ident) {
            if mods.is_some() || type_params.is_some() {
                return Err(self.c.error("expected declaration name"));
            }
            return Ok(None);
        }
        if self.c.at_ahead(1, "(") {
            let mut ch: Vec<RawNode> = mods.into_iter().chain(type_params).collect();
            ch.push(ty);
            ch.push(self.identifier()?);
            ch.push(self.formal_parameters()?);
            if self.c.at("[") {
                ch.push(self.dimensions()?);
            }
            if self.c.at("throws") {
                ch.push(self.throws()?);
            }
            if self.c.at(";") {
                ch.push(self.leaf());
            } else {
                ch.push(self.block()?);
            }
            return Ok(Some(RawNode::inner("method_declaration", ch)));
        }
        if mods.is_none() {
            // A bare `Type name ...;` at top level is a local declaration statement.
            return Ok(None);
        }
        let mut ch: Vec<RawNode> = mods.into_iter().collect();
        ch.push(ty);
        self.declarators(&mut ch)?;
        ch.push(self.expect(";")?);
        Ok(Some(RawNode::inner("field_declaration", ch)))
    }

    fn class_declaration(&mut self, mods: Option<RawNode>) -> PResult {
        let mut ch: Vec<RawNode> = mods.into_iter().collect();
        ch.push(self.leaf());
        ch.push(self.identifier()?);
        if self.c.at("<") {
            ch.push(self.type_parameters()?);
        }
        if self.c.at("extends") {
            let kw = self.leaf();
            let ty = self.ty()?;
            ch.push(RawNode::inner("superclass", vec![kw, ty]));
        }
        if self.c.at("implements") {
            let mut it = vec![self.leaf(), self.ty()?];
            while self.c.at(",") {
                it.push(self.leaf());
                it.push(self.ty()?);
            }
            ch.push(RawNode::inner("super_interfaces", it));
        }
        ch.push(self.class_body()?);
        Ok(RawNode::inner("class_declaration", ch))
    }

    fn class_body(&mut self) -> PResult {
        let mut ch = vec![self.expect("{")?];
        while !self.c.at("}") {
            if self.c.is(Tok::Eof) {
                return Err(self.c.error("unclosed class body"));
            }
            if self.c.at(";") {
                ch.push(self.leaf());
                continue;
            }
            if self.c.at("{") {
                ch.push(self.block()?);
                continue;
            }
            if self.c.at("static") && self.c.at_ahead(1, "{") {
                let kw = self.leaf();
                let body = self.block()?;
                ch.push(RawNode::inner("static_initializer", vec![kw, body]));
                continue;
            }
            let save = self.c.pos;
            match self.try_member()? {
                Some(m) => ch.push(m),
                None => {
                    // Field without modifiers.
                    self.c.pos = save;
                    let mut f = vec![self.ty()?];
                    self.declarators(&mut f)?;
                    f.push(self.expect(";")?);
                    ch.push(RawNode::inner("field_declaration", f));
                }
            }
        }
        ch.push(self.leaf());
        Ok(RawNode::inner("class_body", ch))
    }

    fn type_parameters(&mut self) -> PResult {
        let mut ch = vec![self.expect("<")?];
        loop {
            let mut tp = vec![self.leaf_as("type_identifier")];
            if self.c.at("extends") {
                tp.push(self.leaf());
                tp.push(self.ty()?);
                while self.c.at("&") {
                    tp.push(self.leaf());
                    tp.push(self.ty()?);
                }
            }
            ch.push(RawNode::inner("type_parameter", tp));
            if self.c.at(",") {
                ch.push(self.leaf());
            } else {
                break;
            }
        }
        ch.push(self.expect(">")?);
        Ok(RawNode::inner("type_parameters", ch))
    }

    fn throws(&mut self) -> PResult {
        let mut ch = vec![self.leaf(), self.ty()?];
        while self.c.at(",") {
            ch.push(self.leaf());
            ch.push(self.ty()?);
        }
        Ok(RawNode::inner("throws", ch))
    }

    fn formal_parameters(&mut self) -> PResult {
        let mut ch = vec![self.expect("(")?];
        while !self.c.at(")") {
            let mut p: Vec<RawNode> = self.modifiers()?.into_iter().collect();
            p.push(self.ty()?);
            if self.c.at("...") {
                p.push(self.leaf());
                p.push(self.identifier()?);
                ch.push(RawNode::inner("spread_parameter", p));
            } else {
                p.push(self.identifier()?);
                if self.c.at("[") {
                    p.push(self.dimensions()?);
                }
                ch.push(RawNode::inner("formal_parameter", p));
            }
            if self.c.at(",") {
                ch.push(self.leaf());
            } else {
                break;
            }
        }
        ch.push(self.expect(")")?);
        Ok(RawNode::inner("formal_parameters", ch))
    }

    fn dimensions(&mut self) -> PResult {
        let mut ch = Vec::new();
        while self.c.at("[") && self.c.at_ahead(1, "]") {
            ch.push(self.leaf());
            ch.push(self.leaf());
        }
        if ch.is_empty() {
            return Err(self.c.error("expected `[]`"));
        }
        Ok(RawNode::inner("dimensions", ch))
    }

    fn declarators(&mut self, out: &mut Vec<RawNode>) -> Result<(), ParseError> {
        loop {
            let mut d = vec![self.identifier()?];
            if self.c.at("[") {
                d.push(self.dimensions()?);
            }
            if self.c.at("=") {
                d.push(self.leaf());
                if self.c.at("{") {
                    d.push(self.array_initializer()?);
                } else {
                    d.push(self.expression()?);
                }
            }
            out.push(RawNode::inner("variable_declarator", d));
            if self.c.at(",") {
                out.push(self.leaf());
            } else {
                return Ok(());
            }
        }
    }

    // ---- types ----

    fn ty(&mut self) -> PResult {
        let t = self.c.peek();
        let mut node = match (t.tok, self.c.text(t)) {
            (Tok::Keyword, "int" | "long" | "short" | "byte" | "char") => self.leaf_as("integral_type"),
            (Tok::Keyword, "float" | "double") => self.leaf_as("floating_point_type"),
            (Tok::Keyword, "boolean") => self.leaf_as("boolean_type"),
            (Tok::Keyword, "void") => self.leaf_as("void_type"),
            (Tok::Ident, _) => {
                let mut node = self.leaf_as("type_identifier");
                loop {
                    if self.c.at("<") {
                        let args = self.type_arguments()?;
                        node = RawNode::inner("generic_type", vec![node, args]);
                    }
                    if self.c.at(".") && self.c.peek_at(1).tok == Tok::Ident {
                        let dot = self.leaf();
                        let name = self.leaf_as("type_identifier");
                        node = RawNode::inner("scoped_type_identifier", vec![node, dot, name]);
                    } else {
                        break;
                    }
                }
                node
            }
            _ => return Err(self.c.error("expected type")),
        };
        if self.c.at("[") && self.c.at_ahead(1, "]") {
            let dims = self.dimensions()?;
            node = RawNode::inner("array_type", vec![node, dims]);
        }
        Ok(node)
    }

    fn type_arguments(&mut self) -> PResult {
        let mut ch = vec![self.expect("<")?];
        if self.c.at(">") {
            ch.push(self.leaf());
            return Ok(RawNode::inner("type_arguments", ch));
        }
        loop {
            if self.c.at("?") {
                let mut w = vec![self.leaf()];
                if self.c.at("extends") || self.c.at("super") {
                    w.push(self.leaf());
                    w.push(self.ty()?);
                }
                ch.push(RawNode::inner("wildcard", w));
            } else {
                ch.push(self.ty()?);
            }
            if self.c.at(",") {
                ch.push(self.leaf());
            } else {
                break;
            }
        }
        ch.push(self.expect(">")?);
        Ok(RawNode::inner("type_arguments", ch))
    }

    // ---- statements ----

    fn block(&mut self) -> PResult {
        let mut ch = vec![self.expect("{")?];
        while !self.c.at("}") {
            if self.c.is(Tok::Eof) {
                return Err(self.c.error("unclosed block"));
            }
            ch.push(self.statement()?);
        }
        ch.push(self.leaf());
        Ok(RawNode::inner("block", ch))
    }

    fn paren_condition(&mut self) -> PResult {
        let open = self.expect("(")?;
        let e = self.expression()?;
        let close = self.expect(")")?;
        Ok(RawNode::inner("parenthesized_expression", vec![open, e, close]))
    }

    fn statement(&mut self) -> PResult {
        let t = self.c.peek();
        if t.tok == Tok::Eof {
            return Err(self.c.error("unexpected end of input"));
        }
        if matches!(t.tok, Tok::Keyword | Tok::Punct) {
            match self.c.text(t) {
                "{" => return self.block(),
                ";" => return Ok(self.leaf()),
                "if" => {
                    let mut ch = vec![self.leaf(), self.paren_condition()?, self.statement()?];
                    if self.c.at("else") {
                        let kw = self.leaf();
                        let alt = self.statement()?;
                        ch.push(RawNode::inner("else_clause", vec![kw, alt]));
                    }
                    return Ok(RawNode::inner("if_statement", ch));
                }
                "while" => {
                    let ch = vec![self.leaf(), self.paren_condition()?, self.statement()?];
                    return Ok(RawNode::inner("while_statement", ch));
                }
                "do" => {
                    let mut ch = vec![self.leaf(), self.statement()?];
                    ch.push(self.expect("while")?);
                    ch.push(self.paren_condition()?);
                    ch.push(self.expect(";")?);
                    return Ok(RawNode::inner("do_statement", ch));
                }
                "for" => return self.for_statement(),
                "return" => {
                    let mut ch = vec![self.leaf()];
                    if !self.c.at(";") {
                        ch.push(self.expression()?);
                    }
                    ch.push(self.expect(";")?);
                    return Ok(RawNode::inner("return_statement", ch));
                }
                "break" | "continue" => {
                    let kind = if self.c.at("break") { "break_statement" } else { "continue_statement" };
                    let mut ch = vec![self.leaf()];
                    if self.c.is(Tok::Ident) {
                        ch.push(self.leaf());
                    }
                    ch.push(self.expect(";")?);
                    return Ok(RawNode::inner(kind, ch));
                }
                "throw" => {
                    let ch = vec![self.leaf(), self.expression()?, self.expect(";")?];
                    return Ok(RawNode::inner("throw_statement", ch));
                }
                "try" => return self.try_statement(),
                "switch" => return self.switch_statement(),
                "synchronized" if self.c.at_ahead(1, "(") => {
                    let ch = vec![self.leaf(), self.paren_condition()?, self.block()?];
                    return Ok(RawNode::inner("synchronized_statement", ch));
                }
                "class" => return self.class_declaration(None),
                "final" | "@" => {
                    let mods = self.modifiers()?;
                    if self.c.at("class") {
                        return self.class_declaration(mods);
                    }
                    let mut ch: Vec<RawNode> = mods.into_iter().collect();
                    ch.push(self.ty()?);
                    self.declarators(&mut ch)?;
                    ch.push(self.expect(";")?);
                    return Ok(RawNode::inner("local_variable_declaration", ch));
                }
                "assert" => {
                    let mut ch = vec![self.leaf(), self.expression()?];
                    if self.c.at(":") {
                        ch.push(self.leaf());
                        ch.push(self.expression()?);
                    }
                    ch.push(self.expect(";")?);
                    return Ok(RawNode::inner("assert_statement", ch));
                }
                _ => {}
            }
        }
        if t.tok == Tok::Ident && self.c.at_ahead(1, ":") {
            let label = self.leaf();
            let colon = self.leaf();
            let body = self.statement()?;
            return Ok(RawNode::inner("labeled_statement", vec![label, colon, body]));
        }
        if let Some(decl) = self.try_local_declaration()? {
            let mut ch = decl;
            ch.push(self.expect(";")?);
            return Ok(RawNode::inner("local_variable_declaration", ch));
        }
        let e = self.expression()?;
        let semi = self.expect(";")?;
        Ok(RawNode::inner("expression_statement", vec![e, semi]))
    }

    /// `Type name [= value], ...` without the terminator, if the tokens form one.
    fn try_local_declaration(&mut self) -> Result<Option<Vec<RawNode>>, ParseError> {
        let save = self.c.pos;
        let ty = match self.ty() {
            Ok(t) => t,
            Err(_) => {
                self.c.pos = save;
                return Ok(None);
            }
        };
        let looks_like_decl = self.c.is(Tok::Ident)
            && matches!(self.tok_text_at(self.c.pos + 1), "=" | ";" | "," | "[" | ":");
        if !looks_like_decl {
            self.c.pos = save;
            return Ok(None);
        }
        let mut ch = vec![ty];
        self.declarators(&mut ch)?;
        Ok(Some(ch))
    }

    fn for_statement(&mut self) -> PResult {
        let kw = self.leaf();
        let open = self.expect("(")?;
        // Enhanced for: [final] Type name : expr
        let save = self.c.pos;
        let mods = self.modifiers()?;
        if let Ok(ty) = self.ty() {
            if self.c.is(Tok::Ident) && self.c.at_ahead(1, ":") {
                let mut ch = vec![kw, open];
                ch.extend(mods);
                ch.push(ty);
                ch.push(self.identifier()?);
                ch.push(self.leaf());
                ch.push(self.expression()?);
                ch.push(self.expect(")")?);
                ch.push(self.statement()?);
                return Ok(RawNode::inner("enhanced_for_statement", ch));
            }
        }
        self.c.pos = save;
        let mut ch = vec![kw, open];
        if !self.c.at(";") {
            let mods = self.modifiers()?;
            if let Some(decl) = self.try_local_declaration()? {
                let mut d: Vec<RawNode> = mods.into_iter().collect();
                d.extend(decl);
                ch.push(RawNode::inner("local_variable_declaration", d));
            } else {
                ch.push(self.expression()?);
                while self.c.at(",") {
                    ch.push(self.leaf());
                    ch.push(self.expression()?);
                }
            }
        }
        ch.push(self.expect(";")?);
        if !self.c.at(";") {
            ch.push(self.expression()?);
        }
        ch.push(self.expect(";")?);
        if !self.c.at(")") {
            ch.push(self.expression()?);
            while self.c.at(",") {
                ch.push(self.leaf());
                ch.push(self.expression()?);
            }
        }
        ch.push(self.expect(")")?);
        ch.push(self.statement()?);
        Ok(RawNode::inner("for_statement", ch))
    }

    fn try_statement(&mut self) -> PResult {
        let mut ch = vec![self.leaf()];
        if self.c.at("(") {
            let mut res = vec![self.leaf()];
            loop {
                let mut r: Vec<RawNode> = self.modifiers()?.into_iter().collect();
                r.push(self.ty()?);
                r.push(self.identifier()?);
                r.push(self.expect("=")?);
                r.push(self.expression()?);
                res.push(RawNode::inner("resource", r));
                if self.c.at(";") {
                    res.push(self.leaf());
                    if self.c.at(")") {
                        break;
                    }
                } else {
                    break;
                }
            }
            res.push(self.expect(")")?);
            ch.push(RawNode::inner("resource_specification", res));
        }
        ch.push(self.block()?);
        let mut handlers = 0;
        while self.c.at("catch") {
            let mut cc = vec![self.leaf(), self.expect("(")?];
            let mut param: Vec<RawNode> = self.modifiers()?.into_iter().collect();
            let mut types = vec![self.ty()?];
            while self.c.at("|") {
                types.push(self.leaf());
                types.push(self.ty()?);
            }
            param.push(RawNode::inner("catch_type", types));
            param.push(self.identifier()?);
            cc.push(RawNode::inner("catch_formal_parameter", param));
            cc.push(self.expect(")")?);
            cc.push(self.block()?);
            ch.push(RawNode::inner("catch_clause", cc));
            handlers += 1;
        }
        if self.c.at("finally") {
            let kw = self.leaf();
            let body = self.block()?;
            ch.push(RawNode::inner("finally_clause", vec![kw, body]));
            handlers += 1;
        }
        if handlers == 0 && ch.len() == 2 {
            return Err(self.c.error("try without catch or finally"));
        }
        Ok(RawNode::inner("try_statement", ch))
    }

    fn switch_statement(&mut self) -> PResult {
        let mut ch = vec![self.leaf(), self.paren_condition()?];
        let mut body = vec![self.expect("{")?];
        while !self.c.at("}") {
            if self.c.is(Tok::Eof) {
                return Err(self.c.error("unclosed switch"));
            }
            let mut group = Vec::new();
            while self.c.at("case") || self.c.at("default") {
                let mut label = vec![self.leaf()];
                if label[0].kind == "case" {
                    label.push(self.ternary()?);
                    while self.c.at(",") {
                        label.push(self.leaf());
                        label.push(self.ternary()?);
                    }
                }
                if self.c.at("->") {
                    return Err(self.c.error("arrow switch labels are not supported"));
                }
                label.push(self.expect(":")?);
                group.push(RawNode::inner("switch_label", label));
            }
            if group.is_empty() {
                return Err(self.c.error("expected `case` or `default`"));
            }
            while !(self.c.at("case") || self.c.at("default") || self.c.at("}")) {
                group.push(self.statement()?);
            }
            body.push(RawNode::inner("switch_block_statement_group", group));
        }
        body.push(self.leaf());
        ch.push(RawNode::inner("switch_block", body));
        Ok(RawNode::inner("switch_statement", ch))
    }

    // ---- expressions ----

    fn expression(&mut self) -> PResult {
        let lhs = self.ternary()?;
        if let Some((op, count)) = self.peek_operator() {
            if ASSIGN_OPS.contains(&op.as_str()) {
                let op_leaf = self.operator_leaf(&op, count);
                let rhs = if self.c.at("{") { self.array_initializer()? } else { self.expression()? };
                let kind = if op == "=" { "assignment_expression" } else { "augmented_assignment" };
                return Ok(RawNode::inner(kind, vec![lhs, op_leaf, rhs]));
            }
        }
        Ok(lhs)
    }

    /// Operator at the cursor, re-joining adjacent `>` tokens into shifts.
    fn peek_operator(&self) -> Option<(String, usize)> {
        let t = self.c.peek();
        if !matches!(t.tok, Tok::Punct | Tok::Keyword) {
            return None;
        }
        let first = self.c.text(t);
        if first != ">" {
            return Some((first.into(), 1));
        }
        let mut text = String::from(">");
        let mut end = t.span.end;
        let mut count = 1;
        while count < 3 {
            let next = self.c.peek_at(count);
            if next.tok != Tok::Punct || next.span.start != end {
                break;
            }
            let nt = self.c.text(next);
            if nt == ">" || (nt == ">=" && count < 3) {
                text.push_str(nt);
                end = next.span.end;
                count += 1;
                if nt == ">=" {
                    break;
                }
            } else {
                break;
            }
        }
        Some((text, count))
    }

    fn operator_leaf(&mut self, op: &str, count: usize) -> RawNode {
        let first = self.c.bump();
        let mut end = first.span.end;
        for _ in 1..count {
            end = self.c.bump().span.end;
        }
        RawNode::leaf(op, Span::new(first.span.start, end), op)
    }

    fn ternary(&mut self) -> PResult {
        let cond = self.binary(1)?;
        if self.c.at("?") {
            let q = self.leaf();
            let then = self.expression()?;
            let colon = self.expect(":")?;
            let alt = if self.is_lambda_start() { self.lambda()? } else { self.ternary()? };
            return Ok(RawNode::inner("ternary_expression", vec![cond, q, then, colon, alt]));
        }
        Ok(cond)
    }

    fn binary(&mut self, min_prec: u8) -> PResult {
        let mut left = self.unary()?;
        loop {
            let Some((op, count)) = self.peek_operator() else { break };
            let Some(prec) = precedence(&op) else { break };
            if prec < min_prec {
                break;
            }
            let op_leaf = self.operator_leaf(&op, count);
            if op == "instanceof" {
                let mut ch = vec![left, op_leaf];
                if self.c.at("final") {
                    ch.push(self.leaf());
                }
                ch.push(self.ty()?);
                if self.c.is(Tok::Ident) {
                    ch.push(self.identifier()?);
                }
                left = RawNode::inner("instanceof_expression", ch);
                continue;
            }
            let right = self.binary(prec + 1)?;
            left = RawNode::inner("binary_expression", vec![left, op_leaf, right]);
        }
        Ok(left)
    }

    fn unary(&mut self) -> PResult {
        if self.c.at("+") || self.c.at("-") || self.c.at("!") || self.c.at("~") {
            let op = self.leaf();
            let operand = self.unary()?;
            return Ok(RawNode::inner("unary_expression", vec![op, operand]));
        }
        if self.c.at("++") || self.c.at("--") {
            let op = self.leaf();
            let operand = self.unary()?;
            return Ok(RawNode::inner("update_expression", vec![op, operand]));
        }
        if self.c.at("(") {
            if let Some(cast) = self.try_cast()? {
                return Ok(cast);
            }
        }
        let mut e = self.primary()?;
        while self.c.at("++") || self.c.at("--") {
            let op = self.leaf();
            e = RawNode::inner("update_expression", vec![e, op]);
        }
        Ok(e)
    }

    fn try_cast(&mut self) -> Result<Option<RawNode>, ParseError> {
        let save = self.c.pos;
        let open = self.leaf();
        let primitive = matches!(
            self.c.peek_text(),
            "int" | "long" | "short" | "byte" | "char" | "float" | "double" | "boolean"
        );
        let ty = match self.ty() {
            Ok(t) => t,
            Err(_) => {
                self.c.pos = save;
                return Ok(None);
            }
        };
        if !self.c.at(")") {
            self.c.pos = save;
            return Ok(None);
        }
        let next = self.c.peek_at(1);
        let next_text = self.c.text(next);
        let operand_follows = match next.tok {
            Tok::Ident | Tok::Int | Tok::Float | Tok::Str | Tok::Char => true,
            Tok::Keyword => matches!(next_text, "this" | "new" | "super" | "true" | "false" | "null"),
            Tok::Punct => matches!(next_text, "(" | "!" | "~") || (primitive && matches!(next_text, "+" | "-")),
            _ => false,
        };
        if !operand_follows {
            self.c.pos = save;
            return Ok(None);
        }
        let close = self.leaf();
        let operand = self.unary()?;
        Ok(Some(RawNode::inner("cast_expression", vec![open, ty, close, operand])))
    }

    fn is_lambda_start(&self) -> bool {
        if self.c.is(Tok::Ident) && self.c.at_ahead(1, "->") {
            return true;
        }
        if self.c.at("(") {
            if let Some(close) = self.matching_paren(self.c.pos) {
                return self.tok_text_at(close + 1) == "->";
            }
        }
        false
    }

    fn lambda(&mut self) -> PResult {
        let params = if self.c.is(Tok::Ident) {
            self.identifier()?
        } else if self.c.at_ahead(1, ")") || (self.c.peek_at(1).tok == Tok::Ident && matches!(self.tok_text_at(self.c.pos + 2), "," | ")")) {
            let mut ch = vec![self.leaf()];
            while !self.c.at(")") {
                ch.push(self.identifier()?);
                if self.c.at(",") {
                    ch.push(self.leaf());
                } else {
                    break;
                }
            }
            ch.push(self.expect(")")?);
            RawNode::inner("inferred_parameters", ch)
        } else {
            self.formal_parameters()?
        };
        let arrow = self.expect("->")?;
        let body = if self.c.at("{") { self.block()? } else { self.expression()? };
        Ok(RawNode::inner("lambda_expression", vec![params, arrow, body]))
    }

    fn argument_list(&mut self) -> PResult {
        let mut ch = vec![self.expect("(")?];
        while !self.c.at(")") {
            ch.push(self.expression_or_lambda()?);
            if self.c.at(",") {
                ch.push(self.leaf());
            } else {
                break;
            }
        }
        ch.push(self.expect(")")?);
        Ok(RawNode::inner("argument_list", ch))
    }

    fn expression_or_lambda(&mut self) -> PResult {
        if self.is_lambda_start() {
            self.lambda()
        } else {
            self.expression()
        }
    }

    fn array_initializer(&mut self) -> PResult {
        let mut ch = vec![self.expect("{")?];
        while !self.c.at("}") {
            if self.c.at("{") {
                ch.push(self.array_initializer()?);
            } else {
                ch.push(self.expression()?);
            }
            if self.c.at(",") {
                ch.push(self.leaf());
            } else {
                break;
            }
        }
        ch.push(self.expect("}")?);
        Ok(RawNode::inner("array_initializer", ch))
    }

    fn primary(&mut self) -> PResult {
        if self.is_lambda_start() {
            return self.lambda();
        }
        let t = self.c.peek();
        let text = self.c.text(t);
        let mut node = match t.tok {
            Tok::Int | Tok::Float | Tok::Str | Tok::Char => self.leaf(),
            Tok::Keyword => match text {
                "true" | "false" | "null" | "this" | "super" => self.leaf(),
                "new" => self.creation()?,
                "int" | "long" | "short" | "byte" | "char" | "float" | "double" | "boolean" | "void" => {
                    // `int.class` and friends.
                    let ty = self.ty()?;
                    let dot = self.expect(".")?;
                    let class = self.expect("class")?;
                    RawNode::inner("class_literal", vec![ty, dot, class])
                }
                _ => return Err(self.c.error("expected expression")),
            },
            Tok::Ident => {
                let name = self.leaf();
                if self.c.at("(") {
                    let args = self.argument_list()?;
                    RawNode::inner("method_invocation", vec![name, args])
                } else {
                    name
                }
            }
            Tok::Punct if text == "(" => {
                let open = self.leaf();
                let e = self.expression()?;
                let close = self.expect(")")?;
                RawNode::inner("parenthesized_expression", vec![open, e, close])
            }
            _ => return Err(self.c.error("expected expression")),
        };
        loop {
            if self.c.at(".") {
                let dot = self.leaf();
                if self.c.at("<") {
                    return Err(self.c.error("explicit generic invocations are not supported"));
                }
                if self.c.at("class") || self.c.at("this") {
                    let kw = self.leaf();
                    node = RawNode::inner("field_access", vec![node, dot, kw]);
                    continue;
                }
                let name = self.identifier()?;
                let callee = RawNode::inner("field_access", vec![node, dot, name]);
                node = if self.c.at("(") {
                    let args = self.argument_list()?;
                    RawNode::inner("method_invocation", vec![callee, args])
                } else {
                    callee
                };
            } else if self.c.at("[") {
                let open = self.leaf();
                let index = self.expression()?;
                let close = self.expect("]")?;
                node = RawNode::inner("array_access", vec![node, open, index, close]);
            } else if self.c.at("::") {
                let sep = self.leaf();
                let name = if self.c.at("new") { self.leaf() } else { self.identifier()? };
                node = RawNode::inner("method_reference", vec![node, sep, name]);
            } else {
                break;
            }
        }
        Ok(node)
    }

    fn creation(&mut self) -> PResult {
        let new_kw = self.leaf();
        let t = self.c.peek();
        let primitive = t.tok == Tok::Keyword
            && matches!(self.c.text(t), "int" | "long" | "short" | "byte" | "char" | "float" | "double" | "boolean");
        if primitive || self.array_creation_ahead() {
            let mut ch = vec![new_kw];
            let base = if primitive {
                self.ty()?
            } else {
                let mut node = self.leaf_as("type_identifier");
                while self.c.at(".") {
                    let dot = self.leaf();
                    let name = self.leaf_as("type_identifier");
                    node = RawNode::inner("scoped_type_identifier", vec![node, dot, name]);
                }
                if self.c.at("<") {
                    let args = self.type_arguments()?;
                    node = RawNode::inner("generic_type", vec![node, args]);
                }
                node
            };
            ch.push(base);
            while self.c.at("[") && !self.c.at_ahead(1, "]") {
                let open = self.leaf();
                let e = self.expression()?;
                let close = self.expect("]")?;
                ch.push(RawNode::inner("dimensions_expr", vec![open, e, close]));
            }
            if self.c.at("[") {
                ch.push(self.dimensions()?);
            }
            if self.c.at("{") {
                ch.push(self.array_initializer()?);
            }
            if ch.len() < 3 {
                return Err(self.c.error("array creation needs dimensions or an initializer"));
            }
            return Ok(RawNode::inner("array_creation_expression", ch));
        }
        // Class name becomes the callee expression.
        let mut callee = self.identifier()?;
        while self.c.at(".") && self.c.peek_at(1).tok == Tok::Ident {
            let dot = self.leaf();
            let name = self.identifier()?;
            callee = RawNode::inner("field_access", vec![callee, dot, name]);
        }
        let mut ch = vec![new_kw, callee];
        if self.c.at("<") {
            ch.push(self.type_arguments()?);
        }
        ch.push(self.argument_list()?);
        if self.c.at("{") {
            ch.push(self.class_body()?);
        }
        Ok(RawNode::inner("object_creation_expression", ch))
    }

    /// After `new`: `Name[.Name]*[<...>] [` means an array creation.
    fn array_creation_ahead(&self) -> bool {
        let mut i = self.c.pos;
        let mut depth = 0i32;
        while i < self.c.toks.len() {
            let t = self.c.toks[i];
            let text = self.c.text(t);
            match (t.tok, text) {
                (Tok::Ident, _) => {}
                (Tok::Punct, ".") | (Tok::Punct, ",") | (Tok::Punct, "?") => {}
                (Tok::Keyword, "extends") | (Tok::Keyword, "super") => {}
                (Tok::Punct, "<") => depth += 1,
                (Tok::Punct, ">") => depth -= 1,
                (Tok::Punct, "[") if depth == 0 => return true,
                _ => return false,
            }
            i += 1;
        }
        false
    }
}

fn integer_kind(text: &str) -> &'static str {
    let lower = text.as_bytes();
    if lower.len() > 1 && lower[0] == b'0' {
        match lower[1] {
            b'x' | b'X' => "hex_integer_literal",
            b'b' | b'B' => "binary_integer_literal",
            b'0'..=b'9' | b'_' => "octal_integer_literal",
            _ => "decimal_integer_literal",
        }
    } else {
        "decimal_integer_literal"
    }
}
