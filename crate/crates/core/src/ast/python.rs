//! Recursive-descent parser for a Python subset.
//!
//! Covers simple and compound statements (assignment forms, `if`/`elif`,
//! `while`, `for`, `def`, `class`, `try`, `with`, imports, decorators) and the
//! full expression precedence ladder including lambdas, comprehensions and
//! slices. Node kinds follow the tree-sitter Python grammar names.

use alloc::vec;
use alloc::vec::Vec;

use super::lexer::{lex_python, Cursor, Tok};
use super::{ParseError, RawNode};

type PResult = Result<RawNode, ParseError>;

pub(crate) fn parse(src: &str) -> PResult {
    let toks = lex_python(src)?;
    let mut p = Parser { c: Cursor::new(src, toks) };
    let mut stmts = Vec::new();
    while !p.c.is(Tok::Eof) {
        if p.c.is(Tok::Newline) {
            p.c.bump();
            continue;
        }
        if p.c.is(Tok::Indent) {
            return Err(p.c.error("unexpected indent"));
        }
        p.statement(&mut stmts)?;
    }
    if stmts.is_empty() {
        return Err(ParseError::EmptySource);
    }
    Ok(RawNode::inner("module", stmts))
}

struct Parser<'a> {
    c: Cursor<'a>,
}

const AUG_OPS: &[&str] = &["+=", "-=", "*=", "/=", "//=", "%=", "**=", "&=", "|=", "^=", ">>=", "<<=", "@="];
const COMPARE_OPS: &[&str] = &["<", ">", "==", ">=", "<=", "!=", "in", "not", "is"];

impl<'a> Parser<'a> {
    fn leaf(&mut self) -> RawNode {
        let t = self.c.bump();
        let text = self.c.text(t);
        let kind = match t.tok {
            Tok::Ident => "identifier",
            Tok::Int => "integer",
            Tok::Float => "float",
            Tok::Str => "string",
            Tok::Keyword => match text {
                "True" => "true",
                "False" => "false",
                "None" => "none",
                other => other,
            },
            _ => text,
        };
        RawNode::leaf(kind, t.span, text)
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

    fn end_simple(&mut self) -> Result<(), ParseError> {
        if self.c.is(Tok::Newline) {
            self.c.bump();
            Ok(())
        } else if self.c.is(Tok::Eof) || self.c.is(Tok::Dedent) {
            Ok(())
        } else {
            Err(self.c.error("expected end of statement"))
        }
    }

    fn statement(&mut self, out: &mut Vec<RawNode>) -> Result<(), ParseError> {
        let t = self.c.peek();
        if t.tok == Tok::Keyword {
            match self.c.text(t) {
                "if" => return self.if_statement().map(|n| out.push(n)),
                "while" => return self.while_statement().map(|n| out.push(n)),
                "for" => return self.for_statement().map(|n| out.push(n)),
                "def" => return self.function_definition().map(|n| out.push(n)),
                "class" => return self.class_definition().map(|n| out.push(n)),
                "try" => return self.try_statement().map(|n| out.push(n)),
                "with" => return self.with_statement().map(|n| out.push(n)),
                _ => {}
            }
        }
        if self.c.at("@") {
            return self.decorated().map(|n| out.push(n));
        }
        // simple_stmt (';' simple_stmt)* NEWLINE
        loop {
            out.push(self.simple_statement()?);
            if self.c.at(";") {
                out.push(self.leaf());
                if self.c.is(Tok::Newline) || self.c.is(Tok::Eof) {
                    break;
                }
                continue;
            }
            break;
        }
        self.end_simple()
    }

    fn simple_statement(&mut self) -> PResult {
        let t = self.c.peek();
        if t.tok == Tok::Keyword {
            match self.c.text(t) {
                "pass" => return Ok(RawNode::inner("pass_statement", vec![self.leaf()])),
                "break" => return Ok(RawNode::inner("break_statement", vec![self.leaf()])),
                "continue" => return Ok(RawNode::inner("continue_statement", vec![self.leaf()])),
                "return" => {
                    let mut ch = vec![self.leaf()];
                    if !self.at_statement_end() {
                        ch.push(self.expression_list()?);
                    }
                    return Ok(RawNode::inner("return_statement", ch));
                }
                "raise" => {
                    let mut ch = vec![self.leaf()];
                    if !self.at_statement_end() {
                        ch.push(self.expression()?);
                        if self.c.at("from") {
                            ch.push(self.leaf());
                            ch.push(self.expression()?);
                        }
                    }
                    return Ok(RawNode::inner("raise_statement", ch));
                }
                "import" => return self.import_statement(),
                "from" => return self.import_from_statement(),
                "global" | "nonlocal" => {
                    let kind = if self.c.at("global") { "global_statement" } else { "nonlocal_statement" };
                    let mut ch = vec![self.leaf(), self.identifier()?];
                    while self.c.at(",") {
                        ch.push(self.leaf());
                        ch.push(self.identifier()?);
                    }
                    return Ok(RawNode::inner(kind, ch));
                }
                "del" => {
                    let ch = vec![self.leaf(), self.expression_list()?];
                    return Ok(RawNode::inner("delete_statement", ch));
                }
                "assert" => {
                    let mut ch = vec![self.leaf(), self.expression()?];
                    if self.c.at(",") {
                        ch.push(self.leaf());
                        ch.push(self.expression()?);
                    }
                    return Ok(RawNode::inner("assert_statement", ch));
                }
                _ => {}
            }
        }
        let first = self.expression_list()?;
        if self.c.at("=") {
            let node = self.assignment_rest(first)?;
            return Ok(RawNode::inner("expression_statement", vec![node]));
        }
        if AUG_OPS.iter().any(|op| self.c.at(op)) {
            let op = self.leaf();
            let rhs = self.expression_list()?;
            let target = as_target(first);
            let node = RawNode::inner("augmented_assignment", vec![target, op, rhs]);
            return Ok(RawNode::inner("expression_statement", vec![node]));
        }
        if self.c.at(":") {
            // Annotated assignment `x: int = 5`.
            let colon = self.leaf();
            let ty = self.expression()?;
            let mut ch = vec![as_target(first), colon, RawNode::inner("type", vec![ty])];
            if self.c.at("=") {
                ch.push(self.leaf());
                ch.push(self.expression_list()?);
            }
            return Ok(RawNode::inner("expression_statement", vec![RawNode::inner("assignment", ch)]));
        }
        Ok(RawNode::inner("expression_statement", vec![first]))
    }

    /// `lhs = rhs`, right-nested for chains `a = b = 1`.
    fn assignment_rest(&mut self, lhs: RawNode) -> PResult {
        let eq = self.expect("=")?;
        let rhs = self.expression_list()?;
        let rhs = if self.c.at("=") { self.assignment_rest(rhs)? } else { rhs };
        Ok(RawNode::inner("assignment", vec![as_target(lhs), eq, rhs]))
    }

    fn at_statement_end(&self) -> bool {
        self.c.is(Tok::Newline) || self.c.is(Tok::Eof) || self.c.is(Tok::Dedent) || self.c.at(";")
    }

    fn dotted_name(&mut self) -> PResult {
        let mut ch = vec![self.identifier()?];
        while self.c.at(".") {
            ch.push(self.leaf());
            ch.push(self.identifier()?);
        }
        Ok(RawNode::inner("dotted_name", ch))
    }

    fn import_statement(&mut self) -> PResult {
        let mut ch = vec![self.leaf()];
        loop {
            let name = self.dotted_name()?;
            if self.c.at("as") {
                let as_kw = self.leaf();
                let alias = self.identifier()?;
                ch.push(RawNode::inner("aliased_import", vec![name, as_kw, alias]));
            } else {
                ch.push(name);
            }
            if self.c.at(",") {
                ch.push(self.leaf());
            } else {
                break;
            }
        }
        Ok(RawNode::inner("import_statement", ch))
    }

    fn import_from_statement(&mut self) -> PResult {
        let mut ch = vec![self.leaf()];
        if self.c.at(".") {
            let mut dots = Vec::new();
            while self.c.at(".") {
                dots.push(self.leaf());
            }
            if self.c.is(Tok::Ident) {
                dots.push(self.dotted_name()?);
            }
            ch.push(RawNode::inner("relative_import", dots));
        } else {
            ch.push(self.dotted_name()?);
        }
        ch.push(self.expect("import")?);
        if self.c.at("*") {
            ch.push(RawNode::inner("wildcard_import", vec![self.leaf()]));
            return Ok(RawNode::inner("import_from_statement", ch));
        }
        let paren = self.c.at("(");
        if paren {
            ch.push(self.leaf());
        }
        loop {
            let name = self.dotted_name()?;
            if self.c.at("as") {
                let as_kw = self.leaf();
                let alias = self.identifier()?;
                ch.push(RawNode::inner("aliased_import", vec![name, as_kw, alias]));
            } else {
                ch.push(name);
            }
            if self.c.at(",") {
                ch.push(self.leaf());
                if paren && self.c.at(")") {
                    break;
                }
            } else {
                break;
            }
        }
        if paren {
            ch.push(self.expect(")")?);
        }
        Ok(RawNode::inner("import_from_statement", ch))
    }

    /// `:` followed by an indented suite or simple statements on the same line.
    /// Returns the colon leaf and the block.
    fn suite(&mut self) -> Result<(RawNode, RawNode), ParseError> {
        let colon = self.expect(":")?;
        let mut stmts = Vec::new();
        if self.c.is(Tok::Newline) {
            self.c.bump();
            if !self.c.is(Tok::Indent) {
                return Err(self.c.error("expected an indented block"));
            }
            self.c.bump();
            while !self.c.is(Tok::Dedent) && !self.c.is(Tok::Eof) {
                if self.c.is(Tok::Newline) {
                    self.c.bump();
                    continue;
                }
                self.statement(&mut stmts)?;
            }
            if self.c.is(Tok::Dedent) {
                self.c.bump();
            }
        } else {
            loop {
                stmts.push(self.simple_statement()?);
                if self.c.at(";") {
                    stmts.push(self.leaf());
                    if self.c.is(Tok::Newline) || self.c.is(Tok::Eof) {
                        break;
                    }
                    continue;
                }
                break;
            }
            self.end_simple()?;
        }
        if stmts.is_empty() {
            return Err(self.c.error("empty block"));
        }
        Ok((colon, RawNode::inner("block", stmts)))
    }

    fn else_clause(&mut self) -> PResult {
        let kw = self.leaf();
        let (colon, block) = self.suite()?;
        Ok(RawNode::inner("else_clause", vec![kw, colon, block]))
    }

    fn if_statement(&mut self) -> PResult {
        let mut ch = vec![self.leaf(), self.named_expression()?];
        let (colon, block) = self.suite()?;
        ch.push(colon);
        ch.push(block);
        while self.c.at("elif") {
            let kw = self.leaf();
            let cond = self.named_expression()?;
            let (colon, block) = self.suite()?;
            ch.push(RawNode::inner("elif_clause", vec![kw, cond, colon, block]));
        }
        if self.c.at("else") {
            ch.push(self.else_clause()?);
        }
        Ok(RawNode::inner("if_statement", ch))
    }

    fn while_statement(&mut self) -> PResult {
        let mut ch = vec![self.leaf(), self.named_expression()?];
        let (colon, block) = self.suite()?;
        ch.push(colon);
        ch.push(block);
        if self.c.at("else") {
            ch.push(self.else_clause()?);
        }
        Ok(RawNode::inner("while_statement", ch))
    }

    fn for_statement(&mut self) -> PResult {
        let mut ch = vec![self.leaf()];
        ch.push(as_target(self.target_list()?));
        ch.push(self.expect("in")?);
        ch.push(self.expression_list()?);
        let (colon, block) = self.suite()?;
        ch.push(colon);
        ch.push(block);
        if self.c.at("else") {
            ch.push(self.else_clause()?);
        }
        Ok(RawNode::inner("for_statement", ch))
    }

    /// Loop targets stop before `in`, so they are parsed at bit-or precedence.
    fn target_list(&mut self) -> PResult {
        let first = self.bitor()?;
        if !self.c.at(",") {
            return Ok(first);
        }
        let mut ch = vec![first];
        while self.c.at(",") {
            ch.push(self.leaf());
            if self.c.at("in") || self.c.at("=") {
                break;
            }
            ch.push(self.bitor()?);
        }
        Ok(RawNode::inner("expression_list", ch))
    }

    fn function_definition(&mut self) -> PResult {
        let mut ch = vec![self.leaf(), self.identifier()?];
        ch.push(self.parameters()?);
        if self.c.at("->") {
            ch.push(self.leaf());
            let ty = self.expression()?;
            ch.push(RawNode::inner("type", vec![ty]));
        }
        let (colon, block) = self.suite()?;
        ch.push(colon);
        ch.push(block);
        Ok(RawNode::inner("function_definition", ch))
    }

    fn parameters(&mut self) -> PResult {
        let mut ch = vec![self.expect("(")?];
        while !self.c.at(")") {
            ch.push(self.parameter(")")?);
            if self.c.at(",") {
                ch.push(self.leaf());
            } else {
                break;
            }
        }
        ch.push(self.expect(")")?);
        Ok(RawNode::inner("parameters", ch))
    }

    fn parameter(&mut self, closer: &str) -> PResult {
        if self.c.at("*") || self.c.at("**") {
            let star = self.leaf();
            if self.c.at(",") || self.c.at(closer) {
                return Ok(RawNode::inner("keyword_separator", vec![star]));
            }
            let kind = if star.token.as_deref() == Some("**") {
                "dictionary_splat_pattern"
            } else {
                "list_splat_pattern"
            };
            let name = self.identifier()?;
            return Ok(RawNode::inner(kind, vec![star, name]));
        }
        if self.c.at("/") {
            return Ok(RawNode::inner("positional_separator", vec![self.leaf()]));
        }
        let name = self.identifier()?;
        if closer == ")" && self.c.at(":") {
            let colon = self.leaf();
            let ty = self.expression()?;
            let mut ch = vec![name, colon, RawNode::inner("type", vec![ty])];
            if self.c.at("=") {
                ch.push(self.leaf());
                ch.push(self.expression()?);
                return Ok(RawNode::inner("typed_default_parameter", ch));
            }
            return Ok(RawNode::inner("typed_parameter", ch));
        }
        if self.c.at("=") {
            let eq = self.leaf();
            let value = self.expression()?;
            return Ok(RawNode::inner("default_parameter", vec![name, eq, value]));
        }
        Ok(name)
    }

    fn class_definition(&mut self) -> PResult {
        let mut ch = vec![self.leaf(), self.identifier()?];
        if self.c.at("(") {
            ch.push(self.argument_list()?);
        }
        let (colon, block) = self.suite()?;
        ch.push(colon);
        ch.push(block);
        Ok(RawNode::inner("class_definition", ch))
    }

    fn try_statement(&mut self) -> PResult {
        let mut ch = vec![self.leaf()];
        let (colon, block) = self.suite()?;
        ch.push(colon);
        ch.push(block);
        let mut handlers = 0;
        while self.c.at("except") {
            let mut ex = vec![self.leaf()];
            if !self.c.at(":") {
                ex.push(self.expression()?);
                if self.c.at("as") {
                    ex.push(self.leaf());
                    ex.push(self.identifier()?);
                } else if self.c.at(",") {
                    return Err(self.c.error("legacy except syntax"));
                }
            }
            let (colon, block) = self.suite()?;
            ex.push(colon);
            ex.push(block);
            ch.push(RawNode::inner("except_clause", ex));
            handlers += 1;
        }
        if self.c.at("else") {
            ch.push(self.else_clause()?);
        }
        let mut has_finally = false;
        if self.c.at("finally") {
            let kw = self.leaf();
            let (colon, block) = self.suite()?;
            ch.push(RawNode::inner("finally_clause", vec![kw, colon, block]));
            has_finally = true;
        }
        if handlers == 0 && !has_finally {
            return Err(self.c.error("try without except or finally"));
        }
        Ok(RawNode::inner("try_statement", ch))
    }

    fn with_statement(&mut self) -> PResult {
        let mut ch = vec![self.leaf()];
        let mut items = Vec::new();
        loop {
            let mut item = vec![self.expression()?];
            if self.c.at("as") {
                item.push(self.leaf());
                item.push(as_target(self.bitor()?));
            }
            items.push(RawNode::inner("with_item", item));
            if self.c.at(",") {
                items.push(self.leaf());
            } else {
                break;
            }
        }
        ch.push(RawNode::inner("with_clause", items));
        let (colon, block) = self.suite()?;
        ch.push(colon);
        ch.push(block);
        Ok(RawNode::inner("with_statement", ch))
    }

    fn decorated(&mut self) -> PResult {
        let mut ch = Vec::new();
        while self.c.at("@") {
            let at = self.leaf();
            let expr = self.expression()?;
            ch.push(RawNode::inner("decorator", vec![at, expr]));
            if !self.c.is(Tok::Newline) {
                return Err(self.c.error("expected newline after decorator"));
            }
            self.c.bump();
        }
        if self.c.at("def") {
            ch.push(self.function_definition()?);
        } else if self.c.at("class") {
            ch.push(self.class_definition()?);
        } else {
            return Err(self.c.error("expected def or class after decorator"));
        }
        Ok(RawNode::inner("decorated_definition", ch))
    }

    // ---- expressions ----

    /// Comma-separated expressions; a single element without a trailing
    /// comma is returned bare.
    fn expression_list(&mut self) -> PResult {
        let first = self.star_or_expression()?;
        if !self.c.at(",") {
            return Ok(first);
        }
        let mut ch = vec![first];
        while self.c.at(",") {
            ch.push(self.leaf());
            if self.at_statement_end() || self.c.at("=") || self.c.at(")") || self.c.at(":") || AUG_OPS.iter().any(|op| self.c.at(op)) {
                break;
            }
            ch.push(self.star_or_expression()?);
        }
        Ok(RawNode::inner("expression_list", ch))
    }

    fn star_or_expression(&mut self) -> PResult {
        if self.c.at("*") {
            let star = self.leaf();
            let e = self.bitor()?;
            return Ok(RawNode::inner("list_splat", vec![star, e]));
        }
        self.expression()
    }

    fn named_expression(&mut self) -> PResult {
        let e = self.expression()?;
        if self.c.at(":=") {
            let op = self.leaf();
            let value = self.expression()?;
            return Ok(RawNode::inner("named_expression", vec![e, op, value]));
        }
        Ok(e)
    }

    fn expression(&mut self) -> PResult {
        if self.c.at("lambda") {
            return self.lambda();
        }
        let body = self.disjunction()?;
        if self.c.at("if") {
            let if_kw = self.leaf();
            let cond = self.disjunction()?;
            let else_kw = self.expect("else")?;
            let alt = self.expression()?;
            return Ok(RawNode::inner("conditional_expression", vec![body, if_kw, cond, else_kw, alt]));
        }
        Ok(body)
    }

    fn lambda(&mut self) -> PResult {
        let mut ch = vec![self.leaf()];
        if !self.c.at(":") {
            let mut params = Vec::new();
            loop {
                params.push(self.parameter(":")?);
                if self.c.at(",") {
                    params.push(self.leaf());
                } else {
                    break;
                }
            }
            ch.push(RawNode::inner("lambda_parameters", params));
        }
        ch.push(self.expect(":")?);
        ch.push(self.expression()?);
        Ok(RawNode::inner("lambda", ch))
    }

    fn disjunction(&mut self) -> PResult {
        let mut left = self.conjunction()?;
        while self.c.at("or") {
            let op = self.leaf();
            let right = self.conjunction()?;
            left = RawNode::inner("boolean_operator", vec![left, op, right]);
        }
        Ok(left)
    }

    fn conjunction(&mut self) -> PResult {
        let mut left = self.inversion()?;
        while self.c.at("and") {
            let op = self.leaf();
            let right = self.inversion()?;
            left = RawNode::inner("boolean_operator", vec![left, op, right]);
        }
        Ok(left)
    }

    fn inversion(&mut self) -> PResult {
        if self.c.at("not") {
            let op = self.leaf();
            let operand = self.inversion()?;
            return Ok(RawNode::inner("not_operator", vec![op, operand]));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult {
        let mut ch = vec![self.bitor()?];
        loop {
            let text = self.c.peek_text();
            let is_op = matches!(self.c.peek().tok, Tok::Punct | Tok::Keyword) && COMPARE_OPS.contains(&text);
            if !is_op {
                break;
            }
            if text == "not" {
                if !self.c.at_ahead(1, "in") {
                    break;
                }
                let not_t = self.c.bump();
                let in_t = self.c.bump();
                let span = super::Span::new(not_t.span.start, in_t.span.end);
                ch.push(RawNode::leaf("not in", span, "not in"));
            } else if text == "is" && self.c.at_ahead(1, "not") {
                let is_t = self.c.bump();
                let not_t = self.c.bump();
                let span = super::Span::new(is_t.span.start, not_t.span.end);
                ch.push(RawNode::leaf("is not", span, "is not"));
            } else {
                ch.push(self.leaf());
            }
            ch.push(self.bitor()?);
        }
        if ch.len() == 1 {
            return Ok(first_of(ch));
        }
        Ok(RawNode::inner("comparison_operator", ch))
    }

    fn binary_level(&mut self, ops: &[&str], next: fn(&mut Self) -> PResult) -> PResult {
        let mut left = next(self)?;
        while self.c.is(Tok::Punct) && ops.contains(&self.c.peek_text()) {
            let op = self.leaf();
            let right = next(self)?;
            left = RawNode::inner("binary_operator", vec![left, op, right]);
        }
        Ok(left)
    }

    fn bitor(&mut self) -> PResult {
        self.binary_level(&["|"], Self::bitxor)
    }

    fn bitxor(&mut self) -> PResult {
        self.binary_level(&["^"], Self::bitand)
    }

    fn bitand(&mut self) -> PResult {
        self.binary_level(&["&"], Self::shift)
    }

    fn shift(&mut self) -> PResult {
        self.binary_level(&["<<", ">>"], Self::sum)
    }

    fn sum(&mut self) -> PResult {
        self.binary_level(&["+", "-"], Self::term)
    }

    fn term(&mut self) -> PResult {
        self.binary_level(&["*", "/", "//", "%", "@"], Self::factor)
    }

    fn factor(&mut self) -> PResult {
        if self.c.at("+") || self.c.at("-") || self.c.at("~") {
            let op = self.leaf();
            let operand = self.factor()?;
            return Ok(RawNode::inner("unary_operator", vec![op, operand]));
        }
        self.power()
    }

    fn power(&mut self) -> PResult {
        let base = self.primary()?;
        if self.c.at("**") {
            let op = self.leaf();
            let exp = self.factor()?;
            return Ok(RawNode::inner("binary_operator", vec![base, op, exp]));
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult {
        let mut node = self.atom()?;
        loop {
            if self.c.at(".") {
                let dot = self.leaf();
                let name = self.identifier()?;
                node = RawNode::inner("attribute", vec![node, dot, name]);
            } else if self.c.at("(") {
                let args = self.argument_list()?;
                node = RawNode::inner("call", vec![node, args]);
            } else if self.c.at("[") {
                let mut ch = vec![node, self.leaf()];
                loop {
                    ch.push(self.subscript_item()?);
                    if self.c.at(",") {
                        ch.push(self.leaf());
                        if self.c.at("]") {
                            break;
                        }
                    } else {
                        break;
                    }
                }
                ch.push(self.expect("]")?);
                node = RawNode::inner("subscript", ch);
            } else {
                break;
            }
        }
        Ok(node)
    }

    fn subscript_item(&mut self) -> PResult {
        let mut ch = Vec::new();
        if !self.c.at(":") {
            let e = self.expression()?;
            if !self.c.at(":") {
                return Ok(e);
            }
            ch.push(e);
        }
        // slice: [lower] ':' [upper] [':' [step]]
        ch.push(self.leaf());
        if !self.c.at(":") && !self.c.at("]") && !self.c.at(",") {
            ch.push(self.expression()?);
        }
        if self.c.at(":") {
            ch.push(self.leaf());
            if !self.c.at("]") && !self.c.at(",") {
                ch.push(self.expression()?);
            }
        }
        Ok(RawNode::inner("slice", ch))
    }

    fn argument_list(&mut self) -> PResult {
        let mut ch = vec![self.expect("(")?];
        while !self.c.at(")") {
            let arg = if self.c.at("*") || self.c.at("**") {
                let kind = if self.c.at("*") { "list_splat" } else { "dictionary_splat" };
                let star = self.leaf();
                let e = self.expression()?;
                RawNode::inner(kind, vec![star, e])
            } else if self.c.is(Tok::Ident) && self.c.at_ahead(1, "=") {
                let name = self.leaf();
                let eq = self.leaf();
                let value = self.expression()?;
                RawNode::inner("keyword_argument", vec![name, eq, value])
            } else {
                let e = self.named_expression()?;
                if self.c.at("for") {
                    let mut g = vec![e];
                    self.comprehension_clauses(&mut g)?;
                    RawNode::inner("generator_expression", g)
                } else {
                    e
                }
            };
            ch.push(arg);
            if self.c.at(",") {
                ch.push(self.leaf());
            } else {
                break;
            }
        }
        ch.push(self.expect(")")?);
        Ok(RawNode::inner("argument_list", ch))
    }

    fn comprehension_clauses(&mut self, out: &mut Vec<RawNode>) -> Result<(), ParseError> {
        while self.c.at("for") {
            let kw = self.leaf();
            let target = as_target(self.target_list()?);
            let in_kw = self.expect("in")?;
            let iter = self.disjunction()?;
            out.push(RawNode::inner("for_in_clause", vec![kw, target, in_kw, iter]));
            while self.c.at("if") {
                let kw = self.leaf();
                let cond = self.disjunction()?;
                out.push(RawNode::inner("if_clause", vec![kw, cond]));
            }
        }
        Ok(())
    }

    fn atom(&mut self) -> PResult {
        let t = self.c.peek();
        match t.tok {
            Tok::Ident | Tok::Int | Tok::Float => Ok(self.leaf()),
            Tok::Str => {
                let first = self.leaf();
                if !self.c.is(Tok::Str) {
                    return Ok(first);
                }
                let mut ch = vec![first];
                while self.c.is(Tok::Str) {
                    ch.push(self.leaf());
                }
                Ok(RawNode::inner("concatenated_string", ch))
            }
            Tok::Keyword if matches!(self.c.text(t), "True" | "False" | "None") => Ok(self.leaf()),
            Tok::Punct => match self.c.text(t) {
                "(" => self.paren_atom(),
                "[" => self.list_atom(),
                "{" => self.brace_atom(),
                "..." => Ok(RawNode::inner("ellipsis", vec![self.leaf()])),
                _ => Err(self.c.error("expected expression")),
            },
            _ => Err(self.c.error("expected expression")),
        }
    }

    fn paren_atom(&mut self) -> PResult {
        let open = self.leaf();
        if self.c.at(")") {
            let close = self.leaf();
            return Ok(RawNode::inner("tuple", vec![open, close]));
        }
        if self.c.at("yield") {
            return Err(self.c.error("yield expressions are not supported"));
        }
        let first = self.star_or_named()?;
        if self.c.at("for") {
            let mut ch = vec![open, first];
            self.comprehension_clauses(&mut ch)?;
            ch.push(self.expect(")")?);
            return Ok(RawNode::inner("generator_expression", ch));
        }
        if self.c.at(")") {
            let close = self.leaf();
            return Ok(RawNode::inner("parenthesized_expression", vec![open, first, close]));
        }
        let mut ch = vec![open, first];
        while self.c.at(",") {
            ch.push(self.leaf());
            if self.c.at(")") {
                break;
            }
            ch.push(self.star_or_named()?);
        }
        ch.push(self.expect(")")?);
        Ok(RawNode::inner("tuple", ch))
    }

    fn star_or_named(&mut self) -> PResult {
        if self.c.at("*") {
            return self.star_or_expression();
        }
        self.named_expression()
    }

    fn list_atom(&mut self) -> PResult {
        let open = self.leaf();
        if self.c.at("]") {
            let close = self.leaf();
            return Ok(RawNode::inner("list", vec![open, close]));
        }
        let first = self.star_or_named()?;
        if self.c.at("for") {
            let mut ch = vec![open, first];
            self.comprehension_clauses(&mut ch)?;
            ch.push(self.expect("]")?);
            return Ok(RawNode::inner("list_comprehension", ch));
        }
        let mut ch = vec![open, first];
        while self.c.at(",") {
            ch.push(self.leaf());
            if self.c.at("]") {
                break;
            }
            ch.push(self.star_or_named()?);
        }
        ch.push(self.expect("]")?);
        Ok(RawNode::inner("list", ch))
    }

    fn brace_atom(&mut self) -> PResult {
        let open = self.leaf();
        if self.c.at("}") {
            let close = self.leaf();
            return Ok(RawNode::inner("dictionary", vec![open, close]));
        }
        let first = self.expression()?;
        if self.c.at(":") {
            let colon = self.leaf();
            let value = self.expression()?;
            let pair = RawNode::inner("pair", vec![first, colon, value]);
            if self.c.at("for") {
                let mut ch = vec![open, pair];
                self.comprehension_clauses(&mut ch)?;
                ch.push(self.expect("}")?);
                return Ok(RawNode::inner("dictionary_comprehension", ch));
            }
            let mut ch = vec![open, pair];
            while self.c.at(",") {
                ch.push(self.leaf());
                if self.c.at("}") {
                    break;
                }
                let k = self.expression()?;
                let colon = self.expect(":")?;
                let v = self.expression()?;
                ch.push(RawNode::inner("pair", vec![k, colon, v]));
            }
            ch.push(self.expect("}")?);
            return Ok(RawNode::inner("dictionary", ch));
        }
        if self.c.at("for") {
            let mut ch = vec![open, first];
            self.comprehension_clauses(&mut ch)?;
            ch.push(self.expect("}")?);
            return Ok(RawNode::inner("set_comprehension", ch));
        }
        let mut ch = vec![open, first];
        while self.c.at(",") {
            ch.push(self.leaf());
            if self.c.at("}") {
                break;
            }
            ch.push(self.expression()?);
        }
        ch.push(self.expect("}")?);
        Ok(RawNode::inner("set", ch))
    }
}

/// Tuple-shaped assignment targets are `pattern_list` in the canonical kinds.
fn as_target(node: RawNode) -> RawNode {
    if node.kind == "expression_list" {
        RawNode { kind: "pattern_list".into(), ..node }
    } else {
        node
    }
}

fn first_of(mut nodes: Vec<RawNode>) -> RawNode {
    nodes.swap_remove(0)
}
