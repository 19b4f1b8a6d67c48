use alloc::string::String;
use alloc::vec::Vec;

use super::{ParseError, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident,
    Keyword,
    Int,
    Float,
    Str,
    Char,
    /// Punctuation and operators.
    Punct,
    Newline,
    Indent,
    Dedent,
    Eof,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

impl Token {
    fn new(tok: Tok, start: usize, end: usize) -> Self {
        Token {
            tok,
            span: Span::new(start, end),
        }
    }
}

/// Token cursor shared by both parsers.
pub(crate) struct Cursor<'a> {
    pub src: &'a str,
    pub toks: Vec<Token>,
    pub pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(src: &'a str, toks: Vec<Token>) -> Self {
        Cursor { src, toks, pos: 0 }
    }

    pub fn peek(&self) -> Token {
        self.toks[self.pos.min(self.toks.len() - 1)]
    }

    pub fn peek_at(&self, ahead: usize) -> Token {
        self.toks[(self.pos + ahead).min(self.toks.len() - 1)]
    }

    pub fn text(&self, t: Token) -> &'a str {
        &self.src[t.span.start..t.span.end]
    }

    pub fn peek_text(&self) -> &'a str {
        self.text(self.peek())
    }

    pub fn at(&self, s: &str) -> bool {
        let t = self.peek();
        matches!(t.tok, Tok::Punct | Tok::Keyword) && self.text(t) == s
    }

    pub fn at_ahead(&self, ahead: usize, s: &str) -> bool {
        let t = self.peek_at(ahead);
        matches!(t.tok, Tok::Punct | Tok::Keyword) && self.text(t) == s
    }

    pub fn is(&self, tok: Tok) -> bool {
        self.peek().tok == tok
    }

    pub fn bump(&mut self) -> Token {
        let t = self.peek();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::at(self.peek().span.start, message)
    }
}

fn is_ident_start(c: char) -> bool {
    c == '_' || c.is_alphabetic()
}

fn is_ident_continue(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}

fn longest_op(rest: &str, ops: &[&str]) -> Option<usize> {
    ops.iter().filter(|op| rest.starts_with(**op)).map(|op| op.len()).max()
}

const PY_KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "break", "class", "continue", "def", "del", "elif",
    "else", "except", "finally", "for", "from", "global", "if", "import", "in", "is", "lambda",
    "nonlocal", "not", "or", "pass", "raise", "return", "try", "while", "with", "yield",
];

const PY_OPS: &[&str] = &[
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "<<", ">>", "<=", ">=", "==", "!=", "+=",
    "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@=", "+", "-", "*", "/", "%", "@", "&", "|", "^", "~",
    "<", ">", "(", ")", "[", "]", "{", "}", ",", ":", ".", ";", "=",
];

/// Number literal starting at `i`; returns (end, is_float).
fn scan_number(bytes: &[u8], mut i: usize, java: bool) -> (usize, bool) {
    let n = bytes.len();
    let mut float = false;
    if bytes[i] == b'0' && i + 1 < n && matches!(bytes[i + 1], b'x' | b'X' | b'b' | b'B' | b'o' | b'O') {
        i += 2;
        while i < n && (bytes[i].is_ascii_hexdigit() || bytes[i] == b'_') {
            i += 1;
        }
    } else {
        while i < n && (bytes[i].is_ascii_digit() || bytes[i] == b'_') {
            i += 1;
        }
        if i < n && bytes[i] == b'.' && !(i + 1 < n && bytes[i + 1] == b'.') {
            // `1.` and `1.5` are floats; `1..` never occurs in either language.
            let next_is_ident = i + 1 < n && (bytes[i + 1].is_ascii_alphabetic() || bytes[i + 1] == b'_');
            if !next_is_ident || matches!(bytes[i + 1], b'e' | b'E' | b'f' | b'F' | b'd' | b'D') && java {
                float = true;
                i += 1;
                while i < n && (bytes[i].is_ascii_digit() || bytes[i] == b'_') {
                    i += 1;
                }
            }
        }
        if i < n && matches!(bytes[i], b'e' | b'E') {
            let mut j = i + 1;
            if j < n && matches!(bytes[j], b'+' | b'-') {
                j += 1;
            }
            if j < n && bytes[j].is_ascii_digit() {
                float = true;
                i = j;
                while i < n && (bytes[i].is_ascii_digit() || bytes[i] == b'_') {
                    i += 1;
                }
            }
        }
    }
    if i < n {
        if java {
            match bytes[i] {
                b'l' | b'L' => i += 1,
                b'f' | b'F' | b'd' | b'D' => {
                    float = true;
                    i += 1;
                }
                _ => {}
            }
        } else if matches!(bytes[i], b'j' | b'J') {
            float = true;
            i += 1;
        }
    }
    (i, float)
}

/// Quoted literal with backslash escapes; `quote` may be one or three bytes.
fn scan_quoted(src: &str, start: usize, body: usize, quote: &str, single_line: bool) -> Result<usize, ParseError> {
    let bytes = src.as_bytes();
    let mut i = body;
    while i < bytes.len() {
        if src[i..].starts_with(quote) {
            return Ok(i + quote.len());
        }
        match bytes[i] {
            b'\\' => i += 2,
            b'\n' if single_line => return Err(ParseError::at(start, "unterminated string literal")),
            _ => i += 1,
        }
    }
    Err(ParseError::at(start, "unterminated string literal"))
}

fn char_at(src: &str, i: usize) -> char {
    src[i..].chars().next().unwrap_or('\0')
}

pub(crate) fn lex_python(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let n = bytes.len();
    let mut toks: Vec<Token> = Vec::new();
    let mut indents: Vec<usize> = alloc::vec![0];
    let mut depth = 0usize;
    let mut i = 0usize;
    let mut at_line_start = true;

    while i < n {
        if at_line_start && depth == 0 {
            // Measure indentation; skip blank and comment-only lines.
            let line_start = i;
            let mut col = 0usize;
            while i < n && matches!(bytes[i], b' ' | b'\t' | b'\x0c') {
                col = if bytes[i] == b'\t' { (col / 8 + 1) * 8 } else { col + 1 };
                i += 1;
            }
            if i >= n {
                break;
            }
            match bytes[i] {
                b'\n' | b'\r' => {
                    i += 1;
                    continue;
                }
                b'#' => {
                    while i < n && bytes[i] != b'\n' {
                        i += 1;
                    }
                    continue;
                }
                b'\\' if i + 1 < n && matches!(bytes[i + 1], b'\n' | b'\r') => {
                    return Err(ParseError::at(i, "line continuation at start of line"));
                }
                _ => {}
            }
            at_line_start = false;
            let current = *indents.last().unwrap_or(&0);
            if col > current {
                indents.push(col);
                toks.push(Token::new(Tok::Indent, i, i));
            } else if col < current {
                while col < *indents.last().unwrap_or(&0) {
                    indents.pop();
                    toks.push(Token::new(Tok::Dedent, i, i));
                }
                if col != *indents.last().unwrap_or(&0) {
                    return Err(ParseError::at(line_start, "inconsistent dedent"));
                }
            }
            continue;
        }

        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\x0c' | b'\r' => i += 1,
            b'\n' => {
                if depth == 0 {
                    if !matches!(toks.last().map(|t| t.tok), None | Some(Tok::Newline)) {
                        toks.push(Token::new(Tok::Newline, i, i));
                    }
                    at_line_start = true;
                }
                i += 1;
            }
            b'#' => {
                while i < n && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'\\' => {
                let mut j = i + 1;
                if j < n && bytes[j] == b'\r' {
                    j += 1;
                }
                if j < n && bytes[j] == b'\n' {
                    i = j + 1;
                } else {
                    return Err(ParseError::at(i, "unexpected backslash"));
                }
            }
            b'0'..=b'9' => {
                let (end, float) = scan_number(bytes, i, false);
                toks.push(Token::new(if float { Tok::Float } else { Tok::Int }, i, end));
                i = end;
            }
            b'.' if i + 1 < n && bytes[i + 1].is_ascii_digit() => {
                let (end, _) = scan_number(bytes, i + 1, false);
                toks.push(Token::new(Tok::Float, i, end));
                i = end;
            }
            b'"' | b'\'' => {
                let end = python_string(src, i, i)?;
                toks.push(Token::new(Tok::Str, i, end));
                i = end;
            }
            _ => {
                let ch = char_at(src, i);
                if is_ident_start(ch) {
                    let mut j = i;
                    while j < n {
                        let cj = char_at(src, j);
                        if !is_ident_continue(cj) {
                            break;
                        }
                        j += cj.len_utf8();
                    }
                    let word = &src[i..j];
                    // String prefixes: r, b, u, f and their two-letter combinations.
                    if j < n
                        && matches!(bytes[j], b'"' | b'\'')
                        && word.len() <= 2
                        && word.chars().all(|c| matches!(c.to_ascii_lowercase(), 'r' | 'b' | 'u' | 'f'))
                    {
                        let end = python_string(src, i, j)?;
                        toks.push(Token::new(Tok::Str, i, end));
                        i = end;
                        continue;
                    }
                    let tok = if PY_KEYWORDS.contains(&word) { Tok::Keyword } else { Tok::Ident };
                    toks.push(Token::new(tok, i, j));
                    i = j;
                } else if let Some(len) = longest_op(&src[i..], PY_OPS) {
                    let op = &src[i..i + len];
                    match op {
                        "(" | "[" | "{" => depth += 1,
                        ")" | "]" | "}" => {
                            if depth == 0 {
                                return Err(ParseError::at(i, "unbalanced closing bracket"));
                            }
                            depth -= 1;
                        }
                        _ => {}
                    }
                    toks.push(Token::new(Tok::Punct, i, i + len));
                    i += len;
                } else {
                    return Err(ParseError::at(i, "unexpected character"));
                }
            }
        }
    }
    if depth != 0 {
        return Err(ParseError::at(n, "unclosed bracket at end of input"));
    }
    if !matches!(toks.last().map(|t| t.tok), None | Some(Tok::Newline)) {
        toks.push(Token::new(Tok::Newline, n, n));
    }
    while indents.len() > 1 {
        indents.pop();
        toks.push(Token::new(Tok::Dedent, n, n));
    }
    toks.push(Token::new(Tok::Eof, n, n));
    Ok(toks)
}

fn python_string(src: &str, start: usize, quote_at: usize) -> Result<usize, ParseError> {
    let q = &src[quote_at..quote_at + 1];
    let triple: String = std::iter::repeat_n(q, 3).collect();
    if src[quote_at..].starts_with(triple.as_str()) {
        scan_quoted(src, start, quote_at + 3, &triple, false)
    } else {
        scan_quoted(src, start, quote_at + 1, q, true)
    }
}

const JAVA_KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const", "continue",
    "default", "do", "double", "else", "enum", "extends", "final", "finally", "float", "for", "goto", "if",
    "implements", "import", "instanceof", "int", "interface", "long", "native", "new", "package",
    "private", "protected", "public", "return", "short", "static", "strictfp", "super", "switch",
    "synchronized", "this", "throw", "throws", "transient", "try", "void", "volatile", "while", "true",
    "false", "null",
];

// `>` is always lexed alone so that nested generics close; the expression
// parser re-joins adjacent `>` tokens into shift operators.
const JAVA_OPS: &[&str] = &[
    "<<=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=",
    "&=", "|=", "^=", "<<", "+", "-", "*", "/", "%", "&", "|", "^", "~", "!", "?", ":", "<", ">", "(", ")",
    "[", "]", "{", "}", ",", ".", ";", "=", "@",
];

pub(crate) fn lex_java(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let n = bytes.len();
    let mut toks = Vec::new();
    let mut i = 0usize;
    while i < n {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' | b'\x0c' => i += 1,
            b'/' if i + 1 < n && bytes[i + 1] == b'/' => {
                while i < n && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if i + 1 < n && bytes[i + 1] == b'*' => match src[i + 2..].find("*/") {
                Some(off) => i = i + 2 + off + 2,
                None => return Err(ParseError::at(i, "unterminated block comment")),
            },
            b'0'..=b'9' => {
                let (end, float) = scan_number(bytes, i, true);
                toks.push(Token::new(if float { Tok::Float } else { Tok::Int }, i, end));
                i = end;
            }
            b'.' if i + 1 < n && bytes[i + 1].is_ascii_digit() => {
                let (end, _) = scan_number(bytes, i + 1, true);
                toks.push(Token::new(Tok::Float, i, end));
                i = end;
            }
            b'"' => {
                let end = if src[i..].starts_with("\"\"\"") {
                    scan_quoted(src, i, i + 3, "\"\"\"", false)?
                } else {
                    scan_quoted(src, i, i + 1, "\"", true)?
                };
                toks.push(Token::new(Tok::Str, i, end));
                i = end;
            }
            b'\'' => {
                let end = scan_quoted(src, i, i + 1, "'", true)?;
                toks.push(Token::new(Tok::Char, i, end));
                i = end;
            }
            _ => {
                let ch = char_at(src, i);
                if is_ident_start(ch) || ch == '$' {
                    let mut j = i;
                    while j < n {
                        let cj = char_at(src, j);
                        if !(is_ident_continue(cj) || cj == '$') {
                            break;
                        }
                        j += cj.len_utf8();
                    }
                    let word = &src[i..j];
                    let tok = if JAVA_KEYWORDS.contains(&word) { Tok::Keyword } else { Tok::Ident };
                    toks.push(Token::new(tok, i, j));
                    i = j;
                } else if let Some(len) = longest_op(&src[i..], JAVA_OPS) {
                    toks.push(Token::new(Tok::Punct, i, i + len));
                    i += len;
                } else {
                    return Err(ParseError::at(i, "unexpected character"));
                }
            }
        }
    }
    toks.push(Token::new(Tok::Eof, n, n));
    Ok(toks)
}
