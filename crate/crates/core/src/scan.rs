//! Token-level scanner for a Java-like language subset.
//!
//! The scanner tracks brace depth while skipping comments and string
//! literals, which is enough to find class and method declarations and the
//! call sites inside them. Supported subset:
//!
//! - classes and interfaces, nested to any depth, any number per file
//! - methods and constructors with a body directly inside a class body
//! - field initializers and initializer blocks (their calls belong to the
//!   enclosing class)
//! - no annotations in clean input, no lambdas, no generic method headers
//!
//! Anything declared inside a method body (anonymous or local classes) is
//! treated as part of that method.

use std::collections::BTreeSet;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LangProfile {
    pub name: String,
    pub line_comment_token: String,
    pub block_comment: (String, String),
    pub string_delimiters: Vec<u8>,
    /// Identifiers that can precede `(` without being calls.
    pub keywords: BTreeSet<String>,
}

const JAVA_KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally", "float",
    "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long",
    "native", "new", "package", "private", "protected", "public", "return", "short", "static",
    "strictfp", "super", "switch", "synchronized", "this", "throw", "throws", "transient", "try",
    "void", "volatile", "while",
];

/// Keywords after which an `identifier (` is still an expression.
const EXPRESSION_KEYWORDS: &[&str] = &["return", "throw", "else", "case", "do", "yield", "assert"];

impl LangProfile {
    pub fn java() -> Self {
        LangProfile {
            name: "java".into(),
            line_comment_token: "//".into(),
            block_comment: ("/*".into(), "*/".into()),
            string_delimiters: vec![b'"', b'\''],
            keywords: JAVA_KEYWORDS.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn is_keyword(&self, ident: &[u8]) -> bool {
        std::str::from_utf8(ident).is_ok_and(|s| self.keywords.contains(s))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScanError {
    #[error("line {line}: unterminated string literal")]
    UnterminatedString { line: usize },
    #[error("line {line}: unterminated block comment")]
    UnterminatedComment { line: usize },
    #[error("line {line}: unmatched '{{' at end of file")]
    UnclosedBrace { line: usize },
    #[error("line {line}: '}}' without matching '{{'")]
    UnexpectedClose { line: usize },
}

impl ScanError {
    pub fn line(&self) -> usize {
        match self {
            ScanError::UnterminatedString { line }
            | ScanError::UnterminatedComment { line }
            | ScanError::UnclosedBrace { line }
            | ScanError::UnexpectedClose { line } => *line,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DeclKind {
    Class,
    Method,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Declaration {
    pub kind: DeclKind,
    pub name: String,
    /// Dotted path through enclosing classes, e.g. `Outer.Inner.method`.
    pub qualified_path: String,
    /// 1-based line of the first token of the declaration.
    pub header_line: usize,
    /// Inclusive 1-based line range from the header to the closing brace.
    pub body_span: (usize, usize),
    /// Leading whitespace of the header line.
    pub indent: String,
    /// Byte offset of the declared name.
    pub name_offset: usize,
    /// Byte offsets of the opening and closing braces.
    pub body_offsets: (usize, usize),
}

impl Declaration {
    /// Path of the enclosing class (empty for a top-level class).
    pub fn owner(&self) -> &str {
        self.qualified_path
            .rsplit_once('.')
            .map_or("", |(owner, _)| owner)
    }

    fn contains_offset(&self, offset: usize) -> bool {
        self.body_offsets.0 < offset && offset < self.body_offsets.1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallSite {
    pub callee_name: String,
    pub line: usize,
    /// Qualified path of the innermost enclosing method, or of the class
    /// for calls in field initializers and initializer blocks.
    pub enclosing: String,
    pub offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TokKind {
    Ident,
    Punct(u8),
}

#[derive(Debug, Clone, Copy)]
struct Tok {
    kind: TokKind,
    start: usize,
    end: usize,
    line: usize,
}

fn is_ident_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'$' || b >= 0x80
}

fn lex(content: &[u8], profile: &LangProfile) -> Result<Vec<Tok>, ScanError> {
    let line_comment = profile.line_comment_token.as_bytes();
    let (open, close) = (
        profile.block_comment.0.as_bytes(),
        profile.block_comment.1.as_bytes(),
    );
    let mut toks = Vec::new();
    let mut line = 1;
    let mut i = 0;
    while i < content.len() {
        let b = content[i];
        let rest = &content[i..];
        if b == b'\n' {
            line += 1;
            i += 1;
        } else if b.is_ascii_whitespace() {
            i += 1;
        } else if !line_comment.is_empty() && rest.starts_with(line_comment) {
            i += rest.iter().position(|c| *c == b'\n').unwrap_or(rest.len());
        } else if !open.is_empty() && rest.starts_with(open) {
            let start_line = line;
            let body = &content[i + open.len()..];
            let Some(end) = body.windows(close.len()).position(|w| w == close) else {
                return Err(ScanError::UnterminatedComment { line: start_line });
            };
            line += body[..end].iter().filter(|c| **c == b'\n').count();
            i += open.len() + end + close.len();
        } else if profile.string_delimiters.contains(&b) {
            let start_line = line;
            let mut j = i + 1;
            loop {
                match content.get(j) {
                    None | Some(b'\n') => return Err(ScanError::UnterminatedString { line: start_line }),
                    Some(b'\\') if content.get(j + 1) != Some(&b'\n') => j += 2,
                    Some(c) if *c == b => break,
                    Some(_) => j += 1,
                }
            }
            i = j + 1;
        } else if is_ident_byte(b) {
            let len = rest.iter().take_while(|c| is_ident_byte(**c)).count();
            if !b.is_ascii_digit() {
                toks.push(Tok { kind: TokKind::Ident, start: i, end: i + len, line });
            }
            i += len;
        } else {
            toks.push(Tok { kind: TokKind::Punct(b), start: i, end: i + 1, line });
            i += 1;
        }
    }
    Ok(toks)
}

enum Frame {
    Class { decl: usize },
    Method { decl: usize },
    /// Initializer block or any block inside a method.
    Block { line: usize },
}

fn leading_indent(content: &[u8], offset: usize) -> String {
    let line_start = content[..offset]
        .iter()
        .rposition(|b| *b == b'\n')
        .map_or(0, |p| p + 1);
    content[line_start..]
        .iter()
        .take_while(|b| **b == b' ' || **b == b'\t')
        .map(|b| *b as char)
        .collect()
}

struct Parser<'a> {
    content: &'a [u8],
    profile: &'a LangProfile,
    toks: Vec<Tok>,
    decls: Vec<Declaration>,
    stack: Vec<Frame>,
}

impl<'a> Parser<'a> {
    fn text(&self, t: &Tok) -> &'a [u8] {
        &self.content[t.start..t.end]
    }

    fn is_ident(&self, t: &Tok, word: &str) -> bool {
        t.kind == TokKind::Ident && self.text(t) == word.as_bytes()
    }

    /// Path of the innermost class frame, if we are directly inside one.
    fn member_level_class(&self) -> Option<&str> {
        match self.stack.last() {
            Some(Frame::Class { decl }) => Some(&self.decls[*decl].qualified_path),
            _ => None,
        }
    }

    fn at_statement_level(&self) -> bool {
        matches!(self.stack.last(), None | Some(Frame::Class { .. }))
    }

    fn classify(&self, stmt: &[Tok]) -> Option<(DeclKind, usize)> {
        if stmt.iter().any(|t| t.kind == TokKind::Punct(b'=')) {
            return None;
        }
        for (k, t) in stmt.iter().enumerate() {
            if ["class", "interface", "enum"].iter().any(|w| self.is_ident(t, w)) {
                return match stmt.get(k + 1) {
                    Some(name) if name.kind == TokKind::Ident => Some((DeclKind::Class, k + 1)),
                    _ => None,
                };
            }
        }
        self.member_level_class()?;
        let end = stmt
            .iter()
            .position(|t| self.is_ident(t, "throws"))
            .unwrap_or(stmt.len());
        if end == 0 || stmt[end - 1].kind != TokKind::Punct(b')') {
            return None;
        }
        let mut depth = 0i32;
        let mut open = None;
        for k in (0..end).rev() {
            match stmt[k].kind {
                TokKind::Punct(b')') => depth += 1,
                TokKind::Punct(b'(') => {
                    depth -= 1;
                    if depth == 0 {
                        open = Some(k);
                        break;
                    }
                }
                _ => {}
            }
        }
        let name_idx = open?.checked_sub(1)?;
        let name = &stmt[name_idx];
        (name.kind == TokKind::Ident && !self.profile.is_keyword(self.text(name)))
            .then_some((DeclKind::Method, name_idx))
    }

    fn run(mut self) -> Result<Vec<Declaration>, ScanError> {
        let toks = std::mem::take(&mut self.toks);
        let mut stmt_start: Option<usize> = None;
        for (i, tok) in toks.iter().enumerate() {
            match tok.kind {
                TokKind::Punct(b'{') => {
                    if !self.at_statement_level() {
                        self.stack.push(Frame::Block { line: tok.line });
                        continue;
                    }
                    let start = stmt_start.unwrap_or(i);
                    let stmt = &toks[start..i];
                    match self.classify(stmt) {
                        Some((kind, name_idx)) => {
                            let name_tok = stmt[name_idx];
                            let name = String::from_utf8_lossy(self.text(&name_tok)).into_owned();
                            let qualified_path = match self.member_level_class() {
                                Some(owner) => format!("{owner}.{name}"),
                                None => name.clone(),
                            };
                            let header = stmt[0];
                            self.decls.push(Declaration {
                                kind,
                                name,
                                qualified_path,
                                header_line: header.line,
                                body_span: (header.line, header.line),
                                indent: leading_indent(self.content, header.start),
                                name_offset: name_tok.start,
                                body_offsets: (tok.start, tok.start),
                            });
                            let decl = self.decls.len() - 1;
                            self.stack.push(match kind {
                                DeclKind::Class => Frame::Class { decl },
                                DeclKind::Method => Frame::Method { decl },
                            });
                            stmt_start = None;
                        }
                        None => {
                            self.stack.push(Frame::Block { line: tok.line });
                            // an initializer like `int[] a = {1};` continues after the block
                            if !stmt.iter().any(|t| t.kind == TokKind::Punct(b'=')) {
                                stmt_start = None;
                            } else {
                                stmt_start = Some(start);
                            }
                        }
                    }
                }
                TokKind::Punct(b'}') => match self.stack.pop() {
                    None => return Err(ScanError::UnexpectedClose { line: tok.line }),
                    Some(Frame::Class { decl } | Frame::Method { decl }) => {
                        let d = &mut self.decls[decl];
                        d.body_span.1 = tok.line;
                        d.body_offsets.1 = tok.start;
                        stmt_start = None;
                    }
                    Some(Frame::Block { .. }) => {}
                },
                TokKind::Punct(b';') if self.at_statement_level() => stmt_start = None,
                _ if self.at_statement_level() && stmt_start.is_none() => stmt_start = Some(i),
                _ => {}
            }
        }
        if let Some(frame) = self.stack.last() {
            let line = match frame {
                Frame::Class { decl } | Frame::Method { decl } => {
                    let d = &self.decls[*decl];
                    line_of(self.content, d.body_offsets.0)
                }
                Frame::Block { line } => *line,
            };
            return Err(ScanError::UnclosedBrace { line });
        }
        Ok(self.decls)
    }
}

fn line_of(content: &[u8], offset: usize) -> usize {
    1 + content[..offset].iter().filter(|b| **b == b'\n').count()
}

/// Finds class and method declarations in source order.
pub fn scan_declarations(content: &[u8], profile: &LangProfile) -> Result<Vec<Declaration>, ScanError> {
    let toks = lex(content, profile)?;
    Parser {
        content,
        profile,
        toks,
        decls: Vec::new(),
        stack: Vec::new(),
    }
    .run()
}

/// Finds every `identifier (` that is a call, attributed to the innermost
/// enclosing declaration in `decls`. Keywords, declaration headers and
/// constructor invocations after `new` are not calls.
pub fn scan_call_sites(
    content: &[u8],
    profile: &LangProfile,
    decls: &[Declaration],
) -> Result<Vec<CallSite>, ScanError> {
    let toks = lex(content, profile)?;
    let headers: BTreeSet<usize> = decls.iter().map(|d| d.name_offset).collect();
    let mut calls = Vec::new();
    for (i, tok) in toks.iter().enumerate() {
        if tok.kind != TokKind::Ident || toks.get(i + 1).map(|t| t.kind) != Some(TokKind::Punct(b'(')) {
            continue;
        }
        let name = &content[tok.start..tok.end];
        if profile.is_keyword(name) || headers.contains(&tok.start) {
            continue;
        }
        if let Some(prev) = i.checked_sub(1).map(|p| toks[p]) {
            if prev.kind == TokKind::Ident {
                let prev_text = &content[prev.start..prev.end];
                // `Type name(` declares, `new Name(` constructs
                if !EXPRESSION_KEYWORDS.iter().any(|k| k.as_bytes() == prev_text) {
                    continue;
                }
            }
            if prev.kind == TokKind::Punct(b'.') && follows_new(&toks, i, content) {
                continue;
            }
        }
        let enclosing = decls
            .iter()
            .filter(|d| d.contains_offset(tok.start))
            .max_by_key(|d| d.body_offsets.0);
        if let Some(d) = enclosing {
            calls.push(CallSite {
                callee_name: String::from_utf8_lossy(name).into_owned(),
                line: tok.line,
                enclosing: d.qualified_path.clone(),
                offset: tok.start,
            });
        }
    }
    Ok(calls)
}

/// True for the last identifier of `new a.b.C(`.
fn follows_new(toks: &[Tok], mut i: usize, content: &[u8]) -> bool {
    while i >= 2 && toks[i - 1].kind == TokKind::Punct(b'.') && toks[i - 2].kind == TokKind::Ident {
        i -= 2;
    }
    i >= 1 && toks[i - 1].kind == TokKind::Ident && &content[toks[i - 1].start..toks[i - 1].end] == b"new"
}
