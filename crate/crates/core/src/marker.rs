//! Marker grammar: the exact bytes used to write metadata into source
//! files and the parsers that recognize them again.
//!
//! Two shapes exist. A *line marker* is a suffix appended to a code line:
//!
//! ```text
//! <code> <line-comment-token><sigil><payload>
//! ```
//!
//! A *block marker* is a whole line of its own, placed above a declaration:
//!
//! ```text
//! <indent><block-prefix> <Name>(<arg>, <arg>, ...)
//! ```
//!
//! where each arg is `"value"` (positional) or `key="value"`, and values
//! escape `\` and `"` with a backslash. Everything here works on bytes so
//! that non-UTF-8 source lines never need decoding.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::text;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MarkerError {
    #[error("invalid marker syntax: {0}")]
    InvalidSyntax(String),
    #[error("sigil {0:?} is not registered")]
    UnregisteredSigil(String),
    #[error("line marker payload {0:?} contains a line break")]
    PayloadLineBreak(String),
    #[error("block marker argument {0:?} contains a line break")]
    ArgLineBreak(String),
    #[error("{0:?} is not a valid marker name")]
    InvalidName(String),
    #[error("{0:?} is not a valid argument key")]
    InvalidKey(String),
    #[error("indent {0:?} contains characters other than spaces and tabs")]
    InvalidIndent(String),
    #[error("block marker {0:?} would also read as a line marker")]
    Ambiguous(String),
}

/// Comment conventions of a host language plus the registry of reserved
/// sigils and block-marker names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkerSyntax {
    line_comment_token: String,
    block_prefix: String,
    /// `(analyzer_id, sigil)`, sorted by analyzer id.
    sigils: Vec<(String, String)>,
    /// `(marker name, analyzer_id)`, sorted by name.
    block_names: Vec<(String, String)>,
    /// `" " + token + sigil` for each entry of `sigils`.
    patterns: Vec<Vec<u8>>,
}

pub const DEFAULT_LINE_COMMENT: &str = "//";
pub const DEFAULT_BLOCK_SIGIL: &str = "@";
pub const DEFAULT_COVERAGE_SIGIL: &str = "+";

impl MarkerSyntax {
    /// Builds a syntax and checks every registry invariant: sigils are
    /// non-empty, whitespace-free, unique, and no sigil is a prefix of
    /// another; the block prefix starts with the line comment token and no
    /// sigil can match the start of it.
    pub fn new<S, B>(
        line_comment_token: &str,
        block_prefix: &str,
        sigils: S,
        block_names: B,
    ) -> Result<Self, MarkerError>
    where
        S: IntoIterator<Item = (String, String)>,
        B: IntoIterator<Item = (String, String)>,
    {
        let bad = |msg: String| Err(MarkerError::InvalidSyntax(msg));
        if line_comment_token.is_empty() || has_space(line_comment_token) {
            return bad(format!(
                "line comment token {line_comment_token:?} must be non-empty without whitespace"
            ));
        }
        if !block_prefix.starts_with(line_comment_token)
            || block_prefix.len() == line_comment_token.len()
            || has_space(block_prefix)
        {
            return bad(format!(
                "block prefix {block_prefix:?} must extend {line_comment_token:?} without whitespace"
            ));
        }
        let block_tail = &block_prefix[line_comment_token.len()..];

        let mut sigils: Vec<(String, String)> = sigils.into_iter().collect();
        sigils.sort();
        let mut ids = BTreeSet::new();
        for (id, sigil) in &sigils {
            if sigil.is_empty() || has_space(sigil) {
                return bad(format!("sigil {sigil:?} for {id:?} must be non-empty without whitespace"));
            }
            if !ids.insert(id.as_str()) {
                return bad(format!("analyzer {id:?} registers more than one sigil"));
            }
            if block_tail.starts_with(sigil.as_str()) {
                return bad(format!("sigil {sigil:?} clashes with block prefix {block_prefix:?}"));
            }
        }
        for (i, (id_a, a)) in sigils.iter().enumerate() {
            for (id_b, b) in &sigils[i + 1..] {
                if a.starts_with(b.as_str()) || b.starts_with(a.as_str()) {
                    return bad(format!(
                        "sigils {a:?} ({id_a}) and {b:?} ({id_b}) are not prefix-free"
                    ));
                }
            }
        }

        let mut block_names: Vec<(String, String)> = block_names.into_iter().collect();
        block_names.sort();
        for w in block_names.windows(2) {
            if w[0].0 == w[1].0 {
                return bad(format!("marker name {:?} registered twice", w[0].0));
            }
        }
        for (name, _) in &block_names {
            if !is_marker_name(name) {
                return Err(MarkerError::InvalidName(name.clone()));
            }
        }

        let patterns = sigils
            .iter()
            .map(|(_, s)| format!(" {line_comment_token}{s}").into_bytes())
            .collect();
        Ok(MarkerSyntax {
            line_comment_token: line_comment_token.to_string(),
            block_prefix: block_prefix.to_string(),
            sigils,
            block_names,
            patterns,
        })
    }

    pub fn line_comment_token(&self) -> &str {
        &self.line_comment_token
    }

    pub fn block_prefix(&self) -> &str {
        &self.block_prefix
    }

    pub fn sigils(&self) -> impl Iterator<Item = (&str, &str)> {
        self.sigils.iter().map(|(a, s)| (a.as_str(), s.as_str()))
    }

    pub fn block_names(&self) -> impl Iterator<Item = (&str, &str)> {
        self.block_names.iter().map(|(n, a)| (n.as_str(), a.as_str()))
    }

    pub fn sigil_for(&self, analyzer_id: &str) -> Option<&str> {
        self.sigils
            .iter()
            .find(|(a, _)| a == analyzer_id)
            .map(|(_, s)| s.as_str())
    }

    fn analyzer_for_sigil(&self, sigil: &str) -> Option<&str> {
        self.sigils
            .iter()
            .find(|(_, s)| s == sigil)
            .map(|(a, _)| a.as_str())
    }

    /// Analyzer owning a block-marker name; unknown names map to `""`.
    pub fn analyzer_for_name(&self, name: &str) -> &str {
        self.block_names
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, a)| a.as_str())
            .unwrap_or("")
    }
}

fn has_space(s: &str) -> bool {
    s.chars().any(char::is_whitespace)
}

/// ASCII letter followed by ASCII letters or digits.
pub fn is_marker_name(s: &str) -> bool {
    let mut bytes = s.bytes();
    matches!(bytes.next(), Some(b) if b.is_ascii_alphabetic())
        && bytes.all(|b| b.is_ascii_alphanumeric())
}

fn is_key(s: &str) -> bool {
    let mut bytes = s.bytes();
    matches!(bytes.next(), Some(b) if b.is_ascii_alphabetic() || b == b'_')
        && bytes.all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LineMarker {
    pub analyzer_id: String,
    pub sigil: String,
    pub payload: String,
}

impl LineMarker {
    pub fn new(analyzer_id: impl Into<String>, sigil: impl Into<String>, payload: impl Into<String>) -> Self {
        LineMarker {
            analyzer_id: analyzer_id.into(),
            sigil: sigil.into(),
            payload: payload.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockMarker {
    pub analyzer_id: String,
    pub name: String,
    /// Ordered `(key, value)` pairs; an empty key renders positionally.
    pub args: Vec<(String, String)>,
    pub indent: String,
}

impl BlockMarker {
    pub fn new(analyzer_id: impl Into<String>, name: impl Into<String>) -> Self {
        BlockMarker {
            analyzer_id: analyzer_id.into(),
            name: name.into(),
            args: Vec::new(),
            indent: String::new(),
        }
    }

    pub fn arg(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.args.push((key.into(), value.into()));
        self
    }

    pub fn positional(self, value: impl Into<String>) -> Self {
        self.arg("", value)
    }

    pub fn with_indent(mut self, indent: impl Into<String>) -> Self {
        self.indent = indent.into();
        self
    }

    /// Value of the first argument with this key.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.args
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

/// Renders the suffix appended to a code line: a space, the comment token,
/// the sigil, then the payload.
pub fn encode_line_marker(marker: &LineMarker, syntax: &MarkerSyntax) -> Result<String, MarkerError> {
    if syntax.analyzer_for_sigil(&marker.sigil).is_none() {
        return Err(MarkerError::UnregisteredSigil(marker.sigil.clone()));
    }
    if marker.payload.contains(['\n', '\r']) {
        return Err(MarkerError::PayloadLineBreak(marker.payload.clone()));
    }
    Ok(format!(
        " {}{}{}",
        syntax.line_comment_token, marker.sigil, marker.payload
    ))
}

/// Locates a line-marker suffix in `line`: returns the length of the code
/// part and the index of the matched sigil. The earliest occurrence of any
/// registered pattern wins, so a clean code part (which contains none) is
/// always recovered exactly.
pub(crate) fn find_line_marker(line: &[u8], syntax: &MarkerSyntax) -> Option<(usize, usize)> {
    let token = syntax.line_comment_token.as_bytes();
    let mut i = 0;
    while i < line.len() {
        i += line[i..].iter().position(|b| *b == b' ')?;
        if line[i + 1..].starts_with(token) {
            if let Some(idx) = syntax.patterns.iter().position(|p| line[i..].starts_with(p)) {
                return Some((i, idx));
            }
        }
        i += 1;
    }
    None
}

/// Inverse of [`encode_line_marker`]: splits a marked line into its code
/// part and the decoded marker.
pub fn parse_line_marker<'a>(line: &'a [u8], syntax: &MarkerSyntax) -> Option<(&'a [u8], LineMarker)> {
    let (code_len, idx) = find_line_marker(line, syntax)?;
    let (analyzer_id, sigil) = &syntax.sigils[idx];
    let payload = &line[code_len + syntax.patterns[idx].len()..];
    Some((
        &line[..code_len],
        LineMarker {
            analyzer_id: analyzer_id.clone(),
            sigil: sigil.clone(),
            payload: String::from_utf8_lossy(payload).into_owned(),
        },
    ))
}

fn push_quoted(out: &mut String, value: &str) {
    out.push('"');
    for c in value.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
}

/// Renders a block marker as one full line (no terminator).
pub fn encode_block_marker(marker: &BlockMarker, syntax: &MarkerSyntax) -> Result<String, MarkerError> {
    if !is_marker_name(&marker.name) {
        return Err(MarkerError::InvalidName(marker.name.clone()));
    }
    if !marker.indent.bytes().all(|b| b == b' ' || b == b'\t') {
        return Err(MarkerError::InvalidIndent(marker.indent.clone()));
    }
    let mut out = format!("{}{} {}(", marker.indent, syntax.block_prefix, marker.name);
    for (i, (key, value)) in marker.args.iter().enumerate() {
        if value.contains(['\n', '\r']) {
            return Err(MarkerError::ArgLineBreak(value.clone()));
        }
        if i > 0 {
            out.push_str(", ");
        }
        if !key.is_empty() {
            if !is_key(key) {
                return Err(MarkerError::InvalidKey(key.clone()));
            }
            out.push_str(key);
            out.push('=');
        }
        push_quoted(&mut out, value);
    }
    out.push(')');
    if find_line_marker(out.as_bytes(), syntax).is_some() {
        return Err(MarkerError::Ambiguous(out));
    }
    Ok(out)
}

/// Small cursor for the block grammar.
struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn eat(&mut self, s: &[u8]) -> bool {
        if self.bytes[self.pos..].starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn ident(&mut self) -> &'a [u8] {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_')
        {
            self.pos += 1;
        }
        &self.bytes[start..self.pos]
    }

    fn quoted(&mut self) -> Option<String> {
        if !self.eat(b"\"") {
            return None;
        }
        let mut value = Vec::new();
        loop {
            match self.peek()? {
                b'"' => {
                    self.pos += 1;
                    return String::from_utf8(value).ok();
                }
                b'\\' => {
                    let next = *self.bytes.get(self.pos + 1)?;
                    if next != b'"' && next != b'\\' {
                        return None;
                    }
                    value.push(next);
                    self.pos += 2;
                }
                b => {
                    value.push(b);
                    self.pos += 1;
                }
            }
        }
    }
}

fn parse_block_grammar(line: &[u8], syntax: &MarkerSyntax) -> Option<BlockMarker> {
    let indent_len = text::Line::from_raw(line).indent().len();
    let mut cur = Cursor {
        bytes: line,
        pos: indent_len,
    };
    if !cur.eat(syntax.block_prefix.as_bytes()) || !cur.eat(b" ") {
        return None;
    }
    let name = std::str::from_utf8(cur.ident()).ok()?.to_string();
    if !cur.eat(b"(") {
        return None;
    }
    let mut args = Vec::new();
    if !cur.eat(b")") {
        loop {
            let key = std::str::from_utf8(cur.ident()).ok()?.to_string();
            if !key.is_empty() && !cur.eat(b"=") {
                return None;
            }
            let value = cur.quoted()?;
            args.push((key, value));
            if cur.eat(b")") {
                break;
            }
            if !cur.eat(b", ") {
                return None;
            }
        }
    }
    if cur.pos != line.len() {
        return None;
    }
    Some(BlockMarker {
        analyzer_id: syntax.analyzer_for_name(&name).to_string(),
        name,
        args,
        // indent is spaces/tabs only, hence ASCII
        indent: String::from_utf8(line[..indent_len].to_vec()).ok()?,
    })
}

/// Recognizes exactly the lines [`encode_block_marker`] can produce.
pub fn parse_block_marker(line: &[u8], syntax: &MarkerSyntax) -> Option<BlockMarker> {
    let marker = parse_block_grammar(line, syntax)?;
    match encode_block_marker(&marker, syntax) {
        Ok(rendered) if rendered.as_bytes() == line => Some(marker),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Grammar {
    LineMarker,
    BlockMarker,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collision {
    /// 1-based line number.
    pub line: usize,
    pub grammar: Grammar,
}

/// Lines of `content` that already match a marker grammar. Labeling is only
/// safe when this is empty.
pub fn scan_collisions(content: &[u8], syntax: &MarkerSyntax) -> Vec<Collision> {
    text::lines(content)
        .enumerate()
        .filter_map(|(i, line)| {
            let grammar = if parse_block_marker(line.content, syntax).is_some() {
                Grammar::BlockMarker
            } else if find_line_marker(line.content, syntax).is_some() {
                Grammar::LineMarker
            } else {
                return None;
            };
            Some(Collision { line: i + 1, grammar })
        })
        .collect()
}
