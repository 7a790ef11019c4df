//! Label manifests: the record of what a labeling run inserted, kept under
//! `.overmark/manifest` at the project root.
//!
//! The on-disk format is line oriented. See `docs/manifest-format.md`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub const MANIFEST_DIR: &str = ".overmark";
pub const MANIFEST_FILE: &str = "manifest";
const HEADER: &str = "overmark-manifest 1";

/// Hex SHA-256 of a byte buffer.
pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MarkerStyle {
    #[default]
    Comment,
    Native,
}

impl MarkerStyle {
    pub fn as_str(self) -> &'static str {
        match self {
            MarkerStyle::Comment => "comment",
            MarkerStyle::Native => "native",
        }
    }
}

impl FromStr for MarkerStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "comment" => Ok(MarkerStyle::Comment),
            "native" => Ok(MarkerStyle::Native),
            other => Err(format!("unknown marker style {other:?} (expected comment or native)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertKind {
    Marker,
    Import,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminator {
    Lf,
    CrLf,
}

impl Terminator {
    pub fn from_bytes(bytes: &[u8]) -> Option<Self> {
        match bytes {
            b"\n" => Some(Terminator::Lf),
            b"\r\n" => Some(Terminator::CrLf),
            _ => None,
        }
    }

    pub fn as_bytes(self) -> &'static [u8] {
        match self {
            Terminator::Lf => b"\n",
            Terminator::CrLf => b"\r\n",
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Terminator::Lf => "lf",
            Terminator::CrLf => "crlf",
        }
    }
}

/// A whole line added by labeling. `line` is in post-insertion coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InsertedLine {
    pub line: usize,
    pub kind: InsertKind,
    pub terminator: Terminator,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FileManifest {
    pub original_digest: String,
    pub labeled_digest: String,
    /// Ascending by line.
    pub inserted: Vec<InsertedLine>,
    /// Lines that received a line-marker suffix, post-insertion, ascending.
    pub modified: Vec<usize>,
}

impl FileManifest {
    pub fn is_empty(&self) -> bool {
        self.inserted.is_empty() && self.modified.is_empty()
    }

    pub fn imports(&self) -> impl Iterator<Item = &InsertedLine> {
        self.inserted.iter().filter(|l| l.kind == InsertKind::Import)
    }
}

/// All files touched by one labeling run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabelManifest {
    pub style: MarkerStyle,
    pub files: BTreeMap<String, FileManifest>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("manifest line {line}: {message}")]
pub struct ManifestParseError {
    pub line: usize,
    pub message: String,
}

impl LabelManifest {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{HEADER}");
        let _ = writeln!(out, "style {}", self.style.as_str());
        for (path, file) in &self.files {
            let _ = writeln!(out, "file {path}");
            let _ = writeln!(out, "original-sha256 {}", file.original_digest);
            let _ = writeln!(out, "labeled-sha256 {}", file.labeled_digest);
            for ins in &file.inserted {
                let kw = match ins.kind {
                    InsertKind::Marker => "insert",
                    InsertKind::Import => "import",
                };
                let _ = writeln!(out, "{kw} {} {} {}", ins.line, ins.terminator.tag(), ins.content);
            }
            for line in &file.modified {
                let _ = writeln!(out, "modify {line}");
            }
            let _ = writeln!(out, "end");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ManifestParseError> {
        let mut manifest = LabelManifest::default();
        let mut current: Option<(String, FileManifest)> = None;
        let mut saw_header = false;

        for (idx, raw) in text.split('\n').enumerate() {
            let lineno = idx + 1;
            let err = |message: String| ManifestParseError { line: lineno, message };
            if raw.is_empty() {
                continue;
            }
            if !saw_header {
                if raw != HEADER {
                    return Err(err(format!("expected {HEADER:?}")));
                }
                saw_header = true;
                continue;
            }
            let (kw, rest) = raw.split_once(' ').unwrap_or((raw, ""));
            match (kw, current.as_mut()) {
                ("style", None) => manifest.style = rest.parse().map_err(err)?,
                ("file", None) => current = Some((rest.to_string(), FileManifest::default())),
                ("original-sha256", Some((_, f))) => f.original_digest = rest.to_string(),
                ("labeled-sha256", Some((_, f))) => f.labeled_digest = rest.to_string(),
                ("insert" | "import", Some((_, f))) => {
                    let mut parts = rest.splitn(3, ' ');
                    let line = parts
                        .next()
                        .and_then(|n| n.parse().ok())
                        .ok_or_else(|| err("bad line number".into()))?;
                    let terminator = match parts.next() {
                        Some("lf") => Terminator::Lf,
                        Some("crlf") => Terminator::CrLf,
                        _ => return Err(err("bad terminator tag".into())),
                    };
                    let content = parts.next().unwrap_or("").to_string();
                    let kind = if kw == "insert" {
                        InsertKind::Marker
                    } else {
                        InsertKind::Import
                    };
                    f.inserted.push(InsertedLine { line, kind, terminator, content });
                }
                ("modify", Some((_, f))) => {
                    let line = rest.parse().map_err(|_| err("bad line number".into()))?;
                    f.modified.push(line);
                }
                ("end", Some(_)) => {
                    let (path, file) = current.take().expect("checked by match");
                    manifest.files.insert(path, file);
                }
                _ => return Err(err(format!("unexpected record {kw:?}"))),
            }
        }
        if !saw_header {
            return Err(ManifestParseError { line: 1, message: "empty manifest".into() });
        }
        if current.is_some() {
            return Err(ManifestParseError {
                line: text.split('\n').count(),
                message: "missing end record".into(),
            });
        }
        Ok(manifest)
    }
}
