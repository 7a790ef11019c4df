//! Applying overlay plans to file contents and removing them again.
//!
//! The central contract is `strip_file(label_file(f, p)) == f` byte for
//! byte. Comment-style stripping is purely grammar driven and needs no
//! manifest; native-style stripping replays the manifest in reverse.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::manifest::{self, FileManifest, InsertKind, InsertedLine, MarkerStyle, Terminator};
use crate::marker::{
    self, encode_block_marker, encode_line_marker, find_line_marker, parse_block_marker,
    BlockMarker, Collision, LineMarker, MarkerError, MarkerSyntax,
};
use crate::text::{self, Line};

/// Metadata bound to a place in a file. Line anchors always carry line
/// markers and declaration anchors always carry block markers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AnchoredMetadata {
    Line {
        file: String,
        line: usize,
        marker: LineMarker,
    },
    /// `line` is the declaration header line resolved by the planner.
    Declaration {
        file: String,
        decl_path: String,
        line: usize,
        marker: BlockMarker,
    },
}

impl AnchoredMetadata {
    pub fn file(&self) -> &str {
        match self {
            AnchoredMetadata::Line { file, .. } | AnchoredMetadata::Declaration { file, .. } => file,
        }
    }

    pub fn line(&self) -> usize {
        match self {
            AnchoredMetadata::Line { line, .. } | AnchoredMetadata::Declaration { line, .. } => *line,
        }
    }

    pub fn analyzer_id(&self) -> &str {
        match self {
            AnchoredMetadata::Line { marker, .. } => &marker.analyzer_id,
            AnchoredMetadata::Declaration { marker, .. } => &marker.analyzer_id,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OverlayPlan {
    pub entries: Vec<AnchoredMetadata>,
    pub style: MarkerStyle,
}

impl OverlayPlan {
    pub fn new(style: MarkerStyle) -> Self {
        OverlayPlan {
            entries: Vec::new(),
            style,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries grouped by file, each group stably sorted by line.
    pub fn by_file(&self) -> BTreeMap<&str, Vec<&AnchoredMetadata>> {
        let mut map: BTreeMap<&str, Vec<&AnchoredMetadata>> = BTreeMap::new();
        for e in &self.entries {
            map.entry(e.file()).or_default().push(e);
        }
        for group in map.values_mut() {
            group.sort_by_key(|e| e.line());
        }
        map
    }
}

#[derive(Debug, Clone)]
pub struct LabelOptions {
    pub style: MarkerStyle,
    /// Package that native-style imports point into.
    pub native_package: String,
    pub check_collisions: bool,
}

pub const DEFAULT_NATIVE_PACKAGE: &str = "overmark.meta";

impl Default for LabelOptions {
    fn default() -> Self {
        LabelOptions {
            style: MarkerStyle::Comment,
            native_package: DEFAULT_NATIVE_PACKAGE.to_string(),
            check_collisions: true,
        }
    }
}

impl LabelOptions {
    pub fn native() -> Self {
        LabelOptions {
            style: MarkerStyle::Native,
            ..Default::default()
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabelError {
    #[error("file already contains marker text on line(s) {}", lines_of(.0))]
    Collision(Vec<Collision>),
    #[error("line {line} is claimed by both {first} and {second}")]
    Conflict {
        line: usize,
        first: String,
        second: String,
    },
    #[error(transparent)]
    Marker(#[from] MarkerError),
}

fn lines_of(collisions: &[Collision]) -> String {
    collisions
        .iter()
        .map(|c| c.line.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// A plan entry that could not be applied; the rest of the file still is.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedEntry {
    pub line: usize,
    pub analyzer_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelOutcome {
    pub labeled: Vec<u8>,
    pub manifest: FileManifest,
    pub skipped: Vec<SkippedEntry>,
}

impl LabelOutcome {
    pub fn markers_inserted(&self) -> usize {
        self.manifest
            .inserted
            .iter()
            .filter(|l| l.kind == InsertKind::Marker)
            .count()
            + self.manifest.modified.len()
    }
}

fn native_value(key: &str, value: &str, out: &mut String) {
    if key == "class" {
        // class literals are clickable in most Java IDEs
        out.push_str("clazz=");
        out.push_str(value);
        out.push_str(".class");
        return;
    }
    if !key.is_empty() {
        out.push_str(key);
        out.push('=');
    }
    out.push('"');
    for c in value.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
}

/// Renders a block marker as a host-language annotation line.
pub fn encode_native_annotation(marker: &BlockMarker, syntax: &MarkerSyntax) -> Result<String, MarkerError> {
    // validates name, keys, indent and line breaks
    encode_block_marker(marker, syntax)?;
    let mut out = format!("{}@{}(", marker.indent, marker.name);
    for (i, (key, value)) in marker.args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        native_value(key, value, &mut out);
    }
    out.push(')');
    if find_line_marker(out.as_bytes(), syntax).is_some() {
        return Err(MarkerError::Ambiguous(out));
    }
    Ok(out)
}

fn is_statement(content: &[u8], keyword: &[u8]) -> bool {
    let trimmed = &content[Line::from_raw(content).indent().len()..];
    trimmed.starts_with(keyword) && trimmed.get(keyword.len()) == Some(&b' ')
}

/// Writes every entry of the plan for one file into `original`.
///
/// Block markers become whole lines directly above their anchor, indented
/// like the anchor line. Line markers are appended to their anchor line
/// before its terminator. Entries whose line lies outside the file are
/// reported in [`LabelOutcome::skipped`].
pub fn label_file(
    original: &[u8],
    entries: &[&AnchoredMetadata],
    syntax: &MarkerSyntax,
    options: &LabelOptions,
) -> Result<LabelOutcome, LabelError> {
    if options.check_collisions {
        let collisions = marker::scan_collisions(original, syntax);
        if !collisions.is_empty() {
            return Err(LabelError::Collision(collisions));
        }
    }

    let lines: Vec<Line> = text::lines(original).collect();
    let fallback_eol = text::dominant_terminator(original);
    let mut skipped = Vec::new();
    let mut line_markers: BTreeMap<usize, &LineMarker> = BTreeMap::new();
    let mut block_markers: BTreeMap<usize, Vec<&BlockMarker>> = BTreeMap::new();

    for entry in entries {
        let line = entry.line();
        if line == 0 || line > lines.len() {
            skipped.push(SkippedEntry {
                line,
                analyzer_id: entry.analyzer_id().to_string(),
                reason: format!("line {line} is outside the file ({} lines)", lines.len()),
            });
            continue;
        }
        match entry {
            AnchoredMetadata::Line { marker, .. } => {
                if let Some(prev) = line_markers.insert(line, marker) {
                    return Err(LabelError::Conflict {
                        line,
                        first: prev.analyzer_id.clone(),
                        second: marker.analyzer_id.clone(),
                    });
                }
            }
            AnchoredMetadata::Declaration { marker, .. } => {
                block_markers.entry(line).or_default().push(marker);
            }
        }
    }

    // Native imports go after the last import, else after the package line,
    // else at the top, but never below the first annotated declaration.
    let mut imports: Vec<String> = Vec::new();
    let mut imports_before = 1;
    if options.style == MarkerStyle::Native && !block_markers.is_empty() {
        let names: BTreeSet<&str> = block_markers
            .values()
            .flatten()
            .map(|m| m.name.as_str())
            .collect();
        imports = names
            .into_iter()
            .map(|n| format!("import {}.{};", options.native_package, n))
            .collect();
        let last_import = lines.iter().rposition(|l| is_statement(l.content, b"import"));
        let package = lines.iter().position(|l| is_statement(l.content, b"package"));
        imports_before = last_import.or(package).map_or(1, |i| i + 2);
        let first_anchor = *block_markers.keys().next().expect("non-empty");
        imports_before = imports_before.min(first_anchor);
    }

    let mut out = Vec::with_capacity(original.len() + 64 * (entries.len() + 1));
    let mut manifest = FileManifest::default();
    let mut out_line = 0usize;
    let insert = |manifest: &mut FileManifest, out: &mut Vec<u8>, out_line: &mut usize, kind, content: String, eol: &[u8]| {
        *out_line += 1;
        out.extend_from_slice(content.as_bytes());
        out.extend_from_slice(eol);
        manifest.inserted.push(InsertedLine {
            line: *out_line,
            kind,
            terminator: Terminator::from_bytes(eol).expect("eol is lf or crlf"),
            content,
        });
    };

    for (idx, line) in lines.iter().enumerate() {
        let lineno = idx + 1;
        let eol = if line.terminator.is_empty() {
            fallback_eol
        } else {
            line.terminator
        };
        if lineno == imports_before {
            for import in imports.drain(..) {
                insert(&mut manifest, &mut out, &mut out_line, InsertKind::Import, import, eol);
            }
        }
        if let Some(blocks) = block_markers.get(&lineno) {
            let indent = String::from_utf8(line.indent().to_vec()).expect("spaces and tabs");
            for block in blocks {
                let marker = BlockMarker {
                    indent: indent.clone(),
                    ..(*block).clone()
                };
                let rendered = match options.style {
                    MarkerStyle::Comment => encode_block_marker(&marker, syntax)?,
                    MarkerStyle::Native => encode_native_annotation(&marker, syntax)?,
                };
                insert(&mut manifest, &mut out, &mut out_line, InsertKind::Marker, rendered, eol);
            }
        }
        out_line += 1;
        out.extend_from_slice(line.content);
        if let Some(marker) = line_markers.get(&lineno) {
            out.extend_from_slice(encode_line_marker(marker, syntax)?.as_bytes());
            manifest.modified.push(out_line);
        }
        out.extend_from_slice(line.terminator);
    }

    manifest.original_digest = manifest::digest(original);
    manifest.labeled_digest = manifest::digest(&out);
    Ok(LabelOutcome {
        labeled: out,
        manifest,
        skipped,
    })
}

/// What stripping does to a single line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StripAction<'a> {
    Keep,
    /// Line-marker suffix removed; the code part remains.
    Trim(&'a [u8]),
    /// Whole block-marker line removed, terminator included.
    Delete,
}

pub fn strip_line<'a>(content: &'a [u8], syntax: &MarkerSyntax) -> StripAction<'a> {
    if parse_block_marker(content, syntax).is_some() {
        return StripAction::Delete;
    }
    match find_line_marker(content, syntax) {
        // a code part that is itself a block marker goes too, so strip
        // stays idempotent
        Some((code_len, _)) if parse_block_marker(&content[..code_len], syntax).is_some() => {
            StripAction::Delete
        }
        Some((code_len, _)) => StripAction::Trim(&content[..code_len]),
        None => StripAction::Keep,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StripStats {
    pub lines_deleted: usize,
    pub lines_trimmed: usize,
}

impl StripStats {
    pub fn markers_removed(&self) -> usize {
        self.lines_deleted + self.lines_trimmed
    }
}

fn write_stripped<W: Write>(line: Line, syntax: &MarkerSyntax, out: &mut W, stats: &mut StripStats) -> io::Result<()> {
    match strip_line(line.content, syntax) {
        StripAction::Keep => {
            out.write_all(line.content)?;
            out.write_all(line.terminator)?;
        }
        StripAction::Trim(code) => {
            stats.lines_trimmed += 1;
            out.write_all(code)?;
            out.write_all(line.terminator)?;
        }
        StripAction::Delete => stats.lines_deleted += 1,
    }
    Ok(())
}

/// Removes every marker that matches the grammar. Lines that are not
/// markers pass through untouched.
pub fn strip_file(content: &[u8], syntax: &MarkerSyntax) -> Vec<u8> {
    strip_file_with_stats(content, syntax).0
}

pub fn strip_file_with_stats(content: &[u8], syntax: &MarkerSyntax) -> (Vec<u8>, StripStats) {
    let mut out = Vec::with_capacity(content.len());
    let mut stats = StripStats::default();
    for line in text::lines(content) {
        write_stripped(line, syntax, &mut out, &mut stats).expect("writing to a Vec cannot fail");
    }
    (out, stats)
}

/// Streaming form of [`strip_file`], one line in memory at a time.
pub fn strip_stream<R: BufRead, W: Write>(mut input: R, mut output: W, syntax: &MarkerSyntax) -> io::Result<StripStats> {
    let mut buf = Vec::new();
    let mut stats = StripStats::default();
    loop {
        buf.clear();
        if input.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        write_stripped(Line::from_raw(&buf), syntax, &mut output, &mut stats)?;
    }
    output.flush()?;
    Ok(stats)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NativeStripError {
    #[error("line {line} no longer holds the inserted text {expected:?}")]
    InsertedLineChanged { line: usize, expected: String },
    #[error("line {line} no longer carries its marker")]
    MarkerMissing { line: usize },
    #[error("file content changed since labeling (digest mismatch)")]
    DigestMismatch,
}

/// Undoes a labeling run using its manifest: removes inserted annotation
/// and import lines and trims line-marker suffixes. Refuses unless the
/// result hashes to the recorded original digest.
pub fn strip_native(content: &[u8], manifest: &FileManifest, syntax: &MarkerSyntax) -> Result<Vec<u8>, NativeStripError> {
    let lines: Vec<Line> = text::lines(content).collect();
    let mut remove = BTreeSet::new();
    for ins in &manifest.inserted {
        let ok = ins.line >= 1
            && lines.get(ins.line - 1).is_some_and(|l| {
                l.content == ins.content.as_bytes() && l.terminator == ins.terminator.as_bytes()
            });
        if !ok {
            return Err(NativeStripError::InsertedLineChanged {
                line: ins.line,
                expected: ins.content.clone(),
            });
        }
        remove.insert(ins.line);
    }
    let modified: BTreeSet<usize> = manifest.modified.iter().copied().collect();

    let mut out = Vec::with_capacity(content.len());
    for (idx, line) in lines.iter().enumerate() {
        let lineno = idx + 1;
        if remove.contains(&lineno) {
            continue;
        }
        if modified.contains(&lineno) {
            let Some((code_len, _)) = find_line_marker(line.content, syntax) else {
                return Err(NativeStripError::MarkerMissing { line: lineno });
            };
            out.extend_from_slice(&line.content[..code_len]);
        } else {
            out.extend_from_slice(line.content);
        }
        out.extend_from_slice(line.terminator);
    }
    if manifest::digest(&out) != manifest.original_digest {
        return Err(NativeStripError::DigestMismatch);
    }
    Ok(out)
}

/// True iff labeling then stripping gives back `original` exactly.
/// Label errors are surfaced rather than reported as `false`.
pub fn verify_roundtrip(
    original: &[u8],
    entries: &[&AnchoredMetadata],
    syntax: &MarkerSyntax,
    options: &LabelOptions,
) -> Result<bool, LabelError> {
    let outcome = label_file(original, entries, syntax, options)?;
    let restored = match options.style {
        MarkerStyle::Comment => strip_file(&outcome.labeled, syntax),
        MarkerStyle::Native => match strip_native(&outcome.labeled, &outcome.manifest, syntax) {
            Ok(bytes) => bytes,
            Err(_) => return Ok(false),
        },
    };
    Ok(restored == original)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syntax() -> MarkerSyntax {
        crate::analyzers::Registry::builtin().syntax().clone()
    }

    fn cov(line: usize, count: u64) -> AnchoredMetadata {
        AnchoredMetadata::Line {
            file: "A.java".into(),
            line,
            marker: LineMarker::new("coverage", "+", count.to_string()),
        }
    }

    fn author(line: usize, name: &str) -> AnchoredMetadata {
        AnchoredMetadata::Declaration {
            file: "A.java".into(),
            decl_path: "A.m".into(),
            line,
            marker: BlockMarker::new("author", "Author").positional(name),
        }
    }

    const METHOD: &str = "public void method() {\n  int i = 0;\n  while (i < 2) {\n    doSomething();\n    i++;\n  }\n}\n";

    #[test]
    fn coverage_snippet_shape() {
        let s = syntax();
        let plan = [cov(2, 1), cov(3, 3), cov(4, 2), cov(5, 2)];
        let refs: Vec<_> = plan.iter().collect();
        let out = label_file(METHOD.as_bytes(), &refs, &s, &LabelOptions::default()).unwrap();
        let labeled = String::from_utf8(out.labeled.clone()).unwrap();
        assert_eq!(
            labeled,
            "public void method() {\n  int i = 0; //+1\n  while (i < 2) { //+3\n    doSomething(); //+2\n    i++; //+2\n  }\n}\n"
        );
        assert_eq!(out.manifest.modified, vec![2, 3, 4, 5]);
        assert_eq!(strip_file(&out.labeled, &s), METHOD.as_bytes());
    }

    #[test]
    fn empty_plan_is_identity() {
        let s = syntax();
        let out = label_file(METHOD.as_bytes(), &[], &s, &LabelOptions::default()).unwrap();
        assert_eq!(out.labeled, METHOD.as_bytes());
        assert!(out.manifest.is_empty());
    }

    #[test]
    fn collision_refuses() {
        let s = syntax();
        let dirty = b"class A {\n  x(); //+1\n}\n";
        assert_eq!(marker::scan_collisions(dirty, &s).len(), 1);
        let plan = [cov(1, 1)];
        let refs: Vec<_> = plan.iter().collect();
        let err = label_file(dirty, &refs, &s, &LabelOptions::default()).unwrap_err();
        assert!(matches!(err, LabelError::Collision(ref c) if c[0].line == 2));
        // verification surfaces the label error instead of answering false
        assert!(verify_roundtrip(dirty, &refs, &s, &LabelOptions::default()).is_err());
    }

    #[test]
    fn block_markers_copy_indent_and_terminator() {
        let s = syntax();
        let src = b"class A {\r\n\tvoid m() {\r\n\t}\r\n}";
        let plan = [author(2, "Bob"), author(1, "Ann")];
        let refs: Vec<_> = plan.iter().collect();
        let out = label_file(src, &refs, &s, &LabelOptions::default()).unwrap();
        assert_eq!(
            out.labeled,
            b"//@ Author(\"Ann\")\r\nclass A {\r\n\t//@ Author(\"Bob\")\r\n\tvoid m() {\r\n\t}\r\n}".to_vec()
        );
        assert_eq!(text::line_count(&out.labeled), text::line_count(src) + 2);
        assert_eq!(strip_file(&out.labeled, &s), src.to_vec());
    }

    #[test]
    fn crlf_without_final_newline_roundtrips() {
        let s = syntax();
        let src = b"a();\r\nb();\r\nc();";
        let plan = [cov(1, 4), cov(3, 9)];
        let refs: Vec<_> = plan.iter().collect();
        let out = label_file(src, &refs, &s, &LabelOptions::default()).unwrap();
        assert_eq!(out.labeled, b"a(); //+4\r\nb();\r\nc(); //+9".to_vec());
        assert!(verify_roundtrip(src, &refs, &s, &LabelOptions::default()).unwrap());
    }

    #[test]
    fn out_of_range_entries_are_skipped_individually() {
        let s = syntax();
        let plan = [cov(1, 1), cov(99, 2), cov(0, 3)];
        let refs: Vec<_> = plan.iter().collect();
        let out = label_file(b"x();\n", &refs, &s, &LabelOptions::default()).unwrap();
        assert_eq!(out.labeled, b"x(); //+1\n");
        assert_eq!(out.skipped.len(), 2);
    }

    #[test]
    fn two_line_markers_on_one_line_conflict() {
        let s = syntax();
        let plan = [cov(1, 1), cov(1, 2)];
        let refs: Vec<_> = plan.iter().collect();
        let err = label_file(b"x();\n", &refs, &s, &LabelOptions::default()).unwrap_err();
        assert!(matches!(err, LabelError::Conflict { line: 1, .. }));
    }

    #[test]
    fn strip_is_identity_on_clean_input_and_idempotent() {
        let s = syntax();
        assert_eq!(strip_file(METHOD.as_bytes(), &s), METHOD.as_bytes());
        let tricky = b"//@ X() //+1\nfoo(); //+2 //+3\n  //@ Author(\"a\")\n";
        let once = strip_file(tricky, &s);
        assert_eq!(once, b"foo();\n");
        assert_eq!(strip_file(&once, &s), once);
    }

    #[test]
    fn two_analyzers_interleaved() {
        let s = syntax();
        let src = b"class A {\n  void m() {\n    f();\n  }\n}\n";
        let plan = [author(2, "Ann"), cov(3, 5), cov(2, 1)];
        let refs: Vec<_> = plan.iter().collect();
        let out = label_file(src, &refs, &s, &LabelOptions::default()).unwrap();
        assert_eq!(
            String::from_utf8(out.labeled.clone()).unwrap(),
            "class A {\n  //@ Author(\"Ann\")\n  void m() { //+1\n    f(); //+5\n  }\n}\n"
        );
        assert_eq!(strip_file(&out.labeled, &s), src.to_vec());
    }

    #[test]
    fn stream_matches_whole_file() {
        let s = syntax();
        let input = b"a(); //+1\r\n//@ X()\nb();";
        let mut out = Vec::new();
        strip_stream(&input[..], &mut out, &s).unwrap();
        assert_eq!(out, strip_file(input, &s));
    }

    const NATIVE_SRC: &str = "package demo;\n\nimport java.util.List;\n\npublic class Mat {\n    public int square(int a) {\n        return multiply(a, a);\n    }\n}\n";

    #[test]
    fn native_labels_with_imports_and_strips_them() {
        let s = syntax();
        let plan = [
            AnchoredMetadata::Declaration {
                file: "Mat.java".into(),
                decl_path: "Mat.square".into(),
                line: 6,
                marker: BlockMarker::new("callers", "Caller").arg("class", "Math").arg("method", "pow"),
            },
            author(6, "John Doe"),
            author(5, "John Doe"),
        ];
        let refs: Vec<_> = plan.iter().collect();
        let out = label_file(NATIVE_SRC.as_bytes(), &refs, &s, &LabelOptions::native()).unwrap();
        assert_eq!(
            String::from_utf8(out.labeled.clone()).unwrap(),
            "package demo;\n\nimport java.util.List;\nimport overmark.meta.Author;\nimport overmark.meta.Caller;\n\n\
             @Author(\"John Doe\")\npublic class Mat {\n    @Caller(clazz=Math.class, method=\"pow\")\n    @Author(\"John Doe\")\n\
             \x20   public int square(int a) {\n        return multiply(a, a);\n    }\n}\n"
        );
        assert_eq!(out.manifest.imports().count(), 2);
        // grammar-driven strip leaves native annotations alone
        assert_ne!(strip_file(&out.labeled, &s), NATIVE_SRC.as_bytes());
        let restored = strip_native(&out.labeled, &out.manifest, &s).unwrap();
        assert_eq!(restored, NATIVE_SRC.as_bytes());
    }

    #[test]
    fn native_import_placement_without_imports_or_package() {
        let s = syntax();
        let src = b"package p;\nclass A {}\n";
        let plan = [author(2, "x")];
        let refs: Vec<_> = plan.iter().collect();
        let out = label_file(src, &refs, &s, &LabelOptions::native()).unwrap();
        assert_eq!(
            out.labeled,
            b"package p;\nimport overmark.meta.Author;\n@Author(\"x\")\nclass A {}\n".to_vec()
        );
        let bare = b"class A {}";
        let plan = [author(1, "x")];
        let refs: Vec<_> = plan.iter().collect();
        let out = label_file(bare, &refs, &s, &LabelOptions::native()).unwrap();
        assert_eq!(out.labeled, b"import overmark.meta.Author;\n@Author(\"x\")\nclass A {}".to_vec());
        assert_eq!(strip_native(&out.labeled, &out.manifest, &s).unwrap(), bare.to_vec());
    }

    #[test]
    fn native_strip_detects_tampering() {
        let s = syntax();
        let plan = [author(5, "John Doe")];
        let refs: Vec<_> = plan.iter().collect();
        let out = label_file(NATIVE_SRC.as_bytes(), &refs, &s, &LabelOptions::native()).unwrap();
        let marker_line = out.manifest.inserted.iter().find(|l| l.kind == InsertKind::Marker).unwrap();
        let mut tampered = out.labeled.clone();
        let offset = text::lines(&out.labeled)
            .take(marker_line.line - 1)
            .map(|l| l.content.len() + l.terminator.len())
            .sum::<usize>();
        tampered[offset + 3] ^= 0x01;
        assert!(matches!(
            strip_native(&tampered, &out.manifest, &s),
            Err(NativeStripError::InsertedLineChanged { .. })
        ));

        let mut edited = out.labeled.clone();
        edited.extend_from_slice(b"// new\n");
        assert_eq!(strip_native(&edited, &out.manifest, &s), Err(NativeStripError::DigestMismatch));
    }

    #[test]
    fn native_with_no_entries() {
        let s = syntax();
        let out = label_file(NATIVE_SRC.as_bytes(), &[], &s, &LabelOptions::native()).unwrap();
        assert!(out.manifest.is_empty());
        assert_eq!(strip_native(&out.labeled, &out.manifest, &s).unwrap(), NATIVE_SRC.as_bytes());
    }
}
