#![allow(dead_code)]

pub mod oracle;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use overmark::analyzers::{AUTHOR, COVERAGE};
use overmark::config::{ConfigLayer, ToolConfig};
use overmark::manifest::MarkerStyle;
use overmark::marker::{BlockMarker, LineMarker, DEFAULT_COVERAGE_SIGIL};
use overmark::overlay::AnchoredMetadata;

pub const METHOD_NAMES: &[&str] = &[
    "compute", "render", "parse", "load", "store", "merge", "split", "reset", "update", "check",
];

const COMMENTS: &[&[u8]] = &[
    b"// keep this in sync with the caller",
    b"// TODO: handle negative values",
    b"// Gr\xc3\xbc\xc3\x9fe aus K\xc3\xb6ln",
    b"// \xe6\x97\xa5\xe6\x9c\xac\xe8\xaa\x9e comment",
    b"// latin-1 caf\xe9 (not utf-8)",
    b"// x + y is fine here",
    b"// see http://example.com/a?b",
];

/// One generated Java-like source file.
#[derive(Debug, Clone)]
pub struct CorpusFile {
    pub path: String,
    pub bytes: Vec<u8>,
}

fn pick<'a, T>(rng: &mut StdRng, items: &'a [T]) -> &'a T {
    &items[rng.random_range(0..items.len())]
}

struct Writer<'r> {
    rng: &'r mut StdRng,
    out: Vec<u8>,
    eol_mode: u8,
    trailing_ws: bool,
}

impl Writer<'_> {
    fn line(&mut self, indent: usize, text: &[u8]) {
        self.out.extend(std::iter::repeat_n(b' ', indent));
        self.out.extend_from_slice(text);
        if self.trailing_ws && self.rng.random_bool(0.2) {
            let ws: &[u8] = pick(self.rng, &[b" ".as_slice(), b"  ", b"\t", b" \t "]);
            self.out.extend_from_slice(ws);
        }
        let crlf = match self.eol_mode {
            0 => false,
            1 => true,
            _ => self.rng.random_bool(0.5),
        };
        self.out.extend_from_slice(if crlf { b"\r\n" } else { b"\n" });
    }

    fn blank(&mut self) {
        let t = self.trailing_ws;
        self.trailing_ws = false;
        self.line(0, b"");
        self.trailing_ws = t;
    }
}

fn method(w: &mut Writer, indent: usize, name: &str, calls: &[&str]) {
    let header = match w.rng.random_range(0..4) {
        0 => format!("public int {name}(int a, int b) {{"),
        1 => format!("private static void {name}() {{"),
        2 => format!("String {name}(String s)"),
        _ => format!("protected long {name}(long n) throws Exception {{"),
    };
    let brace_own_line = !header.ends_with('{');
    w.line(indent, header.as_bytes());
    if brace_own_line {
        w.line(indent, b"{");
    }
    let body = indent + 4;
    if w.rng.random_bool(0.4) {
        let c = *pick(w.rng, COMMENTS);
        w.line(body, c);
    }
    w.line(body, b"int x = 1;");
    for callee in calls {
        match w.rng.random_range(0..4) {
            0 => w.line(body, format!("x += {callee}(x, 2);").as_bytes()),
            1 => w.line(body, format!("if (x > 0) {{ {callee}(); }}").as_bytes()),
            2 => {
                w.line(body, b"while (x < 10) {");
                w.line(body + 4, format!("{callee}(x); // bump").as_bytes());
                w.line(body + 4, b"x++;");
                w.line(body, b"}");
            }
            _ => w.line(body, format!("String s = \"{{ {callee} }}\" + {callee}(\"(\");").as_bytes()),
        }
    }
    if w.rng.random_bool(0.3) {
        w.line(body, b"char c = '}';");
    }
    if w.rng.random_bool(0.3) {
        w.line(body, b"/* block { comment");
        w.line(body, b"   spanning ( lines */");
    }
    w.line(body, b"return;");
    w.line(indent, b"}");
}

/// A Java-like file inside the scanner's subset, with a mix of line
/// endings, trailing whitespace, missing final newlines and non-ASCII
/// (sometimes non-UTF-8) bytes.
pub fn generate_file(rng: &mut StdRng, index: usize) -> CorpusFile {
    let eol_mode = rng.random_range(0..3u8);
    let trailing_ws = rng.random_bool(0.5);
    let mut w = Writer { rng, out: Vec::new(), eol_mode, trailing_ws };
    let class = format!("C{index}");
    let pkg = index % 7;

    if w.rng.random_bool(0.8) {
        w.line(0, format!("package demo.p{pkg};").as_bytes());
        w.blank();
    }
    for _ in 0..w.rng.random_range(0..3) {
        let imp: &str = pick(w.rng, &["java.util.List", "java.io.File", "java.util.Map"]);
        w.line(0, format!("import {imp};").as_bytes());
    }
    if w.rng.random_bool(0.5) {
        w.line(0, b"/* Header comment with a { brace");
        w.line(0, b"   and a \"quote\" */");
    }
    w.line(0, format!("public class {class} {{").as_bytes());
    w.line(4, b"private int count = 0;");
    if w.rng.random_bool(0.5) {
        w.line(4, b"static final String S = \"text { with } braces // not a comment\";");
    }
    let n_methods = w.rng.random_range(1..5);
    for _ in 0..n_methods {
        w.blank();
        let name = *pick(w.rng, METHOD_NAMES);
        let calls: Vec<&str> = (0..w.rng.random_range(0..3)).map(|_| *pick(w.rng, METHOD_NAMES)).collect();
        method(&mut w, 4, name, &calls);
    }
    if w.rng.random_bool(0.4) {
        w.blank();
        w.line(4, b"static class Inner {");
        let name = *pick(w.rng, METHOD_NAMES);
        let callee = *pick(w.rng, METHOD_NAMES);
        method(&mut w, 8, name, &[callee]);
        w.line(4, b"}");
    }
    w.line(0, b"}");

    let mut bytes = w.out;
    if rng.random_bool(0.25) {
        // no final newline
        while matches!(bytes.last(), Some(b'\n' | b'\r')) {
            bytes.pop();
        }
    }
    CorpusFile {
        path: format!("src/p{pkg}/{class}.java"),
        bytes,
    }
}

pub fn corpus(n: usize, seed: u64) -> Vec<CorpusFile> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n).map(|i| generate_file(&mut rng, i)).collect()
}

/// Hand-written files hitting edge cases the generator may not.
pub fn edge_files() -> Vec<CorpusFile> {
    let f = |path: &str, bytes: &[u8]| CorpusFile { path: path.into(), bytes: bytes.to_vec() };
    vec![
        f("edge/Empty.java", b""),
        f("edge/OneLine.java", b"class OneLine { }"),
        f("edge/OnlyNewlines.java", b"\n\n\r\n\n"),
        f("edge/Crlf.java", b"class A {\r\n  void m() {\r\n    x();  \r\n  }\r\n}"),
        f("edge/BareCr.java", b"class B {\r  void m() { }\r}\n"),
        f("edge/Latin1.java", b"class L {\n  // caf\xe9\n  String s = \"\xff\xfe\";\n}\n"),
        f("edge/Tabs.java", b"class T {\n\tvoid m() {\n\t\ty();\t\n\t}\n}\n\n"),
        f("edge/BraceInString.java", b"class S {\n  String s = \"{\";\n}\n"),
    ]
}

/// A plan entry description independent of file content.
#[derive(Debug, Clone)]
pub enum PlanItem {
    Line { line: usize, payload: String },
    Block { line: usize, name: String, args: Vec<(String, String)> },
}

pub fn to_entries(file: &str, items: &[PlanItem]) -> Vec<AnchoredMetadata> {
    let mut seen_lines = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for item in items {
        match item {
            PlanItem::Line { line, payload } => {
                if seen_lines.insert(*line) {
                    out.push(AnchoredMetadata::Line {
                        file: file.into(),
                        line: *line,
                        marker: LineMarker::new(COVERAGE, DEFAULT_COVERAGE_SIGIL, payload.clone()),
                    });
                }
            }
            PlanItem::Block { line, name, args } => {
                let mut m = BlockMarker::new(AUTHOR, name.clone());
                for (k, v) in args {
                    m = m.arg(k.clone(), v.clone());
                }
                out.push(AnchoredMetadata::Declaration {
                    file: file.into(),
                    decl_path: format!("X.m{line}"),
                    line: *line,
                    marker: m,
                });
            }
        }
    }
    out.sort_by_key(|e| e.line());
    out
}

pub fn plan_strategy(max_line: usize) -> impl proptest::strategy::Strategy<Value = Vec<PlanItem>> {
    use proptest::prelude::*;
    let max_line = max_line.max(1);
    // values avoid '/' so a block line can never contain a line-marker pattern
    let value = "[a-zA-Z0-9 _.\"\\\\äé日-]{0,12}";
    let line_item = (1..=max_line, "[ -~]{0,10}").prop_map(|(line, payload)| PlanItem::Line { line, payload });
    let block_item = (
        1..=max_line,
        prop_oneof![Just("Caller"), Just("Author"), Just("Note")],
        proptest::collection::vec((prop_oneof![Just(""), Just("class"), Just("method"), Just("k2")], value), 0..3),
    )
        .prop_map(|(line, name, args)| PlanItem::Block {
            line,
            name: name.to_string(),
            args: args.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        });
    proptest::collection::vec(prop_oneof![line_item, block_item], 0..12)
}

pub fn write_tree(root: &Path, files: &[CorpusFile]) {
    for f in files {
        let p = root.join(&f.path);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, &f.bytes).unwrap();
    }
}

/// All regular files under `root` (skipping `.git`), keyed by relative path.
pub fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    walkdir::WalkDir::new(root)
        .into_iter()
        .filter_entry(|e| e.file_name() != ".git")
        .map(Result::unwrap)
        .filter(|e| e.file_type().is_file())
        .map(|e| {
            let rel = e.path().strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
            (rel, fs::read(e.path()).unwrap())
        })
        .collect()
}

pub fn config_for(root: &Path, f: impl FnOnce(&mut ConfigLayer)) -> ToolConfig {
    let mut layer = ConfigLayer {
        project_root: Some(root.to_path_buf()),
        jobs: Some(2),
        ..Default::default()
    };
    f(&mut layer);
    ToolConfig::resolve(layer).expect("valid test config")
}

pub fn native(layer: &mut ConfigLayer) {
    layer.marker_style = Some(MarkerStyle::Native);
}

pub fn git(dir: &Path, args: &[&str]) -> Output {
    git_env(dir, args, &[])
}

pub fn git_env(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let out = Command::new("git")
        .arg("-C")
        .arg(dir)
        .args(["-c", "commit.gpgsign=false", "-c", "core.autocrlf=false", "-c", "init.defaultBranch=main"])
        .args(args)
        .env("GIT_CONFIG_NOSYSTEM", "1")
        .env("HOME", dir)
        .envs(env.iter().copied())
        .output()
        .expect("git runs");
    assert!(
        out.status.success(),
        "git {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn init_repo(dir: &Path) {
    git(dir, &["init", "-q"]);
    git(dir, &["config", "user.name", "Test"]);
    git(dir, &["config", "user.email", "test@example.com"]);
}

/// Commits everything staged as `author` at `time` (seconds since epoch),
/// for both author and committer dates.
pub fn commit_as(dir: &Path, author: &str, time: i64, message: &str) {
    let date = format!("@{time} +0000");
    let email = format!("{}@example.com", author.to_lowercase().replace(' ', "."));
    git_env(
        dir,
        &["commit", "-q", "-m", message],
        &[
            ("GIT_AUTHOR_NAME", author),
            ("GIT_AUTHOR_EMAIL", &email),
            ("GIT_COMMITTER_NAME", author),
            ("GIT_COMMITTER_EMAIL", &email),
            ("GIT_AUTHOR_DATE", &date),
            ("GIT_COMMITTER_DATE", &date),
        ],
    );
}

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_overmark"))
}
