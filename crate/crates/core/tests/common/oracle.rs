//! Brute-force re-derivations of scanner and analyzer results, written
//! with regexes and no code from the library.

use std::collections::{BTreeMap, BTreeSet};

use regex::{Captures, Regex};

#[derive(Debug, Clone)]
pub struct OracleDecl {
    pub is_class: bool,
    pub name: String,
    pub qualified: String,
    pub header_line: usize,
    /// Byte offsets of the opening and closing brace in the blanked text.
    pub open: usize,
    pub close: usize,
}

/// Replaces comments and string/char literals with spaces, keeping
/// newlines so line numbers survive.
pub fn blank_noise(src: &str) -> String {
    let re = Regex::new(r#"(?s)/\*.*?\*/|//[^\n]*|"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*'"#).unwrap();
    re.replace_all(src, |c: &Captures| {
        c[0].bytes().map(|b| if b == b'\n' { '\n' } else { ' ' }).collect::<String>()
    })
    .into_owned()
}

fn line_of(text: &str, offset: usize) -> usize {
    text.as_bytes()[..offset].iter().filter(|b| **b == b'\n').count() + 1
}

fn matching_close(text: &str, open: usize) -> usize {
    let mut depth = 0usize;
    for (i, b) in text.bytes().enumerate().skip(open) {
        match b {
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return i;
                }
            }
            _ => {}
        }
    }
    panic!("unbalanced braces in oracle input");
}

const NOT_METHOD_NAMES: &[&str] = &["if", "while", "for", "switch", "catch", "synchronized", "return"];

pub fn decls(src: &str) -> Vec<OracleDecl> {
    let clean = blank_noise(src);
    let class_re = Regex::new(r"\b(?:class|interface|enum)\s+([A-Za-z_]\w*)[^{;]*\{").unwrap();
    let method_re = Regex::new(
        r"(?m)(?:^|\r)[ \t]*(?:(?:public|private|protected|static|final|synchronized|abstract|native)\s+)*[A-Za-z_][\w\[\]]*\s+([A-Za-z_]\w*)\s*\([^)]*\)\s*(?:throws\s+[\w\s,.]+?)?\s*\{",
    )
    .unwrap();

    let mut out = Vec::new();
    for c in class_re.captures_iter(&clean) {
        let m = c.get(0).unwrap();
        let open = m.end() - 1;
        out.push(OracleDecl {
            is_class: true,
            name: c[1].to_string(),
            qualified: String::new(),
            header_line: line_of(&clean, m.start()),
            open,
            close: matching_close(&clean, open),
        });
    }
    for c in method_re.captures_iter(&clean) {
        if NOT_METHOD_NAMES.contains(&&c[1]) {
            continue;
        }
        let m = c.get(0).unwrap();
        let first = m.start() + m.as_str().len() - m.as_str().trim_start().len();
        let open = m.end() - 1;
        out.push(OracleDecl {
            is_class: false,
            name: c[1].to_string(),
            qualified: String::new(),
            header_line: line_of(&clean, first),
            open,
            close: matching_close(&clean, open),
        });
    }
    out.sort_by_key(|d| d.open);

    let classes: Vec<(usize, usize, String)> = out
        .iter()
        .filter(|d| d.is_class)
        .map(|d| (d.open, d.close, d.name.clone()))
        .collect();
    for d in &mut out {
        let mut path: Vec<&str> = classes
            .iter()
            .filter(|(o, c, _)| *o < d.open && d.close < *c)
            .map(|(_, _, n)| n.as_str())
            .collect();
        path.push(&d.name);
        d.qualified = path.join(".");
    }
    out
}

/// `(callee, caller)` pairs by qualified path: method `a` calls `b` when
/// `a`'s body text contains `b`'s name followed by `(`.
pub fn caller_pairs(files: &[String]) -> BTreeSet<(String, String)> {
    let mut methods = Vec::new();
    for src in files {
        let clean = blank_noise(src);
        for d in decls(src).into_iter().filter(|d| !d.is_class) {
            let body = clean[d.open + 1..d.close].to_string();
            methods.push((d, body));
        }
    }
    let mut pairs = BTreeSet::new();
    for (a, body) in &methods {
        for (b, _) in &methods {
            let re = Regex::new(&format!(r"\b{}\s*\(", regex::escape(&b.name))).unwrap();
            if re.is_match(body) {
                pairs.insert((b.qualified.clone(), a.qualified.clone()));
            }
        }
    }
    pairs
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PorcelainLine {
    pub author: String,
    pub committer_time: i64,
    pub commit: String,
}

/// Parses `git blame --line-porcelain` output into final-line → entry.
pub fn porcelain(text: &str) -> BTreeMap<usize, PorcelainLine> {
    let header = Regex::new(r"^([0-9a-f]{40}) \d+ (\d+)").unwrap();
    let mut out = BTreeMap::new();
    let mut cur: Option<(String, usize)> = None;
    let mut author = String::new();
    let mut time = 0i64;
    for line in text.lines() {
        if let Some(c) = header.captures(line) {
            cur = Some((c[1].to_string(), c[2].parse().unwrap()));
        } else if let Some(a) = line.strip_prefix("author ") {
            author = a.to_string();
        } else if let Some(t) = line.strip_prefix("committer-time ") {
            time = t.parse().unwrap();
        } else if line.starts_with('\t') {
            let (commit, final_line) = cur.take().unwrap();
            out.insert(
                final_line,
                PorcelainLine {
                    author: author.clone(),
                    committer_time: time,
                    commit,
                },
            );
        }
    }
    out
}

/// `SF` path → (line → summed count), from an LCOV text.
pub fn lcov(text: &str) -> BTreeMap<String, BTreeMap<usize, u64>> {
    let mut out: BTreeMap<String, BTreeMap<usize, u64>> = BTreeMap::new();
    let mut file = None;
    for line in text.lines() {
        if let Some(sf) = line.strip_prefix("SF:") {
            file = Some(sf.to_string());
        } else if let Some(da) = line.strip_prefix("DA:") {
            let mut it = da.split(',');
            let l: usize = it.next().unwrap().parse().unwrap();
            let c: u64 = it.next().unwrap().parse().unwrap();
            *out.entry(file.clone().unwrap()).or_default().entry(l).or_default() += c;
        } else if line == "end_of_record" {
            file = None;
        }
    }
    out
}
