use std::collections::BTreeMap;
use std::path::{Component, Path};
use std::str::FromStr;

use thiserror::Error;

use super::{Analyzer, AnalyzerDescriptor, AnalyzerError, Emits, Granularity, PlanOutput, ProjectState, TargetFilter, COVERAGE};
use crate::marker::{LineMarker, DEFAULT_COVERAGE_SIGIL};
use crate::overlay::AnchoredMetadata;

/// Per-file, per-line execution counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoverageReport {
    pub files: BTreeMap<String, BTreeMap<usize, u64>>,
}

impl CoverageReport {
    pub fn record_count(&self) -> usize {
        self.files.values().map(BTreeMap::len).sum()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum CoverageMode {
    /// Only lines executed at least once.
    #[default]
    Counts,
    /// Also instrumented lines that never ran, with payload `0`.
    Full,
}

impl FromStr for CoverageMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "counts" => Ok(CoverageMode::Counts),
            "full" => Ok(CoverageMode::Full),
            other => Err(format!("unknown coverage mode {other:?} (expected counts or full)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LcovError {
    #[error("lcov line {line}: {message}")]
    Malformed { line: usize, message: String },
}

fn normalize(path: &Path) -> Option<String> {
    let mut parts: Vec<String> = Vec::new();
    for c in path.components() {
        match c {
            Component::Normal(p) => parts.push(p.to_str()?.to_string()),
            Component::CurDir => {}
            Component::ParentDir => {
                parts.pop()?;
            }
            Component::RootDir | Component::Prefix(_) => return None,
        }
    }
    Some(parts.join("/"))
}

/// Maps an `SF:` path onto a project-relative path. Relative paths are
/// taken relative to the root; absolute ones must lie inside it.
pub fn resolve_report_path(sf: &str, root: &Path) -> Result<String, String> {
    let path = Path::new(sf);
    let relative = if path.is_absolute() {
        let canonical_root = root.canonicalize().ok();
        path.strip_prefix(root)
            .ok()
            .or_else(|| canonical_root.as_deref().and_then(|r| path.strip_prefix(r).ok()))
            .ok_or_else(|| format!("{sf} is outside the project root"))?
            .to_path_buf()
    } else {
        path.to_path_buf()
    };
    normalize(&relative).ok_or_else(|| format!("{sf} does not resolve inside the project root"))
}

/// Reads `SF`, `DA` and `end_of_record` records; every other record type is
/// ignored. Repeated `DA` records for one line are summed. Files outside
/// the root are dropped with a warning.
pub fn parse_lcov(text: &str, root: &Path) -> Result<(CoverageReport, Vec<String>), LcovError> {
    let mut report = CoverageReport::default();
    let mut warnings = Vec::new();
    // Some(None) while inside a record for a file we are skipping
    let mut current: Option<Option<String>> = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let malformed = |message: String| LcovError::Malformed { line: lineno, message };
        let line = raw.trim();
        if let Some(sf) = line.strip_prefix("SF:") {
            current = Some(match resolve_report_path(sf, root) {
                Ok(rel) => Some(rel),
                Err(w) => {
                    warnings.push(w);
                    None
                }
            });
        } else if let Some(da) = line.strip_prefix("DA:") {
            let Some(file) = current.as_ref() else {
                return Err(malformed("DA record outside of an SF record".into()));
            };
            let mut fields = da.split(',');
            let (Some(l), Some(c)) = (fields.next(), fields.next()) else {
                return Err(malformed(format!("expected DA:<line>,<count>, got {line:?}")));
            };
            let l: usize = l.trim().parse().map_err(|_| malformed(format!("bad line number {l:?}")))?;
            let c: u64 = c.trim().parse().map_err(|_| malformed(format!("bad execution count {c:?}")))?;
            if l == 0 {
                return Err(malformed("line numbers start at 1".into()));
            }
            if let Some(file) = file {
                let slot = report.files.entry(file.clone()).or_default().entry(l).or_insert(0);
                *slot = slot.saturating_add(c);
            }
        } else if line == "end_of_record" {
            current = None;
        }
    }
    Ok((report, warnings))
}

/// Line markers carrying execution counts. In `Counts` mode only lines run
/// at least once are marked; `Full` also marks zero-count lines. Lines not
/// in the report get nothing; records past the end of a file are dropped
/// with a warning.
pub fn coverage_plan(
    report: &CoverageReport,
    project: &ProjectState,
    targets: &TargetFilter,
    mode: CoverageMode,
) -> PlanOutput {
    let mut out = PlanOutput::default();
    for (path, lines) in &report.files {
        let Some(file) = project.file(path) else {
            out.warnings.push(format!("{path} is in the report but not among the selected files"));
            continue;
        };
        for (&line, &count) in lines {
            if line > file.line_count {
                out.warnings.push(format!(
                    "{path}:{line} is past the end of the file ({} lines); dropped",
                    file.line_count
                ));
                continue;
            }
            if count == 0 && mode == CoverageMode::Counts {
                continue;
            }
            if !targets.selects_line(&file.decls, line) {
                continue;
            }
            out.entries.push(AnchoredMetadata::Line {
                file: path.clone(),
                line,
                marker: LineMarker::new(COVERAGE, DEFAULT_COVERAGE_SIGIL, count.to_string()),
            });
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct CoverageAnalyzer {
    pub report: CoverageReport,
    pub mode: CoverageMode,
}

impl CoverageAnalyzer {
    pub fn descriptor() -> AnalyzerDescriptor {
        AnalyzerDescriptor {
            id: COVERAGE.into(),
            granularity: Granularity::Line,
            emits: Emits::Sigil(DEFAULT_COVERAGE_SIGIL.into()),
            config_keys: vec!["report".into(), "mode".into()],
            summary: "per-line execution counts from an LCOV report".into(),
        }
    }
}

impl Analyzer for CoverageAnalyzer {
    fn id(&self) -> &str {
        COVERAGE
    }

    fn plan(&self, project: &ProjectState, targets: &TargetFilter) -> Result<PlanOutput, AnalyzerError> {
        Ok(coverage_plan(&self.report, project, targets, self.mode))
    }
}
