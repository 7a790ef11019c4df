//! Metadata producers. Each analyzer turns scanned project state into
//! anchored markers; [`run_analyzers`] merges their output into one plan.
//!
//! New analyzers implement [`Analyzer`] and register an
//! [`AnalyzerDescriptor`] so the marker grammar knows their sigil or
//! block-marker names.

mod author;
mod callers;
mod coverage;

use std::collections::BTreeMap;

use thiserror::Error;

pub use author::{author_plan, AuthorAnalyzer, BlameInfo, BlameLine, BlameSource};
pub use callers::{callers_plan, CallersAnalyzer};
pub use coverage::{coverage_plan, parse_lcov, CoverageAnalyzer, CoverageMode, CoverageReport, LcovError};

use crate::manifest::MarkerStyle;
use crate::marker::{MarkerSyntax, DEFAULT_BLOCK_SIGIL, DEFAULT_LINE_COMMENT};
use crate::overlay::{AnchoredMetadata, OverlayPlan};
use crate::scan::{CallSite, Declaration};

pub const CALLERS: &str = "callers";
pub const AUTHOR: &str = "author";
pub const COVERAGE: &str = "coverage";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Granularity {
    Line,
    Declaration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Emits {
    Sigil(String),
    MarkerNames(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyzerDescriptor {
    pub id: String,
    pub granularity: Granularity,
    pub emits: Emits,
    /// Keys accepted in this analyzer's `[analyzer.<id>]` config section.
    pub config_keys: Vec<String>,
    pub summary: String,
}

/// Known analyzers in their fixed merge order, plus the marker syntax
/// derived from them.
#[derive(Debug, Clone)]
pub struct Registry {
    descriptors: Vec<AnalyzerDescriptor>,
    syntax: MarkerSyntax,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RegistryError {
    #[error("analyzer id {0:?} registered twice")]
    DuplicateId(String),
    #[error(transparent)]
    Syntax(#[from] crate::marker::MarkerError),
}

impl Registry {
    pub fn new(
        line_comment_token: &str,
        block_prefix: &str,
        descriptors: Vec<AnalyzerDescriptor>,
    ) -> Result<Self, RegistryError> {
        let mut sigils = Vec::new();
        let mut names = Vec::new();
        for (i, d) in descriptors.iter().enumerate() {
            if descriptors[..i].iter().any(|o| o.id == d.id) {
                return Err(RegistryError::DuplicateId(d.id.clone()));
            }
            match &d.emits {
                Emits::Sigil(s) => sigils.push((d.id.clone(), s.clone())),
                Emits::MarkerNames(ns) => names.extend(ns.iter().map(|n| (n.clone(), d.id.clone()))),
            }
        }
        let syntax = MarkerSyntax::new(line_comment_token, block_prefix, sigils, names)?;
        Ok(Registry { descriptors, syntax })
    }

    /// `callers`, `author`, `coverage`, in that order, with `//` comments.
    pub fn builtin() -> Self {
        Self::builtin_with(DEFAULT_LINE_COMMENT, &format!("{DEFAULT_LINE_COMMENT}{DEFAULT_BLOCK_SIGIL}"))
            .expect("builtin registry is valid")
    }

    /// The built-in analyzers under a different comment convention.
    pub fn builtin_with(line_comment_token: &str, block_prefix: &str) -> Result<Self, RegistryError> {
        Registry::new(
            line_comment_token,
            block_prefix,
            vec![
                CallersAnalyzer::descriptor(),
                AuthorAnalyzer::descriptor(),
                CoverageAnalyzer::descriptor(),
            ],
        )
    }

    pub fn syntax(&self) -> &MarkerSyntax {
        &self.syntax
    }

    pub fn descriptors(&self) -> &[AnalyzerDescriptor] {
        &self.descriptors
    }

    pub fn get(&self, id: &str) -> Option<&AnalyzerDescriptor> {
        self.descriptors.iter().find(|d| d.id == id)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.descriptors.iter().position(|d| d.id == id)
    }
}

/// Selection of declarations by exact `Class` or `Class.method` path.
/// Selecting a class selects everything nested in it. Empty selects all.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TargetFilter {
    targets: Vec<String>,
}

impl TargetFilter {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(targets: I) -> Self {
        TargetFilter {
            targets: targets.into_iter().map(Into::into).collect(),
        }
    }

    pub fn all() -> Self {
        TargetFilter::default()
    }

    pub fn is_all(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn selects(&self, qualified_path: &str) -> bool {
        self.is_all()
            || self.targets.iter().any(|t| {
                qualified_path == t
                    || (qualified_path.starts_with(t.as_str()) && qualified_path.as_bytes()[t.len()] == b'.')
            })
    }

    /// Whether a line of a file falls inside a selected declaration.
    pub fn selects_line(&self, decls: &[Declaration], line: usize) -> bool {
        self.is_all()
            || decls.iter().any(|d| {
                d.body_span.0 <= line && line <= d.body_span.1 && self.selects(&d.qualified_path)
            })
    }
}

/// One scanned source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    /// Project-relative path with `/` separators.
    pub path: String,
    pub line_count: usize,
    pub decls: Vec<Declaration>,
    pub calls: Vec<CallSite>,
}

/// Everything analyzers may read. Files are sorted by path.
#[derive(Debug, Clone, Default)]
pub struct ProjectState {
    pub files: Vec<SourceFile>,
}

impl ProjectState {
    pub fn file(&self, path: &str) -> Option<&SourceFile> {
        self.files
            .binary_search_by(|f| f.path.as_str().cmp(path))
            .ok()
            .map(|i| &self.files[i])
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlanOutput {
    pub entries: Vec<AnchoredMetadata>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalyzerError {
    #[error("{analyzer}: {message}")]
    Input { analyzer: String, message: String },
    #[error("{analyzer}: {message}")]
    Environment { analyzer: String, message: String },
}

pub trait Analyzer: Send + Sync {
    fn id(&self) -> &str;

    fn plan(&self, project: &ProjectState, targets: &TargetFilter) -> Result<PlanOutput, AnalyzerError>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineConflict {
    pub file: String,
    pub line: usize,
    pub analyzers: (String, String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("analyzer {0:?} is not registered")]
    Unregistered(String),
    #[error("{} line(s) claimed by two analyzers: {}", .0.len(), describe_conflicts(.0))]
    Conflicts(Vec<LineConflict>),
    #[error(transparent)]
    Analyzer(#[from] AnalyzerError),
}

fn describe_conflicts(conflicts: &[LineConflict]) -> String {
    conflicts
        .iter()
        .map(|c| format!("{}:{} ({} vs {})", c.file, c.line, c.analyzers.0, c.analyzers.1))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Runs the active analyzers and merges their plans. Entries end up grouped
/// by file, ordered by line, and at one line ordered by registry position.
pub fn run_analyzers(
    active: &[&dyn Analyzer],
    registry: &Registry,
    project: &ProjectState,
    targets: &TargetFilter,
    style: MarkerStyle,
) -> Result<(OverlayPlan, Vec<String>), PlanError> {
    let mut ordered = Vec::with_capacity(active.len());
    for a in active {
        let pos = registry
            .position(a.id())
            .ok_or_else(|| PlanError::Unregistered(a.id().to_string()))?;
        ordered.push((pos, *a));
    }
    ordered.sort_by_key(|(pos, _)| *pos);

    let mut tagged = Vec::new();
    let mut warnings = Vec::new();
    for (pos, analyzer) in ordered {
        let out = analyzer.plan(project, targets)?;
        warnings.extend(out.warnings.into_iter().map(|w| format!("{}: {w}", analyzer.id())));
        tagged.extend(out.entries.into_iter().map(|e| (pos, e)));
    }
    tagged.sort_by(|(pa, a), (pb, b)| (a.file(), a.line(), pa).cmp(&(b.file(), b.line(), pb)));

    let mut conflicts = Vec::new();
    let mut owners: BTreeMap<(&str, usize), &str> = BTreeMap::new();
    for (_, e) in &tagged {
        if let AnchoredMetadata::Line { file, line, marker } = e {
            if let Some(prev) = owners.insert((file.as_str(), *line), &marker.analyzer_id) {
                conflicts.push(LineConflict {
                    file: file.clone(),
                    line: *line,
                    analyzers: (prev.to_string(), marker.analyzer_id.clone()),
                });
            }
        }
    }
    if !conflicts.is_empty() {
        return Err(PlanError::Conflicts(conflicts));
    }

    let plan = OverlayPlan {
        entries: tagged.into_iter().map(|(_, e)| e).collect(),
        style,
    };
    Ok((plan, warnings))
}
