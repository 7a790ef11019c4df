//! The user-facing operations behind each subcommand.
//!
//! Every command works on the files selected by the configuration's
//! include/exclude globs under the project root. Commands return a report
//! value; rendering and exit codes are left to the caller.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;
use walkdir::WalkDir;

use crate::analyzers::{
    parse_lcov, run_analyzers, Analyzer, AnalyzerError, AuthorAnalyzer, CallersAnalyzer, CoverageAnalyzer,
    PlanError, ProjectState, Registry, SourceFile, TargetFilter, AUTHOR, CALLERS, COVERAGE,
};
use crate::config::ToolConfig;
use crate::manifest::{InsertKind, LabelManifest, MarkerStyle, MANIFEST_DIR, MANIFEST_FILE};
use crate::marker::{parse_block_marker, parse_line_marker, scan_collisions, MarkerSyntax};
use crate::overlay::{self, label_file, strip_native, verify_roundtrip, LabelOptions, OverlayPlan};
use crate::scan::{scan_call_sites, scan_declarations};
use crate::text;
use crate::vcs::{self, GitBlame, HookReport, RepoContext, VcsError};

#[derive(Debug, Error)]
pub enum CommandError {
    /// Bad configuration or arguments.
    #[error("{0}")]
    Config(String),
    /// Something outside the project is missing or broken: git, the
    /// filesystem, permissions.
    #[error("{0}")]
    Environment(String),
    /// The operation ran but refused or found problems.
    #[error("{0}")]
    Failed(String),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Failed(_) => 1,
            CommandError::Config(_) => 2,
            CommandError::Environment(_) => 3,
        }
    }
}

impl From<VcsError> for CommandError {
    fn from(e: VcsError) -> Self {
        match e {
            VcsError::ForeignHook(_) => CommandError::Failed(e.to_string()),
            _ => CommandError::Environment(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: io::Error) -> CommandError {
    CommandError::Environment(format!("{}: {e}", path.display()))
}

pub fn manifest_path(root: &Path) -> PathBuf {
    root.join(MANIFEST_DIR).join(MANIFEST_FILE)
}

/// Project-relative paths of the selected files, sorted.
pub fn collect_files(config: &ToolConfig) -> Result<Vec<String>, CommandError> {
    let filter = config.file_filter().map_err(|e| CommandError::Config(e.to_string()))?;
    let root = &config.project_root;
    let mut files = Vec::new();
    let walker = WalkDir::new(root)
        .into_iter()
        .filter_entry(|e| e.depth() == 0 || (e.file_name() != ".git" && e.file_name() != MANIFEST_DIR));
    for entry in walker {
        let entry = entry.map_err(|e| CommandError::Environment(e.to_string()))?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry.path().strip_prefix(root).expect("walk stays under the root");
        let Some(rel) = rel.to_str() else {
            continue;
        };
        let rel = rel.replace(std::path::MAIN_SEPARATOR, "/");
        if filter.matches(&rel) {
            files.push(rel);
        }
    }
    files.sort();
    Ok(files)
}

/// Replaces `path` with `bytes` via a temporary file in the same
/// directory, keeping the original permissions.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    if let Ok(meta) = fs::metadata(path) {
        tmp.as_file().set_permissions(meta.permissions())?;
    }
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool, CommandError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CommandError::Environment(format!("cannot start worker pool: {e}")))
}

fn read_all(root: &Path, files: &[String]) -> Result<Vec<(String, Vec<u8>)>, CommandError> {
    files
        .par_iter()
        .map(|f| {
            let path = root.join(f);
            fs::read(&path).map(|b| (f.clone(), b)).map_err(|e| io_error(&path, e))
        })
        .collect()
}

pub fn load_manifest(root: &Path) -> Result<Option<LabelManifest>, CommandError> {
    let path = manifest_path(root);
    match fs::read_to_string(&path) {
        Ok(text) => LabelManifest::parse(&text)
            .map(Some)
            .map_err(|e| CommandError::Failed(format!("{}: {e}", path.display()))),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(io_error(&path, e)),
    }
}

fn save_manifest(root: &Path, manifest: &LabelManifest) -> Result<(), CommandError> {
    let path = manifest_path(root);
    let dir = path.parent().expect("manifest lives in a directory");
    let ignore = dir.join(".gitignore");
    if manifest.files.is_empty() {
        for p in [&path, &ignore] {
            match fs::remove_file(p) {
                Err(e) if e.kind() != io::ErrorKind::NotFound => return Err(io_error(p, e)),
                _ => {}
            }
        }
        let _ = fs::remove_dir(dir);
        return Ok(());
    }
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    // keeps the manifest out of `git add -A`
    fs::write(&ignore, "*\n").map_err(|e| io_error(&ignore, e))?;
    write_atomic(&path, manifest.render().as_bytes()).map_err(|e| io_error(&path, e))
}

fn build_analyzers(config: &ToolConfig, warnings: &mut Vec<String>) -> Result<Vec<Box<dyn Analyzer>>, CommandError> {
    let mut active: Vec<Box<dyn Analyzer>> = Vec::new();
    for id in &config.active_analyzers {
        match id.as_str() {
            CALLERS => active.push(Box::new(CallersAnalyzer)),
            AUTHOR => {
                let blame = GitBlame::for_project(&config.project_root)?;
                active.push(Box::new(AuthorAnalyzer::new(Box::new(blame))));
            }
            COVERAGE => {
                let path = config
                    .coverage_report
                    .as_ref()
                    .ok_or_else(|| CommandError::Config("coverage needs a report".into()))?;
                let text = fs::read_to_string(path).map_err(|e| {
                    CommandError::Config(format!("coverage report {}: {e}", path.display()))
                })?;
                let (report, w) = parse_lcov(&text, &config.project_root)
                    .map_err(|e| CommandError::Failed(format!("{}: {e}", path.display())))?;
                warnings.extend(w.into_iter().map(|w| format!("{COVERAGE}: {w}")));
                active.push(Box::new(CoverageAnalyzer {
                    report,
                    mode: config.coverage_mode,
                }));
            }
            other => return Err(CommandError::Config(format!("unknown analyzer {other:?}"))),
        }
    }
    Ok(active)
}

fn plan_error(e: PlanError) -> CommandError {
    match e {
        PlanError::Unregistered(_) => CommandError::Config(e.to_string()),
        PlanError::Analyzer(AnalyzerError::Environment { .. }) => CommandError::Environment(e.to_string()),
        PlanError::Conflicts(_) | PlanError::Analyzer(AnalyzerError::Input { .. }) => {
            CommandError::Failed(e.to_string())
        }
    }
}

/// A file left out of a run, with the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejected {
    pub path: String,
    pub reason: String,
}

/// Files read, scanned and planned, ready for labeling or verification.
struct Prepared {
    contents: Vec<(String, Vec<u8>)>,
    rejected: Vec<Rejected>,
    plan: OverlayPlan,
    warnings: Vec<String>,
}

fn prepare(config: &ToolConfig, registry: &Registry) -> Result<Prepared, CommandError> {
    let syntax = registry.syntax();
    let files = collect_files(config)?;
    let contents = read_all(&config.project_root, &files)?;
    let profile = &config.lang_profile;

    let scanned: Vec<Result<SourceFile, Rejected>> = contents
        .par_iter()
        .map(|(path, bytes)| {
            let reject = |reason: String| Rejected { path: path.clone(), reason };
            let collisions = scan_collisions(bytes, syntax);
            if !collisions.is_empty() {
                let lines: Vec<String> = collisions.iter().map(|c| c.line.to_string()).collect();
                return Err(reject(format!("already contains marker text on line(s) {}", lines.join(", "))));
            }
            let decls = scan_declarations(bytes, profile).map_err(|e| reject(e.to_string()))?;
            let calls = scan_call_sites(bytes, profile, &decls).map_err(|e| reject(e.to_string()))?;
            Ok(SourceFile {
                path: path.clone(),
                line_count: text::line_count(bytes),
                decls,
                calls,
            })
        })
        .collect();

    let mut project = ProjectState::default();
    let mut rejected = Vec::new();
    for r in scanned {
        match r {
            Ok(f) => project.files.push(f),
            Err(r) => rejected.push(r),
        }
    }

    let mut warnings = Vec::new();
    for t in &config.targets {
        let filter = TargetFilter::new([t.as_str()]);
        let found = project
            .files
            .iter()
            .flat_map(|f| &f.decls)
            .any(|d| filter.selects(&d.qualified_path));
        if !found {
            warnings.push(format!("target {t:?} matches no declaration"));
        }
    }

    let analyzers = build_analyzers(config, &mut warnings)?;
    let active: Vec<&dyn Analyzer> = analyzers.iter().map(|a| a.as_ref()).collect();
    let targets = TargetFilter::new(config.targets.iter().cloned());
    let (plan, w) = run_analyzers(&active, registry, &project, &targets, config.marker_style).map_err(plan_error)?;
    warnings.extend(w);

    Ok(Prepared {
        contents,
        rejected,
        plan,
        warnings,
    })
}

fn label_options(config: &ToolConfig) -> LabelOptions {
    LabelOptions {
        style: config.marker_style,
        native_package: config.native_package.clone(),
        // collisions are checked for the whole project before planning
        check_collisions: false,
    }
}

fn describe_rejected(what: &str, rejected: &[Rejected]) -> String {
    let mut msg = format!("{what}: {} file(s) cannot be processed", rejected.len());
    for r in rejected {
        let _ = write!(msg, "\n  {}: {}", r.path, r.reason);
    }
    msg
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelSummary {
    pub files_scanned: usize,
    pub files_labeled: usize,
    /// Markers written per analyzer id.
    pub markers: BTreeMap<String, usize>,
    pub imports: usize,
    pub warnings: Vec<String>,
}

impl fmt::Display for LabelSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "labeled {} of {} file(s)", self.files_labeled, self.files_scanned)?;
        for (id, n) in &self.markers {
            writeln!(f, "  {id}: {n} marker(s)")?;
        }
        if self.imports > 0 {
            writeln!(f, "  imports: {}", self.imports)?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

/// Runs the active analyzers and writes their markers into the project.
/// Nothing is written unless every selected file can be labeled.
pub fn cmd_label(config: &ToolConfig) -> Result<LabelSummary, CommandError> {
    let root = &config.project_root;
    if let Some(existing) = load_manifest(root)? {
        if existing.style == MarkerStyle::Native && !existing.files.is_empty() {
            return Err(CommandError::Failed(
                "project still carries native-style markers from an earlier run; strip first".into(),
            ));
        }
    }

    let registry = config.registry();
    let syntax = registry.syntax();
    let options = label_options(config);
    let pool = thread_pool(config.jobs)?;

    pool.install(|| {
        let prepared = prepare(config, &registry)?;
        if !prepared.rejected.is_empty() {
            return Err(CommandError::Failed(describe_rejected("label", &prepared.rejected)));
        }
        let by_file = prepared.plan.by_file();

        let outcomes: Vec<(&str, &[u8], overlay::LabelOutcome)> = prepared
            .contents
            .par_iter()
            .map(|(path, original)| {
                let entries = by_file.get(path.as_str()).map_or(&[][..], Vec::as_slice);
                let outcome = label_file(original, entries, syntax, &options)
                    .map_err(|e| CommandError::Failed(format!("{path}: {e}")))?;
                let restored = match options.style {
                    MarkerStyle::Comment => overlay::strip_file(&outcome.labeled, syntax),
                    MarkerStyle::Native => strip_native(&outcome.labeled, &outcome.manifest, syntax)
                        .map_err(|e| CommandError::Failed(format!("{path}: {e}")))?,
                };
                if restored != *original {
                    return Err(CommandError::Failed(format!(
                        "{path}: labeled text would not strip back to the original; nothing written"
                    )));
                }
                Ok((path.as_str(), original.as_slice(), outcome))
            })
            .collect::<Result<_, _>>()?;

        outcomes
            .par_iter()
            .filter(|(_, original, o)| o.labeled != *original)
            .try_for_each(|(path, _, o)| {
                let full = root.join(path);
                write_atomic(&full, &o.labeled).map_err(|e| io_error(&full, e))
            })?;

        let mut summary = LabelSummary {
            files_scanned: prepared.contents.len(),
            warnings: prepared.warnings,
            ..Default::default()
        };
        for e in &prepared.plan.entries {
            *summary.markers.entry(e.analyzer_id().to_string()).or_default() += 1;
        }
        let mut manifest = LabelManifest {
            style: config.marker_style,
            files: BTreeMap::new(),
        };
        for (path, _, o) in outcomes {
            for s in &o.skipped {
                *summary.markers.get_mut(&s.analyzer_id).expect("skipped entries come from the plan") -= 1;
                summary
                    .warnings
                    .push(format!("{}: {path}:{}: {}", s.analyzer_id, s.line, s.reason));
            }
            if o.manifest.is_empty() {
                continue;
            }
            summary.files_labeled += 1;
            summary.imports += o.manifest.imports().count();
            manifest.files.insert(path.to_string(), o.manifest);
        }
        save_manifest(root, &manifest)?;
        Ok(summary)
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StripSummary {
    pub files_checked: usize,
    pub files_changed: Vec<String>,
    pub markers_removed: usize,
    pub imports_removed: usize,
    pub failures: Vec<Rejected>,
}

impl fmt::Display for StripSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "stripped {} marker(s) from {} of {} file(s)",
            self.markers_removed,
            self.files_changed.len(),
            self.files_checked
        )?;
        if self.imports_removed > 0 {
            writeln!(f, "  imports removed: {}", self.imports_removed)?;
        }
        for r in &self.failures {
            writeln!(f, "error: {}: {}", r.path, r.reason)?;
        }
        Ok(())
    }
}

/// `(changed, markers removed, imports removed)` for one file.
type FileStrip = (bool, usize, usize);

/// Removes all markers. Files labeled in native style are restored through
/// the manifest; a file whose labeled content was edited is left alone and
/// reported. With `staged`, only files staged in git are stripped and the
/// results are staged again.
pub fn cmd_strip(config: &ToolConfig, staged: bool) -> Result<StripSummary, CommandError> {
    let root = &config.project_root;
    let registry = config.registry();
    let syntax = registry.syntax();
    let mut manifest = load_manifest(root)?;

    let (files, repo) = if staged {
        let repo = RepoContext::discover(root, String::new())?;
        let prefix = vcs::repo_relative_prefix(&repo.root, root)?;
        let filter = config.file_filter().map_err(|e| CommandError::Config(e.to_string()))?;
        let files: Vec<String> = vcs::staged_files(&repo.root)?
            .into_iter()
            .filter_map(|p| p.strip_prefix(prefix.as_str()).map(String::from))
            .filter(|p| filter.matches(p) && root.join(p).is_file())
            .collect();
        (files, Some((repo, prefix)))
    } else {
        let mut files = collect_files(config)?;
        if let Some(m) = &manifest {
            files.extend(m.files.keys().filter(|p| root.join(p).is_file()).cloned());
            files.sort();
            files.dedup();
        }
        (files, None)
    };

    let native = manifest
        .as_ref()
        .filter(|m| m.style == MarkerStyle::Native);

    let pool = thread_pool(config.jobs)?;
    let results: Vec<(String, Result<FileStrip, String>)> = pool.install(|| {
        files
            .par_iter()
            .map(|path| {
                let full = root.join(path);
                let run = || -> Result<FileStrip, String> {
                    let content = fs::read(&full).map_err(|e| e.to_string())?;
                    let (stripped, markers, imports) = match native.and_then(|m| m.files.get(path)) {
                        Some(fm) => {
                            let out = strip_native(&content, fm, syntax).map_err(|e| e.to_string())?;
                            let markers = fm.inserted.iter().filter(|l| l.kind == InsertKind::Marker).count()
                                + fm.modified.len();
                            (out, markers, fm.imports().count())
                        }
                        None => {
                            let (out, stats) = overlay::strip_file_with_stats(&content, syntax);
                            (out, stats.markers_removed(), 0)
                        }
                    };
                    let changed = stripped != content;
                    if changed {
                        write_atomic(&full, &stripped).map_err(|e| e.to_string())?;
                    }
                    Ok((changed, markers, imports))
                };
                (path.clone(), run())
            })
            .collect()
    });

    let mut summary = StripSummary {
        files_checked: files.len(),
        ..Default::default()
    };
    for (path, result) in results {
        match result {
            Ok((changed, markers, imports)) => {
                summary.markers_removed += markers;
                summary.imports_removed += imports;
                if changed {
                    summary.files_changed.push(path.clone());
                }
                if let Some(m) = manifest.as_mut() {
                    m.files.remove(&path);
                }
            }
            Err(reason) => summary.failures.push(Rejected { path, reason }),
        }
    }
    if let Some(m) = &manifest {
        save_manifest(root, m)?;
    }
    if let Some((repo, prefix)) = repo {
        let to_stage: Vec<String> = summary.files_changed.iter().map(|p| format!("{prefix}{p}")).collect();
        vcs::stage(&repo.root, &to_stage)?;
    }
    Ok(summary)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub checked: usize,
    pub failures: Vec<Rejected>,
    pub skipped: Vec<Rejected>,
    pub warnings: Vec<String>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.skipped.is_empty()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "verified {} file(s): {} failed, {} skipped",
            self.checked,
            self.failures.len(),
            self.skipped.len()
        )?;
        for r in &self.failures {
            writeln!(f, "failed: {}: {}", r.path, r.reason)?;
        }
        for r in &self.skipped {
            writeln!(f, "skipped: {}: {}", r.path, r.reason)?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

/// Labels and strips every selected file in memory and checks that the
/// original comes back byte for byte. The working tree is not touched.
pub fn cmd_verify(config: &ToolConfig) -> Result<VerifyReport, CommandError> {
    let registry = config.registry();
    let syntax = registry.syntax();
    let options = label_options(config);
    let pool = thread_pool(config.jobs)?;

    pool.install(|| {
        let prepared = prepare(config, &registry)?;
        let by_file = prepared.plan.by_file();
        let skipped: std::collections::BTreeSet<&str> =
            prepared.rejected.iter().map(|r| r.path.as_str()).collect();
        let failures: Vec<Rejected> = prepared
            .contents
            .par_iter()
            .filter(|(path, _)| !skipped.contains(path.as_str()))
            .filter_map(|(path, original)| {
                let entries = by_file.get(path.as_str()).map_or(&[][..], Vec::as_slice);
                let reason = match verify_roundtrip(original, entries, syntax, &options) {
                    Ok(true) => return None,
                    Ok(false) => "stripping the labeled file does not restore the original".to_string(),
                    Err(e) => e.to_string(),
                };
                Some(Rejected { path: path.clone(), reason })
            })
            .collect();
        Ok(VerifyReport {
            checked: prepared.contents.len() - prepared.rejected.len(),
            failures,
            skipped: prepared.rejected,
            warnings: prepared.warnings,
        })
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ManifestStatus {
    Absent,
    Present {
        style: MarkerStyle,
        /// Files whose content still matches what labeling wrote.
        current: Vec<String>,
        /// Files edited (or removed) since labeling.
        stale: Vec<String>,
    },
    Unreadable(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatusReport {
    /// Markers present per file, per analyzer id. Files without markers
    /// are left out.
    pub files: BTreeMap<String, BTreeMap<String, usize>>,
    pub totals: BTreeMap<String, usize>,
    pub manifest: ManifestStatus,
}

impl fmt::Display for StatusReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.totals.is_empty() {
            writeln!(f, "no markers present")?;
        }
        for (id, n) in &self.totals {
            writeln!(f, "{id}: {n} marker(s)")?;
        }
        for (path, counts) in &self.files {
            let parts: Vec<String> = counts.iter().map(|(id, n)| format!("{id}={n}")).collect();
            writeln!(f, "  {path}: {}", parts.join(" "))?;
        }
        match &self.manifest {
            ManifestStatus::Absent => writeln!(f, "manifest: none"),
            ManifestStatus::Present { style, current, stale } => {
                writeln!(
                    f,
                    "manifest: {} style, {} current, {} stale",
                    style.as_str(),
                    current.len(),
                    stale.len()
                )?;
                for s in stale {
                    writeln!(f, "  stale: {s}")?;
                }
                Ok(())
            }
            ManifestStatus::Unreadable(e) => writeln!(f, "manifest: unreadable ({e})"),
        }
    }
}

const UNKNOWN_ANALYZER: &str = "unknown";

/// Counts the markers in one file by analyzer. `native_lines` are the
/// inserted annotation lines recorded for the file, if it was labeled in
/// native style.
pub fn count_markers(
    content: &[u8],
    syntax: &MarkerSyntax,
    native_lines: &BTreeMap<usize, &str>,
) -> BTreeMap<String, usize> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for (i, line) in text::lines(content).enumerate() {
        let owner = if let Some(block) = parse_block_marker(line.content, syntax) {
            Some(block.analyzer_id)
        } else if let Some((_, lm)) = parse_line_marker(line.content, syntax) {
            Some(lm.analyzer_id)
        } else {
            native_lines
                .get(&(i + 1))
                .filter(|expected| line.content == expected.as_bytes())
                .map(|expected| {
                    let name: String = expected
                        .trim_start()
                        .trim_start_matches('@')
                        .chars()
                        .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
                        .collect();
                    syntax.analyzer_for_name(&name).to_string()
                })
        };
        if let Some(id) = owner {
            let id = if id.is_empty() { UNKNOWN_ANALYZER.to_string() } else { id };
            *counts.entry(id).or_default() += 1;
        }
    }
    counts
}

/// Markers currently present, and whether the manifest still matches.
pub fn cmd_status(config: &ToolConfig) -> Result<StatusReport, CommandError> {
    let root = &config.project_root;
    let registry = config.registry();
    let syntax = registry.syntax();
    let files = collect_files(config)?;
    let manifest = load_manifest(root);
    let native = match &manifest {
        Ok(Some(m)) if m.style == MarkerStyle::Native => Some(m),
        _ => None,
    };

    let pool = thread_pool(config.jobs)?;
    let per_file: Vec<(String, BTreeMap<String, usize>)> = pool.install(|| {
        files
            .par_iter()
            .map(|path| {
                let full = root.join(path);
                let content = fs::read(&full).map_err(|e| io_error(&full, e))?;
                let native_lines: BTreeMap<usize, &str> = native
                    .and_then(|m| m.files.get(path))
                    .map(|fm| {
                        fm.inserted
                            .iter()
                            .filter(|l| l.kind == InsertKind::Marker)
                            .map(|l| (l.line, l.content.as_str()))
                            .collect()
                    })
                    .unwrap_or_default();
                Ok((path.clone(), count_markers(&content, syntax, &native_lines)))
            })
            .collect::<Result<_, CommandError>>()
    })?;

    let mut report = StatusReport {
        files: BTreeMap::new(),
        totals: BTreeMap::new(),
        manifest: ManifestStatus::Absent,
    };
    for (path, counts) in per_file {
        if counts.is_empty() {
            continue;
        }
        for (id, n) in &counts {
            *report.totals.entry(id.clone()).or_default() += n;
        }
        report.files.insert(path, counts);
    }

    report.manifest = match manifest {
        Ok(None) => ManifestStatus::Absent,
        Err(e) => ManifestStatus::Unreadable(e.to_string()),
        Ok(Some(m)) => {
            let (mut current, mut stale) = (Vec::new(), Vec::new());
            for (path, fm) in &m.files {
                match fs::read(root.join(path)) {
                    Ok(bytes) if crate::manifest::digest(&bytes) == fm.labeled_digest => current.push(path.clone()),
                    _ => stale.push(path.clone()),
                }
            }
            ManifestStatus::Present {
                style: m.style,
                current,
                stale,
            }
        }
    };
    Ok(report)
}

/// Installs the pre-commit hook in the repository holding the project.
pub fn cmd_install_hook(project_root: &Path, tool_invocation: String, force: bool) -> Result<HookReport, CommandError> {
    let repo = RepoContext::discover(project_root, tool_invocation)?;
    Ok(vcs::install_hook(&repo, force)?)
}

/// One line per registered analyzer.
pub fn describe_analyzers(registry: &Registry, active: &[String]) -> String {
    let mut out = String::new();
    for d in registry.descriptors() {
        let emits = match &d.emits {
            crate::analyzers::Emits::Sigil(s) => format!("line marker {}{s}", registry.syntax().line_comment_token()),
            crate::analyzers::Emits::MarkerNames(names) => format!("block marker(s) {}", names.join(", ")),
        };
        let state = if active.contains(&d.id) { "active" } else { "inactive" };
        let _ = write!(out, "{:<10} {:<8} {}; {}", d.id, state, d.summary, emits);
        if !d.config_keys.is_empty() {
            let _ = write!(out, "; keys: {}", d.config_keys.join(", "));
        }
        out.push('\n');
    }
    out
}
