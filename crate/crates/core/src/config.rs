//! Tool configuration: a line-oriented `key = value` file with optional
//! `[analyzer.<id>]` and `[profile.<name>]` sections, layered under
//! command-line flags.
//!
//! Precedence is total: a value from the command line beats the file, and
//! the file beats the built-in default.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use globset::{Glob, GlobBuilder, GlobSet, GlobSetBuilder};

use crate::analyzers::{CoverageMode, Registry, COVERAGE};
use crate::manifest::{MarkerStyle, MANIFEST_DIR};
use crate::marker::DEFAULT_BLOCK_SIGIL;
use crate::overlay::DEFAULT_NATIVE_PACKAGE;
use crate::scan::LangProfile;

pub const DEFAULT_CONFIG_FILE: &str = "overmark.conf";
pub const DEFAULT_INCLUDE: &str = "**/*.java";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError { line: Some(line), message: message.into() }
    }

    pub fn new(message: impl Into<String>) -> Self {
        ConfigError { line: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "config line {line}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// One source of settings. Unset fields fall through to the layer below.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigLayer {
    pub project_root: Option<PathBuf>,
    pub lang_profile: Option<String>,
    pub analyzers: Option<Vec<String>>,
    pub include: Option<Vec<String>>,
    pub exclude: Option<Vec<String>>,
    pub targets: Option<Vec<String>>,
    pub coverage_report: Option<PathBuf>,
    pub coverage_mode: Option<CoverageMode>,
    pub marker_style: Option<MarkerStyle>,
    pub native_package: Option<String>,
    pub jobs: Option<usize>,
    pub profiles: BTreeMap<String, LangProfile>,
}

impl ConfigLayer {
    /// `self` wins wherever it has a value.
    pub fn over(self, lower: ConfigLayer) -> ConfigLayer {
        let mut profiles = lower.profiles;
        profiles.extend(self.profiles);
        ConfigLayer {
            project_root: self.project_root.or(lower.project_root),
            lang_profile: self.lang_profile.or(lower.lang_profile),
            analyzers: self.analyzers.or(lower.analyzers),
            include: self.include.or(lower.include),
            exclude: self.exclude.or(lower.exclude),
            targets: self.targets.or(lower.targets),
            coverage_report: self.coverage_report.or(lower.coverage_report),
            coverage_mode: self.coverage_mode.or(lower.coverage_mode),
            marker_style: self.marker_style.or(lower.marker_style),
            native_package: self.native_package.or(lower.native_package),
            jobs: self.jobs.or(lower.jobs),
            profiles,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToolConfig {
    pub project_root: PathBuf,
    pub lang_profile: LangProfile,
    pub active_analyzers: Vec<String>,
    pub include_globs: Vec<String>,
    pub exclude_globs: Vec<String>,
    pub targets: Vec<String>,
    pub coverage_report: Option<PathBuf>,
    pub coverage_mode: CoverageMode,
    pub marker_style: MarkerStyle,
    pub native_package: String,
    pub jobs: usize,
}

pub fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

enum Section {
    Top,
    Analyzer(String),
    Profile(String),
}

/// Parses a config file's text. Relative paths are resolved against
/// `base_dir` (the directory holding the file).
pub fn parse_config(text: &str, base_dir: &Path) -> Result<ConfigLayer, ConfigError> {
    let registry = Registry::builtin();
    let mut layer = ConfigLayer::default();
    let mut section = Section::Top;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = if let Some(id) = name.strip_prefix("analyzer.") {
                if registry.get(id).is_none() {
                    return Err(ConfigError::at(lineno, format!("unknown analyzer {id:?}")));
                }
                Section::Analyzer(id.to_string())
            } else if let Some(p) = name.strip_prefix("profile.") {
                if p.is_empty() {
                    return Err(ConfigError::at(lineno, "profile sections need a name"));
                }
                let profile = layer.profiles.entry(p.to_string()).or_insert_with(LangProfile::java);
                profile.name = p.to_string();
                Section::Profile(p.to_string())
            } else {
                return Err(ConfigError::at(lineno, format!("unknown section [{name}]")));
            };
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::at(lineno, format!("expected `key = value`, got {line:?}")));
        };
        let (key, value) = (key.trim(), value.trim());
        let bad = |msg: String| ConfigError::at(lineno, msg);
        match &section {
            Section::Top => match key {
                "project_root" => layer.project_root = Some(base_dir.join(value)),
                "lang_profile" => layer.lang_profile = Some(value.to_string()),
                "analyzers" => layer.analyzers = Some(list(value)),
                "include" => layer.include = Some(list(value)),
                "exclude" => layer.exclude = Some(list(value)),
                "targets" => layer.targets = Some(list(value)),
                "marker_style" => layer.marker_style = Some(value.parse().map_err(bad)?),
                "native_package" => layer.native_package = Some(value.to_string()),
                "jobs" => {
                    let jobs: usize = value.parse().map_err(|_| bad(format!("jobs must be a positive integer, got {value:?}")))?;
                    layer.jobs = Some(jobs);
                }
                other => return Err(bad(format!("unknown key {other:?}"))),
            },
            Section::Analyzer(id) => match (id.as_str(), key) {
                (COVERAGE, "report") => layer.coverage_report = Some(base_dir.join(value)),
                (COVERAGE, "mode") => layer.coverage_mode = Some(value.parse().map_err(bad)?),
                (id, other) => return Err(bad(format!("unknown key {other:?} for analyzer {id:?}"))),
            },
            Section::Profile(name) => {
                let profile = layer.profiles.get_mut(name).expect("created with the section");
                match key {
                    "line_comment" => profile.line_comment_token = value.to_string(),
                    "block_comment_open" => profile.block_comment.0 = value.to_string(),
                    "block_comment_close" => profile.block_comment.1 = value.to_string(),
                    "string_delimiters" => profile.string_delimiters = value.bytes().collect(),
                    "keywords" => profile.keywords = list(value).into_iter().collect(),
                    other => return Err(bad(format!("unknown key {other:?} for profile {name:?}"))),
                }
            }
        }
    }
    Ok(layer)
}

/// Reads a config file and validates it on its own.
pub fn load_config(path: &Path) -> Result<ToolConfig, ConfigError> {
    ToolConfig::resolve(load_layer(path)?)
}

pub fn load_layer(path: &Path) -> Result<ConfigLayer, ConfigError> {
    let text = fs::read_to_string(path)
        .map_err(|e| ConfigError::new(format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let layer = parse_config(&text, base)?;
    if layer.project_root.is_none() {
        let end = text.lines().count().max(1);
        return Err(ConfigError::at(end, "project_root is required"));
    }
    Ok(layer)
}

impl ToolConfig {
    /// Fills defaults into a merged layer and checks the invariants.
    pub fn resolve(layer: ConfigLayer) -> Result<Self, ConfigError> {
        let project_root = layer
            .project_root
            .ok_or_else(|| ConfigError::new("project_root is required"))?;
        if !project_root.is_dir() {
            return Err(ConfigError::new(format!(
                "project_root {} is not a directory",
                project_root.display()
            )));
        }

        let profile_name = layer.lang_profile.unwrap_or_else(|| "java".to_string());
        let lang_profile = match layer.profiles.get(&profile_name) {
            Some(p) => p.clone(),
            None if profile_name == "java" => LangProfile::java(),
            None => return Err(ConfigError::new(format!("unknown lang_profile {profile_name:?}"))),
        };

        let registry = registry_for(&lang_profile)?;
        let active_analyzers = layer.analyzers.unwrap_or_default();
        for id in &active_analyzers {
            if registry.get(id).is_none() {
                return Err(ConfigError::new(format!("unknown analyzer {id:?}")));
            }
        }
        if active_analyzers.iter().any(|a| a == COVERAGE) && layer.coverage_report.is_none() {
            return Err(ConfigError::new(
                "the coverage analyzer needs `report` in [analyzer.coverage] (or --coverage-report)",
            ));
        }

        let jobs = layer.jobs.unwrap_or_else(default_jobs);
        if jobs == 0 {
            return Err(ConfigError::new("jobs must be at least 1"));
        }

        let config = ToolConfig {
            project_root,
            lang_profile,
            active_analyzers,
            include_globs: layer.include.unwrap_or_else(|| vec![DEFAULT_INCLUDE.to_string()]),
            exclude_globs: layer.exclude.unwrap_or_default(),
            targets: layer.targets.unwrap_or_default(),
            coverage_report: layer.coverage_report,
            coverage_mode: layer.coverage_mode.unwrap_or_default(),
            marker_style: layer.marker_style.unwrap_or_default(),
            native_package: layer.native_package.unwrap_or_else(|| DEFAULT_NATIVE_PACKAGE.to_string()),
            jobs,
        };
        config.file_filter()?;
        Ok(config)
    }

    pub fn registry(&self) -> Registry {
        registry_for(&self.lang_profile).expect("validated in resolve")
    }

    pub fn file_filter(&self) -> Result<FileFilter, ConfigError> {
        FileFilter::new(&self.include_globs, &self.exclude_globs)
    }
}

fn registry_for(profile: &LangProfile) -> Result<Registry, ConfigError> {
    let token = &profile.line_comment_token;
    Registry::builtin_with(token, &format!("{token}{DEFAULT_BLOCK_SIGIL}"))
        .map_err(|e| ConfigError::new(format!("profile {:?}: {e}", profile.name)))
}

/// Include/exclude matching on project-relative `/`-separated paths.
/// The VCS directory and the manifest directory are always excluded.
#[derive(Debug, Clone)]
pub struct FileFilter {
    include: GlobSet,
    exclude: GlobSet,
}

fn glob(pattern: &str) -> Result<Glob, ConfigError> {
    GlobBuilder::new(pattern)
        .literal_separator(true)
        .build()
        .map_err(|e| ConfigError::new(format!("bad glob {pattern:?}: {e}")))
}

impl FileFilter {
    pub fn new(include: &[String], exclude: &[String]) -> Result<Self, ConfigError> {
        let mut inc = GlobSetBuilder::new();
        for p in include {
            inc.add(glob(p)?);
        }
        let mut exc = GlobSetBuilder::new();
        for p in exclude.iter().map(String::as_str).chain([".git/**", &format!("{MANIFEST_DIR}/**")]) {
            exc.add(glob(p)?);
        }
        let build = |b: GlobSetBuilder| b.build().map_err(|e| ConfigError::new(e.to_string()));
        Ok(FileFilter {
            include: build(inc)?,
            exclude: build(exc)?,
        })
    }

    pub fn matches(&self, rel_path: &str) -> bool {
        self.include.is_match(rel_path) && !self.exclude.is_match(rel_path)
    }
}
