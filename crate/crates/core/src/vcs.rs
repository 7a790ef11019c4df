//! Git integration: the pre-commit hook and content filter that keep
//! markers out of commits, and line-porcelain blame for the author
//! analyzer. Everything goes through the `git` binary.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use thiserror::Error;

use crate::analyzers::{BlameInfo, BlameLine, BlameSource};
use crate::marker::MarkerSyntax;
use crate::overlay::{self, StripStats};

#[derive(Debug, Error)]
pub enum VcsError {
    #[error("{0} is not inside a git repository")]
    NotARepository(PathBuf),
    #[error("cannot run git: {0}")]
    Environment(String),
    #[error("git failed: {0}")]
    Git(String),
    #[error(
        "{0} already exists and was not installed by overmark; \
         move it aside or rerun with --force (the old hook is kept as pre-commit.overmark-backup)"
    )]
    ForeignHook(PathBuf),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlameError {
    #[error("no history: {0}")]
    NoHistory(String),
    #[error("cannot run git: {0}")]
    Environment(String),
    #[error("git blame failed: {0}")]
    Git(String),
}

fn run_git(dir: &Path, args: &[&str]) -> Result<Output, String> {
    Command::new("git")
        .arg("-C")
        .arg(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).trim().to_string()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepoContext {
    pub root: PathBuf,
    pub hooks_dir: PathBuf,
    /// Command line that runs this tool, already shell-quoted.
    pub tool_invocation: String,
}

/// Single-quotes a string for POSIX sh.
pub fn shell_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

impl RepoContext {
    pub fn discover(path: &Path, tool_invocation: String) -> Result<Self, VcsError> {
        let out = run_git(path, &["rev-parse", "--show-toplevel", "--git-path", "hooks"])
            .map_err(VcsError::Environment)?;
        if !out.status.success() {
            return Err(VcsError::NotARepository(path.to_path_buf()));
        }
        let stdout = String::from_utf8_lossy(&out.stdout);
        let mut lines = stdout.lines();
        let (Some(root), Some(hooks)) = (lines.next(), lines.next()) else {
            return Err(VcsError::Git(format!("unexpected rev-parse output {stdout:?}")));
        };
        let root = PathBuf::from(root);
        let hooks = Path::new(hooks);
        // --git-path answers relative to the directory git ran in
        let hooks_dir = if hooks.is_absolute() {
            hooks.to_path_buf()
        } else {
            path.join(hooks)
        };
        Ok(RepoContext {
            root,
            hooks_dir,
            tool_invocation,
        })
    }
}

pub const HOOK_TAG: &str = "# overmark pre-commit hook";

pub fn hook_script(repo: &RepoContext) -> String {
    format!(
        "#!/bin/sh\n\
         {HOOK_TAG}\n\
         # Strips overlay markers from staged files and stages the result, so\n\
         # commits never carry tool metadata. Delete this file to disable.\n\
         exec {} strip --staged\n",
        repo.tool_invocation
    )
}

/// Configuration for users who prefer a clean filter over the hook: the
/// working copy keeps its markers and only the committed blobs are clean.
pub fn filter_config_lines(repo: &RepoContext, pattern: &str) -> Vec<String> {
    vec![
        format!("git config filter.overmark.clean \"{} filter\"", repo.tool_invocation.replace('"', "\\\"")),
        "git config filter.overmark.smudge cat".to_string(),
        format!("echo '{pattern} filter=overmark' >> .gitattributes"),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HookAction {
    Created,
    Unchanged,
    Updated,
    /// A foreign hook was moved to the given backup path.
    Replaced(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HookReport {
    pub hook_path: PathBuf,
    pub action: HookAction,
    pub filter_config: Vec<String>,
}

/// Installs the pre-commit hook. Reinstalling is a no-op; an existing hook
/// that overmark did not write is left alone unless `force` is set.
pub fn install_hook(repo: &RepoContext, force: bool) -> Result<HookReport, VcsError> {
    fs::create_dir_all(&repo.hooks_dir)?;
    let hook_path = repo.hooks_dir.join("pre-commit");
    let script = hook_script(repo);
    let action = match fs::read(&hook_path) {
        Ok(existing) if existing == script.as_bytes() => HookAction::Unchanged,
        Ok(existing) if String::from_utf8_lossy(&existing).contains(HOOK_TAG) => HookAction::Updated,
        Ok(_) if !force => return Err(VcsError::ForeignHook(hook_path)),
        Ok(_) => {
            let backup = repo.hooks_dir.join("pre-commit.overmark-backup");
            fs::rename(&hook_path, &backup)?;
            HookAction::Replaced(backup)
        }
        Err(e) if e.kind() == io::ErrorKind::NotFound => HookAction::Created,
        Err(e) => return Err(e.into()),
    };
    if action != HookAction::Unchanged {
        fs::write(&hook_path, &script)?;
    }
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        let mut perms = fs::metadata(&hook_path)?.permissions();
        if perms.mode() & 0o777 != 0o755 {
            perms.set_mode(0o755);
            fs::set_permissions(&hook_path, perms)?;
        }
    }
    Ok(HookReport {
        hook_path,
        action,
        filter_config: filter_config_lines(repo, "*.java"),
    })
}

/// Content-filter entry point: strips markers from `input` line by line.
pub fn filter_stream<R: BufRead, W: Write>(input: R, output: W, syntax: &MarkerSyntax) -> io::Result<StripStats> {
    overlay::strip_stream(input, output, syntax)
}

fn is_commit_header(line: &[u8]) -> Option<(String, usize)> {
    let text = std::str::from_utf8(line).ok()?;
    let mut parts = text.split(' ');
    let hash = parts.next()?;
    if !(hash.len() == 40 || hash.len() == 64) || !hash.bytes().all(|b| b.is_ascii_hexdigit()) {
        return None;
    }
    let _orig: usize = parts.next()?.parse().ok()?;
    let final_line: usize = parts.next()?.parse().ok()?;
    Some((hash.to_string(), final_line))
}

/// Parses `git blame --line-porcelain` output.
pub fn parse_line_porcelain(output: &[u8]) -> Result<BlameInfo, BlameError> {
    let mut info = BlameInfo::default();
    let mut current: Option<(String, usize)> = None;
    let mut author = String::new();
    let mut time: Option<i64> = None;
    for raw in output.split(|b| *b == b'\n') {
        if raw.first() == Some(&b'\t') {
            let Some((id, line)) = current.take() else {
                return Err(BlameError::Git("content line without a commit header".into()));
            };
            let commit_time = time
                .take()
                .ok_or_else(|| BlameError::Git(format!("no committer-time for line {line}")))?;
            info.lines.insert(
                line,
                BlameLine {
                    author: std::mem::take(&mut author),
                    commit_time,
                    commit_id: id,
                },
            );
        } else if let Some(header) = is_commit_header(raw) {
            current = Some(header);
        } else if let Some(name) = raw.strip_prefix(b"author ") {
            author = String::from_utf8_lossy(name).into_owned();
        } else if let Some(t) = raw.strip_prefix(b"committer-time ") {
            time = std::str::from_utf8(t).ok().and_then(|t| t.trim().parse().ok());
        }
    }
    Ok(info)
}

/// Blames `file` (relative to the repository root) as of `HEAD`, so staged
/// or unstaged edits never show up as authorship.
pub fn collect_blame(repo_root: &Path, file: &str) -> Result<BlameInfo, BlameError> {
    let out = run_git(repo_root, &["blame", "--line-porcelain", "HEAD", "--", file])
        .map_err(BlameError::Environment)?;
    if !out.status.success() {
        let err = stderr_of(&out);
        let no_history = ["no such path", "no such ref", "bad revision", "does not have any commits", "ambiguous argument 'HEAD'"];
        if no_history.iter().any(|m| err.contains(m)) {
            return Err(BlameError::NoHistory(format!("{file}: {err}")));
        }
        return Err(BlameError::Git(format!("{file}: {err}")));
    }
    parse_line_porcelain(&out.stdout)
}

/// Blame for project files when the project root is `prefix` below the
/// repository root.
#[derive(Debug, Clone)]
pub struct GitBlame {
    pub repo_root: PathBuf,
    pub prefix: String,
}

impl GitBlame {
    pub fn for_project(project_root: &Path) -> Result<Self, VcsError> {
        let repo = RepoContext::discover(project_root, String::new())?;
        let prefix = repo_relative_prefix(&repo.root, project_root)?;
        Ok(GitBlame {
            repo_root: repo.root,
            prefix,
        })
    }
}

impl BlameSource for GitBlame {
    fn blame(&self, path: &str) -> Result<BlameInfo, BlameError> {
        collect_blame(&self.repo_root, &format!("{}{}", self.prefix, path))
    }
}

/// `project_root` relative to `repo_root`, with a trailing `/` unless empty.
pub fn repo_relative_prefix(repo_root: &Path, project_root: &Path) -> Result<String, VcsError> {
    let repo = repo_root.canonicalize()?;
    let project = project_root.canonicalize()?;
    let rel = project
        .strip_prefix(&repo)
        .map_err(|_| VcsError::NotARepository(project_root.to_path_buf()))?;
    let mut prefix: String = rel
        .components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/");
    if !prefix.is_empty() {
        prefix.push('/');
    }
    Ok(prefix)
}

/// Paths (relative to the repository root) of files staged for commit.
pub fn staged_files(repo_root: &Path) -> Result<Vec<String>, VcsError> {
    let out = run_git(repo_root, &["diff", "--cached", "--name-only", "-z", "--diff-filter=ACMR"])
        .map_err(VcsError::Environment)?;
    if !out.status.success() {
        return Err(VcsError::Git(stderr_of(&out)));
    }
    Ok(out
        .stdout
        .split(|b| *b == 0)
        .filter(|p| !p.is_empty())
        .map(|p| String::from_utf8_lossy(p).into_owned())
        .collect())
}

pub fn stage(repo_root: &Path, files: &[String]) -> Result<(), VcsError> {
    if files.is_empty() {
        return Ok(());
    }
    let mut args = vec!["add", "--"];
    args.extend(files.iter().map(String::as_str));
    let out = run_git(repo_root, &args).map_err(VcsError::Environment)?;
    if !out.status.success() {
        return Err(VcsError::Git(stderr_of(&out)));
    }
    Ok(())
}
