use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{Analyzer, AnalyzerDescriptor, AnalyzerError, Emits, Granularity, PlanOutput, ProjectState, TargetFilter, AUTHOR};
use crate::marker::BlockMarker;
use crate::overlay::AnchoredMetadata;
use crate::vcs::BlameError;

pub const AUTHOR_MARKER: &str = "Author";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlameLine {
    pub author: String,
    /// Committer time, seconds since the epoch.
    pub commit_time: i64,
    pub commit_id: String,
}

/// Last-commit attribution for every line of one file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BlameInfo {
    pub lines: BTreeMap<usize, BlameLine>,
}

/// Something that can attribute the lines of a project file.
pub trait BlameSource: Send + Sync {
    fn blame(&self, path: &str) -> Result<BlameInfo, BlameError>;
}

/// One `Author("name")` marker above every selected class and method,
/// naming the author of the most recently committed line in its span.
/// Equal commit times are ordered by commit id. Declarations in files
/// without history get a warning instead.
pub fn author_plan(blame: &BTreeMap<String, BlameInfo>, project: &ProjectState, targets: &TargetFilter) -> PlanOutput {
    let mut out = PlanOutput::default();
    for file in &project.files {
        for decl in file.decls.iter().filter(|d| targets.selects(&d.qualified_path)) {
            let newest = blame.get(&file.path).and_then(|info| {
                info.lines
                    .range(decl.body_span.0..=decl.body_span.1)
                    .map(|(_, l)| l)
                    .max_by(|a, b| (a.commit_time, &a.commit_id).cmp(&(b.commit_time, &b.commit_id)))
            });
            match newest {
                Some(line) => out.entries.push(AnchoredMetadata::Declaration {
                    file: file.path.clone(),
                    decl_path: decl.qualified_path.clone(),
                    line: decl.header_line,
                    marker: BlockMarker::new(AUTHOR, AUTHOR_MARKER).positional(line.author.clone()),
                }),
                None => out.warnings.push(format!(
                    "{}: no history for {} (lines {}-{})",
                    file.path, decl.qualified_path, decl.body_span.0, decl.body_span.1
                )),
            }
        }
    }
    out
}

pub struct AuthorAnalyzer {
    source: Box<dyn BlameSource>,
}

impl AuthorAnalyzer {
    pub fn new(source: Box<dyn BlameSource>) -> Self {
        AuthorAnalyzer { source }
    }

    pub fn descriptor() -> AnalyzerDescriptor {
        AnalyzerDescriptor {
            id: AUTHOR.into(),
            granularity: Granularity::Declaration,
            emits: Emits::MarkerNames(vec![AUTHOR_MARKER.into()]),
            config_keys: vec![],
            summary: "last author of each class and method (git blame)".into(),
        }
    }
}

impl Analyzer for AuthorAnalyzer {
    fn id(&self) -> &str {
        AUTHOR
    }

    fn plan(&self, project: &ProjectState, targets: &TargetFilter) -> Result<PlanOutput, AnalyzerError> {
        let wanted: Vec<&str> = project
            .files
            .iter()
            .filter(|f| f.decls.iter().any(|d| targets.selects(&d.qualified_path)))
            .map(|f| f.path.as_str())
            .collect();
        let results: Vec<(&str, Result<BlameInfo, BlameError>)> =
            wanted.par_iter().map(|p| (*p, self.source.blame(p))).collect();

        let mut blame = BTreeMap::new();
        for (path, result) in results {
            match result {
                Ok(info) => {
                    blame.insert(path.to_string(), info);
                }
                Err(BlameError::NoHistory(_)) => {}
                Err(e @ (BlameError::Environment(_) | BlameError::Git(_))) => {
                    return Err(AnalyzerError::Environment {
                        analyzer: AUTHOR.into(),
                        message: e.to_string(),
                    })
                }
            }
        }
        Ok(author_plan(&blame, project, targets))
    }
}
