use std::collections::{BTreeMap, BTreeSet};

use super::{Analyzer, AnalyzerDescriptor, AnalyzerError, Emits, Granularity, PlanOutput, ProjectState, TargetFilter, CALLERS};
use crate::marker::BlockMarker;
use crate::overlay::AnchoredMetadata;
use crate::scan::DeclKind;

pub const CALLER_MARKER: &str = "Caller";

/// Marks each method with the methods that call it, resolved by name.
#[derive(Debug, Default)]
pub struct CallersAnalyzer;

impl CallersAnalyzer {
    pub fn descriptor() -> AnalyzerDescriptor {
        AnalyzerDescriptor {
            id: CALLERS.into(),
            granularity: Granularity::Declaration,
            emits: Emits::MarkerNames(vec![CALLER_MARKER.into()]),
            config_keys: vec![],
            summary: "methods calling each method (static, name-based)".into(),
        }
    }
}

impl Analyzer for CallersAnalyzer {
    fn id(&self) -> &str {
        CALLERS
    }

    fn plan(&self, project: &ProjectState, targets: &TargetFilter) -> Result<PlanOutput, AnalyzerError> {
        Ok(PlanOutput {
            entries: callers_plan(project, targets),
            warnings: Vec::new(),
        })
    }
}

/// One `Caller(class=..., method=...)` marker per distinct calling method
/// above every selected method, ordered by caller class then method name.
/// Calls are matched by callee name only, so overloads and same-named
/// methods in other classes share callers. Calls from field initializers
/// or initializer blocks have no calling method and are not reported.
pub fn callers_plan(project: &ProjectState, targets: &TargetFilter) -> Vec<AnchoredMetadata> {
    let methods: BTreeSet<&str> = project
        .files
        .iter()
        .flat_map(|f| &f.decls)
        .filter(|d| d.kind == DeclKind::Method)
        .map(|d| d.qualified_path.as_str())
        .collect();

    let mut callers_of: BTreeMap<&str, BTreeSet<(&str, &str)>> = BTreeMap::new();
    for call in project.files.iter().flat_map(|f| &f.calls) {
        if !methods.contains(call.enclosing.as_str()) {
            continue;
        }
        let (class, method) = call
            .enclosing
            .rsplit_once('.')
            .expect("methods are always nested in a class");
        callers_of
            .entry(call.callee_name.as_str())
            .or_default()
            .insert((class, method));
    }

    let mut entries = Vec::new();
    for file in &project.files {
        for decl in &file.decls {
            if decl.kind != DeclKind::Method || !targets.selects(&decl.qualified_path) {
                continue;
            }
            let Some(callers) = callers_of.get(decl.name.as_str()) else {
                continue;
            };
            for (class, method) in callers {
                entries.push(AnchoredMetadata::Declaration {
                    file: file.path.clone(),
                    decl_path: decl.qualified_path.clone(),
                    line: decl.header_line,
                    marker: BlockMarker::new(CALLERS, CALLER_MARKER)
                        .arg("class", *class)
                        .arg("method", *method),
                });
            }
        }
    }
    entries
}
