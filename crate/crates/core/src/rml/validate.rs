use std::fmt;

use serde::Serialize;

use super::model::*;
use crate::dataset::{Dataset, Sources};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    MissingSource,
    MissingAttribute,
    MissingJoinChild,
    MissingJoinParent,
}

/// A problem found when checking a mapping against its sources.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub triples_map: String,
    /// The other triples map involved, for join conditions.
    pub related_map: Option<String>,
    pub source: String,
    pub attribute: Option<String>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DiagnosticKind::MissingSource => {
                write!(f, "triples map <{}>: source {:?} not found", self.triples_map, self.source)
            }
            DiagnosticKind::MissingAttribute => write!(
                f,
                "triples map <{}>: attribute {:?} not in header of {:?}",
                self.triples_map,
                self.attribute.as_deref().unwrap_or(""),
                self.source
            ),
            DiagnosticKind::MissingJoinChild | DiagnosticKind::MissingJoinParent => write!(
                f,
                "join from <{}> to <{}>: attribute {:?} not in header of {:?}",
                self.triples_map,
                self.related_map.as_deref().unwrap_or(""),
                self.attribute.as_deref().unwrap_or(""),
                self.source
            ),
        }
    }
}

/// Checks that every attribute referenced by the document exists in the
/// header of its source, including both sides of every join condition.
pub fn validate(doc: &MappingDocument, sources: &Sources) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let lookup = |tm: &TriplesMap| -> Option<&Dataset> { sources.get(&tm.logical_source.source_path) };
    for tm in &doc.triples_maps {
        let source = tm.logical_source.source_path.clone();
        let Some(ds) = lookup(tm) else {
            out.push(Diagnostic {
                kind: DiagnosticKind::MissingSource,
                triples_map: tm.id.clone(),
                related_map: None,
                source,
                attribute: None,
            });
            continue;
        };
        let mut own = tm.subject_map.term.referenced_attributes();
        for pom in &tm.predicate_object_maps {
            match &pom.object {
                ObjectMap::Term(t) => own.extend(t.referenced_attributes()),
                ObjectMap::Function(f) => own.push(f.input_attribute.clone()),
                ObjectMap::Ref(r) => {
                    let parent = doc.triples_map(&r.parent_triples_map);
                    for jc in &r.join_conditions {
                        if ds.column(&jc.child).is_none() {
                            out.push(Diagnostic {
                                kind: DiagnosticKind::MissingJoinChild,
                                triples_map: tm.id.clone(),
                                related_map: Some(r.parent_triples_map.clone()),
                                source: source.clone(),
                                attribute: Some(jc.child.clone()),
                            });
                        }
                        if let Some(parent) = parent {
                            if let Some(pds) = lookup(parent) {
                                if pds.column(&jc.parent).is_none() {
                                    out.push(Diagnostic {
                                        kind: DiagnosticKind::MissingJoinParent,
                                        triples_map: tm.id.clone(),
                                        related_map: Some(parent.id.clone()),
                                        source: parent.logical_source.source_path.clone(),
                                        attribute: Some(jc.parent.clone()),
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        for attr in own {
            if ds.column(&attr).is_none() && seen.insert(attr.clone()) {
                out.push(Diagnostic {
                    kind: DiagnosticKind::MissingAttribute,
                    triples_map: tm.id.clone(),
                    related_map: None,
                    source: source.clone(),
                    attribute: Some(attr),
                });
            }
        }
    }
    out
}
