//! In-memory representation of the supported RML+FnO subset.

use std::collections::BTreeMap;

use crate::functions::FunctionCategory;
use crate::linker::TargetKg;

/// Reference formulations accepted for logical sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReferenceFormulation {
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LogicalSource {
    /// Path of the CSV file, relative to the sources directory.
    pub source_path: String,
    pub reference_formulation: ReferenceFormulation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermKind {
    Template,
    Reference,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermType {
    Iri,
    Literal,
}

/// A term-generating map: template, attribute reference or constant.
///
/// `datatype` and `language` only apply to literal terms and are carried
/// through to the generated literals untouched.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermMap {
    pub kind: TermKind,
    pub value: String,
    pub term_type: TermType,
    pub datatype: Option<String>,
    pub language: Option<String>,
}

impl TermMap {
    pub fn template(value: impl Into<String>, term_type: TermType) -> Self {
        Self::new(TermKind::Template, value, term_type)
    }

    pub fn reference(value: impl Into<String>, term_type: TermType) -> Self {
        Self::new(TermKind::Reference, value, term_type)
    }

    pub fn constant_iri(value: impl Into<String>) -> Self {
        Self::new(TermKind::Constant, value, TermType::Iri)
    }

    pub fn constant_literal(value: impl Into<String>) -> Self {
        Self::new(TermKind::Constant, value, TermType::Literal)
    }

    fn new(kind: TermKind, value: impl Into<String>, term_type: TermType) -> Self {
        TermMap { kind, value: value.into(), term_type, datatype: None, language: None }
    }

    /// Source attributes this term map reads.
    pub fn referenced_attributes(&self) -> Vec<String> {
        match self.kind {
            TermKind::Constant => Vec::new(),
            TermKind::Reference => vec![self.value.clone()],
            TermKind::Template => {
                Template::parse(&self.value).map(|t| t.attributes().map(str::to_owned).collect()).unwrap_or_default()
            }
        }
    }
}

/// A parsed `rr:template` string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub segments: Vec<TemplateSegment>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TemplateSegment {
    Text(String),
    Attribute(String),
}

impl Template {
    /// Parses `{ATTR}` placeholders; `\{` and `\}` escape literal braces.
    pub fn parse(template: &str) -> Result<Template, String> {
        let mut segments = Vec::new();
        let mut text = String::new();
        let mut chars = template.chars();
        while let Some(c) = chars.next() {
            match c {
                '\\' => match chars.next() {
                    Some(e @ ('{' | '}' | '\\')) => text.push(e),
                    Some(other) => {
                        text.push('\\');
                        text.push(other);
                    }
                    None => text.push('\\'),
                },
                '{' => {
                    let mut name = String::new();
                    let mut closed = false;
                    for n in chars.by_ref() {
                        if n == '}' {
                            closed = true;
                            break;
                        }
                        if n == '{' {
                            return Err(format!("nested '{{' in template {template:?}"));
                        }
                        name.push(n);
                    }
                    if !closed {
                        return Err(format!("unterminated placeholder in template {template:?}"));
                    }
                    if name.is_empty() {
                        return Err(format!("empty placeholder in template {template:?}"));
                    }
                    if !text.is_empty() {
                        segments.push(TemplateSegment::Text(std::mem::take(&mut text)));
                    }
                    segments.push(TemplateSegment::Attribute(name));
                }
                '}' => return Err(format!("unbalanced '}}' in template {template:?}")),
                _ => text.push(c),
            }
        }
        if !text.is_empty() {
            segments.push(TemplateSegment::Text(text));
        }
        if !segments.iter().any(|s| matches!(s, TemplateSegment::Attribute(_))) {
            return Err(format!("template {template:?} has no placeholder"));
        }
        Ok(Template { segments })
    }

    pub fn attributes(&self) -> impl Iterator<Item = &str> {
        self.segments.iter().filter_map(|s| match s {
            TemplateSegment::Attribute(a) => Some(a.as_str()),
            TemplateSegment::Text(_) => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubjectMap {
    pub term: TermMap,
    pub classes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JoinCondition {
    pub child: String,
    pub parent: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RefObjectMap {
    pub parent_triples_map: String,
    pub join_conditions: Vec<JoinCondition>,
}

/// An object map that calls one of the registered alignment functions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FunctionCall {
    pub function_id: String,
    /// Source attribute bound to the function's value parameter.
    pub input_attribute: String,
}

impl FunctionCall {
    pub fn category(&self) -> FunctionCategory {
        self.spec().category
    }

    pub fn target_kg(&self) -> TargetKg {
        self.spec().target_kg
    }

    fn spec(&self) -> &'static crate::functions::FunctionSpec {
        // Calls are only constructed from registered ids.
        crate::functions::resolve_function(&self.function_id).expect("function call holds a registered function id")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjectMap {
    Term(TermMap),
    Ref(RefObjectMap),
    Function(FunctionCall),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredicateObjectMap {
    pub predicate: String,
    pub object: ObjectMap,
}

#[derive(Debug, Clone, Eq)]
pub struct TriplesMap {
    pub id: String,
    pub logical_source: LogicalSource,
    pub subject_map: SubjectMap,
    pub predicate_object_maps: Vec<PredicateObjectMap>,
}

impl TriplesMap {
    /// Every source attribute read by this map's own term maps, function
    /// inputs and join children.
    pub fn referenced_attributes(&self) -> Vec<String> {
        let mut attrs = self.subject_map.term.referenced_attributes();
        for pom in &self.predicate_object_maps {
            match &pom.object {
                ObjectMap::Term(t) => attrs.extend(t.referenced_attributes()),
                ObjectMap::Ref(r) => attrs.extend(r.join_conditions.iter().map(|j| j.child.clone())),
                ObjectMap::Function(f) => attrs.push(f.input_attribute.clone()),
            }
        }
        attrs
    }

    fn sorted_poms(&self) -> Vec<&PredicateObjectMap> {
        let mut poms: Vec<_> = self.predicate_object_maps.iter().collect();
        poms.sort();
        poms
    }
}

// Predicate-object maps compare as a multiset.
impl PartialEq for TriplesMap {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.logical_source == other.logical_source
            && self.subject_map == other.subject_map
            && self.sorted_poms() == other.sorted_poms()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MappingDocument {
    pub prefixes: BTreeMap<String, String>,
    pub triples_maps: Vec<TriplesMap>,
}

impl MappingDocument {
    pub fn triples_map(&self, id: &str) -> Option<&TriplesMap> {
        self.triples_maps.iter().find(|tm| tm.id == id)
    }

    pub fn has_function_calls(&self) -> bool {
        self.triples_maps
            .iter()
            .flat_map(|tm| &tm.predicate_object_maps)
            .any(|pom| matches!(pom.object, ObjectMap::Function(_)))
    }
}
