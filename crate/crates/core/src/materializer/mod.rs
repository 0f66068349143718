//! A small RML engine over CSV sources, and the per-row (lazy) evaluator
//! used as the reference semantics for translated documents.

mod iri;
mod ntriples;

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

pub use iri::{check_iri, iri_safe};
pub use ntriples::{parse_ntriples, read_ntriples, to_ntriples, triple_line, write_ntriples, NTriplesError};

use crate::dataset::{Dataset, Sources};
use crate::functions::FunctionCategory;
use crate::linker::{normalize, AlignmentBackend, CachedBackend, LinkError};
use crate::rml::ns::RDF;
use crate::rml::{
    FunctionCall, MappingDocument, ObjectMap, RefObjectMap, Template, TemplateSegment, TermKind, TermMap, TermType,
    TriplesMap,
};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    Literal { value: String, datatype: Option<String>, language: Option<String> },
}

impl Term {
    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(i) => Some(i),
            Term::Literal { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: impl Into<String>, predicate: impl Into<String>, object: Term) -> Self {
        Triple { subject: subject.into(), predicate: predicate.into(), object }
    }
}

/// A set of triples.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RdfGraph {
    triples: BTreeSet<Triple>,
}

impl RdfGraph {
    pub fn insert(&mut self, t: Triple) -> bool {
        self.triples.insert(t)
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.triples.contains(t)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn difference<'a>(&'a self, other: &'a RdfGraph) -> impl Iterator<Item = &'a Triple> {
        self.triples.difference(&other.triples)
    }
}

impl FromIterator<Triple> for RdfGraph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        RdfGraph { triples: iter.into_iter().collect() }
    }
}

impl Extend<Triple> for RdfGraph {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        self.triples.extend(iter)
    }
}

#[derive(Debug, Error)]
pub enum MaterializeError {
    #[error("triples map <{map}> contains a function call; translate the document first")]
    FunctionCallsPresent { map: String },
    #[error("triples map <{map}>: source {source_path:?} not loaded")]
    MissingSource { map: String, source_path: String },
    #[error("triples map <{map}>: attribute {attribute:?} not in source header")]
    MissingAttribute { map: String, attribute: String },
    #[error("triples map <{map}>: unknown parent triples map <{parent}>")]
    UnresolvedParent { map: String, parent: String },
    #[error("triples map <{map}>: bad template: {reason}")]
    Template { map: String, reason: String },
    #[error("triples map <{map}>, row {row}: invalid IRI: {reason}")]
    InvalidIri { map: String, row: usize, reason: String },
    #[error("triples map <{map}>, row {row}: alignment failed: {source}")]
    Backend { map: String, row: usize, source: LinkError },
}

enum Compiled {
    Constant(Term),
    Reference(usize),
    Template(Vec<Segment>),
}

enum Segment {
    Text(String),
    Column(usize),
}

struct CompiledTerm {
    how: Compiled,
    term_type: TermType,
    datatype: Option<String>,
    language: Option<String>,
}

impl CompiledTerm {
    fn new(map: &TriplesMap, ds: &Dataset, tm: &TermMap) -> Result<Self, MaterializeError> {
        let column = |attr: &str| {
            ds.column(attr)
                .ok_or_else(|| MaterializeError::MissingAttribute { map: map.id.clone(), attribute: attr.to_string() })
        };
        let how = match tm.kind {
            TermKind::Constant => Compiled::Constant(match tm.term_type {
                TermType::Iri => Term::Iri(tm.value.clone()),
                TermType::Literal => literal(tm.value.clone(), tm),
            }),
            TermKind::Reference => Compiled::Reference(column(&tm.value)?),
            TermKind::Template => {
                let t = Template::parse(&tm.value)
                    .map_err(|reason| MaterializeError::Template { map: map.id.clone(), reason })?;
                let mut segs = Vec::new();
                for s in &t.segments {
                    segs.push(match s {
                        TemplateSegment::Text(x) => Segment::Text(x.clone()),
                        TemplateSegment::Attribute(a) => Segment::Column(column(a)?),
                    });
                }
                Compiled::Template(segs)
            }
        };
        Ok(CompiledTerm { how, term_type: tm.term_type, datatype: tm.datatype.clone(), language: tm.language.clone() })
    }

    /// The generated term, or `None` when a referenced value is empty.
    fn generate(&self, row: &[String]) -> Option<Term> {
        let value = match &self.how {
            Compiled::Constant(t) => return Some(t.clone()),
            Compiled::Reference(c) => {
                let v = &row[*c];
                if v.is_empty() {
                    return None;
                }
                v.clone()
            }
            Compiled::Template(segs) => {
                let mut out = String::new();
                for s in segs {
                    match s {
                        Segment::Text(t) => out.push_str(t),
                        Segment::Column(c) => {
                            let v = &row[*c];
                            if v.is_empty() {
                                return None;
                            }
                            match self.term_type {
                                TermType::Iri => out.push_str(&iri_safe(v)),
                                TermType::Literal => out.push_str(v),
                            }
                        }
                    }
                }
                out
            }
        };
        Some(match self.term_type {
            TermType::Iri => Term::Iri(value),
            TermType::Literal => {
                Term::Literal { value, datatype: self.datatype.clone(), language: self.language.clone() }
            }
        })
    }
}

fn literal(value: String, tm: &TermMap) -> Term {
    Term::Literal { value, datatype: tm.datatype.clone(), language: tm.language.clone() }
}

fn valid_iri(term: Term, map: &str, row: usize) -> Result<Term, MaterializeError> {
    if let Term::Iri(i) = &term {
        check_iri(i).map_err(|reason| MaterializeError::InvalidIri { map: map.to_string(), row: row + 1, reason })?;
    }
    Ok(term)
}

struct Engine<'a> {
    doc: &'a MappingDocument,
    sources: &'a Sources,
    backend: Option<&'a dyn AlignmentBackend>,
}

impl<'a> Engine<'a> {
    fn source(&self, tm: &TriplesMap) -> Result<&'a Dataset, MaterializeError> {
        self.sources.get(&tm.logical_source.source_path).ok_or_else(|| MaterializeError::MissingSource {
            map: tm.id.clone(),
            source_path: tm.logical_source.source_path.clone(),
        })
    }

    fn parent(&self, tm: &TriplesMap, r: &RefObjectMap) -> Result<&'a TriplesMap, MaterializeError> {
        self.doc.triples_map(&r.parent_triples_map).ok_or_else(|| MaterializeError::UnresolvedParent {
            map: tm.id.clone(),
            parent: r.parent_triples_map.clone(),
        })
    }

    fn subject(
        &self,
        tm: &TriplesMap,
        term: &CompiledTerm,
        ds: &Dataset,
        row: usize,
    ) -> Result<Option<String>, MaterializeError> {
        match term.generate(&ds.rows[row]) {
            None => Ok(None),
            Some(Term::Iri(i)) => match valid_iri(Term::Iri(i), &tm.id, row)? {
                Term::Iri(i) => Ok(Some(i)),
                Term::Literal { .. } => unreachable!(),
            },
            Some(Term::Literal { .. }) => Err(MaterializeError::InvalidIri {
                map: tm.id.clone(),
                row: row + 1,
                reason: "subject map generates a literal".into(),
            }),
        }
    }

    fn run_map(&self, tm: &TriplesMap, out: &mut RdfGraph) -> Result<(), MaterializeError> {
        let ds = self.source(tm)?;
        let subject = CompiledTerm::new(tm, ds, &tm.subject_map.term)?;
        let rdf_type = format!("{RDF}type");

        enum Pom<'p> {
            Term(CompiledTerm),
            Positional(&'p TriplesMap, &'p Dataset, CompiledTerm),
            Join {
                child_cols: Vec<usize>,
                parent: &'p TriplesMap,
                parent_ds: &'p Dataset,
                subject: CompiledTerm,
                index: HashMap<Vec<&'p str>, Vec<usize>>,
            },
            Function(&'p FunctionCall, usize),
        }

        let mut poms = Vec::with_capacity(tm.predicate_object_maps.len());
        for pom in &tm.predicate_object_maps {
            let compiled = match &pom.object {
                ObjectMap::Term(t) => Pom::Term(CompiledTerm::new(tm, ds, t)?),
                ObjectMap::Ref(r) => {
                    let parent = self.parent(tm, r)?;
                    let parent_ds = self.source(parent)?;
                    let psubj = CompiledTerm::new(parent, parent_ds, &parent.subject_map.term)?;
                    if r.join_conditions.is_empty() {
                        Pom::Positional(parent, parent_ds, psubj)
                    } else {
                        let mut child_cols = Vec::new();
                        let mut parent_cols = Vec::new();
                        for j in &r.join_conditions {
                            child_cols.push(ds.column(&j.child).ok_or_else(|| MaterializeError::MissingAttribute {
                                map: tm.id.clone(),
                                attribute: j.child.clone(),
                            })?);
                            parent_cols.push(parent_ds.column(&j.parent).ok_or_else(|| {
                                MaterializeError::MissingAttribute {
                                    map: parent.id.clone(),
                                    attribute: j.parent.clone(),
                                }
                            })?);
                        }
                        let mut index: HashMap<Vec<&str>, Vec<usize>> = HashMap::new();
                        for (i, row) in parent_ds.rows.iter().enumerate() {
                            let key: Vec<&str> = parent_cols.iter().map(|&c| row[c].as_str()).collect();
                            if key.iter().any(|k| k.is_empty()) {
                                continue;
                            }
                            index.entry(key).or_default().push(i);
                        }
                        Pom::Join { child_cols, parent, parent_ds, subject: psubj, index }
                    }
                }
                ObjectMap::Function(f) => {
                    if self.backend.is_none() {
                        return Err(MaterializeError::FunctionCallsPresent { map: tm.id.clone() });
                    }
                    let col = ds.column(&f.input_attribute).ok_or_else(|| MaterializeError::MissingAttribute {
                        map: tm.id.clone(),
                        attribute: f.input_attribute.clone(),
                    })?;
                    Pom::Function(f, col)
                }
            };
            poms.push((pom.predicate.as_str(), compiled));
        }

        for (r, row) in ds.rows.iter().enumerate() {
            let Some(s) = self.subject(tm, &subject, ds, r)? else { continue };
            for class in &tm.subject_map.classes {
                out.insert(Triple::new(s.clone(), rdf_type.clone(), Term::Iri(class.clone())));
            }
            for (predicate, pom) in &poms {
                let mut emit = |o: Term| out.insert(Triple::new(s.clone(), predicate.to_string(), o));
                match pom {
                    Pom::Term(t) => {
                        if let Some(o) = t.generate(row) {
                            emit(valid_iri(o, &tm.id, r)?);
                        }
                    }
                    Pom::Positional(parent, pds, psubj) => {
                        if r < pds.rows.len() {
                            if let Some(o) = self.subject(parent, psubj, pds, r)? {
                                emit(Term::Iri(o));
                            }
                        }
                    }
                    Pom::Join { child_cols, parent, parent_ds, subject: psubj, index } => {
                        let key: Vec<&str> = child_cols.iter().map(|&c| row[c].as_str()).collect();
                        if key.iter().any(|k| k.is_empty()) {
                            continue;
                        }
                        for &pr in index.get(&key).into_iter().flatten() {
                            if let Some(o) = self.subject(parent, psubj, parent_ds, pr)? {
                                emit(Term::Iri(o));
                            }
                        }
                    }
                    Pom::Function(f, col) => {
                        let value = &row[*col];
                        if normalize(value).is_empty() {
                            continue;
                        }
                        let backend = self.backend.expect("checked when compiling");
                        let links = backend
                            .align(f.category(), value, f.target_kg())
                            .map_err(|source| MaterializeError::Backend { map: tm.id.clone(), row: r + 1, source })?;
                        let take = if f.category() == FunctionCategory::Keyword { 1 } else { usize::MAX };
                        for link in links.into_iter().take(take) {
                            emit(valid_iri(Term::Iri(link.iri), &tm.id, r)?);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn run(&self) -> Result<RdfGraph, MaterializeError> {
        let mut out = RdfGraph::default();
        for tm in &self.doc.triples_maps {
            self.run_map(tm, &mut out)?;
        }
        Ok(out)
    }
}

/// Executes a function-free mapping document.
pub fn execute(doc: &MappingDocument, sources: &Sources) -> Result<RdfGraph, MaterializeError> {
    if let Some(tm) = doc
        .triples_maps
        .iter()
        .find(|tm| tm.predicate_object_maps.iter().any(|p| matches!(p.object, ObjectMap::Function(_))))
    {
        return Err(MaterializeError::FunctionCallsPresent { map: tm.id.clone() });
    }
    Engine { doc, sources, backend: None }.run()
}

/// Executes a document, evaluating function calls row by row through a
/// fresh cache over `backend`.
pub fn lazy_execute(
    doc: &MappingDocument,
    sources: &Sources,
    backend: &dyn AlignmentBackend,
) -> Result<RdfGraph, MaterializeError> {
    let cached = CachedBackend::new(backend);
    Engine { doc, sources, backend: Some(&cached) }.run()
}
