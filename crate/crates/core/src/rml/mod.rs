//! RML+FnO mapping documents: data model, Turtle parser, serializer and
//! validation against source headers.
//!
//! The accepted constructs are documented in `docs/mapping-syntax.md`.

mod model;
mod parse;
mod serialize;
pub mod turtle;
mod validate;

use thiserror::Error;

pub use model::{
    FunctionCall, JoinCondition, LogicalSource, MappingDocument, ObjectMap, PredicateObjectMap, RefObjectMap,
    ReferenceFormulation, SubjectMap, Template, TemplateSegment, TermKind, TermMap, TermType, TriplesMap,
};
pub use parse::parse_mapping;
pub use serialize::serialize_mapping;
pub use validate::{validate, Diagnostic, DiagnosticKind};

pub mod ns {
    pub const RR: &str = "http://www.w3.org/ns/r2rml#";
    pub const RML: &str = "http://semweb.mmlab.be/ns/rml#";
    pub const QL: &str = "http://semweb.mmlab.be/ns/ql#";
    pub const FNML: &str = "http://semweb.mmlab.be/ns/fnml#";
    pub const FNO: &str = "https://w3id.org/function/ontology#";
    /// Vocabulary of the alignment functions (the value parameter lives here).
    pub const EABLOCK: &str = "https://w3id.org/eablock/vocab#";
    /// Namespace of the registered function IRIs.
    pub const EABLOCK_FN: &str = "https://w3id.org/eablock/function#";
    /// Reserved namespace for triples maps minted by the translator.
    pub const EABLOCK_GEN: &str = "https://w3id.org/eablock/generated#";
    pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";

    /// The function-call parameter that carries the input value.
    pub fn value_parameter() -> String {
        format!("{EABLOCK}value")
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum MappingError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("triples map <{map}> references unknown parent triples map <{parent}>")]
    UnresolvedParent { map: String, parent: String },
    #[error("triples map <{map}>: unsupported reference formulation <{formulation}> (only ql:CSV)")]
    UnsupportedReferenceFormulation { map: String, formulation: String },
    #[error("malformed function call in triples map <{map}>: {reason}")]
    MalformedFunctionCall { map: String, reason: String },
    #[error("unsupported predicate <{predicate}> on {context}")]
    UnknownPredicate { predicate: String, context: String },
    #[error("triples map <{map}>: {reason}")]
    Invalid { map: String, reason: String },
    #[error("duplicate triples map <{0}>")]
    DuplicateTriplesMap(String),
}
