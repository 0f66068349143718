//! Registry of the entity-alignment functions that mappings may call.
//!
//! There are exactly six: a keyword-based and a short-text-based function
//! for each target knowledge graph. Keyword functions take a
//! case-insensitive label and produce at most one entity; short-text
//! functions take a short text and produce a list of entities.

use std::fmt;
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::linker::{levenshtein, TargetKg};
use crate::rml::ns::EABLOCK_FN;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionCategory {
    Keyword,
    ShortText,
}

impl fmt::Display for FunctionCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FunctionCategory::Keyword => "keyword",
            FunctionCategory::ShortText => "text",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FunctionSpec {
    pub id: String,
    pub category: FunctionCategory,
    pub target_kg: TargetKg,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("unknown function <{iri}>; nearest registered function is <{nearest}>")]
pub struct UnknownFunction {
    pub iri: String,
    pub nearest: String,
}

fn local_name(category: FunctionCategory, kg: TargetKg) -> &'static str {
    use FunctionCategory::*;
    use TargetKg::*;
    match (category, kg) {
        (Keyword, Dbpedia) => "keyword-dbpedia",
        (Keyword, Umls) => "keyword-umls-cui",
        (Keyword, Wikidata) => "keyword-wikidata",
        (ShortText, Dbpedia) => "text-dbpedia",
        (ShortText, Umls) => "text-umls-cui",
        (ShortText, Wikidata) => "text-wikidata",
    }
}

fn registry() -> &'static [FunctionSpec] {
    static REGISTRY: OnceLock<Vec<FunctionSpec>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut specs = Vec::with_capacity(6);
        for category in [FunctionCategory::Keyword, FunctionCategory::ShortText] {
            for kg in TargetKg::ALL {
                specs.push(FunctionSpec {
                    id: format!("{EABLOCK_FN}{}", local_name(category, kg)),
                    category,
                    target_kg: kg,
                });
            }
        }
        specs
    })
}

/// All registered functions, ordered by category then target KG.
pub fn list_functions() -> &'static [FunctionSpec] {
    registry()
}

/// Looks up a function by its full IRI (case-sensitive).
pub fn resolve_function(iri: &str) -> Result<&'static FunctionSpec, UnknownFunction> {
    registry().iter().find(|s| s.id == iri).ok_or_else(|| {
        let nearest = registry()
            .iter()
            .min_by_key(|s| (levenshtein(&s.id, iri), s.id.clone()))
            .map(|s| s.id.clone())
            .unwrap_or_default();
        UnknownFunction { iri: iri.to_string(), nearest }
    })
}

/// The function IRI for a category and target.
pub fn function_iri(category: FunctionCategory, kg: TargetKg) -> String {
    format!("{EABLOCK_FN}{}", local_name(category, kg))
}
