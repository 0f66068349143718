//! Entity alignment backends.
//!
//! A backend turns a label or a short text into links to entities of a
//! target knowledge graph. Three are provided: [`LocalLinker`] (an
//! in-process gazetteer matcher), [`RemoteLinker`] (an HTTP client for an
//! external NER+EL service) and [`CachedBackend`], which memoizes any other
//! backend on the normalized input.

mod cache;
mod gazetteer;
mod local;
mod normalize;
mod remote;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{CacheStats, CachedBackend};
pub use gazetteer::{Gazetteer, GazetteerEntry, GazetteerError};
pub use local::{LinkerConfig, LocalLinker, DEFAULT_STOPWORDS};
pub(crate) use normalize::levenshtein_within;
pub use normalize::{levenshtein, normalize};
pub use remote::{RemoteConfig, RemoteLinker, ENDPOINT_ENV};

use crate::functions::FunctionCategory;

/// Knowledge graphs that alignments can target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKg {
    Dbpedia,
    Umls,
    Wikidata,
}

impl TargetKg {
    pub const ALL: [TargetKg; 3] = [TargetKg::Dbpedia, TargetKg::Umls, TargetKg::Wikidata];

    pub fn as_str(self) -> &'static str {
        match self {
            TargetKg::Dbpedia => "dbpedia",
            TargetKg::Umls => "umls",
            TargetKg::Wikidata => "wikidata",
        }
    }
}

impl fmt::Display for TargetKg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TargetKg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dbpedia" => Ok(TargetKg::Dbpedia),
            "umls" => Ok(TargetKg::Umls),
            "wikidata" => Ok(TargetKg::Wikidata),
            other => Err(format!("unknown knowledge graph {other:?} (expected umls, dbpedia or wikidata)")),
        }
    }
}

/// One alignment of a surface form to an entity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityLink {
    pub surface: String,
    pub iri: String,
    pub kg: TargetKg,
    pub score: f64,
}

#[derive(Debug, Error)]
pub enum LinkError {
    /// Connection problems and timeouts; worth retrying.
    #[error("backend transport failure: {0}")]
    Transport(String),
    #[error("malformed backend response: {message} (payload: {excerpt:?})")]
    MalformedResponse { message: String, excerpt: String },
}

impl LinkError {
    pub fn is_retriable(&self) -> bool {
        matches!(self, LinkError::Transport(_))
    }
}

/// Something that can perform NER + entity linking.
///
/// A keyword request returns at most one link. No link is not an error.
pub trait AlignmentBackend: Send + Sync {
    fn align(&self, category: FunctionCategory, text: &str, kg: TargetKg) -> Result<Vec<EntityLink>, LinkError>;
}

impl<B: AlignmentBackend + ?Sized> AlignmentBackend for &B {
    fn align(&self, category: FunctionCategory, text: &str, kg: TargetKg) -> Result<Vec<EntityLink>, LinkError> {
        (**self).align(category, text, kg)
    }
}

impl<B: AlignmentBackend + ?Sized> AlignmentBackend for Box<B> {
    fn align(&self, category: FunctionCategory, text: &str, kg: TargetKg) -> Result<Vec<EntityLink>, LinkError> {
        (**self).align(category, text, kg)
    }
}

impl<B: AlignmentBackend + ?Sized> AlignmentBackend for std::sync::Arc<B> {
    fn align(&self, category: FunctionCategory, text: &str, kg: TargetKg) -> Result<Vec<EntityLink>, LinkError> {
        (**self).align(category, text, kg)
    }
}

pub fn align_keyword(
    backend: &dyn AlignmentBackend,
    text: &str,
    kg: TargetKg,
) -> Result<Option<EntityLink>, LinkError> {
    Ok(backend.align(FunctionCategory::Keyword, text, kg)?.into_iter().next())
}

pub fn align_text(backend: &dyn AlignmentBackend, text: &str, kg: TargetKg) -> Result<Vec<EntityLink>, LinkError> {
    backend.align(FunctionCategory::ShortText, text, kg)
}

/// Wraps a backend and counts the requests that reach it.
pub struct CountingBackend<B> {
    inner: B,
    calls: AtomicUsize,
}

impl<B> CountingBackend<B> {
    pub fn new(inner: B) -> Self {
        CountingBackend { inner, calls: AtomicUsize::new(0) }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::SeqCst);
    }
}

impl<B: AlignmentBackend> AlignmentBackend for CountingBackend<B> {
    fn align(&self, category: FunctionCategory, text: &str, kg: TargetKg) -> Result<Vec<EntityLink>, LinkError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.align(category, text, kg)
    }
}
