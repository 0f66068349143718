//! File-level entry points shared by the command line and the C API.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::dataset::{Dataset, DatasetError, Sources};
use crate::eval::{BenchError, PerturbError, SynthError};
use crate::linker::{
    AlignmentBackend, Gazetteer, GazetteerError, LinkerConfig, LocalLinker, RemoteConfig, RemoteLinker, ENDPOINT_ENV,
};
use crate::materializer::{execute, read_ntriples, write_ntriples, MaterializeError, NTriplesError, RdfGraph};
use crate::metrics::{build_class_graph, compute_metrics, GraphMetrics};
use crate::rml::{parse_mapping, validate, Diagnostic, MappingDocument, MappingError};
use crate::translator::{translate, TranslateError, Translation};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Mapping { path: String, source: MappingError },
    #[error("mapping does not match its sources:\n{}", .0.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Gazetteer(#[from] GazetteerError),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Materialize(#[from] MaterializeError),
    #[error(transparent)]
    NTriples(#[from] NTriplesError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Perturb(#[from] PerturbError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("{0}")]
    Config(String),
}

impl PipelineError {
    /// 1 for invalid input (syntax, diagnostics, bad values), 2 for I/O,
    /// backend and configuration failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Mapping { .. } | PipelineError::Invalid(_) => 1,
            PipelineError::Dataset(e) => dataset_code(e),
            PipelineError::Gazetteer(GazetteerError::Io { .. }) => 2,
            PipelineError::Gazetteer(_) => 1,
            PipelineError::Translate(e) => translate_code(e),
            PipelineError::Materialize(e) => materialize_code(e),
            PipelineError::NTriples(NTriplesError::Io { .. }) => 2,
            PipelineError::NTriples(_) => 1,
            PipelineError::Perturb(PerturbError::Dataset(e)) => dataset_code(e),
            PipelineError::Perturb(_) | PipelineError::Synth(_) => 1,
            PipelineError::Bench(e) => match e {
                BenchError::Translate(e) => translate_code(e),
                BenchError::Materialize(e) => materialize_code(e),
                BenchError::Backend { .. } | BenchError::Pool(_) => 2,
                BenchError::Diverged { .. } => 1,
            },
            PipelineError::Io { .. } | PipelineError::Config(_) => 2,
        }
    }
}

fn translate_code(e: &TranslateError) -> i32 {
    match e {
        TranslateError::Backend { .. } | TranslateError::Io { .. } => 2,
        TranslateError::Dataset { source, .. } => dataset_code(source),
        TranslateError::Invalid(_) | TranslateError::Unresolved { .. } => 1,
    }
}

fn materialize_code(e: &MaterializeError) -> i32 {
    match e {
        MaterializeError::Backend { .. } => 2,
        _ => 1,
    }
}

fn dataset_code(e: &DatasetError) -> i32 {
    match e {
        DatasetError::Io { .. } => 2,
        _ => 1,
    }
}

pub fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.display().to_string(), source }
}

/// How to build the alignment backend.
#[derive(Debug, Clone)]
pub enum LinkerChoice {
    Local {
        gazetteer: PathBuf,
        config: LinkerConfig,
    },
    /// `endpoint: None` falls back to the `EABLOCK_ENDPOINT` variable.
    Remote {
        endpoint: Option<String>,
        fail_fast: bool,
        score_floor: f64,
    },
}

pub fn build_backend(choice: &LinkerChoice) -> Result<Box<dyn AlignmentBackend>, PipelineError> {
    match choice {
        LinkerChoice::Local { gazetteer, config } => {
            let g = Gazetteer::load(gazetteer)?;
            let linker = LocalLinker::new(g, config.clone()).map_err(PipelineError::Config)?;
            Ok(Box::new(linker))
        }
        LinkerChoice::Remote { endpoint, fail_fast, score_floor } => {
            let endpoint = endpoint
                .clone()
                .or_else(|| std::env::var(ENDPOINT_ENV).ok().filter(|s| !s.is_empty()))
                .ok_or_else(|| PipelineError::Config(format!("remote linker needs --endpoint or {ENDPOINT_ENV}")))?;
            let mut config = RemoteConfig::new(endpoint);
            config.score_floor = *score_floor;
            if *fail_fast {
                config = config.fail_fast();
            }
            Ok(Box::new(RemoteLinker::new(config)))
        }
    }
}

pub fn load_mapping(path: &Path) -> Result<MappingDocument, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    parse_mapping(&text).map_err(|source| PipelineError::Mapping { path: path.display().to_string(), source })
}

/// Directories searched for sources: `sources_dir` if given, then the
/// mapping file's own directory.
pub fn source_dirs(mapping: &Path, sources_dir: Option<&Path>) -> Vec<PathBuf> {
    let mut dirs: Vec<PathBuf> = sources_dir.map(Path::to_path_buf).into_iter().collect();
    let own = mapping.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")).to_path_buf();
    if !dirs.contains(&own) {
        dirs.push(own);
    }
    dirs
}

/// Loads the sources the document names and validates the document
/// against them. Missing files are reported as diagnostics.
pub fn load_checked_sources(doc: &MappingDocument, dirs: &[PathBuf]) -> Result<Sources, PipelineError> {
    let mut sources = Sources::new();
    for tm in &doc.triples_maps {
        let name = &tm.logical_source.source_path;
        if sources.contains_key(name) {
            continue;
        }
        if let Some(p) = dirs.iter().map(|d| d.join(name)).find(|p| p.is_file()) {
            sources.insert(name.clone(), Dataset::read_csv(&p)?);
        }
    }
    let diagnostics = validate(doc, &sources);
    if !diagnostics.is_empty() {
        return Err(PipelineError::Invalid(diagnostics));
    }
    Ok(sources)
}

pub fn translate_files(
    mapping: &Path,
    sources_dir: Option<&Path>,
    backend: &dyn AlignmentBackend,
    out_dir: &Path,
    keep_intermediate: bool,
) -> Result<Translation, PipelineError> {
    let doc = load_mapping(mapping)?;
    let sources = load_checked_sources(&doc, &source_dirs(mapping, sources_dir))?;
    Ok(translate(&doc, &sources, backend, out_dir, keep_intermediate)?)
}

/// Executes a function-free mapping and writes canonical N-Triples.
pub fn materialize_files(mapping: &Path, sources_dir: Option<&Path>, out: &Path) -> Result<RdfGraph, PipelineError> {
    let doc = load_mapping(mapping)?;
    if doc.has_function_calls() {
        let map = doc
            .triples_maps
            .iter()
            .find(|tm| tm.predicate_object_maps.iter().any(|p| matches!(p.object, crate::rml::ObjectMap::Function(_))))
            .map(|tm| tm.id.clone())
            .unwrap_or_default();
        return Err(MaterializeError::FunctionCallsPresent { map }.into());
    }
    let sources = load_checked_sources(&doc, &source_dirs(mapping, sources_dir))?;
    let graph = execute(&doc, &sources)?;
    write_ntriples(&graph, out)?;
    Ok(graph)
}

pub fn analyze_file(kg: &Path, type_predicate: &str) -> Result<GraphMetrics, PipelineError> {
    let graph = read_ntriples(kg)?;
    Ok(compute_metrics(&build_class_graph(&graph, type_predicate)))
}

pub fn metrics_json(m: &GraphMetrics) -> String {
    let mut s = serde_json::to_string_pretty(m).expect("metrics serialize");
    s.push('\n');
    s
}
