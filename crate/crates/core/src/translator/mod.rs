//! Eager evaluation of alignment function calls.
//!
//! Each call is evaluated once per distinct input value, the results are
//! materialized as an `attr1,attr2` table, and the call is replaced by a
//! join against a generated triples map over that table.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dataset::{Dataset, DatasetError, Sources};
use crate::functions::FunctionCategory;
use crate::linker::{normalize, AlignmentBackend, CachedBackend, EntityLink, LinkError, TargetKg};
use crate::rml::ns;
use crate::rml::{
    serialize_mapping, validate, Diagnostic, FunctionCall, JoinCondition, LogicalSource, MappingDocument, ObjectMap,
    RefObjectMap, ReferenceFormulation, SubjectMap, TermMap, TermType, TriplesMap,
};

pub const INPUT_ATTR: &str = "attr1";
pub const OUTPUT_ATTR: &str = "attr2";
const UNLINKED_SAMPLE: usize = 5;

#[derive(Debug, Error)]
pub enum TranslateError {
    #[error("mapping does not match its sources:\n{}", format_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("call {function} on <{map}>: {source}")]
    Dataset { map: String, function: String, source: DatasetError },
    #[error("call {function} on <{map}> failed at input {input:?} after {completed} of {total} inputs: {source}")]
    Backend { map: String, function: String, input: String, completed: usize, total: usize, source: LinkError },
    #[error("no resolution for the function call in <{map}> at predicate-object map {pom_index}")]
    Unresolved { map: String, pom_index: usize },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn format_diagnostics(d: &[Diagnostic]) -> String {
    d.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}

/// A function call and where it sits in the document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallSite {
    pub triples_map: String,
    pub pom_index: usize,
    pub call: FunctionCall,
}

pub fn collect_function_calls(doc: &MappingDocument) -> Vec<CallSite> {
    let mut out = Vec::new();
    for tm in &doc.triples_maps {
        for (i, pom) in tm.predicate_object_maps.iter().enumerate() {
            if let ObjectMap::Function(call) = &pom.object {
                out.push(CallSite { triples_map: tm.id.clone(), pom_index: i, call: call.clone() });
            }
        }
    }
    out
}

/// Distinct values of `attr`, deduplicated on their normalized form.
///
/// The first spelling in source order represents each normalized key;
/// values that normalize to the empty string are dropped. The result is a
/// single column named `attr`, sorted.
pub fn project_inputs(source: &Dataset, attr: &str) -> Result<Dataset, DatasetError> {
    let mut seen = HashMap::new();
    for v in source.values(attr)? {
        let key = normalize(v);
        if !key.is_empty() {
            seen.entry(key).or_insert(v);
        }
    }
    let mut values: Vec<&str> = seen.into_values().collect();
    values.sort_unstable();
    Ok(Dataset::with_rows(vec![attr.to_string()], values.into_iter().map(|v| vec![v.to_string()]).collect()))
}

/// Every distinct raw spelling of `attr` whose normalized form is non-empty.
fn raw_inputs(source: &Dataset, attr: &str) -> Result<Dataset, DatasetError> {
    let values: BTreeSet<&str> = source.values(attr)?.filter(|v| !normalize(v).is_empty()).collect();
    Ok(Dataset::with_rows(vec![attr.to_string()], values.into_iter().map(|v| vec![v.to_string()]).collect()))
}

/// The materialized extension of one function over its inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentTable {
    pub function_id: String,
    pub kg: TargetKg,
    /// (input, IRI) pairs, sorted and unique.
    pub rows: Vec<(String, String)>,
}

impl AlignmentTable {
    pub fn to_dataset(&self) -> Dataset {
        Dataset::with_rows(
            vec![INPUT_ATTR.to_string(), OUTPUT_ATTR.to_string()],
            self.rows.iter().map(|(a, b)| vec![a.clone(), b.clone()]).collect(),
        )
    }

    /// Reads the `attr1,attr2` columns of a dataset.
    pub fn from_dataset(function_id: &str, kg: TargetKg, ds: &Dataset) -> Result<AlignmentTable, DatasetError> {
        let inputs: Vec<&str> = ds.values(INPUT_ATTR)?.collect();
        let outputs: Vec<&str> = ds.values(OUTPUT_ATTR)?.collect();
        let mut rows: Vec<(String, String)> =
            inputs.into_iter().zip(outputs).map(|(a, b)| (a.to_string(), b.to_string())).collect();
        rows.sort();
        rows.dedup();
        Ok(AlignmentTable { function_id: function_id.to_string(), kg, rows })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CallReport {
    pub triples_map: String,
    pub pom_index: usize,
    pub function: String,
    pub input_attribute: String,
    /// Generated table, relative to the output directory.
    pub output: String,
    /// Distinct normalized input values.
    pub distinct_inputs: usize,
    pub rows_emitted: usize,
    pub unlinked_inputs: usize,
    pub unlinked_sample: Vec<String>,
    pub backend_calls: usize,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct TranslationReport {
    pub calls: Vec<CallReport>,
    pub backend_calls: usize,
    pub cache_hits: usize,
}

pub(crate) fn links_to_rows(category: FunctionCategory, input: &str, links: Vec<EntityLink>) -> Vec<(String, String)> {
    let take = if category == FunctionCategory::Keyword { 1 } else { usize::MAX };
    links.into_iter().take(take).filter(|l| !l.iri.is_empty()).map(|l| (input.to_string(), l.iri)).collect()
}

/// Aligns every distinct value of a single-column dataset.
///
/// Keyword calls give at most one row per input, short-text calls one row
/// per returned entity. Inputs are aligned in parallel on the current rayon
/// pool; the result does not depend on scheduling.
pub fn materialize_alignment(
    call: &FunctionCall,
    inputs: &Dataset,
    backend: &dyn AlignmentBackend,
) -> Result<(AlignmentTable, CallReport), TranslateError> {
    let start = Instant::now();
    let category = call.category();
    let kg = call.target_kg();
    let values: BTreeSet<&str> =
        inputs.rows.iter().map(|r| r[0].as_str()).filter(|v| !normalize(v).is_empty()).collect();
    let values: Vec<&str> = values.into_iter().collect();
    let requests = AtomicUsize::new(0);
    let results: Vec<Result<Vec<EntityLink>, LinkError>> = values
        .par_iter()
        .map(|v| {
            requests.fetch_add(1, Ordering::Relaxed);
            backend.align(category, v, kg)
        })
        .collect();

    let mut rows = Vec::new();
    let mut linked_keys = BTreeSet::new();
    let mut all_keys = BTreeMap::new();
    let completed = results.iter().filter(|r| r.is_ok()).count();
    for (v, res) in values.iter().zip(results) {
        let links = res.map_err(|source| TranslateError::Backend {
            map: String::new(),
            function: call.function_id.clone(),
            input: v.to_string(),
            completed,
            total: values.len(),
            source,
        })?;
        let key = normalize(v);
        let new_rows = links_to_rows(category, v, links);
        if !new_rows.is_empty() {
            linked_keys.insert(key.clone());
        }
        all_keys.entry(key).or_insert(*v);
        rows.extend(new_rows);
    }
    rows.sort();
    rows.dedup();
    let unlinked: Vec<&str> = all_keys.iter().filter(|(k, _)| !linked_keys.contains(*k)).map(|(_, v)| *v).collect();
    let table = AlignmentTable { function_id: call.function_id.clone(), kg, rows };
    let report = CallReport {
        triples_map: String::new(),
        pom_index: 0,
        function: call.function_id.clone(),
        input_attribute: call.input_attribute.clone(),
        output: String::new(),
        distinct_inputs: all_keys.len(),
        rows_emitted: table.rows.len(),
        unlinked_inputs: unlinked.len(),
        unlinked_sample: unlinked.iter().take(UNLINKED_SAMPLE).map(|s| s.to_string()).collect(),
        backend_calls: requests.into_inner(),
        elapsed: start.elapsed(),
    };
    Ok((table, report))
}

/// IRI of the triples map generated over the table at `source_path`.
pub fn generated_map_id(source_path: &str) -> String {
    let stem = Path::new(source_path).file_stem().and_then(|s| s.to_str()).unwrap_or(source_path);
    format!("{}{}", ns::EABLOCK_GEN, stem)
}

/// Replaces each function call by a join against a generated triples map.
///
/// `resolutions` maps (triples map id, predicate-object map index) to the
/// path of the call's alignment table. A function-free document is
/// returned unchanged.
pub fn rewrite(
    doc: &MappingDocument,
    resolutions: &BTreeMap<(String, usize), String>,
) -> Result<MappingDocument, TranslateError> {
    let sites = collect_function_calls(doc);
    if sites.is_empty() {
        return Ok(doc.clone());
    }
    let mut out = doc.clone();
    let mut generated: Vec<TriplesMap> = Vec::new();
    for site in &sites {
        let path = resolutions
            .get(&(site.triples_map.clone(), site.pom_index))
            .ok_or_else(|| TranslateError::Unresolved { map: site.triples_map.clone(), pom_index: site.pom_index })?;
        let id = generated_map_id(path);
        if !generated.iter().any(|g| g.id == id) {
            generated.push(TriplesMap {
                id: id.clone(),
                logical_source: LogicalSource {
                    source_path: path.clone(),
                    reference_formulation: ReferenceFormulation::Csv,
                },
                // A reference, not a template: attr2 already holds an IRI and
                // must not be percent-encoded.
                subject_map: SubjectMap { term: TermMap::reference(OUTPUT_ATTR, TermType::Iri), classes: vec![] },
                predicate_object_maps: vec![],
            });
        }
        let tm = out.triples_maps.iter_mut().find(|t| t.id == site.triples_map).expect("collected from doc");
        tm.predicate_object_maps[site.pom_index].object = ObjectMap::Ref(RefObjectMap {
            parent_triples_map: id,
            join_conditions: vec![JoinCondition {
                child: site.call.input_attribute.clone(),
                parent: INPUT_ATTR.to_string(),
            }],
        });
    }
    out.triples_maps.extend(generated);
    out.prefixes.retain(|_, iri| ![ns::FNML, ns::FNO, ns::EABLOCK, ns::EABLOCK_FN].contains(&iri.as_str()));
    if !out.prefixes.values().any(|v| v == ns::EABLOCK_GEN) {
        out.prefixes.entry("eablock-gen".to_string()).or_insert_with(|| ns::EABLOCK_GEN.to_string());
    }
    Ok(out)
}

/// A generated alignment table and the call it resolves.
#[derive(Debug, Clone)]
pub struct GeneratedTable {
    pub site: CallSite,
    /// Source path used by the rewritten mapping, e.g. `ALIGN_1.csv`.
    pub path: String,
    pub table: AlignmentTable,
}

#[derive(Debug, Clone)]
pub struct Translation {
    pub document: MappingDocument,
    pub tables: Vec<GeneratedTable>,
    /// Projected inputs per call (`PROJECT_<n>.csv`).
    pub projections: Vec<(String, Dataset)>,
    pub report: TranslationReport,
}

impl Translation {
    /// Original sources plus the generated tables, ready for execution of
    /// the rewritten document.
    pub fn sources_with_tables(&self, sources: &Sources) -> Sources {
        let mut all = sources.clone();
        for g in &self.tables {
            all.insert(g.path.clone(), g.table.to_dataset());
        }
        all
    }

    pub fn manifest_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("report serializes");
        s.push('\n');
        s
    }
}

pub(crate) fn free_names(doc: &MappingDocument, count: usize) -> Vec<usize> {
    let used_paths: BTreeSet<&str> = doc.triples_maps.iter().map(|t| t.logical_source.source_path.as_str()).collect();
    let used_ids: BTreeSet<&str> = doc.triples_maps.iter().map(|t| t.id.as_str()).collect();
    (1..)
        .filter(|n| {
            let path = format!("ALIGN_{n}.csv");
            !used_paths.contains(path.as_str()) && !used_ids.contains(generated_map_id(&path).as_str())
        })
        .take(count)
        .collect()
}

/// Translates a document without touching the filesystem.
///
/// Calls share one cache over `backend`, so a value seen by several calls
/// with the same function reaches the backend once.
pub fn translate_in_memory(
    doc: &MappingDocument,
    sources: &Sources,
    backend: &dyn AlignmentBackend,
) -> Result<Translation, TranslateError> {
    let diagnostics = validate(doc, sources);
    if !diagnostics.is_empty() {
        return Err(TranslateError::Invalid(diagnostics));
    }
    let sites = collect_function_calls(doc);
    let cache = CachedBackend::new(backend);
    let mut tables = Vec::new();
    let mut projections = Vec::new();
    let mut report = TranslationReport::default();
    let mut resolutions = BTreeMap::new();
    for (site, n) in sites.iter().zip(free_names(doc, sites.len())) {
        let tm = doc.triples_map(&site.triples_map).expect("collected from doc");
        let function = site.call.function_id.clone();
        let ds = &sources[&tm.logical_source.source_path];
        let attr = &site.call.input_attribute;
        let wrap = |source| TranslateError::Dataset { map: tm.id.clone(), function: function.clone(), source };
        let projected = project_inputs(ds, attr).map_err(wrap)?;
        let inputs = raw_inputs(ds, attr).map_err(wrap)?;
        let misses_before = cache.stats().misses;
        let (table, mut call_report) = materialize_alignment(&site.call, &inputs, &cache).map_err(|e| match e {
            TranslateError::Backend { function, input, completed, total, source, .. } => {
                TranslateError::Backend { map: tm.id.clone(), function, input, completed, total, source }
            }
            other => other,
        })?;
        let path = format!("ALIGN_{n}.csv");
        call_report.triples_map = site.triples_map.clone();
        call_report.pom_index = site.pom_index;
        call_report.output = path.clone();
        call_report.backend_calls = cache.stats().misses - misses_before;
        log::info!(
            "{} on <{}>.{}: {} distinct inputs, {} rows, {} unlinked, {} backend calls in {:?}",
            function,
            tm.id,
            attr,
            call_report.distinct_inputs,
            call_report.rows_emitted,
            call_report.unlinked_inputs,
            call_report.backend_calls,
            call_report.elapsed
        );
        resolutions.insert((site.triples_map.clone(), site.pom_index), path.clone());
        projections.push((format!("PROJECT_{n}.csv"), projected));
        tables.push(GeneratedTable { site: site.clone(), path, table });
        report.calls.push(call_report);
    }
    let stats = cache.stats();
    report.backend_calls = stats.misses;
    report.cache_hits = stats.hits;
    let document = rewrite(doc, &resolutions)?;
    Ok(Translation { document, tables, projections, report })
}

pub const MAPPING_FILE: &str = "mapping.ttl";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Translates a document and writes `mapping.ttl`, the `ALIGN_<n>.csv`
/// tables and `manifest.json` to `out_dir` (plus `PROJECT_<n>.csv` when
/// `keep_intermediate` is set).
pub fn translate(
    doc: &MappingDocument,
    sources: &Sources,
    backend: &dyn AlignmentBackend,
    out_dir: &Path,
    keep_intermediate: bool,
) -> Result<Translation, TranslateError> {
    let t = translate_in_memory(doc, sources, backend)?;
    let io = |path: PathBuf| move |source| TranslateError::Io { path: path.display().to_string(), source };
    std::fs::create_dir_all(out_dir).map_err(io(out_dir.to_path_buf()))?;
    let mapping = out_dir.join(MAPPING_FILE);
    std::fs::write(&mapping, serialize_mapping(&t.document)).map_err(io(mapping.clone()))?;
    let mut files: Vec<(String, Dataset)> = t.tables.iter().map(|g| (g.path.clone(), g.table.to_dataset())).collect();
    if keep_intermediate {
        files.extend(t.projections.iter().cloned());
    }
    for (name, ds) in files {
        let path = out_dir.join(&name);
        std::fs::write(&path, ds.to_csv_string()).map_err(io(path.clone()))?;
    }
    let manifest = out_dir.join(MANIFEST_FILE);
    std::fs::write(&manifest, t.manifest_json()).map_err(io(manifest.clone()))?;
    Ok(t)
}
