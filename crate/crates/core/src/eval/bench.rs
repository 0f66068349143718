use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::synth::synth_gold;
use crate::dataset::{Dataset, Sources};
use crate::functions::FunctionCategory;
use crate::linker::{
    normalize, AlignmentBackend, CountingBackend, EntityLink, Gazetteer, GazetteerEntry, LinkError, TargetKg,
};
use crate::materializer::{execute, triple_line, MaterializeError, RdfGraph};
use crate::rml::{parse_mapping, MappingDocument};
use crate::translator::{
    collect_function_calls, free_names, links_to_rows, rewrite, translate_in_memory, AlignmentTable, TranslateError,
};

/// Sleeps for a fixed time before every request, standing in for network
/// and service latency.
pub struct LatencyBackend<B> {
    inner: B,
    latency: Duration,
}

impl<B> LatencyBackend<B> {
    pub fn new(inner: B, latency: Duration) -> Self {
        LatencyBackend { inner, latency }
    }
}

impl<B: AlignmentBackend> AlignmentBackend for LatencyBackend<B> {
    fn align(&self, category: FunctionCategory, text: &str, kg: TargetKg) -> Result<Vec<EntityLink>, LinkError> {
        if !self.latency.is_zero() {
            std::thread::sleep(self.latency);
        }
        self.inner.align(category, text, kg)
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Materialize(#[from] MaterializeError),
    #[error("baseline alignment of {source_path}.{attribute} failed: {error}")]
    Backend { source_path: String, attribute: String, error: LinkError },
    #[error("modes disagree: {only_baseline} triples only in baseline, {only_eablock} only in eablock; e.g. {sample}")]
    Diverged { only_baseline: usize, only_eablock: usize, sample: String },
    #[error("cannot build thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy)]
pub struct BenchOptions {
    pub latency: Duration,
    pub jobs: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeReport {
    pub mode: &'static str,
    /// Left out of the serialized report so that it is reproducible; see
    /// [`BenchReport::timings_json`].
    #[serde(skip)]
    pub wall_seconds: f64,
    pub backend_calls: usize,
    /// Values submitted for alignment.
    pub rows_processed: usize,
    pub triples_emitted: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AttributeCalls {
    pub source: String,
    pub attribute: String,
    pub rows: usize,
    pub distinct_normalized_values: usize,
    pub baseline_calls: usize,
    pub eablock_calls: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub latency_ms: f64,
    pub jobs: usize,
    pub baseline: ModeReport,
    pub eablock: ModeReport,
    /// Per attribute bound to a function call.
    pub referenced: Vec<AttributeCalls>,
    pub alignment_triples: usize,
}

impl BenchReport {
    /// Wall-clock times of both modes, which vary from run to run.
    pub fn timings_json(&self) -> String {
        let b = self.baseline.wall_seconds;
        let e = self.eablock.wall_seconds;
        let mut s = serde_json::to_string_pretty(&serde_json::json!({
            "baseline_seconds": b,
            "eablock_seconds": e,
            "speedup": if e > 0.0 { b / e } else { 0.0 },
        }))
        .expect("timings serialize");
        s.push('\n');
        s
    }
}

fn is_textual(ds: &Dataset, col: usize) -> bool {
    ds.rows.iter().any(|r| r[col].chars().any(char::is_alphabetic))
}

struct Baseline {
    graph: RdfGraph,
    rows: usize,
    per_attribute: BTreeMap<(String, String), usize>,
}

/// Whole-source alignment as a pre-processing pass: every row of every
/// textual attribute of every source that feeds a function call.
fn run_baseline(
    doc: &MappingDocument,
    sources: &Sources,
    backend: &dyn AlignmentBackend,
) -> Result<Baseline, BenchError> {
    let sites = collect_function_calls(doc);
    let source_of = |map: &str| doc.triples_map(map).expect("collected from doc").logical_source.source_path.clone();
    let mut per_source: BTreeMap<String, Vec<&crate::rml::FunctionCall>> = BTreeMap::new();
    for s in &sites {
        per_source.entry(source_of(&s.triples_map)).or_default().push(&s.call);
    }
    let mut aligned: HashMap<(String, String), HashMap<String, Vec<EntityLink>>> = HashMap::new();
    let mut per_attribute = BTreeMap::new();
    let mut rows = 0;
    for (path, source_calls) in &per_source {
        let ds = &sources[path];
        for (col, attr) in ds.header.iter().enumerate() {
            if !is_textual(ds, col) {
                continue;
            }
            let call = source_calls.iter().find(|c| &c.input_attribute == attr).unwrap_or(&source_calls[0]);
            let (category, kg) = (call.category(), call.target_kg());
            let values: Vec<&str> =
                ds.rows.iter().map(|r| r[col].as_str()).filter(|v| !normalize(v).is_empty()).collect();
            let results: Vec<Result<Vec<EntityLink>, LinkError>> =
                values.par_iter().map(|v| backend.align(category, v, kg)).collect();
            let mut by_value = HashMap::new();
            for (v, res) in values.iter().zip(results) {
                let links = res.map_err(|error| BenchError::Backend {
                    source_path: path.clone(),
                    attribute: attr.clone(),
                    error,
                })?;
                by_value.insert(v.to_string(), links);
            }
            rows += values.len();
            per_attribute.insert((path.clone(), attr.clone()), values.len());
            aligned.insert((path.clone(), attr.clone()), by_value);
        }
    }
    let mut resolutions = BTreeMap::new();
    let mut all_sources = sources.clone();
    for (site, n) in sites.iter().zip(free_names(doc, sites.len())) {
        let path = source_of(&site.triples_map);
        let empty = HashMap::new();
        let by_value = aligned.get(&(path, site.call.input_attribute.clone())).unwrap_or(&empty);
        let mut table_rows: Vec<(String, String)> =
            by_value.iter().flat_map(|(v, links)| links_to_rows(site.call.category(), v, links.clone())).collect();
        table_rows.sort();
        table_rows.dedup();
        let table =
            AlignmentTable { function_id: site.call.function_id.clone(), kg: site.call.target_kg(), rows: table_rows };
        let file = format!("ALIGN_{n}.csv");
        all_sources.insert(file.clone(), table.to_dataset());
        resolutions.insert((site.triples_map.clone(), site.pom_index), file);
    }
    let rewritten = rewrite(doc, &resolutions)?;
    let graph = execute(&rewritten, &all_sources)?;
    Ok(Baseline { graph, rows, per_attribute })
}

/// Runs the baseline and eager pipelines one after the other and checks
/// that they produce the same graph.
pub fn bench(
    doc: &MappingDocument,
    sources: &Sources,
    backend: &dyn AlignmentBackend,
    options: &BenchOptions,
) -> Result<BenchReport, BenchError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs.max(1))
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    pool.install(|| {
        let base_counter = CountingBackend::new(LatencyBackend::new(backend, options.latency));
        let start = Instant::now();
        let base = run_baseline(doc, sources, &base_counter)?;
        let base_wall = start.elapsed();

        let counted = CountingBackend::new(LatencyBackend::new(backend, options.latency));
        let start = Instant::now();
        let t = translate_in_memory(doc, sources, &counted)?;
        let graph = execute(&t.document, &t.sources_with_tables(sources))?;
        let eager_wall = start.elapsed();

        if graph != base.graph {
            let only_b: Vec<_> = base.graph.difference(&graph).collect();
            let only_e: Vec<_> = graph.difference(&base.graph).collect();
            let sample = only_b.iter().chain(&only_e).next().map(|t| triple_line(t)).unwrap_or_default();
            return Err(BenchError::Diverged { only_baseline: only_b.len(), only_eablock: only_e.len(), sample });
        }

        let sites = collect_function_calls(doc);
        let mut referenced = Vec::new();
        let mut predicates = BTreeSet::new();
        for (site, report) in sites.iter().zip(&t.report.calls) {
            let tm = doc.triples_map(&site.triples_map).expect("collected from doc");
            predicates.insert(tm.predicate_object_maps[site.pom_index].predicate.clone());
            let path = tm.logical_source.source_path.clone();
            let ds = &sources[&path];
            let attr = site.call.input_attribute.clone();
            let distinct: BTreeSet<String> =
                ds.values(&attr).expect("validated").map(normalize).filter(|v| !v.is_empty()).collect();
            referenced.push(AttributeCalls {
                baseline_calls: base.per_attribute.get(&(path.clone(), attr.clone())).copied().unwrap_or(0),
                eablock_calls: report.backend_calls,
                rows: ds.len(),
                distinct_normalized_values: distinct.len(),
                source: path,
                attribute: attr,
            });
        }
        let alignment_triples = graph.iter().filter(|t| predicates.contains(&t.predicate)).count();
        Ok(BenchReport {
            latency_ms: options.latency.as_secs_f64() * 1000.0,
            jobs: options.jobs.max(1),
            baseline: ModeReport {
                mode: "baseline",
                wall_seconds: base_wall.as_secs_f64(),
                backend_calls: base_counter.calls(),
                rows_processed: base.rows,
                triples_emitted: base.graph.len(),
            },
            eablock: ModeReport {
                mode: "eablock",
                wall_seconds: eager_wall.as_secs_f64(),
                backend_calls: counted.calls(),
                rows_processed: t.report.calls.iter().map(|c| c.distinct_inputs).sum(),
                triples_emitted: graph.len(),
            },
            referenced,
            alignment_triples,
        })
    })
}

/// The benchmark dataset: one source with an id column, two label columns
/// bound to alignment calls and 19 numeric columns.
pub struct BenchFixture {
    pub mapping: String,
    pub source_name: String,
    pub source: Dataset,
    pub gazetteer: Gazetteer,
}

impl BenchFixture {
    pub fn document(&self) -> MappingDocument {
        parse_mapping(&self.mapping).expect("fixture mapping parses")
    }

    pub fn sources(&self) -> Sources {
        Sources::from([(self.source_name.clone(), self.source.clone())])
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("mapping.ttl"), &self.mapping)?;
        std::fs::write(dir.join(&self.source_name), self.source.to_csv_string())?;
        std::fs::write(dir.join("gazetteer.tsv"), self.gazetteer.to_tsv())
    }
}

const BENCH_MAPPING: &str = r#"@prefix rr: <http://www.w3.org/ns/r2rml#> .
@prefix rml: <http://semweb.mmlab.be/ns/rml#> .
@prefix ql: <http://semweb.mmlab.be/ns/ql#> .
@prefix fnml: <http://semweb.mmlab.be/ns/fnml#> .
@prefix fno: <https://w3id.org/function/ontology#> .
@prefix eablock: <https://w3id.org/eablock/vocab#> .
@prefix eablock-fn: <https://w3id.org/eablock/function#> .
@prefix ex: <http://example.org/bench/> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .

ex:Record
    rml:logicalSource [ rml:source "records.csv" ; rml:referenceFormulation ql:CSV ] ;
    rr:subjectMap [ rr:template "http://example.org/bench/record/{id}" ; rr:class ex:Record ] ;
    rr:predicateObjectMap [ rr:predicate ex:drug ; rr:objectMap [ rml:reference "drug" ] ] ;
    rr:predicateObjectMap [ rr:predicate ex:disorder ; rr:objectMap [ rml:reference "disorder" ] ] ;
__MEASURES__
    rr:predicateObjectMap [
        rr:predicate owl:sameAs ;
        rr:objectMap [ fnml:functionValue [
            rr:predicateObjectMap [ rr:predicate fno:executes ; rr:object eablock-fn:keyword-dbpedia ] ;
            rr:predicateObjectMap [ rr:predicate eablock:value ; rr:objectMap [ rml:reference "drug" ] ]
        ] ]
    ] ;
    rr:predicateObjectMap [
        rr:predicate ex:disorderConcept ;
        rr:objectMap [ fnml:functionValue [
            rr:predicateObjectMap [ rr:predicate fno:executes ; rr:object eablock-fn:keyword-umls-cui ] ;
            rr:predicateObjectMap [ rr:predicate eablock:value ; rr:objectMap [ rml:reference "disorder" ] ]
        ] ]
    ] .
"#;

fn vary(label: &str, rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..3) {
        0 => label.to_uppercase(),
        1 => format!(" {label}"),
        _ => {
            let mut c = label.chars();
            c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
        }
    }
}

/// Generates a `rows`-row benchmark source.
///
/// In each label column the first half of the rows holds distinct raw
/// values, a tenth of which are case or whitespace variants of another
/// value; the second half repeats earlier values exactly. About a tenth of
/// the base labels are missing from the gazetteer.
pub fn bench_fixture(rows: usize, seed: u64) -> BenchFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = rows / 2;
    let variants = half / 10;
    let bases = half - variants;
    let (_, labels) = synth_gold(2 * bases, 3, seed).expect("label space is large enough");
    let mut entries = Vec::new();
    let mut columns = Vec::new();
    for (c, kg) in [TargetKg::Dbpedia, TargetKg::Umls].into_iter().enumerate() {
        let base: Vec<String> = labels.rows[c * bases..(c + 1) * bases].iter().map(|r| r[0].clone()).collect();
        for (i, label) in base.iter().enumerate() {
            if i % 10 != 9 {
                entries.push(GazetteerEntry {
                    label: label.clone(),
                    iri: format!("http://example.org/{kg}/{c}-{i}"),
                    kg,
                });
            }
        }
        let mut first: Vec<String> = base.clone();
        for v in 0..variants {
            first.push(vary(&base[v * bases / variants.max(1)], &mut rng));
        }
        first.shuffle(&mut rng);
        let mut column = first.clone();
        while column.len() < rows {
            column.push(first[rng.gen_range(0..first.len())].clone());
        }
        columns.push(column);
    }
    let mut header = vec!["id".to_string(), "drug".to_string(), "disorder".to_string()];
    header.extend((1..=19).map(|m| format!("m{m:02}")));
    let data: Vec<Vec<String>> = (0..rows)
        .map(|r| {
            let mut row = vec![(r + 1).to_string(), columns[0][r].clone(), columns[1][r].clone()];
            row.extend((0..19).map(|_| rng.gen_range(0..100_000u32).to_string()));
            row
        })
        .collect();
    let measures: String = (1..=19)
        .map(|m| format!("    rr:predicateObjectMap [ rr:predicate ex:m{m:02} ; rr:objectMap [ rml:reference \"m{m:02}\" ] ] ;\n"))
        .collect();
    BenchFixture {
        mapping: BENCH_MAPPING.replace("__MEASURES__\n", &measures),
        source_name: "records.csv".to_string(),
        source: Dataset::with_rows(header, data),
        gazetteer: Gazetteer::from_entries(entries),
    }
}
