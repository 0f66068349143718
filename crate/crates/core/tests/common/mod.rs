#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use eablock::dataset::{Dataset, Sources};
use eablock::linker::{Gazetteer, LinkerConfig, LocalLinker};
use eablock::pipeline::{load_checked_sources, load_mapping, source_dirs};
use eablock::rml::{parse_mapping, MappingDocument};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FUNCTIONS: [&str; 6] =
    ["keyword-dbpedia", "keyword-umls-cui", "keyword-wikidata", "text-dbpedia", "text-umls-cui", "text-wikidata"];

pub const PREFIXES: &str = r#"@prefix rr: <http://www.w3.org/ns/r2rml#> .
@prefix rml: <http://semweb.mmlab.be/ns/rml#> .
@prefix ql: <http://semweb.mmlab.be/ns/ql#> .
@prefix fnml: <http://semweb.mmlab.be/ns/fnml#> .
@prefix fno: <https://w3id.org/function/ontology#> .
@prefix eablock: <https://w3id.org/eablock/vocab#> .
@prefix eablock-fn: <https://w3id.org/eablock/function#> .
@prefix ex: <http://example.org/> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
"#;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

pub fn function_fixture(name: &str) -> PathBuf {
    fixtures().join("functions").join(name)
}

pub fn function_gazetteer_path() -> PathBuf {
    fixtures().join("functions").join("gazetteer.tsv")
}

pub fn linker_from(path: &Path) -> LocalLinker {
    LocalLinker::new(Gazetteer::load(path).unwrap(), LinkerConfig::default()).unwrap()
}

pub fn function_linker() -> LocalLinker {
    linker_from(&function_gazetteer_path())
}

/// Loads a fixture mapping and its sources from disk.
pub fn load_fixture(mapping: &Path) -> (MappingDocument, Sources) {
    let doc = load_mapping(mapping).unwrap();
    let sources = load_checked_sources(&doc, &source_dirs(mapping, None)).unwrap();
    (doc, sources)
}

pub fn ds(header: &[&str], rows: Vec<Vec<String>>) -> Dataset {
    Dataset::with_rows(header.iter().map(|s| s.to_string()).collect(), rows)
}

pub fn call(function: &str, attr: &str) -> String {
    format!(
        r#"[ fnml:functionValue [
            rr:predicateObjectMap [ rr:predicate fno:executes ; rr:objectMap [ rr:constant eablock-fn:{function} ] ] ;
            rr:predicateObjectMap [ rr:predicate eablock:value ; rr:objectMap [ rml:reference "{attr}" ] ] ] ]"#
    )
}

const KEYWORDS: &[&str] = &[
    "Aspirin",
    "aspirin ",
    "IBUPROFEN",
    "Warfarn",
    "hypertension",
    "Hypertention",
    "high  blood pressure",
    "Diabetes Mellitus",
    "asthma",
    "malignant histiocytosis",
    "Mystery",
    "zzzzzz",
    "",
];

const TEXTS: &[&str] = &[
    "Aspirin interacts with warfarin",
    "ibuprofen and aspirin",
    "patient suffers from hypertension and diabetes mellitus",
    "high blood pressure with asthma",
    "malignant histiocytosis cohort",
    "the and of",
    "nothing to see",
    "",
];

/// A random mapping instance: one child map calling a random registry
/// function, joined to 0, 1 or 2 parent maps.
pub struct Instance {
    pub doc: MappingDocument,
    pub sources: Sources,
    pub function: &'static str,
    pub refs: usize,
}

pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let function = FUNCTIONS[rng.gen_range(0..FUNCTIONS.len())];
    let pool = if function.starts_with("keyword") { KEYWORDS } else { TEXTS };
    let k = rng.gen_range(1..=pool.len().min(8));
    let labels: Vec<&str> = pool.choose_multiple(&mut rng, k).copied().collect();
    let rows = rng.gen_range(1..=200);
    let refs = rng.gen_range(0..=2);
    let keys = ["k1", "k2", "k3", "k4", ""];

    let child_rows: Vec<Vec<String>> = (0..rows)
        .map(|i| {
            vec![
                format!("r{i}"),
                labels.choose(&mut rng).unwrap().to_string(),
                keys.choose(&mut rng).unwrap().to_string(),
                keys.choose(&mut rng).unwrap().to_string(),
            ]
        })
        .collect();
    let mut sources = Sources::new();
    sources.insert("child.csv".into(), ds(&["id", "label", "p1", "p2"], child_rows));

    let mut body = format!(
        r#"ex:Child
    rml:logicalSource [ rml:source "child.csv" ; rml:referenceFormulation ql:CSV ] ;
    rr:subjectMap [ rr:template "http://example.org/child/{{id}}" ; rr:class ex:Child ] ;
    rr:predicateObjectMap [ rr:predicate ex:label ; rr:objectMap [ rml:reference "label" ] ] ;
    rr:predicateObjectMap [ rr:predicate owl:sameAs ; rr:objectMap {} ]"#,
        call(function, "label")
    );
    for r in 1..=refs {
        body.push_str(&format!(
            r#" ;
    rr:predicateObjectMap [ rr:predicate ex:ref{r} ;
        rr:objectMap [ rr:parentTriplesMap ex:Parent{r} ; rr:joinCondition [ rr:child "p{r}" ; rr:parent "key" ] ] ]"#
        ));
    }
    body.push_str(" .\n");
    for r in 1..=refs {
        let count = rng.gen_range(1..=4);
        let parent_keys: BTreeSet<&str> = keys[..4].choose_multiple(&mut rng, count).copied().collect();
        let parent_rows =
            parent_keys.iter().map(|k| vec![k.to_string(), labels.choose(&mut rng).unwrap().to_string()]).collect();
        sources.insert(format!("parent{r}.csv"), ds(&["key", "name"], parent_rows));
        // about half the parents call the function on their own column too
        let extra = if rng.gen_bool(0.5) {
            format!(
                " ;\n    rr:predicateObjectMap [ rr:predicate ex:aligned ; rr:objectMap {} ]",
                call(function, "name")
            )
        } else {
            String::new()
        };
        body.push_str(&format!(
            r#"
ex:Parent{r}
    rml:logicalSource [ rml:source "parent{r}.csv" ; rml:referenceFormulation ql:CSV ] ;
    rr:subjectMap [ rr:template "http://example.org/parent{r}/{{key}}" ; rr:class ex:Parent ] ;
    rr:predicateObjectMap [ rr:predicate ex:name ; rr:objectMap [ rml:reference "name" ] ]{extra} .
"#
        ));
    }
    let doc = parse_mapping(&format!("{PREFIXES}\n{body}")).unwrap();
    Instance { doc, sources, function, refs }
}

/// Brute-force reference for the class-graph metrics: Floyd-Warshall
/// distances, exhaustive triangle enumeration and union-find components.
pub fn oracle_metrics(vertices: &[String], edges: &[(String, String, String)]) -> eablock::metrics::GraphMetrics {
    let vs: Vec<&String> = vertices.iter().collect::<BTreeSet<_>>().into_iter().collect();
    let n = vs.len();
    let idx = |v: &String| vs.iter().position(|w| *w == v).unwrap();
    let labeled: BTreeSet<&(String, String, String)> = edges.iter().collect();
    let mut adj = vec![vec![false; n]; n];
    for (q, _, k) in &labeled {
        let (a, b) = (idx(q), idx(k));
        if a != b {
            adj[a][b] = true;
            adj[b][a] = true;
        }
    }
    const INF: usize = usize::MAX / 4;
    let mut d = vec![vec![INF; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                d[i][j] = 0;
            } else if adj[i][j] {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    let diameter = d.iter().flatten().copied().filter(|&x| x < INF).max().unwrap_or(0);

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    let mut undirected = 0;
    for (i, row) in adj.iter().enumerate() {
        for (j, _) in row.iter().enumerate().skip(i + 1).filter(|(_, &e)| e) {
            undirected += 1;
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            parent[a] = b;
        }
    }
    let components = (0..n).filter(|&i| find(&mut parent, i) == i).count();

    let mut coefficients = Vec::new();
    for v in 0..n {
        let nbrs: Vec<usize> = (0..n).filter(|&w| adj[v][w]).collect();
        let deg = nbrs.len();
        if deg < 2 {
            continue;
        }
        let mut t = 0;
        for a in 0..n {
            for b in a + 1..n {
                if adj[v][a] && adj[v][b] && adj[a][b] {
                    t += 1;
                }
            }
        }
        coefficients.push(2.0 * t as f64 / (deg * (deg - 1)) as f64);
    }
    eablock::metrics::GraphMetrics {
        node_count: n,
        edge_count: labeled.len(),
        avg_neighbors: if n == 0 {
            0.0
        } else {
            (0..n).map(|v| (0..n).filter(|&w| adj[v][w]).count()).sum::<usize>() as f64 / n as f64
        },
        diameter,
        clustering_coefficient: if coefficients.is_empty() {
            0.0
        } else {
            coefficients.iter().sum::<f64>() / coefficients.len() as f64
        },
        density: if n < 2 { 0.0 } else { 2.0 * undirected as f64 / (n * (n - 1)) as f64 },
        connected_components: components,
    }
}

/// Compares metrics: integers exactly, reals within `tol`.
pub fn metrics_agree(a: &eablock::metrics::GraphMetrics, b: &eablock::metrics::GraphMetrics, tol: f64) -> bool {
    a.node_count == b.node_count
        && a.edge_count == b.edge_count
        && a.diameter == b.diameter
        && a.connected_components == b.connected_components
        && (a.avg_neighbors - b.avg_neighbors).abs() <= tol
        && (a.clustering_coefficient - b.clustering_coefficient).abs() <= tol
        && (a.density - b.density).abs() <= tol
}

/// A seeded random labeled class graph with at most `max_n` vertices,
/// including self-loops and parallel edges under different predicates.
pub fn random_class_graph(seed: u64, max_n: usize) -> (Vec<String>, Vec<(String, String, String)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(0..=max_n);
    let vertices: Vec<String> = (0..n).map(|i| format!("http://example.org/class/C{i}")).collect();
    let mut edges = Vec::new();
    if n > 0 {
        let p: f64 = rng.gen_range(0.0..0.8);
        for a in 0..n {
            for b in 0..n {
                for label in ["p", "q"] {
                    if rng.gen_bool(p / 2.0) {
                        edges.push((vertices[a].clone(), format!("http://example.org/{label}"), vertices[b].clone()));
                    }
                }
            }
        }
    }
    (vertices, edges)
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_eablock")
}

/// Runs the command line binary; returns (exit code, stdout, stderr).
pub fn eablock<I, S>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let out = std::process::Command::new(bin()).args(args).env_remove("EABLOCK_ENDPOINT").output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

/// One command line invocation; `{out}` in an argument is replaced by a
/// fresh output directory per run.
pub struct Scenario {
    pub name: &'static str,
    pub args: Vec<String>,
}

/// Prepares inputs under `input` and returns one scenario per subcommand.
pub fn cli_scenarios(input: &Path) -> Vec<Scenario> {
    use eablock::eval::{bench_fixture, perturb, synth_gold, ErrorType, PerturbationSpec};
    use eablock::translator::translate_in_memory;

    std::fs::create_dir_all(input).unwrap();
    let (gaz, gold) = synth_gold(60, 3, 11).unwrap();
    std::fs::write(input.join("gazetteer.tsv"), gaz.to_tsv()).unwrap();
    gold.write_csv(&input.join("gold.csv")).unwrap();
    let (testbed, report) = perturb(&gold, "label", &PerturbationSpec::new(ErrorType::All, 0.5, 5)).unwrap();
    testbed.write_csv(&input.join("testbed.csv")).unwrap();
    std::fs::write(input.join("perturb_report.json"), serde_json::to_string(&report).unwrap()).unwrap();
    let doc = parse_mapping(&format!(
        r#"{PREFIXES}
        ex:Label rml:logicalSource [ rml:source "testbed.csv" ; rml:referenceFormulation ql:CSV ] ;
            rr:subjectMap [ rr:template "http://example.org/row/{{iri}}" ] ;
            rr:predicateObjectMap [ rr:predicate owl:sameAs ; rr:objectMap {} ] ."#,
        call("keyword-wikidata", "label")
    ))
    .unwrap();
    let sources = Sources::from([("testbed.csv".to_string(), testbed)]);
    let t = translate_in_memory(&doc, &sources, &linker_from(&input.join("gazetteer.tsv"))).unwrap();
    t.tables[0].table.to_dataset().write_csv(&input.join("pred.csv")).unwrap();

    let motivating = fixtures().join("motivating");
    let kg = input.join("kg.nt");
    let graph = eablock::materializer::lazy_execute(
        &load_mapping(&motivating.join("mapping_eablock.ttl")).unwrap(),
        &load_fixture(&motivating.join("mapping_eablock.ttl")).1,
        &linker_from(&motivating.join("gazetteer.tsv")),
    )
    .unwrap();
    eablock::materializer::write_ntriples(&graph, &kg).unwrap();
    bench_fixture(200, 3).write(&input.join("bench")).unwrap();

    let p = |path: PathBuf| path.display().to_string();
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let mut scenarios = vec![
        Scenario {
            name: "translate",
            args: s(&[
                "translate",
                "--mapping",
                &p(motivating.join("mapping_eablock.ttl")),
                "--gazetteer",
                &p(motivating.join("gazetteer.tsv")),
                "--keep-intermediate",
                "--jobs",
                "3",
                "--out",
                "{out}",
            ]),
        },
        Scenario {
            name: "run",
            args: s(&[
                "run",
                "--mapping",
                &p(function_fixture("text-umls-cui").join("mapping.ttl")),
                "--gazetteer",
                &p(function_gazetteer_path()),
                "--out",
                "{out}",
            ]),
        },
        Scenario {
            name: "materialize",
            args: s(&["materialize", "--mapping", &p(motivating.join("mapping_baseline.ttl")), "--out", "{out}/kg.nt"]),
        },
        Scenario { name: "analyze", args: s(&["analyze", "--kg", &p(kg), "--out", "{out}/metrics.json"]) },
        Scenario {
            name: "perturb",
            args: s(&[
                "perturb",
                "--gold",
                &p(input.join("gold.csv")),
                "--attr",
                "label",
                "--error",
                "all",
                "--seed",
                "9",
                "--out",
                "{out}",
            ]),
        },
        Scenario {
            name: "evaluate",
            args: s(&[
                "evaluate",
                "--pred",
                &p(input.join("pred.csv")),
                "--gold",
                &p(input.join("gold.csv")),
                "--testbed",
                &p(input.join("testbed.csv")),
                "--perturb-report",
                &p(input.join("perturb_report.json")),
                "--out",
                "{out}/eval.json",
            ]),
        },
        Scenario {
            name: "bench",
            args: s(&[
                "bench",
                "--mapping",
                &p(input.join("bench/mapping.ttl")),
                "--gazetteer",
                &p(input.join("bench/gazetteer.tsv")),
                "--jobs",
                "4",
                "--out",
                "{out}/bench.json",
            ]),
        },
        Scenario { name: "synth-gold", args: s(&["synth-gold", "--n", "80", "--seed", "4", "--out", "{out}"]) },
    ];
    for sc in &mut scenarios {
        sc.args.insert(0, "--verbose".into());
    }
    scenarios
}

/// Every file below `dir`, relative path to contents.
pub fn snapshot(dir: &Path) -> std::collections::BTreeMap<PathBuf, Vec<u8>> {
    let mut files = std::collections::BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                files.insert(path.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    files
}

/// Runs a scenario `runs` times in fresh directories; returns the output
/// snapshots, or the failing run's stderr.
pub fn run_scenario(
    sc: &Scenario,
    work: &Path,
    runs: usize,
) -> Result<Vec<std::collections::BTreeMap<PathBuf, Vec<u8>>>, String> {
    let mut snaps = Vec::new();
    for r in 0..runs {
        let out = work.join(format!("{}-{r}", sc.name));
        std::fs::create_dir_all(&out).unwrap();
        let args: Vec<String> = sc.args.iter().map(|a| a.replace("{out}", &out.display().to_string())).collect();
        let (code, _, stderr) = eablock(&args);
        if code != 0 {
            return Err(format!("{} exited {code}: {stderr}", sc.name));
        }
        snaps.push(snapshot(&out));
    }
    Ok(snaps)
}
