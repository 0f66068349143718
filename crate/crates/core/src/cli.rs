//! Command-line interface.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dataset::Dataset;
use crate::eval::{bench, perturb, score, synth_gold, BenchOptions, ErrorType, PerturbReport, PerturbationSpec};
use crate::linker::{AlignmentBackend, LinkerConfig, TargetKg};
use crate::materializer::{execute, write_ntriples};
use crate::metrics::RDF_TYPE;
use crate::pipeline::{
    analyze_file, build_backend, io_error, load_checked_sources, load_mapping, materialize_files, metrics_json,
    source_dirs, translate_files, LinkerChoice, PipelineError,
};
use crate::translator::{AlignmentTable, MAPPING_FILE};

#[derive(Parser, Debug)]
#[command(name = "eablock", version, about = "Eager entity alignment for RML+FnO mappings")]
struct Cli {
    /// Log progress and timings to standard error.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate alignment calls and rewrite the mapping into function-free RML.
    Translate(TranslateArgs),
    /// Execute a function-free mapping into N-Triples.
    Materialize(MaterializeArgs),
    /// Translate, then materialize the rewritten mapping into OUT/kg.nt.
    Run(TranslateArgs),
    /// Compute class-graph connectivity metrics of an N-Triples file.
    Analyze(AnalyzeArgs),
    /// Introduce seeded spelling errors into a gold-standard column.
    Perturb(PerturbArgs),
    /// Score predicted alignments against a gold standard.
    Evaluate(EvaluateArgs),
    /// Compare whole-source alignment with eager translation.
    Bench(BenchArgs),
    /// Generate a synthetic gazetteer and gold standard.
    SynthGold(SynthArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum LinkerKind {
    Local,
    Remote,
}

#[derive(Args, Debug)]
struct LinkerArgs {
    #[arg(long, value_enum, default_value = "local")]
    linker: LinkerKind,
    /// Gazetteer TSV (label, IRI, kg) for the local linker.
    #[arg(long)]
    gazetteer: Option<PathBuf>,
    /// Remote linking service URL; defaults to $EABLOCK_ENDPOINT.
    #[arg(long)]
    endpoint: Option<String>,
    /// Do not retry failed remote requests.
    #[arg(long)]
    fail_fast: bool,
    #[arg(long, default_value_t = 1)]
    max_edit_distance: usize,
    /// Stopword file, one word per line (replaces the built-in list).
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    score_floor: f64,
}

impl LinkerArgs {
    fn backend(&self) -> Result<Box<dyn AlignmentBackend>, PipelineError> {
        let choice = match self.linker {
            LinkerKind::Local => {
                let gazetteer = self
                    .gazetteer
                    .clone()
                    .ok_or_else(|| PipelineError::Config("local linker needs --gazetteer".into()))?;
                let mut config = LinkerConfig {
                    max_edit_distance: self.max_edit_distance,
                    score_floor: self.score_floor,
                    ..Default::default()
                };
                if let Some(path) = &self.stopwords {
                    config.load_stopwords(path).map_err(io_error(path))?;
                }
                LinkerChoice::Local { gazetteer, config }
            }
            LinkerKind::Remote => LinkerChoice::Remote {
                endpoint: self.endpoint.clone(),
                fail_fast: self.fail_fast,
                score_floor: self.score_floor,
            },
        };
        build_backend(&choice)
    }
}

#[derive(Args, Debug)]
struct TranslateArgs {
    #[arg(long)]
    mapping: PathBuf,
    /// Directory holding the CSV sources (default: the mapping's directory).
    #[arg(long)]
    sources: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    linker: LinkerArgs,
    /// Also write the projected inputs as PROJECT_<n>.csv.
    #[arg(long)]
    keep_intermediate: bool,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct MaterializeArgs {
    #[arg(long)]
    mapping: PathBuf,
    #[arg(long)]
    sources: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long)]
    kg: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = RDF_TYPE)]
    type_predicate: String,
}

#[derive(Args, Debug)]
struct PerturbArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    attr: String,
    /// caps, del, sub, ins or all.
    #[arg(long)]
    error: ErrorType,
    #[arg(long, default_value_t = 0.5)]
    rate: f64,
    #[arg(long)]
    seed: u64,
    /// Output directory for testbed.csv and perturb_report.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Alignment table (attr1,attr2 CSV).
    #[arg(long)]
    pred: PathBuf,
    /// Gold standard CSV.
    #[arg(long)]
    gold: PathBuf,
    /// Testbed whose labels were aligned, row-aligned with the gold file
    /// (default: the gold file itself).
    #[arg(long)]
    testbed: Option<PathBuf>,
    /// Perturbation report; rows it lists as skipped are not scored.
    #[arg(long)]
    perturb_report: Option<PathBuf>,
    #[arg(long, default_value = "label")]
    label_attr: String,
    #[arg(long, default_value = "iri")]
    iri_attr: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    mapping: PathBuf,
    #[arg(long)]
    sources: Option<PathBuf>,
    /// Simulated latency per backend request, in milliseconds.
    #[arg(long, default_value_t = 0)]
    latency_ms: u64,
    /// Report of calls, rows and triples (no wall-clock times).
    #[arg(long)]
    out: PathBuf,
    /// Also write the wall-clock times of both modes here.
    #[arg(long)]
    timings: Option<PathBuf>,
    #[command(flatten)]
    linker: LinkerArgs,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    min_distance: usize,
    #[arg(long)]
    seed: u64,
    /// Output directory for gazetteer.tsv and gold.csv.
    #[arg(long)]
    out: PathBuf,
}

fn jobs(requested: Option<usize>) -> usize {
    requested.filter(|&j| j > 0).unwrap_or_else(|| std::thread::available_parallelism().map(usize::from).unwrap_or(1))
}

fn with_pool<T>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T, PipelineError>
where
    T: Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| PipelineError::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io_error(parent))?;
    }
    std::fs::write(path, contents).map_err(io_error(path))
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn cmd_translate(args: &TranslateArgs) -> Result<(), PipelineError> {
    let backend = args.linker.backend()?;
    let t = with_pool(jobs(args.jobs), || {
        translate_files(&args.mapping, args.sources.as_deref(), backend.as_ref(), &args.out, args.keep_intermediate)
    })??;
    log::info!("translated {} calls; {} backend calls", t.report.calls.len(), t.report.backend_calls);
    Ok(())
}

fn cmd_run(args: &TranslateArgs) -> Result<(), PipelineError> {
    cmd_translate(args)?;
    let mapping = args.out.join(MAPPING_FILE);
    let doc = load_mapping(&mapping)?;
    let mut dirs = source_dirs(&args.mapping, args.sources.as_deref());
    dirs.push(args.out.clone());
    let sources = load_checked_sources(&doc, &dirs)?;
    let graph = execute(&doc, &sources)?;
    write_ntriples(&graph, &args.out.join("kg.nt"))?;
    log::info!("{} triples", graph.len());
    Ok(())
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<(), PipelineError> {
    let pred = Dataset::read_csv(&args.pred)?;
    let gold = Dataset::read_csv(&args.gold)?;
    let testbed = match &args.testbed {
        Some(p) => Dataset::read_csv(p)?,
        None => gold.clone(),
    };
    let exclude: BTreeSet<usize> = match &args.perturb_report {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(io_error(p))?;
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", p.display())))?;
            value["skipped"]
                .as_array()
                .map(|a| a.iter().filter_map(|s| s["row"].as_u64()).map(|r| r as usize).collect())
                .unwrap_or_default()
        }
        None => BTreeSet::new(),
    };
    let table = AlignmentTable::from_dataset("", TargetKg::Wikidata, &pred)?;
    let report = score(&table, &testbed, &gold, &args.label_attr, &args.iri_attr, &exclude)?;
    write_file(&args.out, json(&report))
}

fn cmd_perturb(args: &PerturbArgs) -> Result<(), PipelineError> {
    let gold = Dataset::read_csv(&args.gold)?;
    let spec = PerturbationSpec::new(args.error, args.rate, args.seed);
    let (testbed, report): (Dataset, PerturbReport) = perturb(&gold, &args.attr, &spec)?;
    for s in &report.skipped {
        log::warn!("row {}: value {:?} too short for {}", s.row + 1, s.value, s.error);
    }
    write_file(&args.out.join("testbed.csv"), testbed.to_csv_string())?;
    write_file(&args.out.join("perturb_report.json"), json(&report))
}

fn cmd_bench(args: &BenchArgs) -> Result<(), PipelineError> {
    let backend = args.linker.backend()?;
    let doc = load_mapping(&args.mapping)?;
    let sources = load_checked_sources(&doc, &source_dirs(&args.mapping, args.sources.as_deref()))?;
    let options = BenchOptions { latency: Duration::from_millis(args.latency_ms), jobs: jobs(args.jobs) };
    let report = bench(&doc, &sources, backend.as_ref(), &options)?;
    log::info!(
        "baseline {:.3}s / {} calls, eablock {:.3}s / {} calls",
        report.baseline.wall_seconds,
        report.baseline.backend_calls,
        report.eablock.wall_seconds,
        report.eablock.backend_calls
    );
    if let Some(path) = &args.timings {
        write_file(path, report.timings_json())?;
    }
    write_file(&args.out, json(&report))
}

fn cmd_synth(args: &SynthArgs) -> Result<(), PipelineError> {
    let (gazetteer, gold) = synth_gold(args.n, args.min_distance, args.seed)?;
    write_file(&args.out.join("gazetteer.tsv"), gazetteer.to_tsv())?;
    write_file(&args.out.join("gold.csv"), gold.to_csv_string())
}

fn dispatch(command: &Command) -> Result<(), PipelineError> {
    match command {
        Command::Translate(a) => cmd_translate(a),
        Command::Run(a) => cmd_run(a),
        Command::Materialize(a) => materialize_files(&a.mapping, a.sources.as_deref(), &a.out).map(|g| {
            log::info!("{} triples", g.len());
        }),
        Command::Analyze(a) => {
            let m = analyze_file(&a.kg, &a.type_predicate)?;
            write_file(&a.out, metrics_json(&m))
        }
        Command::Perturb(a) => cmd_perturb(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Bench(a) => cmd_bench(a),
        Command::SynthGold(a) => cmd_synth(a),
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().is_test(false).try_init();
    match dispatch(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
