mod common;

use common::*;

fn path(p: std::path::PathBuf) -> String {
    p.display().to_string()
}

#[test]
fn every_subcommand_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    for sc in cli_scenarios(&tmp.path().join("input")) {
        let snaps = run_scenario(&sc, &tmp.path().join("runs"), 3).unwrap();
        assert!(!snaps[0].is_empty(), "{} wrote nothing", sc.name);
        assert!(snaps.windows(2).all(|w| w[0] == w[1]), "{} differs between runs", sc.name);
    }
}

#[test]
fn run_writes_the_translation_and_the_graph() {
    let tmp = tempfile::tempdir().unwrap();
    let m = fixtures().join("motivating");
    let (code, _, err) = eablock([
        "run",
        "--mapping",
        &path(m.join("mapping_eablock.ttl")),
        "--gazetteer",
        &path(m.join("gazetteer.tsv")),
        "--out",
        &path(tmp.path().to_path_buf()),
    ]);
    assert_eq!(code, 0, "{err}");
    let files: Vec<String> = snapshot(tmp.path()).keys().map(|k| k.display().to_string()).collect();
    assert_eq!(files, ["ALIGN_1.csv", "ALIGN_2.csv", "ALIGN_3.csv", "kg.nt", "manifest.json", "mapping.ttl"]);
    let align = std::fs::read_to_string(tmp.path().join("ALIGN_1.csv")).unwrap();
    assert!(align.contains("Hypertention,http://linkedlifedata.com/resource/umls/id/C0020538"));
}

#[test]
fn materialize_refuses_function_calls() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, _, err) = eablock([
        "materialize",
        "--mapping",
        &path(fixtures().join("motivating/mapping_eablock.ttl")),
        "--out",
        &path(tmp.path().join("kg.nt")),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("PatientDisorderMap"), "{err}");
    assert!(!tmp.path().join("kg.nt").exists());
}

#[test]
fn exit_codes_separate_bad_input_from_environment_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.ttl");
    std::fs::write(&bad, "@prefix rr: <http://www.w3.org/ns/r2rml#> .\nex:A rr:subjectMap [ .").unwrap();
    let out = path(tmp.path().join("o"));
    let gaz = path(function_gazetteer_path());

    // syntax error
    assert_eq!(eablock(["materialize", "--mapping", &path(bad), "--out", &out]).0, 1);
    // mapping names a source that does not exist
    let missing = tmp.path().join("missing.ttl");
    std::fs::copy(function_fixture("keyword-dbpedia").join("mapping.ttl"), &missing).unwrap();
    let (code, _, err) = eablock(["translate", "--mapping", &path(missing), "--gazetteer", &gaz, "--out", &out]);
    assert_eq!(code, 1, "{err}");
    assert!(err.contains("drug.csv"), "{err}");
    // unreadable mapping file
    assert_eq!(eablock(["materialize", "--mapping", "/nonexistent/m.ttl", "--out", &out]).0, 2);
    // remote linker without an endpoint
    let mapping = path(function_fixture("keyword-dbpedia").join("mapping.ttl"));
    assert_eq!(eablock(["translate", "--mapping", &mapping, "--linker", "remote", "--out", &out]).0, 2);
    // unreachable service
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let endpoint = format!("http://127.0.0.1:{port}/");
    let (code, _, err) = eablock([
        "translate",
        "--mapping",
        &mapping,
        "--linker",
        "remote",
        "--endpoint",
        &endpoint,
        "--fail-fast",
        "--out",
        &out,
    ]);
    assert_eq!(code, 2, "{err}");
    // bad values
    assert_eq!(
        eablock(["translate", "--mapping", &mapping, "--gazetteer", &gaz, "--max-edit-distance", "3", "--out", &out]).0,
        2
    );
    let gold = path(function_fixture("keyword-dbpedia").join("drug.csv"));
    assert_eq!(
        eablock([
            "perturb", "--gold", &gold, "--attr", "name", "--error", "caps", "--rate", "2", "--seed", "1", "--out",
            &out
        ])
        .0,
        1
    );
    assert_eq!(
        eablock(["perturb", "--gold", &gold, "--attr", "nope", "--error", "caps", "--seed", "1", "--out", &out]).0,
        1
    );
    assert_eq!(eablock(["synth-gold", "--n", "5", "--min-distance", "40", "--seed", "1", "--out", &out]).0, 1);
    // usage
    assert_eq!(eablock(["translate", "--bogus"]).0, 2);
    assert_eq!(eablock(["--help"]).0, 0);
}

#[test]
fn perturb_then_evaluate_scores_the_clean_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let d = |s: &str| path(tmp.path().join(s));
    assert_eq!(eablock(["synth-gold", "--n", "40", "--seed", "2", "--out", &d("synth")]).0, 0);
    assert_eq!(
        eablock([
            "perturb",
            "--gold",
            &d("synth/gold.csv"),
            "--attr",
            "label",
            "--error",
            "sub",
            "--seed",
            "3",
            "--out",
            &d("pert")
        ])
        .0,
        0
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d("pert/perturb_report.json")).unwrap()).unwrap();
    assert_eq!(report["perturbed"].as_array().unwrap().len(), 20);
    assert_eq!(report["rng"], eablock::eval::RNG_ALGORITHM);

    // gold against itself: every label maps to its own IRI
    let gold = eablock::dataset::Dataset::read_csv(&tmp.path().join("synth/gold.csv")).unwrap();
    let pred = eablock::dataset::Dataset::with_rows(vec!["attr1".into(), "attr2".into()], gold.rows.clone());
    pred.write_csv(&tmp.path().join("pred.csv")).unwrap();
    assert_eq!(
        eablock(["evaluate", "--pred", &d("pred.csv"), "--gold", &d("synth/gold.csv"), "--out", &d("e.json")]).0,
        0
    );
    let e: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d("e.json")).unwrap()).unwrap();
    assert_eq!(
        (e["precision"].as_f64(), e["recall"].as_f64(), e["true_positives"].as_u64()),
        (Some(1.0), Some(1.0), Some(40))
    );
}

#[test]
fn bench_reports_calls_and_optional_timings() {
    let tmp = tempfile::tempdir().unwrap();
    eablock::eval::bench_fixture(100, 1).write(&tmp.path().join("b")).unwrap();
    let d = |s: &str| path(tmp.path().join(s));
    let (code, _, err) = eablock([
        "bench",
        "--mapping",
        &d("b/mapping.ttl"),
        "--gazetteer",
        &d("b/gazetteer.tsv"),
        "--out",
        &d("bench.json"),
        "--timings",
        &d("timings.json"),
    ]);
    assert_eq!(code, 0, "{err}");
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d("bench.json")).unwrap()).unwrap();
    assert!(r["eablock"]["backend_calls"].as_u64() < r["baseline"]["backend_calls"].as_u64());
    assert!(r["baseline"].get("wall_seconds").is_none());
    let t: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d("timings.json")).unwrap()).unwrap();
    assert!(t["baseline_seconds"].as_f64().unwrap() >= 0.0);
}
