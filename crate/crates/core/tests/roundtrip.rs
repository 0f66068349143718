mod common;

use std::collections::BTreeSet;

use common::*;
use eablock::materializer::{
    lazy_execute, parse_ntriples, read_ntriples, to_ntriples, write_ntriples, RdfGraph, Term, Triple,
};
use eablock::rml::{parse_mapping, serialize_mapping};
use eablock::translator::translate_in_memory;
use proptest::prelude::*;

/// Independent line reader for the N-Triples subset the writer emits.
fn read_line(line: &str) -> (String, String, Term) {
    fn unescape(s: &str) -> String {
        let mut out = String::new();
        let mut chars = s.chars();
        while let Some(c) = chars.next() {
            if c != '\\' {
                out.push(c);
                continue;
            }
            match chars.next().unwrap() {
                'n' => out.push('\n'),
                'r' => out.push('\r'),
                't' => out.push('\t'),
                'u' => {
                    let hex: String = chars.by_ref().take(4).collect();
                    out.push(char::from_u32(u32::from_str_radix(&hex, 16).unwrap()).unwrap());
                }
                'U' => {
                    let hex: String = chars.by_ref().take(8).collect();
                    out.push(char::from_u32(u32::from_str_radix(&hex, 16).unwrap()).unwrap());
                }
                other => out.push(other),
            }
        }
        out
    }
    fn iri(s: &str) -> (String, &str) {
        let end = s.find('>').unwrap();
        (unescape(&s[1..end]), s[end + 1..].trim_start())
    }
    let line = line.strip_suffix(" .").expect("terminated");
    let (s, rest) = iri(line);
    let (p, rest) = iri(rest);
    let object = if rest.starts_with('<') {
        Term::Iri(iri(rest).0)
    } else {
        // find the closing quote that is not escaped
        let bytes = rest.as_bytes();
        let mut i = 1;
        while bytes[i] != b'"' {
            i += if bytes[i] == b'\\' { 2 } else { 1 };
        }
        let value = unescape(&rest[1..i]);
        let tail = &rest[i + 1..];
        if let Some(lang) = tail.strip_prefix('@') {
            Term::Literal { value, datatype: None, language: Some(lang.to_string()) }
        } else if let Some(dt) = tail.strip_prefix("^^") {
            Term::Literal { value, datatype: Some(iri(dt).0), language: None }
        } else {
            Term::Literal { value, datatype: None, language: None }
        }
    };
    (s, p, object)
}

fn oracle_read(text: &str) -> BTreeSet<Triple> {
    text.lines().map(read_line).map(|(s, p, o)| Triple::new(s, p, o)).collect()
}

#[test]
fn written_kg_reads_back_with_an_independent_reader() {
    let dir = fixtures().join("motivating");
    let (doc, sources) = load_fixture(&dir.join("mapping_eablock.ttl"));
    let kg = lazy_execute(&doc, &sources, &linker_from(&dir.join("gazetteer.tsv"))).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("kg.nt");
    write_ntriples(&kg, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let mut sorted = lines.clone();
    sorted.sort();
    assert_eq!(lines, sorted);
    assert_eq!(lines.len(), kg.len());
    assert_eq!(oracle_read(&text), kg.iter().cloned().collect());
    assert_eq!(read_ntriples(&path).unwrap(), kg);
}

#[test]
fn reader_rejects_blank_nodes_and_reports_lines() {
    let err = parse_ntriples("<http://a> <http://b> <http://c> .\n_:x <http://b> <http://c> .\n").unwrap_err();
    assert!(err.to_string().starts_with("line 2"), "{err}");
    assert!(parse_ntriples("# comment only\n\n").unwrap().is_empty());
}

#[test]
fn every_fixture_mapping_round_trips() {
    let mut paths =
        vec![fixtures().join("motivating/mapping_baseline.ttl"), fixtures().join("motivating/mapping_eablock.ttl")];
    paths.extend(FUNCTIONS.iter().map(|f| function_fixture(f).join("mapping.ttl")));
    for path in paths {
        let (doc, sources) = load_fixture(&path);
        let text = serialize_mapping(&doc);
        assert_eq!(parse_mapping(&text).unwrap(), doc, "{}", path.display());
        assert_eq!(serialize_mapping(&parse_mapping(&text).unwrap()), text);
        let t = translate_in_memory(&doc, &sources, &function_linker()).unwrap();
        let out = serialize_mapping(&t.document);
        assert_eq!(parse_mapping(&out).unwrap(), t.document, "{}", path.display());
    }
}

#[test]
fn random_instances_round_trip() {
    for seed in 0..50 {
        let inst = random_instance(seed);
        assert_eq!(parse_mapping(&serialize_mapping(&inst.doc)).unwrap(), inst.doc, "seed {seed}");
    }
}

fn arb_term() -> impl Strategy<Value = Term> {
    prop_oneof![
        "[a-z]{1,8}".prop_map(|s| Term::Iri(format!("http://example.org/{s}"))),
        any::<String>().prop_map(|value| Term::Literal { value, datatype: None, language: None }),
        ("[ -~]{0,12}", "[a-z]{2}(-[a-z]{2})?").prop_map(|(value, lang)| Term::Literal {
            value,
            datatype: None,
            language: Some(lang)
        }),
        "[0-9]{1,5}".prop_map(|value| Term::Literal {
            value,
            datatype: Some("http://www.w3.org/2001/XMLSchema#integer".into()),
            language: None
        }),
    ]
}

proptest! {
    #[test]
    fn ntriples_round_trip(triples in proptest::collection::vec(("[a-z]{1,6}", "[a-z]{1,6}", arb_term()), 0..20)) {
        let g: RdfGraph = triples
            .into_iter()
            .map(|(s, p, o)| Triple::new(format!("http://s/{s}"), format!("http://p/{p}"), o))
            .collect();
        let text = to_ntriples(&g);
        prop_assert_eq!(&parse_ntriples(&text).unwrap(), &g);
        prop_assert_eq!(oracle_read(&text), g.iter().cloned().collect::<BTreeSet<_>>());
    }
}
