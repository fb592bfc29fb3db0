use std::fs;
use std::path::PathBuf;

use destack_core::corpus;
use destack_core::destackify::{destackify_all, Config};
use destack_core::io::{fan_to_string, parse_fan, parse_group_spec, parse_trace, trace_to_string, IoError};
use destack_core::stackyfan::{canonical_form, validate};

fn fixture_dir(kind: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(kind)
}

fn files(kind: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(fixture_dir(kind)).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    assert!(!v.is_empty());
    v
}

#[test]
fn fan_fixtures_parse_validate_and_round_trip() {
    for p in files("fans") {
        let text = fs::read_to_string(&p).unwrap();
        let f = parse_fan(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert!(validate(&f, false).is_valid(), "{}", p.display());
        let again = parse_fan(&fan_to_string(&f)).unwrap();
        assert_eq!(canonical_form(&again), canonical_form(&f));
    }
}

#[test]
fn named_fixture_files_match_the_corpus() {
    let fixtures = corpus::fixtures();
    let lookup = |name: &str| fixtures.iter().find(|e| e.name == name).unwrap().fan.clone();
    for (file, name) in [("a1.json", "A1"), ("c2_c0_cm1.json", "C(0)+C(-1) over C2"), ("c2_cm1_cm1.json", "C(-1)+C(-1) over C2")] {
        let f = parse_fan(&fs::read_to_string(fixture_dir("fans").join(file)).unwrap()).unwrap();
        assert_eq!(canonical_form(&f), canonical_form(&lookup(name)), "{file}");
    }
}

#[test]
fn group_fixtures_build() {
    for p in files("groups") {
        let spec = parse_group_spec(&fs::read_to_string(&p).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        let g = spec.build().unwrap();
        assert!(g.order() > 1, "{}", p.display());
        for b in spec.blocks.values() {
            assert!(g.preserves(b), "{}", p.display());
        }
    }
}

#[test]
fn traces_round_trip_through_text() {
    for e in corpus::weighted_projectives() {
        let out = destackify_all(&e.fan, Config::default()).unwrap();
        assert_eq!(parse_trace(&trace_to_string(&out.trace)).unwrap(), out.trace, "{}", e.name);
    }
}

#[test]
fn parse_errors_cite_lines() {
    let text = "{\n  \"schemaVersion\": 1,\n  \"latticeRank\": 2,\n  \"rays\": [oops],\n  \"cones\": []\n}\n";
    match parse_fan(text) {
        Err(IoError::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("{other:?}"),
    }
}
