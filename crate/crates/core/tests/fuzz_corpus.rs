//! Replays the fuzz seed corpus through the fuzz targets' invariants.

use std::path::PathBuf;

use fockforge_core::algebra::parse_generator;
use fockforge_core::fock::{BasisSpec, FockBasis, StateRecord, StateVector};
use fockforge_core::specfun::MeasureSpec;

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty());
    out
}

#[test]
fn generator_seeds_parse_and_round_trip() {
    for (p, text) in seeds("generator_text") {
        let g = parse_generator(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert_eq!(parse_generator(&g.to_string()).unwrap(), g, "{}", p.display());
    }
}

#[test]
fn state_seeds_round_trip() {
    for (p, text) in seeds("state_json") {
        let record: StateRecord = serde_json::from_str(&text).unwrap();
        let v = StateVector::from_record(&record).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        let back = StateVector::from_json(&v.to_json()).unwrap();
        assert_eq!(back.to_record(), v.to_record());
    }
}

#[test]
fn basis_seeds_index_consistently() {
    for (_, text) in seeds("basis_json") {
        let b = FockBasis::from_spec(serde_json::from_str::<BasisSpec>(&text).unwrap()).unwrap();
        for (k, n) in b.states().iter().enumerate() {
            assert_eq!(b.ordinal(n), Some(k));
        }
    }
}

#[test]
fn measure_seeds_round_trip() {
    for (p, text) in seeds("measure_json") {
        let m: MeasureSpec = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        let once = serde_json::to_string(&m).unwrap();
        let back: MeasureSpec = serde_json::from_str(&once).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), once);
    }
}
