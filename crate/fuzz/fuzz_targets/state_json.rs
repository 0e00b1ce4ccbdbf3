#![no_main]
use fockforge_core::fock::{BasisSpec, StateRecord, StateVector};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // Keep bases small so each input stays fast.
    let Ok(record) = serde_json::from_str::<StateRecord>(text) else { return };
    let BasisSpec { modes, cutoff } = record.basis;
    if fockforge_core::fock::basis_size(modes, cutoff) > 10_000 {
        return;
    }
    if let Ok(v) = StateVector::from_record(&record) {
        let back = StateVector::from_json(&v.to_json()).expect("written state reads back");
        assert_eq!(back.to_record(), v.to_record());
    }
});
