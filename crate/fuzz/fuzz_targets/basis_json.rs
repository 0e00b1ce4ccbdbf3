#![no_main]
use fockforge_core::fock::{basis_size, BasisSpec, FockBasis};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(spec) = serde_json::from_slice::<BasisSpec>(data) else { return };
    if basis_size(spec.modes, spec.cutoff) > 10_000 {
        return;
    }
    if let Ok(b) = FockBasis::from_spec(spec) {
        for (k, n) in b.states().iter().enumerate() {
            assert_eq!(b.ordinal(n), Some(k));
        }
    }
});
