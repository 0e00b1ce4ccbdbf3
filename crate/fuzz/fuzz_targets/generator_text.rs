#![no_main]
use fockforge_core::algebra::parse_generator;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = parse_generator(text) {
        // Display must parse back to the same value.
        let again = parse_generator(&g.to_string()).expect("display output parses");
        assert_eq!(format!("{again:?}"), format!("{g:?}"));
    }
});
