#![no_main]
use fockforge_core::specfun::MeasureSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = serde_json::from_slice::<MeasureSpec>(data) {
        let text = serde_json::to_string(&m).expect("measure serializes");
        let back: MeasureSpec = serde_json::from_str(&text).expect("measure reads back");
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }
});
