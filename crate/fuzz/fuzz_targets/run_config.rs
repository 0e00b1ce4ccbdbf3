#![no_main]
use fockforge_cli::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = parse_config(text, false) {
        serde_json::to_string(&config).expect("accepted config serializes");
    }
});
