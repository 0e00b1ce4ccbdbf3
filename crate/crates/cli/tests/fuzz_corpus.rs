//! Every run-configuration fuzz seed is a valid configuration.

use std::path::PathBuf;

use fockforge_cli::parse_config;

#[test]
fn run_config_seeds_parse() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus/run_config");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let config = parse_config(&text, false).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        serde_json::to_string(&config).unwrap();
        n += 1;
    }
    assert!(n > 0);
}
