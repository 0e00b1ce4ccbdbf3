use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn fockforge(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fockforge"))
        .args(args)
        .current_dir(dir)
        .env_remove("FOCKFORGE_THREADS")
        .output()
        .expect("binary runs")
}

fn run_config(config: &Value) -> (tempfile::TempDir, Output) {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), config.to_string()).unwrap();
    let out = fockforge(&["run", "c.json", "--out", "out"], dir.path());
    (dir, out)
}

fn resolve_suite(min_deviation: Option<f64>) -> Value {
    let mut params = json!({
        "states": {"family": "even_odd", "parity": "even"},
        "measure": {"kind": "gaussian_glauber", "modes": 1},
        "probe": {"kind": "max_total", "max_total": 6},
    });
    if let Some(d) = min_deviation {
        params["target"] = json!({"target": "identity"});
        params["negative_control"] = json!({"min_deviation": d});
    }
    json!({"suites": [{"name": "resolve-identity", "params": params}]})
}

#[test]
fn passing_run_exits_zero_and_writes_outputs() {
    let (dir, out) = run_config(&resolve_suite(None));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["report.json", "report.txt", "metadata.json", "gram_0_re.csv", "gram_0_im.csv"] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }
    let report: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(report["summary"]["pass"], json!(true));
    assert!(String::from_utf8_lossy(&out.stdout).contains("summary:"));
}

#[test]
fn gram_csv_names_probe_ordinals() {
    let (dir, out) = run_config(&resolve_suite(None));
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("out/gram_0_re.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "ordinal,0,1,2,3,4,5,6");
    assert_eq!(lines.count(), 7);
}

#[test]
fn negative_control_holds() {
    let (_dir, out) = run_config(&resolve_suite(Some(0.5)));
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn unmet_negative_control_exits_one() {
    let (dir, out) = run_config(&resolve_suite(Some(2.0)));
    assert_eq!(out.status.code(), Some(1));
    // Reports are still written on failure.
    assert!(dir.path().join("out/report.json").exists());
}

#[test]
fn failed_assertion_exits_one() {
    // A cutoff of 4 at |alpha| = 1.5 leaves a residual far above a 1e-300 tolerance
    // once the tail budget is switched off with a zero factor.
    let config = json!({"suites": [{
        "name": "eigenstates", "modes": 1, "cutoff": 4, "tolerance": 1e-300,
        "params": {"states": [{"family": "even", "alpha": [[1.5, 0.0]]}], "budget_factor": 0.0}
    }]});
    let (_dir, out) = run_config(&config);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bad_configs_exit_two() {
    let cases = [
        json!({"suites": [{"name": "nonesuch"}]}),
        json!({"suites": [{"name": "casimir"}], "extra": 1}),
        json!({"suites": [{"name": "relations", "modes": 6, "cutoff": 40}]}),
        json!({"suites": [{"name": "sectors", "modes": 2, "params": {"p": 1}}]}),
    ];
    for c in cases {
        let (_dir, out) = run_config(&c);
        assert_eq!(out.status.code(), Some(2), "{c}");
        assert!(!out.stderr.is_empty());
    }
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), "{ not json").unwrap();
    assert_eq!(fockforge(&["run", "c.json"], dir.path()).status.code(), Some(2));
    assert_eq!(fockforge(&["run", "missing.json"], dir.path()).status.code(), Some(2));
}

#[test]
fn memory_guard_error_names_override() {
    let config = json!({"suites": [{"name": "casimir", "modes": 6, "cutoff": 40}]});
    let (_dir, out) = run_config(&config);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--override-memory-guard"));
}

#[test]
fn format_flag_limits_outputs() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), resolve_suite(None).to_string()).unwrap();
    let out = fockforge(&["run", "c.json", "--out", "o", "--format", "json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("o/report.json").exists());
    assert!(!dir.path().join("o/report.txt").exists());
    assert!(!dir.path().join("o/gram_0_re.csv").exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let config = json!({"suites": [
        {"name": "relations", "modes": 2, "cutoff": 8},
        {"name": "variance", "modes": 2, "params": {"states": [
            {"family": "phi_cat", "alpha": [[0.3, 0.2], [0.1, -0.4]], "phi": 0.5, "sign": "-"}
        ]}}
    ]});
    let (a, _) = run_config(&config);
    let (b, _) = run_config(&config);
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("out/report.json")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn suites_lists_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let out = fockforge(&["suites"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "relations",
        "casimir",
        "eigenstates",
        "resolve-identity",
        "sectors",
        "reconstruction",
        "measure-uniqueness",
        "bessel-check",
        "variance",
    ] {
        assert!(text.lines().any(|l| l == name), "{name}");
    }
}

#[test]
fn bessel_check_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = fockforge(&["bessel-check", "--nu", "0..1", "--z", "0.5,2"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "nu,z,lhs,rhs,ratio");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("0,0.5,"));

    let bad = fockforge(&["bessel-check", "--z", "-1"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
    let out = fockforge(&["bessel-check", "--out", "k.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(dir.path().join("k.csv")).unwrap().lines().count(), 13);
}
