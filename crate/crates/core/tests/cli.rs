mod common;

use std::path::Path;
use std::process::{Command, Output};

fn pcopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcopt"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn bounds_prints_constants() {
    let out = pcopt(&[
        "bounds",
        "--sigma",
        "1",
        "--L",
        "1",
        "--n",
        "30",
        "--m",
        "30",
        "--eta",
        "0.002777777777777778",
        "--gap",
        "100",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("gamma=0.018868"), "{text}");
    assert!(text.contains("t0=578"), "{text}");
    for key in ["epsilon=", "k0=", "deterministic_budget="] {
        assert!(text.contains(key), "{text}");
    }
}

#[test]
fn bounds_rejects_zero_eta() {
    let out = pcopt(&[
        "bounds", "--sigma", "1", "--L", "1", "--n", "2", "--m", "2", "--eta", "0", "--gap", "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bounds_rejects_sigma_above_l() {
    let out = pcopt(&[
        "bounds", "--sigma", "2", "--L", "1", "--n", "2", "--m", "2", "--eta", "0.1", "--gap", "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn run_writes_raw_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = common::golden_dir().join("blockcd_small.json");
    let output = dir.path().join("out.csv");
    let out = pcopt(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let raw = std::fs::read_to_string(&output).unwrap();
    let golden =
        std::fs::read_to_string(common::golden_dir().join("blockcd_small_raw.csv")).unwrap();
    assert_eq!(common::mask_elapsed(&raw), golden);
    assert!(dir.path().join("out_summary.csv").exists());
}

#[test]
fn seed_override_changes_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = common::golden_dir().join("blockcd_small.json");
    let output = dir.path().join("seeded.csv");
    let out = pcopt(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "12",
        "--output",
        output.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let raw = std::fs::read_to_string(&output).unwrap();
    let golden =
        std::fs::read_to_string(common::golden_dir().join("blockcd_small_raw.csv")).unwrap();
    assert_ne!(common::mask_elapsed(&raw), golden);
}

#[test]
fn invalid_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"problem":{"name":"quadratic","n":4,"seed":1},"oracle":{"mode":"deterministic"},
            "algorithm":{"name":"blockcd","m":9,"eta":0.01},"repeats":1,"output_path":"x.csv"}"#,
    );
    let out = pcopt(&["run", "--config", &config]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("algorithm.m"));
}

#[test]
fn stochastic_config_requires_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"problem":{"name":"quadratic","n":4,"seed":1},"oracle":{"mode":"stochastic","kappa":2.0},
            "algorithm":{"name":"blockcd","m":2,"eta":0.01},"repeats":1,"output_path":"x.csv"}"#,
    );
    let out = pcopt(&["run", "--config", &config]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("oracle.mu"),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn unwritable_output_is_an_io_error() {
    let config = common::golden_dir().join("blockcd_small.json");
    let out = pcopt(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--output",
        "/nonexistent-dir/out.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn nelder_mead_run_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let output = dir.path().join("nm.csv");
    let config = write_config(
        dir.path(),
        &format!(
            r#"{{"problem":{{"name":"rosenbrock","n":2,"seed":3}},"oracle":{{"mode":"deterministic"}},
                "algorithm":{{"name":"nelder-mead"}},"budget":{{"max_queries":500}},"repeats":3,
                "output_path":"{}"}}"#,
            output.display()
        ),
    );
    let out = pcopt(&["run", "--config", &config]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let raw = std::fs::read_to_string(&output).unwrap();
    assert!(raw
        .lines()
        .skip(1)
        .all(|l| l.starts_with("nelder-mead,rosenbrock,2,,deterministic,")));
    let summary = std::fs::read_to_string(dir.path().join("nm_summary.csv")).unwrap();
    assert!(summary.lines().last().unwrap().starts_with("256,"));
}
