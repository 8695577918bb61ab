//! Shapes and formats of the files the subcommands emit.

use std::path::PathBuf;
use std::process::Command;

fn pathint() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pathint"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pathint-out-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Small, fast propagate config exercising every optional output.
const SMALL_PROPAGATE: &str = r#"{
    "experiment": "propagate",
    "propagate": {
        "grid": { "x_min": -12.0, "x_max": 12.0, "n_points": 241 },
        "slicing": { "t_a": 0.0, "t_b": 0.1, "n_slices": 20 },
        "cn_steps": 50,
        "potential": { "kind": "harmonic", "omega": 1.0 },
        "initial_state": { "kind": "gaussian", "center": 1.0, "width": 0.8, "momentum": 0.0 },
        "method": "both",
        "emit_propagator": true,
        "record_every": 10
    }
}"#;

#[test]
fn propagate_emits_states_trajectory_and_propagator() {
    let dir = temp_dir("propagate");
    let config = dir.join("config.json");
    std::fs::write(&config, SMALL_PROPAGATE).unwrap();
    let out = dir.join("out");
    let status = pathint()
        .args(["propagate", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    let initial = std::fs::read_to_string(out.join("initial.csv")).unwrap();
    assert_eq!(initial.lines().next(), Some("x,re,im"));
    assert_eq!(initial.lines().count(), 242);
    assert!(out.join("final_kernel.csv").exists());
    assert!(out.join("final_cn.csv").exists());

    let trajectory = std::fs::read_to_string(out.join("trajectory_cn.csv")).unwrap();
    assert_eq!(trajectory.lines().next(), Some("t,x,re,im"));
    // initial state plus recorded steps 10, 20, 30, 40, 50
    assert_eq!(trajectory.lines().count(), 1 + 6 * 241);

    let propagator = std::fs::read_to_string(out.join("propagator.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&propagator).unwrap();
    assert_eq!(parsed["header"]["n_points"], 241);
    assert_eq!(parsed["header"]["hbar"], 1.0);
    assert_eq!(parsed["entries"].as_array().unwrap().len(), 241 * 241);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["metrics"]["kernel_vs_cn_discrepancy"].as_f64().unwrap() < 1e-2);
}

#[test]
fn json_format_flag_overrides_config() {
    let dir = temp_dir("json-format");
    let out = dir.join("out");
    let status = pathint()
        .args(["doubleslit", "--format", "json", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("pattern.json").exists());
    assert!(!out.join("pattern.csv").exists());
    let rows: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("pattern.json")).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2001);
}

#[test]
fn action_check_emits_classical_path() {
    let dir = temp_dir("action-path");
    let out = dir.join("out");
    let status = pathint().arg("action-check").arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    let path = std::fs::read_to_string(out.join("classical_path.csv")).unwrap();
    assert_eq!(path.lines().next(), Some("t,x"));
    assert_eq!(path.lines().count(), 10_002); // header + N + 1 nodes
}

#[test]
fn seed_flag_is_recorded() {
    let dir = temp_dir("seed");
    let out = dir.join("out");
    let status = pathint()
        .args(["classical-limit", "--seed", "7", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
}
