//! End-to-end tests of the `wncs` binary: exit codes, emitted files, and
//! byte-level idempotence of the deterministic outputs.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wncs"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn three_plant_config(dir: &Path) -> String {
    write_config(
        dir,
        "general.json",
        r#"{
            "plants": [
                {"a": 6.5137, "b": 1.0},
                {"a": 5.8265, "b": 1.0},
                {"a": 8.8964, "b": 1.0}
            ],
            "channel": [0.7690, 0.7277, 0.2846],
            "sampling_periods": [5, 5, 5],
            "slot_length": 0.01,
            "feasibility_margin": 1e-6
        }"#,
    )
}

fn perfect_six_config(dir: &Path) -> String {
    write_config(
        dir,
        "perfect.json",
        r#"{
            "plants": [
                {"a": 3.7482, "b": 1.0},
                {"a": 8.7512, "b": 1.0},
                {"a": 7.7711, "b": 1.0},
                {"a": 8.5482, "b": 1.0},
                {"a": 6.8823, "b": 1.0},
                {"a": 5.6830, "b": 1.0}
            ],
            "channel": [1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
            "sampling_periods": [1, 1, 1, 1, 1, 1],
            "slot_length": 0.0114
        }"#,
    )
}

fn symmetric_two_config(dir: &Path) -> String {
    write_config(
        dir,
        "symmetric.json",
        r#"{
            "plants": [{"a": 1.0, "b": 1.0}, {"a": 1.0, "b": 1.0}],
            "channel": [0.425, 0.425],
            "sampling_periods": [5, 5],
            "slot_length": 0.1
        }"#,
    )
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

#[test]
fn check_reports_stabilizable_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = three_plant_config(dir.path());
    let out = bin().args(["check", "--config", &config]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(stdout(&out).contains("stabilizable"));
}

#[test]
fn hmin_prints_three() {
    let dir = tempfile::tempdir().unwrap();
    let config = perfect_six_config(dir.path());
    let out = bin().args(["hmin", "--config", &config]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "3");
}

#[test]
fn sweep_produces_expected_table_and_identical_bytes_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let config = symmetric_two_config(dir.path());
    let csv_path = dir.path().join("rows.csv");
    let run = || {
        let out = bin()
            .args([
                "sweep-h",
                "--config",
                &config,
                "--h-range",
                "1:10",
                "--p-grid",
                "0.3,0.425,0.5",
                "--out",
                csv_path.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{out:?}");
        std::fs::read(&csv_path).unwrap()
    };
    let first = run();
    let second = run();
    assert_eq!(first, second, "sweep output must be byte-identical");

    let text = String::from_utf8(first).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("h,p,stabilizable,slack,binding_subset"));
    let mut stable_mid = Vec::new();
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 5);
        if cols[1] == "0.3" {
            assert_eq!(cols[2], "false", "{line}");
        }
        if cols[1] == "0.5" {
            assert_eq!(cols[2], "true", "{line}");
        }
        if cols[1] == "0.425" && cols[2] == "true" {
            stable_mid.push(cols[0].parse::<u32>().unwrap());
        }
    }
    assert_eq!(stable_mid, vec![2, 7, 8, 9, 10]);
}

#[test]
fn synthesize_writes_policy_and_flags_unstable_configs() {
    let dir = tempfile::tempdir().unwrap();
    let config = three_plant_config(dir.path());
    let policy_path = dir.path().join("policy.json");
    let out = bin()
        .args(["synthesize", "--config", &config, "--out", policy_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = std::fs::read_to_string(&policy_path).unwrap();
    let parsed = wncs::capacity_mdp::SchedulingPolicy::from_json_str(&text).unwrap();
    assert_eq!(parsed.horizon, 5);
    assert_eq!(parsed.n, 3);

    // unstable: symmetric pair at p = 0.3
    let bad = write_config(
        dir.path(),
        "bad.json",
        r#"{
            "plants": [{"a": 1.0, "b": 1.0}, {"a": 1.0, "b": 1.0}],
            "channel": [0.3, 0.3],
            "sampling_periods": [5, 5],
            "slot_length": 0.1
        }"#,
    );
    let out = bin().args(["synthesize", "--config", &bad]).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}

#[test]
fn invalid_configs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let zero_p = write_config(
        dir.path(),
        "zero_p.json",
        r#"{
            "plants": [{"a": 1.0, "b": 1.0}],
            "channel": [0.0],
            "sampling_periods": [2],
            "slot_length": 0.1
        }"#,
    );
    let out = bin().args(["check", "--config", &zero_p]).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");

    let unknown_field = write_config(
        dir.path(),
        "unknown.json",
        r#"{
            "plants": [{"a": 1.0, "b": 1.0}],
            "channel": [0.5],
            "sampling_periods": [2],
            "slot_length": 0.1,
            "extra": 1
        }"#,
    );
    let out = bin().args(["check", "--config", &unknown_field]).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn simulate_emits_trace_and_diagnostic_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = three_plant_config(dir.path());
    let out_dir = dir.path().join("results");
    let run = || {
        let out = bin()
            .args([
                "simulate",
                "--config",
                &config,
                "--frames",
                "60",
                "--runs",
                "30",
                "--seed",
                "5",
                "--out",
                out_dir.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{out:?}");
        out
    };
    let out = run();
    let traces = std::fs::read_to_string(out_dir.join("traces.csv")).unwrap();
    assert!(traces.starts_with("run,frame,subsystem,x,u,gamma\n"));
    let diag = std::fs::read_to_string(out_dir.join("diagnostic.csv")).unwrap();
    assert!(diag.starts_with("frame,subsystem,mean_square\n"));
    assert!(out_dir.join("policy.json").exists());
    assert!(stdout(&out).contains("decaying"));

    // fixed seed: rerunning overwrites with identical bytes
    run();
    assert_eq!(traces, std::fs::read_to_string(out_dir.join("traces.csv")).unwrap());
    assert_eq!(diag, std::fs::read_to_string(out_dir.join("diagnostic.csv")).unwrap());
}

#[test]
fn check_reports_sufficient_condition_for_heterogeneous_periods() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "hetero.json",
        r#"{
            "plants": [{"a": 0.1, "b": 1.0}, {"a": 0.1, "b": 1.0}, {"a": 0.1, "b": 1.0}],
            "channel": [1.0, 1.0, 1.0],
            "sampling_periods": [1, 2, 3],
            "slot_length": 0.01
        }"#,
    );
    let out = bin().args(["check", "--config", &config]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(stdout(&out).contains("sufficient condition met"));
}

#[test]
fn pmin_prints_a_quality_in_range() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "sym3.json",
        r#"{
            "plants": [{"a": 1.0, "b": 1.0}, {"a": 1.0, "b": 1.0}, {"a": 1.0, "b": 1.0}],
            "channel": [0.5, 0.5, 0.5],
            "sampling_periods": [5, 5, 5],
            "slot_length": 0.01
        }"#,
    );
    let out = bin().args(["pmin", "--config", &config]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let p: f64 = stdout(&out).trim().parse().unwrap();
    assert!((0.0..=1.0).contains(&p));
    assert!((p - 0.0625).abs() < 5e-3, "p_min {p}");
}
