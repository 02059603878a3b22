//! Behavioral tests for the command-line driver: argument handling, exit
//! codes, report formats, and configuration validation.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_apx"))
}

fn unique_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("apx-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).expect("test directory");
    dir
}

/// Write a config into a fresh directory and run the binary there, so the
/// default relative output directory stays inside the sandbox.
fn run_config(tag: &str, config: &Value) -> (Output, PathBuf) {
    let dir = unique_dir(tag);
    let path = dir.join("config.json");
    fs::write(&path, config.to_string()).expect("config written");
    let out = bin()
        .arg("run")
        .arg(&path)
        .current_dir(&dir)
        .output()
        .expect("binary runs");
    (out, dir)
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

#[test]
fn classifies_a_half_power_weight_as_admissible_at_p_two() {
    let out = bin()
        .args([
            "classify-weight",
            "--family",
            "power",
            "--x0",
            "0",
            "--alpha",
            "0.5",
            "--p",
            "2",
        ])
        .output()
        .expect("binary runs");
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["class"], "A_2");
    assert_eq!(v["in_class"], true);
    let characteristic = v["characteristic"].as_f64().expect("characteristic");
    assert!(
        characteristic >= 1.0 && characteristic.is_finite(),
        "interval-average characteristic is a finite number >= 1, got {characteristic}"
    );
}

#[test]
fn a_flat_exponent_reports_a_unit_characteristic() {
    let out = bin()
        .args(["classify-weight", "--alpha", "0", "--p", "2"])
        .output()
        .expect("binary runs");
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["characteristic"].as_f64().expect("characteristic"), 1.0);
    assert_eq!(v["in_class"], true);
}

#[test]
fn non_integrable_exponents_use_their_own_exit_code() {
    let out = bin()
        .args(["classify-weight", "--alpha", "-1.5"])
        .output()
        .expect("binary runs");
    assert_eq!(exit_code(&out), 3);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("integrability"),
        "stderr names the violated condition: {err}"
    );
}

#[test]
fn a_norm_index_below_one_is_a_usage_error() {
    let out = bin()
        .args(["classify-weight", "--alpha", "0.5", "--p", "0.5"])
        .output()
        .expect("binary runs");
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn infinite_norm_index_accepts_only_constant_weights() {
    let out = bin()
        .args(["classify-weight", "--alpha", "0.5", "--p", "inf"])
        .output()
        .expect("binary runs");
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["in_class"], false);

    let flat = bin()
        .args(["classify-weight", "--family", "const", "--value", "2", "--p", "inf"])
        .output()
        .expect("binary runs");
    assert_eq!(exit_code(&flat), 0);
    assert_eq!(stdout_json(&flat)["in_class"], true);
}

#[test]
fn an_empty_check_list_passes_with_an_empty_summary() {
    let (out, dir) = run_config("empty", &json!({"schema_version": 1, "checks": []}));
    assert_eq!(exit_code(&out), 0);
    let text = fs::read_to_string(dir.join("apx-out/summary.json")).expect("summary exists");
    let summary: Value = serde_json::from_str(&text).expect("summary is JSON");
    assert_eq!(summary["all_passed"], true);
    assert_eq!(summary["checks"].as_array().expect("checks array").len(), 0);
    assert_eq!(summary["seed"], 42);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn an_unsupported_schema_version_is_rejected() {
    let (out, dir) = run_config("schema", &json!({"schema_version": 2, "checks": []}));
    assert_eq!(exit_code(&out), 2);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_fields_in_a_check_are_rejected() {
    let (out, dir) = run_config(
        "unknown-field",
        &json!({"schema_version": 1, "checks": [{"check_id": "jackson", "polycount": 3}]}),
    );
    assert_eq!(exit_code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("polycount"), "error names the bad field: {err}");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn an_inadmissible_index_pair_is_a_config_error() {
    // The cross-index embedding checks need p < q.
    let (out, dir) = run_config(
        "pair",
        &json!({"schema_version": 1, "checks": [{"check_id": "ulyanov_modulus", "p": 2, "q": 1}]}),
    );
    assert_eq!(exit_code(&out), 2);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn an_unknown_function_name_is_a_config_error() {
    let (out, dir) = run_config(
        "unknown-fn",
        &json!({"schema_version": 1, "checks": [{"check_id": "jackson", "functions": ["no_such_member"]}]}),
    );
    assert_eq!(exit_code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("no_such_member"), "error names the function: {err}");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn polynomial_inputs_produce_zero_ratio_rows() {
    let (out, dir) = run_config(
        "trivial",
        &json!({
            "schema_version": 1,
            "checks": [{"check_id": "jackson", "functions": ["mode_cos_03"], "n_list": [8, 16]}]
        }),
    );
    assert_eq!(
        exit_code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.join("apx-out/01_jackson.csv")).expect("report written");
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().expect("header row"),
        "check_id,params,x,lhs,rhs,ratio,integral_truncated,integral_extrapolated"
    );
    let mut rows = 0;
    for row in lines {
        let ratio = row.split(',').nth(5).expect("ratio column");
        assert_eq!(
            ratio.parse::<f64>().expect("numeric ratio"),
            0.0,
            "a low-degree polynomial input must be reproduced exactly: {row}"
        );
        rows += 1;
    }
    assert_eq!(rows, 2);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn an_unmet_verdict_maps_to_exit_four() {
    // An impossibly tight trend tolerance turns a passing band inconclusive.
    let (out, dir) = run_config(
        "verdict",
        &json!({
            "schema_version": 1,
            "checks": [{"check_id": "realization_equiv", "tolerance": {"slope_tol": 1e-9}}]
        }),
    );
    assert_eq!(exit_code(&out), 4);
    let text = fs::read_to_string(dir.join("apx-out/summary.json")).expect("summary exists");
    let summary: Value = serde_json::from_str(&text).expect("summary is JSON");
    assert_eq!(summary["all_passed"], false);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn the_check_vocabulary_has_fourteen_entries() {
    let out = bin().arg("list-checks").output().expect("binary runs");
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    let entries = v.as_array().expect("array");
    assert_eq!(entries.len(), 14);
    assert!(entries
        .iter()
        .all(|e| e["check_id"].is_string() && e["description"].is_string()));
}

#[test]
fn printed_constants_match_the_frozen_unweighted_values() {
    let out = bin()
        .args(["print-constants", "--weight", "const(1)", "--p", "2", "--order", "1"])
        .output()
        .expect("binary runs");
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    let find = |name: &str| -> f64 {
        v["constants"]
            .as_array()
            .expect("constants array")
            .iter()
            .find(|e| e["name"] == name)
            .unwrap_or_else(|| panic!("table has {name}"))["value"]
            .as_f64()
            .expect("numeric value")
    };
    assert!((find("C_1") - 8.885765876316732).abs() < 1e-12);
    assert!((find("C_2") - 65.29677711243184).abs() < 1e-12);
}

#[test]
fn the_thread_cap_rejects_garbage_and_accepts_integers() {
    let dir = unique_dir("threads");
    let path = dir.join("config.json");
    fs::write(&path, r#"{"schema_version": 1, "checks": []}"#).expect("config written");
    let bad = bin()
        .env("APX_THREADS", "zebra")
        .arg("run")
        .arg(&path)
        .current_dir(&dir)
        .output()
        .expect("binary runs");
    assert_eq!(exit_code(&bad), 2);
    let good = bin()
        .env("APX_THREADS", "1")
        .arg("run")
        .arg(&path)
        .current_dir(&dir)
        .output()
        .expect("binary runs");
    assert_eq!(exit_code(&good), 0);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn a_missing_config_file_is_a_config_error() {
    let out = bin()
        .args(["run", "/nonexistent/apx-config.json"])
        .output()
        .expect("binary runs");
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn json_only_output_skips_the_csv_reports() {
    let (out, dir) = run_config(
        "json-only",
        &json!({
            "schema_version": 1,
            "checks": [{"check_id": "jackson", "functions": ["mode_cos_03"], "n_list": [8]}],
            "output": {"directory": "reports", "formats": ["json"]}
        }),
    );
    assert_eq!(exit_code(&out), 0);
    assert!(dir.join("reports/summary.json").exists());
    assert!(!dir.join("reports/01_jackson.csv").exists());
    fs::remove_dir_all(&dir).ok();
}
