//! End-to-end checks of the command-line interface: output schemas, exit
//! codes, and byte-level determinism across thread counts.

use std::path::Path;
use std::process::{Command, Output};

fn qnoise(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnoise"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

#[test]
fn scan_emits_pinned_csv_schema() {
    let out = qnoise(&[
        "scan",
        "--families",
        "bv",
        "--n",
        "3..6",
        "--p",
        "0.0015",
        "--criterion",
        "correct",
        "--threshold",
        "0.66",
        "--seed",
        "7",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "circuit_id,family,n,d,area,p,success_prob,ci_low,ci_high,method,criterion,threshold"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 12);
        let n: usize = cols[2].parse().unwrap();
        let d: usize = cols[3].parse().unwrap();
        let area: usize = cols[4].parse().unwrap();
        assert_eq!(area, n * d);
    }
}

#[test]
fn scan_is_byte_identical_across_runs_and_thread_counts() {
    let run = |threads: &str| {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.csv");
        let out = qnoise(&[
            "scan",
            "--families",
            "bv,qft",
            "--n",
            "3..5",
            "--p",
            "0.0015,0.01",
            "--seed",
            "42",
            "--threads",
            threads,
            "-o",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(path).unwrap()
    };
    let single = run("1");
    let single_again = run("1");
    let eight = run("8");
    assert_eq!(single, single_again);
    assert_eq!(single, eight);
}

#[test]
fn tolerable_scan_respects_bound_column() {
    let out = qnoise(&[
        "scan",
        "--families",
        "bv",
        "--n",
        "3..4",
        "--tolerable",
        "--seed",
        "9",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "circuit_id,family,n,d,area,p_star,bound");
    for row in lines {
        let cols: Vec<&str> = row.split(',').collect();
        let p_star: f64 = cols[5].parse().unwrap();
        let bound: f64 = cols[6].parse().unwrap();
        assert!(p_star <= bound);
    }
}

#[test]
fn rb_report_schema_and_value() {
    let out = qnoise(&[
        "rb",
        "--qubits",
        "2",
        "--noise",
        "depolarizing:0.02",
        "--exact",
        "--seed",
        "1",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let fit = &report["fit"];
    let r = fit["r"].as_f64().unwrap();
    assert!((r - 0.015).abs() / 0.015 < 0.05, "r = {r}");
    assert!(report["per_m"].as_array().unwrap().len() >= 3);
    assert!(report["per_cnot_error"].as_f64().unwrap() > 0.0);
}

#[test]
fn rb_group_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("group1.json");
    let args = [
        "rb",
        "--qubits",
        "1",
        "--noise",
        "depolarizing:0.05",
        "--exact",
        "--seed",
        "3",
        "--group-cache",
        cache.to_str().unwrap(),
    ];
    let first = qnoise(&args);
    assert!(first.status.success());
    assert!(Path::new(&cache).exists());
    let second = qnoise(&args);
    assert!(second.status.success());
    assert_eq!(stdout(&first), stdout(&second));
}

#[test]
fn gst_reports_oracle_agreement() {
    let out = qnoise(&["gst", "--noise", "depolarizing:0.05", "--shots", "0", "--seed", "3"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let err = report["diagnostics"]["prediction_max_abs_error"]
        .as_f64()
        .unwrap();
    assert!(err < 1e-8, "prediction error {err}");
    assert!(report["gates"]["h"].as_array().unwrap().len() == 4);
    assert!(report["gram_condition_number"].as_f64().unwrap() < 1e4);
}

#[test]
fn memory_output_matches_published_values() {
    let sv = qnoise(&["estimate-memory", "--qubits", "53", "--repr", "statevector", "--bytes", "8"]);
    assert!(sv.status.success());
    assert!(stdout(&sv).contains("72.1 PB"), "{}", stdout(&sv));
    let dm = qnoise(&["estimate-memory", "--qubits", "53", "--repr", "density", "--bytes", "8"]);
    assert!(stdout(&dm).contains("6.49e17 PB"), "{}", stdout(&dm));
}

#[test]
fn gen_validate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("circuit.json");
    let gen = qnoise(&[
        "gen",
        "--family",
        "qft",
        "--n",
        "3",
        "--seed",
        "5",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(gen.status.success());
    let validate = qnoise(&["validate", path.to_str().unwrap()]);
    assert!(validate.status.success());
    assert!(stdout(&validate).starts_with("valid:"));

    // Canonical re-serialization is idempotent.
    let canon = dir.path().join("canonical.json");
    let echo = qnoise(&["validate", path.to_str().unwrap(), "-o", canon.to_str().unwrap()]);
    assert!(echo.status.success());
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        std::fs::read_to_string(&canon).unwrap()
    );
}

#[test]
fn exit_codes_distinguish_validation_from_success() {
    // Unknown family: validation error, code 2.
    let bad = qnoise(&["gen", "--family", "nope", "--n", "3", "--seed", "1"]);
    assert_eq!(bad.status.code(), Some(2));

    // Qubit index out of range inside a circuit file: code 2 with a message
    // naming the offender.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"version":1,"n_qubits":2,"layers":[[{"gate":"h","qubits":[2]}]]}"#,
    )
    .unwrap();
    let invalid = qnoise(&["validate", path.to_str().unwrap()]);
    assert_eq!(invalid.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&invalid.stderr);
    assert!(stderr.contains("layer 0"), "{stderr}");

    // Malformed JSON: parse error, code 2, with position info.
    std::fs::write(&path, "{ not json").unwrap();
    let parse = qnoise(&["validate", path.to_str().unwrap()]);
    assert_eq!(parse.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&parse.stderr).contains("line"));

    // A rate above the per-location cap: code 2.
    let rate = qnoise(&["scan", "--families", "bv", "--n", "3..3", "--p", "0.9", "--seed", "1"]);
    assert_eq!(rate.status.code(), Some(2));
}

#[test]
fn missing_seed_is_generated_and_printed() {
    let out = qnoise(&["estimate-memory", "--qubits", "10", "--repr", "statevector", "--bytes", "16"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("using random seed"));
}
