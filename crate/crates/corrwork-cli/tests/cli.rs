//! Exit-code contract, artifact formats, and golden values for the binary.

use std::process::Command;

fn corrwork() -> Command {
    Command::new(env!("CARGO_BIN_EXE_corrwork"))
}

#[test]
fn run_quantum_full_reports_two_ln2() {
    let output = corrwork()
        .args(["run", "--protocol", "quantum-full", "--n", "1", "--kT", "1"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    let work = doc["total_work"].as_f64().unwrap();
    assert!((work - 1.386294361).abs() < 1e-6, "work = {work}");
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["equivalence"]["pass"], true);
}

#[test]
fn run_partial_without_p_is_a_usage_error() {
    let output = corrwork()
        .args(["run", "--protocol", "classical-partial"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("--p is required"), "stderr: {stderr}");
}

#[test]
fn run_full_protocol_rejects_p() {
    let output = corrwork()
        .args(["run", "--protocol", "quantum-full", "--p", "0.7"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn degenerate_p_half_runs_clean() {
    let output = corrwork()
        .args(["run", "--protocol", "classical-partial", "--p", "0.5"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(doc["degenerate"], true);
    assert_eq!(doc["total_work"].as_f64().unwrap(), 0.0);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("degenerate"), "stderr: {stderr}");
}

#[test]
fn invalid_p_is_a_usage_error() {
    for bad in ["0.3", "1.5", "nan"] {
        let output = corrwork()
            .args(["run", "--protocol", "classical-partial", "--p", bad])
            .output()
            .unwrap();
        assert_eq!(output.status.code(), Some(1), "p = {bad}");
    }
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let output = corrwork().args(["run", "--bogus"]).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn sweep_csv_has_exact_columns_and_endpoint_values() {
    let output = corrwork()
        .args(["sweep", "--p-min", "0.5", "--p-max", "1.0", "--steps", "3"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "p,work_numeric,work_closed,defect_nats,eq_displacement,rel_error"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    // Row at p = 1: closed-form work ln 2, displacement V.
    let last: Vec<&str> = rows[2].split(',').collect();
    assert_eq!(last[0], "1.00000000e0");
    assert_eq!(last[2], "6.93147181e-1");
    assert_eq!(last[4], "1.00000000e0");
    // Every row obeys the oracle-agreement bound.
    for row in rows {
        let rel: f64 = row.split(',').nth(5).unwrap().parse().unwrap();
        assert!(rel <= 1e-6, "rel_error {rel} in row {row}");
    }
}

#[test]
fn sweep_quantum_closed_form_is_two_ln2() {
    let output = corrwork()
        .args([
            "sweep",
            "--protocol",
            "quantum-partial",
            "--p-min",
            "0.6",
            "--p-max",
            "0.9",
            "--steps",
            "2",
            "--format",
            "json",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    for row in doc["rows"].as_array().unwrap() {
        let closed = row["work_closed"].as_f64().unwrap();
        assert!((closed - 1.386294361).abs() < 1e-8);
        let rel = row["rel_error"].as_f64().unwrap();
        assert!(rel <= 1e-6);
    }
}

#[test]
fn sweep_validates_grid() {
    for args in [
        vec!["sweep", "--p-min", "0.4"],
        vec!["sweep", "--p-max", "1.2"],
        vec!["sweep", "--p-min", "0.9", "--p-max", "0.6"],
        vec!["sweep", "--steps", "1"],
        vec!["sweep", "--protocol", "classical-full"],
    ] {
        let output = corrwork().args(&args).output().unwrap();
        assert_eq!(output.status.code(), Some(1), "args: {args:?}");
    }
}

#[test]
fn run_outputs_are_deterministic() {
    let run = || {
        corrwork()
            .args([
                "run",
                "--protocol",
                "quantum-partial",
                "--p",
                "0.8",
                "--alpha",
                "0.3",
                "--beta",
                "1.1",
            ])
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run(), run());
}

#[test]
fn report_is_deterministic() {
    let run = || corrwork().arg("report").output().unwrap().stdout;
    assert_eq!(run(), run());
}

#[test]
fn ledger_csv_format() {
    let output = corrwork()
        .args([
            "run",
            "--protocol",
            "classical-full",
            "--format",
            "csv",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "step,work_out,heat_in,gas_entropy_delta_nats,description"
    );
    // Five steps with the mix carrying all the work.
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);
    let mix: Vec<&str> = rows[3].split(',').collect();
    assert_eq!(mix[1], "6.93147181e-1");
    assert_eq!(mix[2], "6.93147181e-1");
}
