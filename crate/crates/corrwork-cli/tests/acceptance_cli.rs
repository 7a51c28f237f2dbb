//! Acceptance criterion 9: CLI determinism and the headline report, checked
//! against the installed binary.

use std::fs;
use std::process::Command;

fn corrwork() -> Command {
    Command::new(env!("CARGO_BIN_EXE_corrwork"))
}

fn report(criterion: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("[{verdict}] acceptance {criterion}: {detail}");
    assert!(pass, "acceptance {criterion} failed: {detail}");
}

#[test]
fn criterion_9_cli_determinism_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("sweep_a.csv");
    let out_b = dir.path().join("sweep_b.csv");
    let flags = [
        "sweep",
        "--protocol",
        "classical-partial",
        "--p-min",
        "0.55",
        "--p-max",
        "0.95",
        "--steps",
        "9",
    ];
    for out in [&out_a, &out_b] {
        let status = corrwork()
            .args(flags)
            .arg("--out")
            .arg(out)
            .status()
            .expect("binary runs");
        assert!(status.success());
    }
    let bytes_a = fs::read(&out_a).unwrap();
    let bytes_b = fs::read(&out_b).unwrap();
    let identical = bytes_a == bytes_b;

    let output = corrwork().arg("report").output().expect("binary runs");
    assert!(output.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    let ratio = doc["ratio_wq_over_wc"].as_f64().unwrap();
    let ratio_ok = (ratio - 2.0).abs() <= 1e-9;
    let all_pass = doc["all_pass"].as_bool().unwrap();

    report(
        "9 CLI determinism",
        identical && ratio_ok && all_pass,
        &format!(
            "sweep outputs byte-identical: {identical} ({} bytes); ratio_wq_over_wc = {ratio}; report all_pass = {all_pass}",
            bytes_a.len()
        ),
    );
}
