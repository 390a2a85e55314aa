//! End-to-end tests of the binary: exit-code contract, descriptor parsing,
//! canonical output, and the artifact-producing subcommands.

use std::process::{Command, Output};

fn interfere(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_interfere"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn simulate_identical_thermals_passes() {
    let out = interfere(&[
        "simulate",
        "--state-a",
        "thermal:1",
        "--state-b",
        "thermal:1",
        "--theta",
        "1.5707963",
        "--cutoff",
        "20",
        "--analyses",
        "mutual-information",
        "--reproducible",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let mi = report["results"][0]["value"].as_f64().unwrap();
    assert!(mi < 1e-6, "MI {mi}");
    assert_eq!(report["results"][0]["verdict"]["kind"], "pass");
}

#[test]
fn simulate_strict_fails_on_correlated_output() {
    let out = interfere(&[
        "simulate",
        "--state-a",
        "fock:1",
        "--state-b",
        "vacuum",
        "--theta",
        "half",
        "--cutoff",
        "12",
        "--analyses",
        "mutual-information",
        "--strict",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let mi = report["results"][0]["value"].as_f64().unwrap();
    assert!((mi - 2.0 * (2.0f64).ln()).abs() < 1e-6);
}

#[test]
fn parse_failures_exit_one() {
    let out = interfere(&["simulate", "--state-a", "bogus"]);
    assert_eq!(out.status.code(), Some(1));

    // unknown flags are errors, not warnings
    let out = interfere(&[
        "simulate",
        "--state-a",
        "vacuum",
        "--state-b",
        "vacuum",
        "--theta",
        "half",
        "--no-such-flag",
    ]);
    assert_eq!(out.status.code(), Some(1));

    // trivial beam splitter rejected by check-factorizable
    let dir = tempfile::tempdir().unwrap();
    let series = serde_json::json!({"dim": 2, "tensors": {"2": [[1.0, 0.0], [0.0, 1.0]]}});
    let path = dir.path().join("s.json");
    std::fs::write(&path, series.to_string()).unwrap();
    let p = path.to_str().unwrap();
    let out = interfere(&["check-factorizable", "--f", p, "--g", p, "--theta", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reproducible_runs_are_byte_identical() {
    let args = [
        "simulate",
        "--state-a",
        "thermal:0.5",
        "--state-b",
        "thermal:0.5",
        "--theta",
        "half",
        "--cutoff",
        "16",
        "--analyses",
        "mutual-information,covariance-cross",
        "--reproducible",
    ];
    let a = interfere(&args);
    let b = interfere(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn check_factorizable_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, v: serde_json::Value| {
        let p = dir.path().join(name);
        std::fs::write(&p, v.to_string()).unwrap();
        p
    };
    let identical = write(
        "f.json",
        serde_json::json!({"dim": 2, "tensors": {"2": [[1.0, 0.2], [0.2, 0.5]]}}),
    );
    let out = interfere(&[
        "check-factorizable",
        "--f",
        identical.to_str().unwrap(),
        "--g",
        identical.to_str().unwrap(),
        "--theta",
        "1.0",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["pass"], serde_json::json!(true));

    // a nonzero third order must fail at any nontrivial angle
    let with_third = write(
        "g.json",
        serde_json::json!({
            "dim": 2,
            "tensors": {
                "2": [[1.0, 0.2], [0.2, 0.5]],
                "3": [[[0.1, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]],
            }
        }),
    );
    let out = interfere(&[
        "check-factorizable",
        "--f",
        with_third.to_str().unwrap(),
        "--g",
        with_third.to_str().unwrap(),
        "--theta",
        "1.0",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // malformed series exit 1
    let broken = write("broken.json", serde_json::json!({"tensors": {}}));
    let out = interfere(&[
        "check-factorizable",
        "--f",
        broken.to_str().unwrap(),
        "--g",
        broken.to_str().unwrap(),
        "--theta",
        "1.0",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn wigner_writes_grid_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("w.csv");
    let out = interfere(&[
        "wigner",
        "--state",
        "fock:1",
        "--cutoff",
        "16",
        "--steps",
        "41",
        "--format",
        "csv",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let summary = stdout(&out);
    // parity of the one-photon state: min ≈ −1/π
    let min: f64 = summary
        .split_whitespace()
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((min + 1.0 / std::f64::consts::PI).abs() < 1e-9);
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("q,p,w\n"));
    assert_eq!(csv.lines().count(), 41 * 41 + 1);

    let json_path = dir.path().join("w.json");
    let out = interfere(&[
        "wigner",
        "--state",
        "vacuum",
        "--cutoff",
        "12",
        "--steps",
        "21",
        "--format",
        "json",
        "--out",
        json_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(v["values"].as_array().unwrap().len(), 21);

    // strict mode rejects a window that misses the state
    let out = interfere(&[
        "wigner",
        "--state",
        "coherent:3.5",
        "--cutoff",
        "30",
        "--qmin",
        "-1",
        "--qmax",
        "1",
        "--pmin",
        "-1",
        "--pmax",
        "1",
        "--steps",
        "21",
        "--format",
        "csv",
        "--out",
        dir.path().join("clipped.csv").to_str().unwrap(),
        "--strict",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn conditional_reports_both_routes() {
    let out = interfere(&[
        "conditional",
        "--nbar-a",
        "0.5",
        "--nbar-b",
        "2.0",
        "--theta",
        "half",
        "--project-b",
        "1",
        "--cutoff",
        "24",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["route_deviation"].as_f64().unwrap() < 1e-3);
    assert!(v["excess_kurtosis"].as_f64().unwrap().abs() > 1e-3);

    // outcomes other than one photon skip the closed form
    let out = interfere(&[
        "conditional",
        "--nbar-a",
        "1",
        "--nbar-b",
        "1",
        "--theta",
        "half",
        "--project-b",
        "0",
        "--cutoff",
        "20",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["closed_form_skipped"].is_string());
}

#[test]
fn sweep_emits_table() {
    let out = interfere(&[
        "sweep",
        "--family",
        "thermal",
        "--values",
        "0.3,0.9",
        "--theta",
        "half",
        "--cutoff",
        "24",
        "--workers",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let diag = row["state_a"] == row["state_b"];
        assert_eq!(row["factorizable"].as_bool().unwrap(), diag);
    }
}

#[test]
fn env_cutoff_override_applies() {
    let out = Command::new(env!("CARGO_BIN_EXE_interfere"))
        .env("INTERFERE_CUTOFF", "9")
        .args([
            "simulate",
            "--state-a",
            "vacuum",
            "--state-b",
            "vacuum",
            "--theta",
            "half",
            "--analyses",
            "mutual-information",
            "--reproducible",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["scenario"]["cutoff"], serde_json::json!(9));
}

#[test]
fn self_test_single_criterion() {
    let out = interfere(&["self-test", "--fast", "--only", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("criterion  4"));
    assert!(stdout(&out).contains("PASS"));

    let out = interfere(&["self-test", "--only", "99"]);
    assert_eq!(out.status.code(), Some(1));
}
