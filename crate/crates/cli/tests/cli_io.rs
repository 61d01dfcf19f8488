//! End-to-end tests of the binary: exit codes, file round trips, and
//! byte-level determinism of reports.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_mree")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn edgeworth_spec() -> &'static str {
    r#"{
        "schema": "mree.economy/1",
        "goods": 2,
        "states": [{"id": "s0", "prob": 1.0}],
        "agents": [
            {
                "id": "a1",
                "utility": {"family": "cobb_douglas_log", "alphas": [0.6, 0.4]},
                "endowment": [1.0, 0.0]
            },
            {
                "id": "a2",
                "utility": {"family": "cobb_douglas_log", "alphas": [0.5, 0.5]},
                "endowment": [0.0, 1.0]
            }
        ]
    }"#
}

fn two_state_spec() -> &'static str {
    r#"{
        "schema": "mree.economy/1",
        "goods": 2,
        "states": [{"id": "g", "prob": 0.5}, {"id": "b", "prob": 0.5}],
        "agents": [
            {
                "id": "a1",
                "utility": {"family": "log_shifted", "alphas": [0.6, 0.4]},
                "endowment": {"g": [1.0, 0.2], "b": [1.4, 0.2]}
            },
            {
                "id": "a2",
                "partition": [["g"], ["b"]],
                "utility": {"family": "log_shifted", "alphas": [0.5, 0.5]},
                "per_state": {"b": {"family": "log_shifted", "alphas": [0.7, 0.3]}},
                "endowment": {"g": [0.2, 1.0], "b": [0.2, 1.0]}
            }
        ]
    }"#
}

fn parse_stdout(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout not json: {e}\n{}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

#[test]
fn validate_passes_on_sound_economy() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "e.json", edgeworth_spec());
    let out = run(&["validate", &spec]);
    assert_eq!(out.status.code(), Some(0));
    let v = parse_stdout(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["body"]["economy"]["goods"], 2);
}

#[test]
fn validate_flags_zero_aggregate_endowment() {
    // Nobody owns good 2: structurally fine, economically unsound.
    let text = edgeworth_spec().replace("[0.0, 1.0]", "[0.5, 0.0]");
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "e.json", &text);
    let out = run(&["validate", &spec]);
    assert_eq!(out.status.code(), Some(1));
    let v = parse_stdout(&out);
    assert_eq!(v["passed"], false);
}

#[test]
fn unusable_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    // Missing file.
    let out = run(&["validate", dir.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    // Malformed JSON.
    let bad = write(dir.path(), "bad.json", "{ not json");
    let out = run(&["validate", &bad]);
    assert_eq!(out.status.code(), Some(2));
    // Unknown state id in a flag.
    let spec = write(dir.path(), "e.json", edgeworth_spec());
    let out = run(&["aggregate-set", &spec, "--state", "zz"]);
    assert_eq!(out.status.code(), Some(2));
    // Usage error from the argument parser.
    let out = run(&["solve"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_reports_the_clearing_price() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "e.json", edgeworth_spec());
    let out = run(&["solve", &spec]);
    assert_eq!(out.status.code(), Some(0));
    let v = parse_stdout(&out);
    let price = v["body"]["states"][0]["price"].as_array().unwrap();
    assert!((price[0].as_f64().unwrap() - 5.0 / 9.0).abs() < 1e-6);
    assert!((price[1].as_f64().unwrap() - 4.0 / 9.0).abs() < 1e-6);
}

#[test]
fn nonconvergence_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "e.json", edgeworth_spec());
    let out = run(&["solve", &spec, "--max-iter", "0", "--tol-clear", "1e-30"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("residual"));
}

#[test]
fn ree_writes_a_verifiable_equilibrium_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "e.json", two_state_spec());
    let eq_path = dir.path().join("eq.json");
    let out = run(&["ree", &spec, "--out", eq_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = parse_stdout(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["body"]["equilibrium"]["schema"], "mree.equilibrium/1");

    let out = run(&[
        "verify",
        "--economy",
        &spec,
        "--equilibrium",
        eq_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = parse_stdout(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["body"]["certificate"]["passed"], true);

    // Recomputing the certificate from the file reproduces the stored one
    // exactly: same allocation, same prices, same arithmetic.
    let stored: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&eq_path).unwrap()).unwrap();
    assert_eq!(v["body"]["certificate"], stored["certificate"]);
}

#[test]
fn verify_rejects_a_tampered_allocation() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "e.json", two_state_spec());
    let eq_path = dir.path().join("eq.json");
    let out = run(&["ree", &spec, "--out", eq_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    let mut file: Value =
        serde_json::from_str(&std::fs::read_to_string(&eq_path).unwrap()).unwrap();
    file["states"][0]["allocation"]["a1"][0] = Value::from(9.0);
    std::fs::write(&eq_path, serde_json::to_string_pretty(&file).unwrap()).unwrap();

    let out = run(&[
        "verify",
        "--economy",
        &spec,
        "--equilibrium",
        eq_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v = parse_stdout(&out);
    assert_eq!(v["passed"], false);
    assert_eq!(v["body"]["certificate"]["budget_ok"], false);
}

#[test]
fn reports_are_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "e.json", two_state_spec());
    for cmd in [
        vec!["solve", spec.as_str()],
        vec!["ree", spec.as_str()],
        vec![
            "aggregate-set",
            spec.as_str(),
            "--state",
            "g",
            "--resolution",
            "0.25",
        ],
    ] {
        let a = run(&cmd);
        let b = run(&cmd);
        assert_eq!(a.status.code(), b.status.code());
        assert_eq!(a.stdout, b.stdout, "nondeterministic output for {cmd:?}");
    }
}

#[test]
fn aggregate_set_includes_points_when_small() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "e.json", two_state_spec());
    let out = run(&[
        "aggregate-set",
        &spec,
        "--state",
        "g",
        "--resolution",
        "0.25",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = parse_stdout(&out);
    let count = v["body"]["count"].as_u64().unwrap();
    assert!(count > 0);
    let points = v["body"]["points"].as_array().unwrap();
    assert!(points.len() as u64 <= count);
    assert_eq!(points[0].as_array().unwrap().len(), 2);
    assert!(v["body"]["distance_to_aggregate_endowment"]
        .as_f64()
        .unwrap()
        .is_finite());
}

#[test]
fn probe_continuity_reports_shrinking_distances() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "e.json", edgeworth_spec());
    let out = run(&[
        "probe-continuity",
        &spec,
        "--state",
        "s0",
        "--direction",
        "1,-1",
        "--steps",
        "4",
        "--resolution",
        "0.01",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = parse_stdout(&out);
    let steps = v["body"]["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 4);
    for row in steps {
        assert!(row["hausdorff_distance"].as_f64().unwrap().is_finite());
    }
    assert_eq!(v["body"]["price_source"], "solved");
}

#[test]
fn text_format_renders_key_value_lines() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "e.json", edgeworth_spec());
    let out = run(&["validate", &spec, "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("command: validate\npassed: true\n"));
    assert!(text.contains("goods: 2"));
}
