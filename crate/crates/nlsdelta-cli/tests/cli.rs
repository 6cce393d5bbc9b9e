//! End-to-end checks of the binary: exit codes, output formats, determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlsdelta"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn scatter_single_linear_delta() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "p.json",
        r#"{"centers": [{"c": 0.0, "z": [2.0, 0.0], "alpha": 0.0}], "k": 1.0, "A": [1.0, 0.0]}"#,
    );
    let out = run(&["scatter", "--config", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("1 branch(es)"), "{text}");
    assert!(text.contains("|T|^2 = 5.000000000000e-1"), "{text}");

    // the same problem as JSON, with the k override exercised
    let out = run(&["scatter", "--config", &cfg, "--k", "2.0", "--json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["k"], 2.0);
    let t2 = doc["branches"][0]["T2"].as_f64().unwrap();
    // |T|^2 = 4k^2/(4k^2+z^2) = 16/20
    assert!((t2 - 0.8).abs() < 1e-12);
}

#[test]
fn malformed_json_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", "{\"centers\": [\n  {broken}\n]}");
    let out = run(&["scatter", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn invalid_field_exits_2_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "zero_k.json",
        r#"{"centers": [{"c": 0.0, "z": [2.0, 0.0], "alpha": 0.0}], "k": 0.0}"#,
    );
    let out = run(&["scatter", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("invalid k"), "{err}");
}

#[test]
fn scan_failure_exits_3() {
    // engineered so every closure evaluation is a domain failure (interior
    // modulus pinned at zero under a negative exponent)
    let dir = tempfile::tempdir().unwrap();
    let t = std::f64::consts::PI.sin();
    let cfg = write_config(
        dir.path(),
        "singular.json",
        &format!(
            r#"{{"centers": [{{"c": 0.0, "z": [1.0, 0.0], "alpha": -0.5}},
                            {{"c": {}, "z": [{}, 0.5], "alpha": 0.0}}],
                "k": 0.5}}"#,
            std::f64::consts::PI,
            -t / 4.0
        ),
    );
    let out = run(&["scatter", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sweep_csv_deterministic_and_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    for out in [&out_a, &out_b] {
        let res = run(&[
            "sweep",
            "--preset",
            "fig1-linear",
            "--k-min",
            "0.5",
            "--k-max",
            "2.5",
            "-n",
            "40",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(res.status.success());
    }
    let a = fs::read(&out_a).unwrap();
    let b = fs::read(&out_b).unwrap();
    assert_eq!(a, b, "sweep output must be bit-identical across runs");
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "k,branch,T2,R2,psi_cN,residual");
    assert_eq!(lines.count(), 40);
    assert!(!text.contains('\r'));
}

#[test]
fn sweep_json_has_records() {
    let out = run(&[
        "sweep",
        "--preset",
        "fig1-linear",
        "--k-min",
        "0.5",
        "--k-max",
        "1.5",
        "-n",
        "5",
        "--json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let records = doc["records"].as_array().unwrap();
    assert_eq!(records.len(), 5);
    assert!(records[0]["t_re"].is_f64());
    assert!(records[0]["t_intensity"].is_f64());
}

#[test]
fn sweep_unknown_preset_exits_2() {
    let out = run(&["sweep", "--preset", "fig9-nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bound_single_center() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "b.json",
        r#"{"centers": [{"c": 0.0, "omega": 2.0, "alpha": 1.0}]}"#,
    );
    let out = run(&["bound", "--config", &cfg, "--json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let states = doc["states"].as_array().unwrap();
    assert_eq!(states.len(), 1);
    assert!((states[0]["energy"].as_f64().unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn bound_symmetric_double_below_threshold_notes_condition() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "b2.json",
        r#"{"centers": [{"c": -0.4, "omega": 2.0, "alpha": 0.0},
                        {"c": 0.4, "omega": 2.0, "alpha": 0.0}]}"#,
    );
    let out = run(&["bound", "--config", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("1 bound state(s)"), "{text}");
    assert!(text.contains("d > 2/beta"), "{text}");
}

#[test]
fn bound_two_states_even_deeper() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "b3.json",
        r#"{"centers": [{"c": -1.5, "omega": 2.0, "alpha": 0.0},
                        {"c": 1.5, "omega": 2.0, "alpha": 0.0}]}"#,
    );
    let out = run(&["bound", "--config", &cfg, "--json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let states = doc["states"].as_array().unwrap();
    assert_eq!(states.len(), 2);
    assert_eq!(states[0]["parity"], "even");
    assert_eq!(states[1]["parity"], "odd");
    assert!(states[0]["nu"].as_f64().unwrap() > states[1]["nu"].as_f64().unwrap());
}

#[test]
fn bound_singular_exponent_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "b4.json",
        r#"{"centers": [{"c": 0.0, "omega": 2.0, "alpha": 2.0}]}"#,
    );
    let out = run(&["bound", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn validate_small_corpus_passes() {
    let out = run(&["validate", "--corpus", "6", "--seed", "11"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PASS"), "{text}");
    assert!(text.contains("unitarity"), "{text}");
}

#[test]
fn preset_list_names_the_figures() {
    let out = run(&["preset", "list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "fig1-linear",
        "fig1-weak",
        "fig1-strong",
        "fig2-alpham07",
        "fig2-alpham05",
        "fig2-alpha0",
        "fig2-alpha1",
        "fig2-alpha2",
    ] {
        assert!(text.contains(name), "missing {name} in:\n{text}");
    }
}
