use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tensorpow"));
    cmd.args(args).env_remove("TENSORPOW_PRECISION");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data lines of a CSV report, split into cells, without the column line.
fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).expect("valid json")
}

#[test]
fn dyadic_top_five() {
    let o = run(&["tau", "--family", "dyadic", "--d", "2", "--top", "5"]);
    assert!(o.status.success());
    let rows = csv_rows(&o);
    let taus: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(taus, [1.0, 0.5, 0.5, 0.5, 0.5]);
    let ties: Vec<&str> = rows.iter().map(|r| r[3].as_str()).collect();
    assert_eq!(ties, ["1", "4", "4", "4", "4"]);
}

#[test]
fn a_count_example() {
    let o = run(&["count", "--mode", "aN", "--N", "2", "--r", "10", "--l", "1"]);
    assert!(o.status.success());
    assert_eq!(csv_rows(&o)[0][3], "9");
}

#[test]
fn hash_torus_bounds_pass() {
    let o = run(&[
        "bounds", "--family", "torus-hash", "--s", "1", "--gamma", "1", "--interval", "0,6.283185307", "--d", "8",
        "--n-range", "2..256",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 255);
    assert!(rows.iter().all(|r| r.last().unwrap() == "true"));
    assert!(stdout(&o).contains("# violations: 0"));
}

#[test]
fn tensor_count_modes() {
    let o = run(&["count", "--mode", "tensor", "--family", "dyadic", "--d", "2", "--t", "0.5"]);
    assert_eq!(csv_rows(&o)[0][3], "5");
    let o = run(&[
        "count", "--mode", "tensor", "--family", "custom", "--values", "1", "--tail", "power:1,1", "--d", "2", "--t",
        "0.25", "--cmp", "gt",
    ]);
    let row = &csv_rows(&o)[0];
    assert_eq!(&row[3..], ["5", "8", "5", "3"]);
}

#[test]
fn tau_at_certificate_columns() {
    let o = run(&["tau", "--family", "custom", "--values", "1", "--tail", "power:1,1", "--d", "2", "--n", "6", "--out", "json"]);
    let v = json(&o);
    let row = &v["rows"][0];
    assert_eq!(row["tau"], 0.25);
    assert_eq!(row["count_ge"], "8");
    assert_eq!(row["count_gt"], "5");
    assert_eq!(row["tie_class_size"], "3");
}

#[test]
fn spectrum_table() {
    let o = run(&["spectrum", "--family", "torus-circ", "--interval", "0,1", "--n-max", "3"]);
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 3);
    let s2: f64 = rows[1][1].parse().unwrap();
    let expected = (1.0 + 4.0 * std::f64::consts::PI.powi(2)).powf(-0.5);
    assert!((s2 - expected).abs() < 1e-15);
    assert_eq!(rows[1][1], rows[2][1]);
    // log column: 17 significant digits
    let mantissa = rows[1][2].split('e').next().unwrap().trim_start_matches('-').replace('.', "");
    assert_eq!(mantissa.len(), 17);
}

#[test]
fn header_records_config() {
    let o = run(&["tau", "--family", "jacobi", "--alpha", "0.5", "--s", "2", "--d", "3", "--n", "10", "--out", "json"]);
    let v = json(&o);
    let h = &v["header"];
    assert_eq!(h["tool"], "tensorpow");
    assert_eq!(h["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(h["command"], "tau");
    assert_eq!(h["config"]["family"]["alpha"], 0.5);
    assert_eq!(h["config"]["precision"], "dd");
}

#[test]
fn output_is_thread_independent() {
    let args = ["bounds", "--family", "jacobi", "--d", "5", "--n-range", "1..400"];
    let one = run(&[&args[..], &["--threads", "1"]].concat());
    let four = run(&[&args[..], &["--threads", "4"]].concat());
    let strip = |o: &Output| stdout(o).lines().filter(|l| !l.starts_with("# config")).collect::<Vec<_>>().join("\n");
    assert!(one.status.success());
    assert_eq!(strip(&one), strip(&four));
    assert_eq!(stdout(&run(&args)), stdout(&run(&args)));
}

#[test]
fn writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("top.json");
    let o = run(&["tau", "--family", "dyadic", "--d", "3", "--top", "20", "--out", "json", "-o", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 20);
    assert_eq!(v["rows"][19]["tau"], 0.25);
}

#[test]
fn precision_backends() {
    let args = ["tau", "--family", "dyadic", "--d", "3", "--n", "20"];
    let dd = run(&args);
    let double = run_env(&args, &[("TENSORPOW_PRECISION", "double")]);
    assert_eq!(csv_rows(&dd), csv_rows(&double));
    assert!(stdout(&double).contains("\"precision\":\"double\""));
    let bad = run_env(&args, &[("TENSORPOW_PRECISION", "quad")]);
    assert_eq!(bad.status.code(), Some(64));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["tau", "--frobnicate"]).status.code(), Some(64));
    assert_eq!(run(&["launch"]).status.code(), Some(64));
    assert_eq!(run(&["count", "--mode", "aN", "--N", "2"]).status.code(), Some(64));
    assert_eq!(run(&["tau", "--family", "jacobi", "--alpha", "-2", "--d", "2", "--n", "3"]).status.code(), Some(2));
    assert_eq!(run(&["tau", "--family", "torus-hash", "--gamma", "0", "--d", "2", "--n", "3"]).status.code(), Some(2));
    let rank = run(&["tau", "--family", "custom", "--values", "1,0.5", "--tail", "finite-rank", "--d", "2", "--n", "5"]);
    assert_eq!(rank.status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn tract_verdicts() {
    let o = run(&[
        "tract", "--family-spec", r#"{"family":"torus","norm":"hash","schedule":{"kind":"ceil-log2"}}"#, "--d-range",
        "4..64", "--out", "json",
    ]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["verdict"], "strongly-polynomial");
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
    assert_eq!(v["header"]["config"]["family_spec"]["norm"], "hash");

    let o = run(&[
        "tract", "--family-spec", r#"{"family":"jacobi","schedule":{"kind":"constant","value":1}}"#, "--d-range",
        "4,8,16,32", "--eps-grid", "0.5,0.2",
    ]);
    let out = stdout(&o);
    assert!(out.contains("# verdict: not-polynomial"), "{out}");
    assert!(out.contains("n_eps_0.5,n_eps_0.2"));

    assert_eq!(run(&["tract", "--family-spec", "{\"family\":\"moon\"}"]).status.code(), Some(64));
    let few = r#"{"family":"jacobi","schedule":{"kind":"constant","value":1}}"#;
    assert_eq!(run(&["tract", "--family-spec", few, "--d-range", "4,8"]).status.code(), Some(2));
}

#[test]
fn verify_suite_passes() {
    let o = run(&["verify", "--cases", "8", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(csv_rows(&o).iter().all(|r| r[4] == "true"));
}
