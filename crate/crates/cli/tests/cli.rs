use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SLEEP: &str = "diff\n1.2\n2.4\n1.3\n1.3\n0.0\n1.0\n1.8\n0.8\n4.6\n1.4\n";

fn lqlr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lqlr")).args(args).output().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn lqlr_rejects_on_sleep_data() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "sleep.csv", SLEEP);
    let out = lqlr(&["test", "--method", "lqlr", "--q", "0.85", "--mu0", "0", "--alt", "greater", s(&f)]);
    assert!(out.status.success());
    let v = json(&out);
    for key in ["statistic", "q", "critical_value", "p_value", "reject", "method", "seed", "n"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["reject"], true);
    assert_eq!(v["q"], 0.85);
    assert_eq!(v["n"], 10);
}

#[test]
fn sign_test_p_value() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "sleep.csv", SLEEP);
    let v = json(&lqlr(&["test", "--method", "sign", "--mu0", "0", "--alt", "greater", s(&f)]));
    assert!((v["p_value"].as_f64().unwrap() - 0.001953125).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "sleep.csv", SLEEP);
    let out = lqlr(&["test", "--method", "t", "--alt", "greater", "--fail-on-reject", s(&f)]);
    assert_eq!(out.status.code(), Some(2));
    let out = lqlr(&["test", "--method", "t", "--alt", "greater", s(&f)]);
    assert_eq!(out.status.code(), Some(0));

    let empty = write(&dir, "empty.csv", "");
    let out = lqlr(&["test", s(&empty)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no observations"));

    let bad = write(&dir, "bad.csv", "1.0\n2.0\noops\n");
    let out = lqlr(&["test", "--method", "t", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    assert_eq!(lqlr(&["test", "--no-such-flag", s(&f)]).status.code(), Some(1));
    assert_eq!(lqlr(&["--help"]).status.code(), Some(0));
}

#[test]
fn seeded_output_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let values: String = (1..=40).map(|i| format!("{:.4}\n", (i as f64 * 1.7).sin() + 0.3)).collect();
    let f = write(&dir, "values.csv", &values);
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let r = lqlr(&["test", "--q", "adaptive", "--bootstrap", "200", "--seed", "9", "--out", s(out), s(&f)]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn select_q_on_sleep_data() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "sleep.csv", SLEEP);
    let v = json(&lqlr(&["select-q", "--format", "json", s(&f)]));
    assert!(v["q_hat"].as_f64().unwrap() < 1.0);
    assert_eq!(v["curve"].as_array().unwrap().len(), 11);

    let out = lqlr(&["select-q", "--grid", "0.7", s(&f)]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("0.7,"));
}

#[test]
fn critical_value_reports_settings() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "sleep.csv", SLEEP);
    let v = json(&lqlr(&["critical-value", "--sigma", "1", "--bootstrap", "300", "--seed", "3", s(&f)]));
    let row = &v[0];
    assert!(row["critical_value"].as_f64().unwrap() > 0.0);
    assert_eq!(row["bootstrap"], 300);
    assert_eq!(row["seed"], 3);
}

fn spec_json(methods: &str) -> String {
    format!(
        r#"{{"family": {{"kind": "normal_location_scale"}}, "theta_null": 0.0,
            "contamination": {{"type": "normal", "variance": 50.0}}, "eps_grid": [0.0, 0.1], "n": 20,
            "methods": {methods}, "M": 100, "base_seed": 5, "B": 100}}"#
    )
}

#[test]
fn power_curve_writes_csv_and_json_mirror() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "spec.json", &spec_json(r#"[{"method": "sign"}, {"method": "lqlr", "q": 0.8}]"#));
    let out_path = dir.path().join("result.csv");
    let out = lqlr(&["power-curve", "--out", s(&out_path), s(&spec)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = lqlr::simharness::rows_from_csv(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(rows.len(), 2 * 2 * 2);
    let mirror: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("result.json")).unwrap()).unwrap();
    assert_eq!(mirror["spec"]["n"], 20);
    assert!(String::from_utf8_lossy(&out.stdout).contains("estimate"));
}

#[test]
fn power_curve_names_bad_field() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "spec.json", &spec_json(r#"[{"method": "sign"}, {"method": "bogus"}]"#));
    let out = lqlr(&["power-curve", s(&spec)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("methods[1]"), "{err}");
}

#[test]
fn surface_tables() {
    let out = lqlr(&["surface", "--eps-grid", "0,0.05,0.1,0.2", "--q-grid", "0.8,1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    let at_one: Vec<f64> = rows.iter().filter(|r| r[1] == 1.0).map(|r| r[2]).collect();
    assert!((at_one[0] - 1.0).abs() < 1e-8);
    assert!(at_one.windows(2).all(|w| w[1] > w[0]));

    let out = lqlr(&["surface", "--kind", "eigen", "--eps-grid", "0.1", "--q-grid", "1", "--draws", "20000"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 3);
}

#[test]
fn demo_sleep_table() {
    let out = lqlr(&["demo-sleep", "--delta9", "4.6,16", "--bootstrap", "400", "--format", "json"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!(v[0]["p_t"].as_f64().unwrap() < 0.05);
    assert!(v[1]["p_t"].as_f64().unwrap() > 0.05);
    assert!(v[1]["p_lqlr"].as_f64().unwrap() < 0.05);
    assert_eq!(lqlr(&["demo-sleep", "--delta9", "20"]).status.code(), Some(1));
}
