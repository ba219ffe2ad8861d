use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sympcalc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sympcalc"))
        .args(args)
        .current_dir(dir)
        .env("SOURCE_DATE_EPOCH", "0")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(sympcalc(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(sympcalc(&["--version"], dir.path()).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(sympcalc(&["no-such-command"], dir.path()).status.code(), Some(1));
    let out = sympcalc(&["flux", "--generator", "missing.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    fs::write(dir.path().join("bad.json"), r#"{"recipe": "zero", "grid": 16, "colour": 1}"#).unwrap();
    assert_eq!(sympcalc(&["flux", "--generator", "bad.json"], dir.path()).status.code(), Some(1));
}

#[test]
fn generator_queries_on_a_translation() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("t.json"),
        r#"{"recipe": "translation", "grid": 16, "steps": 2, "h": [0.0, 1.0]}"#,
    )
    .unwrap();
    let gen = ["--generator", "t.json"];

    let out = sympcalc(&[&["flux"][..], &gen].concat(), dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!((v["c1"].as_f64(), v["c2"].as_f64()), (Some(0.0), Some(1.0)));

    let v = json(&sympcalc(&[&["length", "--kappa", "2"][..], &gen].concat(), dir.path()));
    assert!((v["total"].as_f64().unwrap() - 4.0 * std::f64::consts::PI).abs() < 1e-12);

    // translation by (1, 0) with α = dθ₁: flux pairing and calibrator cancel
    let out = sympcalc(&[&["delta", "--path", "--basepoint", "1,2"][..], &gen].concat(), dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["delta"]["value"].as_f64().unwrap().abs() < 1e-12);
    assert!(v["delta_path"]["value"].as_f64().unwrap().abs() < 1e-9);

    let out = sympcalc(&[&["norm-infty", "--directions", "4"][..], &gen].concat(), dir.path());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn split_round_trips_a_form_file() {
    let dir = tempfile::tempdir().unwrap();
    let n = 16;
    let h = std::f64::consts::TAU / n as f64;
    let (mut a1, mut a2) = (Vec::new(), Vec::new());
    for j in 0..n {
        for k in 0..n {
            let (x, y) = (j as f64 * h, k as f64 * h);
            a1.push(0.5 + (x + y).cos());
            a2.push(-0.25 + (x + y).cos());
        }
    }
    let form = serde_json::json!({ "kind": "one_form", "grid": n, "data": [a1, a2] });
    fs::write(dir.path().join("form.json"), form.to_string()).unwrap();
    let out = sympcalc(&["split", "--form", "form.json", "--out", "split.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("split.json")).unwrap()).unwrap();
    assert!((v["c1"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((v["c2"].as_f64().unwrap() + 0.25).abs() < 1e-12);
    assert_eq!(v["potential"]["kind"], "scalar");

    // dα ≠ 0 is refused
    a1_not_closed(dir.path(), n);
    assert_eq!(sympcalc(&["split", "--form", "open.json"], dir.path()).status.code(), Some(1));
}

fn a1_not_closed(dir: &Path, n: usize) {
    let h = std::f64::consts::TAU / n as f64;
    let a1: Vec<f64> = (0..n * n).map(|i| ((i % n) as f64 * h).sin()).collect();
    let form = serde_json::json!({ "kind": "one_form", "grid": n, "data": [a1, vec![0.0; n * n]] });
    fs::write(dir.join("open.json"), form.to_string()).unwrap();
}

#[test]
fn divergence_writes_csv_json_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "divergence", "--family", "log-reciprocal", "--i", "2,4", "--grid", "32", "--out", "d.csv", "--svg", "d.svg",
    ];
    let out = sympcalc(&args, dir.path());
    let code = out.status.code().unwrap();
    assert!(code == 0 || code == 2, "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.lines().all(|l| l.starts_with("PASS ") || l.starts_with("FAIL ")), "{stderr}");
    assert_eq!(code == 2, stderr.contains("FAIL "));

    let csv = fs::read_to_string(dir.path().join("d.csv")).unwrap();
    assert!(csv.starts_with("config_hash,i,delta_tilde,"));
    assert_eq!(csv.lines().count(), 3);
    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("d.json")).unwrap()).unwrap();
    assert_eq!(meta["metadata"]["timestamp"], "0");
    assert_eq!(meta["metadata"]["grid"], 32);
    assert!(fs::read_to_string(dir.path().join("d.svg")).unwrap().starts_with("<svg"));

    let again = sympcalc(&args, dir.path());
    assert_eq!(again.status.code(), Some(code));
    assert_eq!(fs::read_to_string(dir.path().join("d.csv")).unwrap(), csv);
}

#[test]
fn failed_checks_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    // i = 2 is under-resolved on N = 32: Δ̃ is near zero and misses its closed form
    let cfg = serde_json::json!({ "family": "reciprocal", "i_list": [2, 3, 4], "grid": 32 });
    fs::write(dir.path().join("cfg.json"), cfg.to_string()).unwrap();
    let out = sympcalc(&["divergence", "--config", "cfg.json", "--out", "x.csv"], dir.path());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(2), "{stderr}");
    assert!(stderr.contains("FAIL closed_form_agreement"), "{stderr}");
    assert!(dir.path().join("x.csv").exists());
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = sympcalc(&["selftest"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}
