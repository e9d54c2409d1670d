use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dropmor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dropmor")).args(args).output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn reduce_demo(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["reduce", "--bench", "demo", "--nfreq", "10", "--nparam", "10", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    dropmor(&args)
}

#[test]
fn demo_reduces_to_order_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("demo");
    let o = reduce_demo(&out, &["--tol", "1e-8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let run = json(&out.join("run.json"));
    assert_eq!(run["r"], 2);
    assert_eq!(run["system"]["n"], 3);
    assert!(out.join("reduced.toml").exists());
    let svd = fs::read_to_string(out.join("svd.csv")).unwrap();
    assert!(svd.starts_with("index,sv_left,sv_right\n"));

    let o = dropmor(&["sweep", "--bench", "demo", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = json(&out.join("summary.json"));
    assert_eq!(summary["order"], 2);
    assert_eq!(summary["points"], 100 * 20);
    assert!(summary["max_abs"].as_f64().unwrap() <= 1e-10, "{summary}");
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2000);
}

#[test]
fn delay_fixed_order_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("delay");
    let o = dropmor(&["reduce", "--bench", "delay", "--size", "60", "--order", "6", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let manifest: toml::Value = toml::from_str(&fs::read_to_string(out.join("reduced.toml")).unwrap()).unwrap();
    assert_eq!(manifest["n"].as_integer(), Some(6));
    assert_eq!(manifest["k"].as_array().unwrap().len(), 3);
}

#[test]
fn self_sweep_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src");
    fs::create_dir(&src).unwrap();
    let out = dir.path().join("out");
    // reduce once to obtain a manifest of the demo system, then sweep the manifest against itself
    let o = reduce_demo(&src, &["--order", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let manifest = src.join("reduced.toml");
    let o = dropmor(&[
        "sweep",
        "--manifest",
        manifest.to_str().unwrap(),
        "--reduced",
        manifest.to_str().unwrap(),
        "--pbox=-10:10",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(json(&out.join("summary.json"))["max_abs"].as_f64(), Some(0.0));
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full");
    let o = reduce_demo(&full, &["--order", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = dropmor(&["verify", "--bench", "demo", "--nfreq", "10", "--nparam", "10", "--out", full.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}{}", String::from_utf8_lossy(&o.stdout), stderr(&o));
    assert_eq!(json(&full.join("verify.json"))["passed"], true);

    let cut = dir.path().join("cut");
    let o = reduce_demo(&cut, &["--order", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = dropmor(&["verify", "--bench", "demo", "--nfreq", "10", "--nparam", "10", "--out", cut.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("FAILED") && stdout.contains("point "), "{stdout}");
    let report = json(&cut.join("verify.json"));
    assert_eq!(report["passed"], false);
    assert_eq!(report["interpolation"]["points"].as_array().unwrap().len(), 10);
}

#[test]
fn errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let missing = dir.path().join("nowhere.toml");
    let o = dropmor(&["reduce", "--manifest", missing.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nowhere.toml"), "{}", stderr(&o));

    let o = dropmor(&["sweep", "--bench", "demo", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("reduced.toml"), "{}", stderr(&o));

    // a reduced model without the demo's parameter
    let o = dropmor(&["reduce", "--bench", "delay", "--size", "20", "--order", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = dropmor(&["sweep", "--bench", "demo", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("(m, p, d)"), "{}", stderr(&o));

    let o = dropmor(&["reduce", "--bench", "demo", "--order", "2", "--tol", "1e-8"]);
    assert_eq!(o.status.code(), Some(2));
    let o = dropmor(&["reduce", "--bench", "nosuch", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = reduce_demo(&a, &["--tol", "1e-6", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let cfg = dir.path().join("run.json");
    let text = format!(
        r#"{{"bench": "demo", "nfreq": 10, "nparam": 10, "tol": 1e-6, "seed": 7, "out": {:?}}}"#,
        b.to_str().unwrap()
    );
    fs::write(&cfg, text).unwrap();
    let o = dropmor(&["reduce", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fs::read(a.join("svd.csv")).unwrap(), fs::read(b.join("svd.csv")).unwrap());
    let (ra, rb) = (json(&a.join("run.json")), json(&b.join("run.json")));
    assert_eq!(ra["r"], rb["r"]);
    assert_eq!(ra["basis"], rb["basis"]);
}

#[test]
fn runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in ["one", "two"] {
        let out = dir.path().join(run);
        let o = reduce_demo(&out, &["--order", "2"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let o = dropmor(&["sweep", "--bench", "demo", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        outputs.push((fs::read(out.join("svd.csv")).unwrap(), fs::read(out.join("sweep.csv")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}
