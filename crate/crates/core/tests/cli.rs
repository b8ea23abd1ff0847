// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::Command;

fn nbpdn() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nbpdn"))
}

fn run_desk(dir: &Path) {
    let st = nbpdn()
        .args(["run", "--preset", "desk", "--trials", "2", "--seed", "5", "--out"])
        .arg(dir)
        .status()
        .unwrap();
    assert!(st.success());
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_desk(a.path());
    run_desk(b.path());
    for f in ["traces.csv", "metrics.csv"] {
        let x = fs::read(a.path().join(f)).unwrap();
        let y = fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f}");
        assert!(String::from_utf8(x).unwrap().starts_with("# config_sha256="));
    }
    let meta = |d: &Path| -> serde_json::Value {
        let mut v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(d.join("metadata.json")).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("created_unix");
        v
    };
    assert_eq!(meta(a.path()), meta(b.path()));
}

#[test]
fn adversarial_verify_exits_one() {
    let out = nbpdn()
        .args(["verify", "--trials", "5", "--recurrence-trials", "0", "--adversarial"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = nbpdn()
        .args(["verify", "--trials", "10", "--recurrence-trials", "1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(report["lemmas"].as_array().unwrap().len(), 8);
}

#[test]
fn zero_trials_warns_and_succeeds() {
    let out = nbpdn().args(["verify", "--trials", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no trials"));
}

#[test]
fn bad_config_gives_structured_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"scenario": "x", "instance": {"m": 4}}"#).unwrap();
    let out = nbpdn().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "config");

    let out = nbpdn().args(["run", "--preset", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_and_rip_print_json() {
    let out = nbpdn()
        .args(["bounds", "--m", "8", "--n", "10", "--ensemble", "frame", "--s", "1", "--lambda", "0.5,0.9"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.is_object());

    let out = nbpdn()
        .args(["rip", "--m", "6", "--n", "8", "--order", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["delta"].as_f64().unwrap() >= 0.0);
}
