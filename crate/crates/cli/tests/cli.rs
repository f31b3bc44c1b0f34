use std::process::{Command, Output};

use serde_json::Value;

fn corrsist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corrsist")).args(args).output().expect("binary runs")
}

fn json_of(args: &[&str]) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = corrsist(&all);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn code(args: &[&str]) -> i32 {
    corrsist(args).status.code().expect("exit code")
}

#[test]
fn state_show() {
    let v = json_of(&["state", "show", "--state", "wmix:3/4;filter=0.1"]);
    assert_eq!(v["n_qubits"], 3);
    assert!(v["filter_probability"].as_f64().unwrap() > 0.0);
    assert!(v.get("amplitudes").is_none());
    let g = json_of(&["state", "show", "--state", "ghz:3"]);
    assert!((g["purity"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(g["amplitudes"].as_array().unwrap().len(), 8);
}

#[test]
fn tangles() {
    let v = json_of(&["tangle", "--state", "dicke4"]);
    assert!((v["tau1"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((v["tau2"].as_f64().unwrap() - 4.0 / 3.0).abs() > 1e-3);
    assert_eq!(v["per_cut"].as_object().unwrap().len(), 7);
    assert_eq!(code(&["tangle", "--state", "ghz:3"]), 2);
}

#[test]
fn detect() {
    let v = json_of(&["detect", "--state", "ghz:4;lose=1", "--property", "ge"]);
    assert_eq!(v["verdict"], "CertifiedAbsent");
    let v = json_of(&["detect", "--state", "w:3", "--property", "ge"]);
    assert_eq!(v["verdict"], "Detected");
    let v = json_of(&["detect", "--state", "ghz:2"]);
    assert_eq!(v["verdict"], "Detected");
}

#[test]
fn bell_max_and_member() {
    let args = ["bell", "max", "--ineq", "b16", "--state", "w:3", "--restarts", "8", "--seed", "3"];
    let v = json_of(&args);
    assert!((v["value"].as_f64().unwrap() - 4.72678).abs() < 1e-3);
    assert_eq!(v["violated"], true);
    assert_eq!(json_of(&args), v);

    let dir = tempfile::tempdir().unwrap();
    let battery = dir.path().join("battery.json");
    std::fs::write(&battery, v["battery"].to_string()).unwrap();
    let b = battery.to_str().unwrap();
    let m = json_of(&["bell", "member", "--model", "ns2", "--state", "w:3", "--battery", b]);
    assert_eq!(m["membership"], "Outside");
    let m = json_of(&["bell", "member", "--model", "local", "--state", "w:3", "--battery", b]);
    assert_eq!(m["membership"], "Outside");
    let m = json_of(&["bell", "member", "--model", "ns2", "--state", "wmix:3/4", "--battery", b]);
    assert_eq!(m["membership"], "Inside");

    std::fs::write(&battery, r#"{"parties": [[[0, 0, 2]], [[1, 0, 0]]]}"#).unwrap();
    assert_eq!(code(&["bell", "member", "--model", "local", "--state", "ghz:2", "--battery", b]), 2);
}

#[test]
fn bell_inequality_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chsh.ineq");
    std::fs::write(&path, "scenario 2 2 2\nbound 2\ncoef A0B0 1\ncoef A0B1 1\ncoef A1B0 1\ncoef A1B1 -1\n").unwrap();
    let v = json_of(&["bell", "max", "--ineq", path.to_str().unwrap(), "--state", "ghz:2", "--restarts", "4"]);
    assert!((v["value"].as_f64().unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-6);
    assert_eq!(code(&["bell", "max", "--ineq", "nosuch", "--state", "ghz:2"]), 2);
    assert_eq!(code(&["bell", "max", "--ineq", "chsh", "--state", "ghz:3"]), 2);
}

#[test]
fn steering() {
    let v = json_of(&["steer", "--state", "ghz:2"]);
    assert_eq!(v["verdict"], "Detected");
    let v = json_of(&["steer", "--state", "ghz:2", "--criterion", "linear3"]);
    assert_eq!(v["criterion"], "linear3");
    let v = json_of(&["steer", "--state", "ghz:3;lose=3"]);
    assert_eq!(v["verdict"], "CertifiedAbsent");
    assert_eq!(code(&["steer"]), 2);
    assert_eq!(code(&["steer", "--state", "ghz:2", "--criterion", "nope"]), 2);

    let g = json_of(&["steer", "genuine", "--state", "wmix:3/4", "--restarts", "4"]);
    assert!(g["value"].as_f64().unwrap() > 3.0);
    assert_eq!(g["verdict"], "Detected");
}

#[test]
fn persistency() {
    let v = json_of(&["persistency", "--state", "ghz:4", "--property", "ge"]);
    assert_eq!(v["lower"], 1);
    assert_eq!(v["upper"]["Certified"], 1);
    let v = json_of(&["persistency", "--state", "dicke4", "--property", "GE", "--no-symmetry"]);
    assert_eq!(v["lower"], 3);
    assert_eq!(code(&["persistency", "--state", "ghz:4", "--property", "xyz"]), 2);
}

#[test]
fn scan_output() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let run = |threads: &str, path: &std::path::Path| {
        let out = Command::new(env!("CARGO_BIN_EXE_corrsist"))
            .env("CORRSIST_THREADS", threads)
            .args(["scan", "--points", "21", "--both-signs", "--out", path.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(out.status.success());
        std::fs::read(path).unwrap()
    };
    let serial = run("1", &a);
    let parallel = run("4", &dir.path().join("b.csv"));
    assert_eq!(serial, parallel);
    let text = String::from_utf8(serial).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x0,x1,x2,x3,cond1,cond2,s1,s2,s3,pge_max,pe_max,ps_max,facet4_min");
    assert!(lines.all(|l| l.split(',').count() == 13));

    let v = json_of(&["scan", "--points", "3", "--range", "-1,1"]);
    assert_eq!(v.as_array().unwrap().len(), 7);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["state", "show", "--state", "ghz:3"]), 0);
    assert_eq!(code(&["state", "show", "--state", "nonsense:1"]), 2);
    assert_eq!(code(&["state", "show", "--state", "taumin:1,1,0,0"]), 2);
    assert_eq!(code(&["state", "show", "--state", "wmix:0;filter=1e-4"]), 3);
    assert_eq!(code(&["scan", "--points", "2", "--range", "0.9,1"]), 3);
    assert_eq!(code(&["scan", "--points", "1"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    let out = Command::new(env!("CARGO_BIN_EXE_corrsist"))
        .env("CORRSIST_THREADS", "0")
        .args(["scan", "--points", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn plain_text() {
    let out = corrsist(&["detect", "--state", "ghz:2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "verdict: Detected"));
}
