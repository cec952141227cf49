use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
epsilon = 0.05
seed = 5
[domain]
cells = 48
[solver]
max_iterations = 20
[starts]
random = 1
[onset]
epsilons = [1e-2]
cells = 16
[sweep]
epsilons = [0.05]
[interpolation]
fields = 3
sharpness_epsilons = [0.1]
"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thinfilm"))
        .args(args)
        .output()
        .unwrap()
}

fn config(dir: &Path) -> String {
    let p = dir.join("small.toml");
    std::fs::write(&p, SMALL).unwrap();
    p.to_str().unwrap().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn kernels_check_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k");
    let o = run(&["--out", s(&out), "check", "kernels"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("results.json").exists());
    assert!(out.join("table.csv").exists());
}

#[test]
fn minimize_then_evaluate_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    let out = dir.path().join("min");
    let o = run(&[
        "--config",
        &cfg,
        "--out",
        s(&out),
        "--seed",
        "2",
        "minimize",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let snap = out.join("final.field");
    assert!(snap.exists());
    let csv = std::fs::read_to_string(out.join("table.csv")).unwrap();
    assert!(csv.starts_with("iteration,f_eps"));
    let eout = dir.path().join("energy");
    let o = run(&[
        "--out",
        s(&eout),
        "energy",
        s(&snap),
        "--stray",
        "--range",
        "0.2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(eout.join("results.json")).unwrap()).unwrap();
    assert_eq!(json["experiment"], "energy");
    assert!(json["checks"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["claim"] == "G_eps >= 0"));
}

#[test]
fn onset_scan_table_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    let tables: Vec<Vec<u8>> = ["a", "b"]
        .iter()
        .map(|n| {
            let out = dir.path().join(n);
            let o = run(&[
                "--config",
                &cfg,
                "--out",
                s(&out),
                "--threads",
                "2",
                "onset-scan",
            ]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
            std::fs::read(out.join("table.csv")).unwrap()
        })
        .collect();
    assert_eq!(tables[0], tables[1]);
}

#[test]
fn failing_check_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    let out = dir.path().join("sweep");
    // a small disk cannot reach |F| >= 0.01 |Omega|
    let o = run(&["--config", &cfg, "--out", s(&out), "sweep"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("results.json")).unwrap()).unwrap();
    let failing: Vec<_> = json["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["verdict"] == "fail")
        .collect();
    assert!(!failing.is_empty());
    assert!(failing
        .iter()
        .filter(|c| c["claim"].as_str().unwrap().starts_with('|'))
        .all(|c| c["snapshot"].is_string()));
}

#[test]
fn invalid_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    std::fs::write(&p, "epsilon = 3.0").unwrap();
    let o = run(&[
        "--config",
        s(&p),
        "--out",
        s(&dir.path().join("x")),
        "minimize",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["energy", s(&dir.path().join("missing.field"))]);
    assert_eq!(o.status.code(), Some(2));
}
