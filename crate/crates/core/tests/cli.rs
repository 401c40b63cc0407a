mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::{with_field, DECOUPLED};
use serde_json::Value;

fn shockfit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shockfit"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn undamped() -> String {
    with_field(&with_field(DECOUPLED, "f", "0"), "g", "0")
}

#[test]
fn validate_reports_and_exits() {
    let dir = tempfile::tempdir().unwrap();
    let ok = config(dir.path(), "ok.json", DECOUPLED);
    assert_eq!(shockfit(dir.path(), &["validate", &ok]).status.code(), Some(0));
    assert_eq!(json(&dir.path().join("manifest.json"))["exit_status"], 0);

    let bad = config(dir.path(), "bad.json", &with_field(DECOUPLED, "Psi", "v^3/3"));
    let out = shockfit(dir.path(), &["validate", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("compatibility_density_v"));
    let report = json(&dir.path().join("validation.json"));
    assert_eq!(report["compatibility_density_v"]["status"], "fail");
    assert_eq!(json(&dir.path().join("manifest.json"))["exit_status"], 2);

    let broken = config(dir.path(), "broken.json", "{\"lambda\": ");
    assert_eq!(shockfit(dir.path(), &["validate", &broken]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let ok = config(dir.path(), "ok.json", DECOUPLED);
    assert_eq!(shockfit(dir.path(), &["frobnicate"]).status.code(), Some(4));
    assert_eq!(shockfit(dir.path(), &["compare", &ok]).status.code(), Some(4));
    assert_eq!(shockfit(dir.path(), &["sweep", &ok, "--eps", "0.1"]).status.code(), Some(4));
    assert_eq!(shockfit(dir.path(), &["sweep", &ok, "--eps", "0.1,0.2,0.05"]).status.code(), Some(4));
    let missing = dir.path().join("missing.json");
    assert_eq!(shockfit(dir.path(), &["solve", missing.to_str().unwrap()]).status.code(), Some(4));
    assert_eq!(shockfit(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.json", DECOUPLED);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert_eq!(shockfit(d, &["solve", &cfg]).status.code(), Some(0));
        assert_eq!(shockfit(d, &["reference", &cfg, "--cells", "200"]).status.code(), Some(0));
    }
    for name in ["shocks.csv", "fields.csv", "fronts.csv", "snapshot_000.csv"] {
        let (x, y) = (fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());
        assert!(!x.is_empty() && x == y, "{name}");
    }
}

#[test]
fn undamped_compare_has_no_correction() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.json", &undamped());
    let out = shockfit(dir.path(), &["compare", &cfg, "--eps", "0.1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("compare.json"));
    assert_eq!(report["pass"], true);
    let shocks = fs::read_to_string(dir.path().join("shocks.csv")).unwrap();
    let mut lines = shocks.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let cols: Vec<usize> = ["s1_minus", "D1_minus", "s1_plus", "D1_plus"]
        .iter()
        .map(|c| header.iter().position(|h| h == c).unwrap())
        .collect();
    for line in lines {
        let row: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!(cols.iter().all(|&c| row[c] == 0.0), "{line}");
    }
}

#[test]
fn exact_sweep_slope_and_failed_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.json", DECOUPLED);
    let eps = ["--eps", "0.1,0.05,0.025"];
    let out = shockfit(dir.path(), &["--workers", "2", "sweep", &cfg, eps[0], eps[1], "--exact", "0.5,2.5,1"]);
    assert_eq!(out.status.code(), Some(0));
    let slope = json(&dir.path().join("sweep.json"))["slope"].as_f64().unwrap();
    assert!((1.95..=2.05).contains(&slope), "{slope}");
    assert_eq!(fs::read_to_string(dir.path().join("sweep.csv")).unwrap().lines().count(), 4);

    // a wrong damping rate leaves a first-order error
    let out = shockfit(dir.path(), &["sweep", &cfg, eps[0], eps[1], "--exact", "0.5,2.5,3"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&dir.path().join("sweep.json"))["pass"], false);
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let narrow = DECOUPLED.replace("[-0.5, 2.0]", "[-0.2, 0.6]");
    let cfg = config(dir.path(), "c.json", &narrow);
    let out = shockfit(dir.path(), &["reference", &cfg]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
