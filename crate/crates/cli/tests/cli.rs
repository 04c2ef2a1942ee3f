use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const HEAD_ON: &str = r#"{"particles":[{"x":0,"m":1,"v":1,"theta":0},{"x":2,"m":1,"v":-1,"theta":0}]}"#;
const CONGESTION: &str = r#"{"particles":[{"x":0,"m":1,"v":0,"theta":1},{"x":10,"m":1,"v":1,"theta":0}]}"#;

fn sticky(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sticky"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .map(Result::unwrap)
        .collect()
}

fn column(path: &Path, name: &str) -> usize {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.headers().unwrap().iter().position(|h| h == name).unwrap()
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn head_on_pair_has_one_event_at_one() {
    let tmp = TempDir::new().unwrap();
    let inst = write(tmp.path(), "i.json", HEAD_ON);
    let out = tmp.path().join("out");
    let o = sticky(&["simulate", inst.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let events = rows(&out.join("events.csv"));
    assert_eq!(events.len(), 1);
    assert_eq!(f(&events[0][0]), 1.0);
    assert_eq!(&events[0][1], "0-1");
    assert_eq!(f(&events[0][5]), 0.0);
    assert!(out.join("manifest.json").exists());
}

#[test]
fn single_particle_has_no_events() {
    let tmp = TempDir::new().unwrap();
    let inst = write(tmp.path(), "i.json", r#"{"particles":[{"x":0,"m":2,"v":1,"theta":-1}]}"#);
    let out = tmp.path().join("out");
    let o = sticky(&["simulate", inst.to_str().unwrap(), "--t-end", "2", "--samples", "3", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(rows(&out.join("events.csv")).is_empty());
    let traj = rows(&out.join("trajectory.csv"));
    assert_eq!(traj.len(), 3);
    // x(2) = 0 + 2 - 2
    assert_eq!(f(&traj[2][2]), 0.0);
}

#[test]
fn zero_mass_is_an_input_error() {
    let tmp = TempDir::new().unwrap();
    let inst = write(tmp.path(), "i.json", r#"{"particles":[{"x":0,"m":0,"v":0,"theta":0}]}"#);
    let o = sticky(&["simulate", inst.to_str().unwrap(), "--out-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("mass at index 0"), "{err}");
}

#[test]
fn unknown_key_is_an_input_error() {
    let tmp = TempDir::new().unwrap();
    let inst = write(tmp.path(), "i.json", "{\n\"particles\": [],\n\"speed\": 3\n}");
    let o = sticky(&["simulate", inst.to_str().unwrap(), "--out-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown field"));
}

#[test]
fn gvp_matches_and_refuses_increasing_accelerations() {
    let tmp = TempDir::new().unwrap();
    let inst = write(tmp.path(), "i.json", HEAD_ON);
    let out = tmp.path().join("out");
    let o = sticky(&["gvp", inst.to_str().unwrap(), "--times", "0.5,1.5,4", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let table = rows(&out.join("gvp.csv"));
    assert_eq!(table.len(), 3);
    assert!(table.iter().all(|r| &r[3] == "MATCH"));

    let bad = write(
        tmp.path(),
        "bad.json",
        r#"{"particles":[{"x":0,"m":1,"v":0,"theta":0},{"x":1,"m":1,"v":0,"theta":1}]}"#,
    );
    let o = sticky(&["gvp", bad.to_str().unwrap(), "--times", "1", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("overtaken") && err.contains("not non-increasing"), "{err}");
}

#[test]
fn gas_reports_jumps_and_congestion() {
    let tmp = TempDir::new().unwrap();
    let inst = write(tmp.path(), "i.json", CONGESTION);
    let out = tmp.path().join("out");
    let o = sticky(&["gas", inst.to_str().unwrap(), "--window", "0.5:7", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let res = out.join("residuals.csv");
    let (space, pass, nj) = (column(&res, "space"), column(&res, "pass"), column(&res, "residual_without_jump"));
    let table = rows(&res);
    assert!(table.iter().all(|r| &r[pass] == "true"));
    assert!(table
        .iter()
        .filter(|r| &r[space] == "velocity")
        .all(|r| f(&r[nj]).abs() > 1e-3));

    let cong = rows(&out.join("congestion.csv"));
    assert_eq!(cong.len(), 1);
    assert_eq!(f(&cong[0][0]), 1.0);
    assert_eq!(f(&cong[0][2]), 1.0);
    assert!((f(&cong[0][5]) - 0.25).abs() <= 1e-12);
    assert!((f(&cong[0][4]) - 0.5).abs() <= 1e-12);
}

#[test]
fn gas_window_past_horizon_is_an_input_error() {
    let tmp = TempDir::new().unwrap();
    let inst = write(tmp.path(), "i.json", CONGESTION);
    let o = sticky(&["gas", inst.to_str().unwrap(), "--window", "1:5", "--t-end", "2", "--out-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = sticky(&["gas", inst.to_str().unwrap(), "--window", "3:1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dermoune_passes_on_the_congestion_instance() {
    let tmp = TempDir::new().unwrap();
    let inst = write(tmp.path(), "i.json", CONGESTION);
    let out = tmp.path().join("out");
    let o = sticky(&["dermoune", inst.to_str().unwrap(), "--times", "0.5,2,6", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let table = rows(&out.join("dermoune.csv"));
    assert_eq!(table.len(), 3);
    assert!(table.iter().all(|r| &r[5] == "true"));
}

#[test]
fn fuzz_reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = sticky(&["fuzz", "--count", "30", "--seed", "5", "--n-max", "6", "--out-dir", dir.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    }
    for name in ["fuzz_summary.csv", "manifest.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    assert_eq!(rows(&a.join("fuzz_summary.csv")).len(), 30);
}

#[test]
fn fuzz_count_zero_is_a_usage_error() {
    let o = sticky(&["fuzz", "--count", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn injected_fault_fails_with_reproductions() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let o = sticky(&["fuzz", "--count", "10", "--seed", "1", "--inject-fault", "0.01", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let summary = rows(&out.join("fuzz_summary.csv"));
    let failed: Vec<_> = summary.iter().filter(|r| &r[3] == "fail").collect();
    assert!(!failed.is_empty());
    for r in failed {
        let repro = out.join(format!("failures/instance_{}.json", &r[0]));
        let text = fs::read_to_string(&repro).unwrap();
        assert!(text.contains("\"particles\""));
        // the echoed instance must itself be a valid input
        let o = sticky(&["simulate", repro.to_str().unwrap(), "--out-dir", tmp.path().join("re").to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
}
