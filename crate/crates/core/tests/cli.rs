//! End-to-end runs of the `anarchy` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anarchy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn sample(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances");
    root.join(name).display().to_string()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn validate_accepts_samples() {
    for name in ["cheap_then_steep.json", "two_branches.json", "multicast_star.json"] {
        let out = run(&["validate", &sample(name)]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn validate_names_the_offending_entry() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let text = std::fs::read_to_string(sample("cheap_then_steep.json"))
        .unwrap()
        .replace(r#""10", "10", "10", "10""#, r#""10", "3", "10", "10""#);
    std::fs::write(&path, text).unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("costs.bottom[2]"), "{err}");
}

#[test]
fn missing_file_is_an_error() {
    let out = run(&["opt", "/nonexistent/instance.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error:"));
}

#[test]
fn poa_on_the_two_edge_example() {
    let out = run(&["poa", &sample("cheap_then_steep.json")]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let row = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[5..10], ["1", "1", "1", "12", "true"]);
}

#[test]
fn gwtf_trace_lists_every_arrival() {
    let out = run(&["gwtf", &sample("cheap_then_steep.json"), "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("q,k_q,path\n1,1,top\n2,1,top\n3,1,top\n"), "{text}");
    assert!(text.contains("1,1,1,4,true"), "{text}");
}

#[test]
fn multicast_reports_all_bounds() {
    let out = run(&["multicast", &sample("multicast_star.json"), "--best-error"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for check in ["known-set", "unknown-set", "robustness"] {
        assert!(text.contains(check), "{text}");
    }
    assert!(text.contains("c->a d->d"), "{text}");
}

#[test]
fn braess_beats_four() {
    let out = run(&["braess", "--k", "100"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("101/3"));
}

#[test]
fn experiment_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ["spg", "multicast"] {
        let path = dir.path().join(format!("{kind}.csv"));
        let out = run(&["experiment", kind, "--seeds", "2", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let mut reader = csv::Reader::from_path(&path).unwrap();
        assert_eq!(reader.headers().unwrap().len(), 14);
        let rows: Vec<_> = reader.records().map(Result::unwrap).collect();
        assert!(!rows.is_empty());
        assert!(rows.iter().all(|r| &r[9] == "true"), "{kind}");
    }
}
