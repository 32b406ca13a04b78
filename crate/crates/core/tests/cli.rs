use std::process::{Command, Output};

use superres::sweep::{SweepRecord, CSV_HEADER};

fn superres(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superres"))
        .args(args)
        .output()
        .expect("spawn superres")
}

fn column(line: &str, i: usize) -> f64 {
    line.split(',').nth(i).unwrap().parse().unwrap()
}

#[test]
fn fig1c_endpoints() {
    let out = superres(&["figure", "fig1c"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 400);
    // coherence line: gamma from 0 to 1
    assert!((column(rows[0], 6) - 0.25).abs() < 1e-12);
    assert!((column(rows[199], 6) - 0.0055934187015444).abs() < 1e-12);
    // concurrence line: C from 0 to C_max
    assert!((column(rows[200], 6) - 0.0055934187015444).abs() < 1e-12);
    assert!((column(rows[399], 4) - 0.14916019176262738).abs() < 1e-14);
    assert!((column(rows[399], 6) - 0.25).abs() < 1e-12);
}

#[test]
fn json_output_parses() {
    let out = superres(&[
        "qfim",
        "--s-steps",
        "3",
        "--n-steps",
        "2",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let recs: Vec<SweepRecord> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(recs.len(), 6);
    assert!(recs.iter().all(|r| r.h_s.is_some()));
}

#[test]
fn verify_passes_with_defaults() {
    let out = superres(&["verify"]);
    assert_eq!(out.status.code(), Some(0));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.starts_with("PASS"), "{stderr}");
}

#[test]
fn out_of_reach_concurrence_is_marked() {
    let out = superres(&[
        "single",
        "--nuisance",
        "concurrence",
        "--s-min",
        "0.3",
        "--s-max",
        "0.3",
        "--s-steps",
        "1",
        "--n-steps",
        "3",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let statuses: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap())
        .collect();
    assert_eq!(statuses, ["ok", "out_of_reach", "out_of_reach"]);
}

#[test]
fn exit_codes() {
    assert_eq!(superres(&["single", "--phi", "0.5"]).status.code(), Some(2));
    assert_eq!(
        superres(&["single", "--sigma", "-1"]).status.code(),
        Some(2)
    );
    assert_eq!(superres(&["figure", "fig9"]).status.code(), Some(2));
    assert_eq!(
        superres(&["verify", "--fd-step", "1e-2"]).status.code(),
        Some(2)
    );
    assert_eq!(
        superres(&["single", "--out", "/nonexistent/dir/x.csv"])
            .status
            .code(),
        Some(4)
    );
}

#[test]
fn writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    let out = superres(&["figure", "fig1a", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1 + 200 * 200);
}
