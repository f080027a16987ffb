//! The command-line tool end to end.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dirac-fock"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin().args(args).current_dir(cwd).output().unwrap()
}

#[test]
fn lists_bundled_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["--list-scenarios"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["identities", "flat_rest_wave", "fock_m6", "cfl_violation", "curved_static"] {
        assert!(text.contains(name), "{name} missing from\n{text}");
    }
}

#[test]
fn fock_run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["run", "fock_m6", "--out", "r"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let report = fs::read_to_string(dir.path().join("r/report.txt")).unwrap();
    assert!(report.contains("PASS fock.car_report.mixed value=0.0e0 == 0"), "{report}");
    assert!(report.ends_with("RESULT PASS (exit 0)\n"));
    for line in fs::read_to_string(dir.path().join("r/report.jsonl")).unwrap().lines() {
        serde_json::from_str::<serde_json::Value>(line).unwrap();
    }
    let csv = fs::read_to_string(dir.path().join("r/timeseries.csv")).unwrap();
    assert_eq!(csv, "step,time,norm,flux,max_div_j\n");
}

#[test]
fn evolve_writes_time_series() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["run", "flat_rest_wave", "--suite", "evolve", "--out", "r"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = fs::read_to_string(dir.path().join("r/timeseries.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1002);
    assert!(csv.lines().nth(1).unwrap().starts_with("0,0e0,1e0,"));
}

#[test]
fn cfl_violation_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["run", "cfl_violation", "--out", "r"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let report = fs::read_to_string(dir.path().join("r/report.txt")).unwrap();
    assert!(report.contains("ABORT evolve"));
}

#[test]
fn bad_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["run", "no_such_scenario"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["run", "identities", "--suite", "bogus"], dir.path()).status.code(), Some(2));
    fs::write(dir.path().join("bad.toml"), "[chart]\nfamily = \"flat\"\n").unwrap();
    assert_eq!(run(&["run", "bad.toml"], dir.path()).status.code(), Some(2));
}

#[test]
fn failed_check_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("tight.toml"),
        "name = \"tight\"\nsuites = [\"current\"]\n\n[chart]\nfamily = \"minkowski\"\nnodes = [8, 1, 1]\n\
         length = [1.0, 1.0, 1.0]\n\n[current]\nsamples = 1000\n\n[tolerances]\nclosed_form = 1e-300\n",
    )
    .unwrap();
    let out = run(&["run", "tight.toml", "--out", "r"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL current.timelike_report.closed_form_rel_diff"));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for o in ["a", "b"] {
        let out = run(&["run", "identities", "--seed", "99", "--out", o], dir.path());
        assert_eq!(out.status.code(), Some(0));
    }
    for f in ["report.txt", "report.jsonl", "timeseries.csv"] {
        assert_eq!(fs::read(dir.path().join("a").join(f)).unwrap(), fs::read(dir.path().join("b").join(f)).unwrap());
    }
    let text = fs::read_to_string(dir.path().join("a/report.txt")).unwrap();
    assert!(text.starts_with("# scenario identities seed 99\n"));
}

#[test]
fn fock_subcommand_applies_operators() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("v.txt"), "# two particles\n[1 2] 1 0\n").unwrap();
    fs::write(dir.path().join("w.txt"), "[1] 0 1\n").unwrap();
    let out = run(&["fock", "v.txt", "--op", "annihilate:2", "--pair", "w.txt"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "[1] -1 0\n# pairing 0 1\n");
    let out = run(&["fock", "v.txt", "--op", "c+0", "--op", "c-0"], dir.path());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "[1 2] 1 0\n");
    assert_eq!(run(&["fock", "v.txt", "--op", "create:9", "--modes", "4"], dir.path()).status.code(), Some(2));
}
