use std::path::PathBuf;
use std::process::{Command, Output};

use roughpower::report::{Cell, Format, Report};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_roughpower"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("roughpower-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

#[test]
fn scan_abs_writes_rows_and_verdicts() {
    let dir = scratch("abs");
    let out = dir.join("abs.csv");
    let o = run(&["scan-abs", "--set", "q=2", "--set", "s=1.25,1.75", "--set", "n=2^12..2^15", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("row,")).count(), 8);
    assert_eq!(text.lines().filter(|l| l.starts_with("verdict,")).count(), 2);
    // one summary line per scan point
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 2);
    assert!(stdout.contains("converged") && stdout.contains("diverged"));
    let report = Report::parse(text.as_bytes(), Format::Csv).unwrap();
    assert_eq!(report.command, "scan-abs");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn q_equal_to_one_is_a_precondition_failure() {
    let o = run(&["scan-abs", "--set", "q=1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("(1, inf)"));
}

#[test]
fn unknown_parameters_and_commands_are_rejected() {
    assert_eq!(run(&["scan-abs", "--set", "bogus=1"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["norms", "--set", "kind=mystery"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_fails_before_compute() {
    let o = run(&["scan-heat", "--output", "/nonexistent-dir/report.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
}

#[test]
fn selftest_passes() {
    let o = run(&["selftest"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = Report::parse(&o.stdout, Format::Csv).unwrap();
    let passed = report.column("passed").unwrap();
    assert!(!report.rows.is_empty());
    assert!(report.rows.iter().all(|r| matches!(&r[passed], Cell::Text(t) if t == "pass")));
}

#[test]
fn json_output_carries_schema_and_metadata() {
    let o = run(&["norms", "--set", "s=0.5", "--set", "n=256,512,1024", "--format", "json", "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let value: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(value["schema_version"], 1);
    assert_eq!(value["metadata"]["seed"], 9);
    assert_eq!(value["metadata"]["bump_id"], "psi-ratio-v1");
    let report = Report::parse(&o.stdout, Format::Json).unwrap();
    assert_eq!(report.rows.len(), 3);
    assert_eq!(report.verdicts.len(), 1);
}

#[test]
fn config_sections_and_overrides() {
    let dir = scratch("config");
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, "[norms]\nkind = \"sobolev,besov-lp\"\ns = [0.5, 0.75]\nn = \"2^8\"\n[scan-abs]\nq = 3\n").unwrap();
    let o = run(&["norms", "--config", cfg.to_str().unwrap(), "--set", "s=0.25"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = Report::parse(&o.stdout, Format::Csv).unwrap();
    // two kinds, one s after the override, one resolution
    assert_eq!(report.rows.len(), 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn blow_up_exits_three_with_partial_report() {
    let dir = scratch("blowup");
    let out = dir.join("evolve.csv");
    let o = run(&[
        "evolve", "--set", "p=3", "--set", "profile=window", "--set", "delta=50", "--set", "dt=1e-5", "--set", "t_final=1e-3",
        "--set", "n=256", "--output", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let report = Report::parse(&std::fs::read(&out).unwrap(), Format::Csv).unwrap();
    assert!(!report.rows.is_empty());
    assert!(report.notes.iter().any(|n| n.contains("blow-up")));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["scan-nonlinear", "--set", "n=2^10..2^12", "--set", "s=2.6", "--set", "corpus_size=3", "--seed", "4", "--jobs", "1"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
}
