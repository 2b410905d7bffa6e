use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn ptlc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptlc-swap"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, name: &str, alpha: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, format!("scenario = \"facilitated\"\nprofile = \"toy\"\nseed = 1\n[overrides]\nalpha = \"{alpha}\"\n"))
        .unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn happy_run_exits_zero_and_writes_a_repeatable_trace() {
    let dir = TempDir::new().unwrap();
    for out in ["a.jsonl", "b.jsonl"] {
        let o = ptlc(
            &[
                "run",
                "--scenario",
                "happy",
                "--profile",
                "toy",
                "--seed",
                "1",
                "--out",
                out,
            ],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        assert!(stdout(&o).contains("outcome"));
    }
    let a = fs::read(dir.path().join("a.jsonl")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, fs::read(dir.path().join("b.jsonl")).unwrap());

    let o = ptlc(&["trace-diff", "a.jsonl", "b.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
}

#[test]
fn default_output_path_is_trace_jsonl() {
    let dir = TempDir::new().unwrap();
    let o = ptlc(&["run", "--profile", "toy", "-q"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
    assert!(dir.path().join("trace.jsonl").exists());
}

#[test]
fn ghost_scenarios_refund_atomically() {
    let dir = TempDir::new().unwrap();
    for scenario in ["maker_ghost", "taker_ghost"] {
        let o = ptlc(
            &["run", "--scenario", scenario, "--seed", "2", "-q"],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0), "{scenario}: {}", stdout(&o));
    }
}

#[test]
fn invalid_configuration_exits_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "1.5");
    let o = ptlc(&["run", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));

    let o = ptlc(&["run", "--config", "missing.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_flag_is_rejected() {
    let dir = TempDir::new().unwrap();
    let o = ptlc(&["run", "--bogus"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("trace.jsonl").exists());
}

#[test]
fn vectors_round_trip_and_corruption_names_the_line() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        ptlc(&["vectors", "generate", "v.txt"], dir.path())
            .status
            .code(),
        Some(0)
    );
    let o = ptlc(&["vectors", "verify", "v.txt"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let text = fs::read_to_string(dir.path().join("v.txt")).unwrap();
    // The second data line (file line 3) is the first toy presign.
    let corrupted = text.replacen(" R=07 s_star", " R=f7 s_star", 1);
    assert_ne!(corrupted, text);
    fs::write(dir.path().join("bad.txt"), corrupted).unwrap();
    let o = ptlc(&["vectors", "verify", "bad.txt"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("line 3: R:"), "{}", stdout(&o));
}

#[test]
fn trace_diff_reports_the_first_divergent_event() {
    let dir = TempDir::new().unwrap();
    for (seed, out) in [("1", "s1.jsonl"), ("2", "s2.jsonl")] {
        ptlc(
            &[
                "run",
                "--profile",
                "toy",
                "--seed",
                seed,
                "--out",
                out,
                "-q",
            ],
            dir.path(),
        );
    }
    let o = ptlc(&["trace-diff", "s1.jsonl", "s2.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stdout(&o).starts_with("traces diverge at event 1\n"),
        "{}",
        stdout(&o)
    );

    let low = write_config(dir.path(), "low.toml", "0.01");
    let high = write_config(dir.path(), "high.toml", "0.02");
    ptlc(
        &["run", "--config", &low, "--out", "low.jsonl", "-q"],
        dir.path(),
    );
    ptlc(
        &["run", "--config", &high, "--out", "high.jsonl", "-q"],
        dir.path(),
    );
    let o = ptlc(&["trace-diff", "low.jsonl", "high.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    // Payloads are hex: "1/100" and "1/50".
    assert!(
        text.contains("proposal_sent") && text.contains("312f313030") && text.contains("312f3530"),
        "{text}"
    );
}

#[test]
fn trace_diff_on_missing_file_is_bad_input() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        ptlc(&["trace-diff", "nope", "nope"], dir.path())
            .status
            .code(),
        Some(2)
    );
}
