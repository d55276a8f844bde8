//! The binary end to end: exit codes, reports on disk and replay.

use std::path::PathBuf;
use std::process::{Command, Output};

fn prosite(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prosite")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("prosite-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn fixtures_are_listed() {
    let out = prosite(&["fixtures", "list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["b2", "bg2", "bz3"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{text}");
    }
}

#[test]
fn check_then_replay() {
    let path = scratch("bg2-towers.txt");
    let p = path.to_str().unwrap();
    let out = prosite(&["check", "bg2", "--suite", "towers", "--seed", "3", "--budget", "4", "--out", p]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let replayed = prosite(&["replay", p]);
    assert_eq!(replayed.status.code(), Some(0));
    assert!(String::from_utf8(replayed.stdout).unwrap().starts_with("agrees"));
    let wider = prosite(&["replay", p, "--budget", "6"]);
    assert_eq!(wider.status.code(), Some(0));
}

#[test]
fn failing_checks_exit_with_one() {
    let path = scratch("b2-admissibility.txt");
    let out = prosite(&["check", "b2", "--suite", "admissibility", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("admissibility.admissible.disjoint FAIL"));
}

#[test]
fn errors_exit_with_two() {
    assert_eq!(prosite(&["check", "b2", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(prosite(&["check", "no-such-site"]).status.code(), Some(2));
    let path = scratch("tampered.txt");
    let p = path.to_str().unwrap();
    prosite(&["check", "b2", "--suite", "towers", "--budget", "2", "--out", p]);
    let text = std::fs::read_to_string(&path).unwrap().replacen("PASS", "FAIL", 1);
    std::fs::write(&path, text).unwrap();
    assert_eq!(prosite(&["replay", p]).status.code(), Some(2));
}

#[test]
fn site_files_report_parse_positions() {
    let path = scratch("broken.site");
    std::fs::write(&path, "[site]\nname = broken\n[objects]\nA\n[morphisms]\nf : A -> B\n").unwrap();
    let out = prosite(&["check", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("6:10"), "{err}");
}
