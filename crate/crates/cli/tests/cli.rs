//! End-to-end runs of the `irt` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn irt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irt")).args(args).current_dir(root()).output().expect("irt runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn valid_constraint_exits_zero() {
    let o = irt(&["solve", "fixtures/foobar.ehc"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("valid"));
}

#[test]
fn dumped_vc_matches_golden() {
    let o = irt(&["solve", "fixtures/foobar.ehc", "--dump-vc"]);
    let golden = std::fs::read_to_string(root().join("fixtures/foobar.vc")).unwrap();
    let out = stdout(&o);
    let vc = out.split("-- vc\n").nth(1).expect("vc section");
    assert_eq!(vc.trim(), golden.trim());
}

#[test]
fn invalid_constraint_exits_one() {
    assert_eq!(irt(&["solve", "fixtures/false.ehc"]).status.code(), Some(1));
}

#[test]
fn failed_side_condition_is_reported() {
    let o = irt(&["check", "corpus/d2.irt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FailedSideCondition"), "{}", stdout(&o));
}

#[test]
fn missing_file_exits_two() {
    assert_eq!(irt(&["check", "no/such/file.irt"]).status.code(), Some(2));
}

#[test]
fn verbatim_tick_fixture_is_refuted() {
    let o = irt(&["solve", "fixtures/tick.ehc"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("(forall (n Int) true (= n (+ n 1)))"), "{}", stdout(&o));
    assert_eq!(irt(&["solve", "fixtures/tick_fixed.ehc"]).status.code(), Some(0));
}

#[test]
fn json_report_carries_exit_code() {
    let o = irt(&["check", "corpus/incr.irt", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).expect("json");
    assert_eq!(v["exit_code"], 0);
    assert!(v["defs"].as_array().is_some_and(|d| !d.is_empty()));
}

#[test]
fn smt_scripts_are_written() {
    let dir = std::env::temp_dir().join(format!("irt-smt-{}", std::process::id()));
    let o = irt(&["check", "corpus/incr.irt", "--dump-smt", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let n = std::fs::read_dir(&dir).unwrap().count();
    std::fs::remove_dir_all(&dir).ok();
    assert!(n > 0);
}

#[test]
fn corpus_has_no_mismatches() {
    let o = irt(&["corpus", "corpus"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("11 files, 0 mismatches"));
}
