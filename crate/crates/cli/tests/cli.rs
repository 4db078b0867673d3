use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mld-gap-lab"));
    c.env_remove("MLDLAB_CACHE");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn mld_text_output() {
    let o = run(&["mld", "1/13(3,4,5)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "12/13 (k=1)\n");
    let o = run(&["mld", "1/1(0,0,0)"]);
    assert_eq!(stdout(&o), "3 (k=0)\n");
}

#[test]
fn wall_time_goes_to_stderr() {
    let o = run(&["mld", "1/3(1,1)"]);
    let err = String::from_utf8_lossy(&o.stderr).into_owned();
    assert!(err.contains("wall time"));
    assert!(!stdout(&o).contains("wall time"));
}

#[test]
fn jsonl_has_header_records_and_summary() {
    let o = run(&["scan3", "--r-max", "16", "--threshold", "9/10", "--format", "jsonl", "--jobs", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let header = &lines[0];
    assert_eq!(header["config"]["subcommand"], "scan3");
    assert!(header["version"].is_string());
    let summary = &lines.last().unwrap()["summary"];
    assert_eq!(summary["hits"], 2);
    assert_eq!(lines.len(), 4);
}

#[test]
fn csv_and_table_formats() {
    let o = run(&["scan3", "--r-max", "13", "--threshold", "9/10", "--format", "csv"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# "));
    assert!(lines.next().unwrap().contains("mld"));
    assert!(text.contains("12/13"));
    assert!(text.lines().last().unwrap().starts_with("# summary"));

    let o = run(&["scan3", "--r-max", "13", "--threshold", "9/10", "--format", "table"]);
    let text = stdout(&o);
    assert!(text.starts_with("# "));
    assert!(text.contains("hits: 2"));
}

#[test]
fn out_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.jsonl");
    let o = run(&["mld", "1/3(1,1)", "--format", "jsonl", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"2/3\""));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["mld", "1/3(1,1)"]).status.code(), Some(0));
    assert_eq!(run(&["mld", "1/0(1,1)"]).status.code(), Some(2));
    assert_eq!(run(&["mld", "garbage"]).status.code(), Some(2));
    assert_eq!(run(&["replay", "--r", "3..5"]).status.code(), Some(2));
    let o = run(&["mld", "1/3(1,1)", "--out", "/nonexistent/dir/out.txt"]);
    assert_eq!(o.status.code(), Some(3));
    // a hypothesis failure is a result, not an anomaly
    let o = run(&["terminal-check", "(5;1,1,1,1;0)"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("hypothesis fails"));
}

#[test]
fn cache_hit_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["replay", "--r", "14..15", "--format", "jsonl"];
    let first = bin().args(args).env("MLDLAB_CACHE", dir.path()).output().unwrap();
    assert_eq!(first.status.code(), Some(0));
    assert!(!String::from_utf8_lossy(&first.stderr).contains("cache hit"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);

    let second = run(&["replay", "--r", "14..15", "--format", "jsonl", "--cache", dir.path().to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&second.stderr).contains("cache hit"));
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(first.status.code(), second.status.code());

    let third = bin()
        .args(args)
        .arg("--no-cache")
        .env("MLDLAB_CACHE", dir.path())
        .output()
        .unwrap();
    assert!(!String::from_utf8_lossy(&third.stderr).contains("cache hit"));
    assert_eq!(first.stdout, third.stdout);
}

#[test]
fn cache_key_includes_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().to_str().unwrap();
    run(&["scan3", "--r-max", "13", "--threshold", "9/10", "--cache", c]);
    let o = run(&["scan3", "--r-max", "14", "--threshold", "9/10", "--cache", c]);
    assert!(!String::from_utf8_lossy(&o.stderr).contains("cache hit"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn single_instance_commands() {
    let o = run(&["nc-check", "(13;3,4,7,0;0)", "--k0", "10"]);
    assert_eq!(stdout(&o), "accepted: bound 10/13 via q_reduction, branch mld 10/13\n");
    let o = run(&["classify", "xy+z^3+t^3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "cA");
    let o = run(&["exclude", "1/7(2,1,5,3;3)", "--case", "cA"]);
    assert!(stdout(&o).starts_with("excluded; witness k=5"));
    let o = run(&["replay", "--r", "14..14", "--delta", "1/2"]);
    assert_eq!(o.status.code(), Some(0));
}
