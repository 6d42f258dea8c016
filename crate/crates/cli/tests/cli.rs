use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use voteops_core::gsr::{parse_profile, write_profile};

fn voteops(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_voteops"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const PROFILE: &str = "alternatives: a,b,c\n# two for a\na>b>c\na>b>c\nb>c>a\nc>b>a\n";

#[test]
fn rules_lists_plurality_with_k() {
    let o = voteops(&["rules", "--m", "3"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("plurality ")).unwrap();
    assert!(line.split_whitespace().nth(1) == Some("3"), "{line}");
    assert!(out.contains("maximin"));
}

#[test]
fn solve_prints_value_and_witness() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.txt", PROFILE);
    let o = voteops(&["solve", "--rule", "plurality", "--profile", &p, "--behavior", "uco-c", "--target", "c"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.starts_with("value=2 witness=["), "{out}");
}

#[test]
fn solve_reports_infinity() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.txt", PROFILE);
    // deleting votes can never leave c ahead of a here
    let o = voteops(&["solve", "--rule", "plurality", "--profile", &p, "--behavior", "cdv-c", "--target", "c"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("value="), "{out}");
}

#[test]
fn malformed_profile_is_a_usage_error_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "bad.txt", "alternatives: a,b\na>b\na>x\n");
    let o = voteops(&["solve", "--rule", "plurality", "--profile", &p, "--behavior", "uco-c", "--target", "b"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn malformed_distribution_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = write(dir.path(), "d.json", "{\"orders\": {\"a>b\": \"1/2\",\n}}");
    let o = voteops(&["predict", "--rule", "plurality", "--m", "2", "--dist", &d, "--behavior", "mov"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn enumeration_refusal_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.txt", PROFILE);
    let o = voteops(&[
        "solve", "--rule", "stv", "--profile", &p, "--behavior", "uco-c", "--target", "c", "--method", "preorder",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn sweep_requires_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = voteops(&[
        "sweep", "--rule", "plurality", "--m", "3", "--behavior", "mov", "--n", "20", "--trials", "2",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn sweep_writes_csvs_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.json",
        r#"{"rule": "plurality", "m": 3, "behavior": "uco-c", "target": "c",
            "n_values": [20, 40], "trials": 6}"#,
    );
    let out = dir.path().join("out");
    let o = voteops(&[
        "sweep", "--config", &cfg, "--trials", "4", "--seed", "11", "--jobs", "2", "--out",
        out.to_str().unwrap(), "--gnuplot",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trials = fs::read_to_string(out.join("trials.csv")).unwrap();
    let mut lines = trials.lines();
    assert_eq!(lines.next(), Some("rule,behavior,n,trial,seed,status,value,elapsed_ms"));
    assert_eq!(lines.count(), 8);
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.starts_with("rule,behavior,n,zero_frac,inf_frac,median,q25,q75,slope,category\n"));
    assert_eq!(summary.lines().count(), 3);
    assert!(out.join("report.json").exists());
    assert!(out.join("plot.gp").exists());
}

#[test]
fn sweeps_repeat_with_the_same_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, jobs: &str| {
        let out = dir.path().join(name);
        let o = voteops(&[
            "sweep", "--rule", "borda", "--m", "3", "--behavior", "bribery-c", "--target", "b", "--n", "15,30",
            "--trials", "5", "--seed", "3", "--jobs", jobs, "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        fs::read_to_string(out.join("summary.csv")).unwrap()
    };
    assert_eq!(run("one", "1"), run("two", "3"));
}

#[test]
fn unknown_rule_is_a_usage_error() {
    let o = voteops(&["predict", "--rule", "dictator", "--m", "3", "--behavior", "mov"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn profile_text_round_trips() {
    let p = parse_profile(PROFILE).unwrap();
    let again = parse_profile(&write_profile(&p)).unwrap();
    assert_eq!(p, again);
}
