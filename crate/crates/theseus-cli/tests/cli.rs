use std::path::Path;
use std::process::{Command, Output};

fn theseus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_theseus"))
        .args(args)
        .env_remove("THESEUS_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn discover_ghz_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = theseus(&[
        "discover",
        "--target",
        "ghz(4,2)",
        "--vertices",
        "4",
        "--dims",
        "2",
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let sol: serde_json::Value = serde_json::from_str(&read(dir.path(), "solution.json")).unwrap();
    assert_eq!(sol["qualified"], true);
    assert!(sol["fidelity"].as_f64().unwrap() >= 0.95);
    assert!(read(dir.path(), "solution.dot").starts_with("graph G {"));
    let trace = read(dir.path(), "trace.jsonl");
    for line in trace.lines() {
        let rec: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(rec["time"].is_number());
    }
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = theseus(&["export", "--builtin", "ghz4", "--format", "dot", "--colour"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--colour"));
}

#[test]
fn missing_subcommand_and_bad_target_exit_two() {
    assert_eq!(theseus(&[]).status.code(), Some(2));
    let o = theseus(&["evaluate", "--builtin", "ghz4", "--target", "|00"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("position 3"), "{}", stderr(&o));
}

#[test]
fn unreachable_target_exits_one_and_still_writes_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = theseus(&[
        "discover",
        "--target",
        "|00>+|11>",
        "--vertices",
        "3",
        "--dims",
        "2",
        "--heralds",
        "2",
        "--detector",
        "nr",
        "--postselect",
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let sol: serde_json::Value = serde_json::from_str(&read(dir.path(), "solution.json")).unwrap();
    assert_eq!(sol["qualified"], false);
}

#[test]
fn evaluate_cycle_is_perfect() {
    let o = theseus(&["evaluate", "--builtin", "ghz4", "--target", "ghz(4,2)"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("fidelity: 1.0000000000"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn export_roundtrips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("cnot.json");
    let f = file.to_str().unwrap();
    let o = theseus(&[
        "export",
        "--builtin",
        "cnot",
        "--format",
        "json",
        "--output",
        f,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let again = theseus(&["export", "--graph", f, "--format", "json"]);
    assert_eq!(stdout(&again), std::fs::read_to_string(&file).unwrap());
    let o = theseus(&[
        "evaluate",
        "--graph",
        f,
        "--target",
        "cnot(2,2)",
        "--heralds",
        "2,3",
        "--detector",
        "nr",
        "--postselect",
    ]);
    assert!(
        stdout(&o).contains("fidelity: 1.0000000000"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn graph_and_builtin_are_exclusive() {
    let o = theseus(&[
        "export",
        "--builtin",
        "ghz4",
        "--graph",
        "x.json",
        "--format",
        "dot",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = theseus(&["export", "--builtin", "nope", "--format", "dot"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ghz4"));
}

#[test]
fn seed_from_environment_is_used() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap().to_string();
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_theseus"));
        cmd.args([
            "discover",
            "--target",
            "ghz(4,2)",
            "--vertices",
            "4",
            "--dims",
            "2",
            "--out",
            &out,
        ]);
        cmd.args(extra).env_remove("THESEUS_SEED");
        if let Some(s) = env {
            cmd.env("THESEUS_SEED", s);
        }
        assert!(cmd.output().unwrap().status.success());
        read(dir.path(), "solution.json")
    };
    assert_eq!(run(Some("9"), &[]), run(None, &["--seed", "9"]));
    assert_eq!(
        run(Some("9"), &["--seed", "4"]),
        run(None, &["--seed", "4"])
    );
    let bad = Command::new(env!("CARGO_BIN_EXE_theseus"))
        .args([
            "discover",
            "--target",
            "ghz(4,2)",
            "--vertices",
            "4",
            "--dims",
            "2",
            "--out",
            "/tmp",
        ])
        .env("THESEUS_SEED", "x")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
