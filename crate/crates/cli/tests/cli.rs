use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn osclab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_osclab"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is one JSON value")
}

#[test]
fn walk_reports_trace_and_osc() {
    let dir = tempfile::tempdir().unwrap();
    let o = osclab(&["walk", "3", "w", "--json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["steps"], serde_json::json!(["w", "3"]));
    assert_eq!(v["lower_trace"], serde_json::json!(["2"]));
    assert_eq!(v["osc"], 0);

    let o = osclab(&["walk", "w", "w", "--json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["steps"].as_array().unwrap().len(), 1);
    assert_eq!(v["lower_trace"], serde_json::json!([]));

    let o = osclab(&["walk", "w", "3"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn parse_errors_carry_a_position() {
    let dir = tempfile::tempdir().unwrap();
    let o = osclab(&["ord", "succ", "w^(2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("position"));
}

#[test]
fn calculator() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        stdout(&osclab(&["ord", "add", "w^(2)+w", "w*4"], dir.path())),
        "w^(2)+w*5\n"
    );
    assert_eq!(stdout(&osclab(&["ord", "add", "3", "w"], dir.path())), "w\n");
    assert_eq!(stdout(&osclab(&["ord", "succ", "w"], dir.path())), "w+1\n");
    assert_eq!(
        json(&osclab(&["ord", "cmp", "w*2", "w+9", "--json"], dir.path()))["cmp"],
        ">"
    );
    let v = json(&osclab(
        &["ord", "ladder", "w^(2)", "--count", "3", "--json"],
        dir.path(),
    ));
    assert_eq!(v["ladder"], serde_json::json!(["w", "w*2", "w*3"]));
    assert_eq!(osclab(&["ord", "ladder", "w+1"], dir.path()).status.code(), Some(2));
}

#[test]
fn points_export() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("pts.csv");
    let csv_s = csv.to_str().unwrap();

    let o = osclab(&["points", "--window", "1,w,w*2,w^(2)", "--file", csv_s], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), "1,w,w*2,w^(2)\n");

    let o = osclab(
        &["points", "--window", "w,w*2", "--digits", "6", "--file", csv_s, "3"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), "w,w*2\n0.000000,0.000000\n");

    let o = osclab(
        &[
            "points",
            "--window",
            "1,w,w*2,w^(2)",
            "--digits",
            "8",
            "--file",
            csv_s,
            "w+1",
            "w^(2)",
            "5",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.len() == 4));
    // frac(sqrt 2), frac(sqrt 3), frac(sqrt 5) on the coordinates below each beta.
    assert_eq!(rows[1], ["0.41421356", "0.73205081", "0.23606798", "0.00000000"]);
    let sidecar: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("pts.json")).unwrap()).unwrap();
    assert_eq!(sidecar["precision"], 128);
    assert_eq!(sidecar["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn io_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("blocker"), "").unwrap();
    let o = osclab(&["points", "--window", "w", "--file", "blocker/pts.csv"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let o = osclab(&["walk", "1", "w", "--config", "missing.toml"], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), "digits = 3\nprecision = 64\n").unwrap();
    let run = |extra: &[&str]| {
        let mut args = vec![
            "points", "--config", "run.toml", "--window", "1", "--file", "p.csv", "w",
        ];
        args.extend_from_slice(extra);
        assert_eq!(osclab(&args, dir.path()).status.code(), Some(0));
        std::fs::read_to_string(dir.path().join("p.csv")).unwrap()
    };
    assert_eq!(run(&[]), "1\n0.414\n");
    assert_eq!(run(&["--digits", "5"]), "1\n0.41421\n");
    std::fs::write(dir.path().join("bad.toml"), "colour = 3\n").unwrap();
    assert_eq!(
        osclab(&["walk", "1", "w", "--config", "bad.toml"], dir.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn kronecker_and_bound() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&osclab(
        &["kronecker", "--epsilon", "0.5", "--bound", "--json"],
        dir.path(),
    ));
    assert_eq!(v["n"], 29);
    assert_eq!(v["verified"], true);
    let o = osclab(
        &["kronecker", "--epsilon", "0.5", "--u", "0", "--v", "0.5", "--json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(json(&o)["m"].as_u64().is_some());
    assert_eq!(
        osclab(&["kronecker", "--epsilon", "0.5", "--u", "0"], dir.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn delta_extraction() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&osclab(&["delta", "1,2", "1,3", "1,4", "5,6", "--json"], dir.path()));
    assert_eq!(v["root"], serde_json::json!(["1"]));
    assert_eq!(v["petals"].as_array().unwrap().len(), 3);
}

#[test]
fn experiments_write_records_and_map_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let o = osclab(&["experiment", "l-properties", "--out", "res"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let path = stdout(&o)
        .lines()
        .find_map(|l| l.strip_prefix("record: "))
        .map(str::to_string)
        .expect("record path printed");
    let record: Value = serde_json::from_str(std::fs::read_to_string(dir.path().join(&path)).unwrap().trim()).unwrap();
    assert_eq!(record["schema"], 1);
    assert_eq!(record["verdict"], "pass");

    let o = osclab(
        &[
            "experiment",
            "zero-sum",
            "--n",
            "1,-1",
            "--set",
            "tuples=4",
            "--set",
            "sizes=[100,200]",
            "--out",
            "res",
            "--json",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!(dir.path().join(v["record"].as_str().unwrap()).exists());
    assert_eq!(v["report"]["tuples"], 4);

    let o = osclab(&["experiment", "no-such"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("k-absorption"));
    let o = osclab(&["experiment", "zero-sum", "--n", "1,1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = osclab(&["experiment", "zero-sum", "--set", "bogus=1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn identical_invocations_give_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["osc", "w^(2)+3", "w^(3)*2", "--json"];
    assert_eq!(osclab(&args, dir.path()).stdout, osclab(&args, dir.path()).stdout);
    let points = ["points", "--window-below", "w^(2)", "--file", "a.csv", "w+1", "w*3"];
    osclab(&points, dir.path());
    let first = std::fs::read(dir.path().join("a.csv")).unwrap();
    osclab(&points, dir.path());
    assert_eq!(first, std::fs::read(dir.path().join("a.csv")).unwrap());
}
