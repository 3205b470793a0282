use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsetlin-bandit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn iris() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data/iris.csv")
        .to_string_lossy()
        .into_owned()
}

#[test]
fn missing_dataset_exits_2_and_names_path() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = bin(&["run", "--dataset", "/nonexistent/data.csv", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/data.csv"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn bad_arguments_are_rejected() {
    let o = bin(&["run", "--dataset", "gen:xor", "--preset", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope"));
    let o = bin(&["run", "--dataset", "gen:xor", "--horizon", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!bin(&["frobnicate"]).status.success());
}

#[test]
fn gen_is_deterministic_and_noiseless_at_flip_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a.csv");
    let b = tmp.path().join("b.csv");
    for p in [&a, &b] {
        let o = bin(&["gen", "xor", "--n", "300", "--bits", "5", "--flip", "0", "--seed", "4", "--out", p.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x1,x2,x3,x4,x5,label");
    let mut n = 0;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(v[5], (v[0] != v[1]) as u8 as f64, "{line}");
        n += 1;
    }
    assert_eq!(n, 300);
}

#[test]
fn run_writes_outputs_and_inspect_reads_models() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("iris");
    let o = bin(&[
        "run", "--dataset", &iris(), "--preset", "iris", "--clauses", "40", "--threshold", "20", "--max-bits", "4",
        "--horizon", "400", "--runs", "2", "--seed", "3", "--save-model", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["trace_run_00.csv", "trace_run_01.csv", "aggregate.csv", "config.json", "model_run_00.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let trace = fs::read_to_string(out.join("trace_run_00.csv")).unwrap();
    assert_eq!(trace.lines().next().unwrap(), "round,arm,reward,optimal,cum_reward,cum_regret");
    assert_eq!(trace.lines().count(), 401);
    let agg = fs::read_to_string(out.join("aggregate.csv")).unwrap();
    assert_eq!(agg.lines().count(), 401);

    // The saved config reproduces the run.
    let again = tmp.path().join("again");
    let cfg = out.join("config.json");
    let o = bin(&["run", "--config", cfg.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read(out.join("trace_run_01.csv")).unwrap(),
        fs::read(again.join("trace_run_01.csv")).unwrap()
    );

    let model = out.join("model_run_00.json");
    let o = bin(&["inspect", model.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    for (arm, line) in lines.iter().enumerate() {
        assert!(line.starts_with(&format!("arm {arm}: ")), "{line}");
    }
    assert!(text.contains('x'), "trained rules mention some feature: {text}");

    let o = bin(&["inspect", model.to_str().unwrap(), "--arm", "1", "--polarity", "neg", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let entries = v.as_array().unwrap();
    assert_eq!(entries.len(), 1);
    assert_eq!(entries[0]["arm"], 1);
    assert_eq!(entries[0]["polarity"], "neg");
    assert!(entries[0]["terms"].is_array());

    let o = bin(&["inspect", model.to_str().unwrap(), "--arm", "3"]);
    assert!(!o.status.success());
}

#[test]
fn inspect_untrained_and_baseline_models() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let o = bin(&[
        "run", "--dataset", "gen:xor", "--samples", "50", "--bits", "4", "--clauses", "4", "--policy",
        "tm-thompson-exact", "--horizon", "1", "--runs", "1", "--save-model", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = bin(&["inspect", out.join("model_run_00.json").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "arm 0: ⊥\narm 1: ⊥\n");

    let lin = tmp.path().join("lin");
    let o = bin(&[
        "run", "--dataset", "gen:xor", "--samples", "50", "--bits", "4", "--policy", "linucb", "--horizon", "20",
        "--runs", "1", "--save-model", "--out", lin.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = bin(&["inspect", lin.join("model_run_00.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no rules"));
}

#[test]
fn binarize_writes_table_and_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bin");
    let o = bin(&["binarize", "--input", &iris(), "--max-bits", "4", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(out.join("binarized.csv")).unwrap();
    let mut lines = table.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.last(), Some(&"label"));
    let width = header.len() - 1;
    assert!(width > 0 && width <= 16);
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 150);
    for r in rows {
        let cells: Vec<&str> = r.split(',').collect();
        assert!(cells[..width].iter().all(|c| *c == "0" || *c == "1"), "{r}");
    }
    let schema: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("schema.json")).unwrap()).unwrap();
    assert_eq!(schema["num_features"], 4);
}
