use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin(cache: &Path) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sumprodlab"));
    c.env("SUMPRODLAB_CACHE_DIR", cache).args(["--jobs", "2"]);
    c
}

fn run(cache: &Path, args: &[&str]) -> Output {
    bin(cache).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const INTERVALS: &str = r#"[
  {"generator":"interval","params":{"n":8}},
  {"generator":"interval","params":{"n":16}},
  {"generator":"interval","params":{"n":32}}
]"#;

#[test]
fn gen_prints_the_set() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["gen", r#"{"generator":"interval","params":{"n":4}}"#]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v, serde_json::json!(["1", "2", "3", "4"]));

    let o = run(dir.path(), &["--format", "csv", "gen", r#"{"elements":["1/2","3"]}"#]);
    assert_eq!(stdout(&o).lines().collect::<Vec<_>>(), ["1/2", "3"]);
}

#[test]
fn compute_reports_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["compute", r#"{"generator":"interval","params":{"n":4}}"#]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["sumset"], 7);
    assert_eq!(v["product_set"], 9);
    assert_eq!(v["ratio_set"], 11);
    assert_eq!(v["mult_energy"], "32");
    assert_eq!(v["dot_products"], 25);
}

#[test]
fn bad_spec_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["compute", r#"{"generator":"nonsense"}"#]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("error"));
    let o = run(dir.path(), &["check", "--checks", "no-such-check", "--no-cache"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_solymosi_on_intervals() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.json");
    std::fs::write(&corpus, INTERVALS).unwrap();
    let cache = dir.path().join("cache");
    let args = ["check", "--corpus", corpus.to_str().unwrap(), "--checks", "solymosi"];
    let o = run(&cache, &args);
    assert!(o.status.success(), "{}", stderr(&o));
    let b: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let reports = b["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 3);
    assert!(reports.iter().all(|r| r["verdict"] == "pass"));
    assert_eq!(b["envelope"]["computed"], 3);

    let again = run(&cache, &args);
    let b2: Value = serde_json::from_str(&stdout(&again)).unwrap();
    assert_eq!(b2["envelope"]["computed"], 0);
    assert_eq!(b2["envelope"]["cache_hits"], 3);
    assert_eq!(b["reports"], b2["reports"]);

    let purge = run(&cache, &["purge-cache"]);
    assert!(purge.status.success());
    assert!(stderr(&purge).contains("removed 3 entries"));
    let third = run(&cache, &args);
    let b3: Value = serde_json::from_str(&stdout(&third)).unwrap();
    assert_eq!(b3["envelope"]["computed"], 3);
}

#[test]
fn corrupted_fixture_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.json");
    std::fs::write(
        &corpus,
        r#"[{"spec":{"generator":"interval","params":{"n":4}},"expect":{"sumset":7,"product_set":10}}]"#,
    )
    .unwrap();
    let o = run(dir.path(), &["check", "--corpus", corpus.to_str().unwrap(), "--checks", "fixture", "--no-cache"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("FAIL fixture-product-set on interval"), "{}", stderr(&o));
}

#[test]
fn report_summarises_a_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.json");
    std::fs::write(&corpus, INTERVALS).unwrap();
    let bundle = dir.path().join("bundle.json");
    let o = run(
        dir.path(),
        &[
            "--out",
            bundle.to_str().unwrap(),
            "check",
            "--corpus",
            corpus.to_str().unwrap(),
            "--checks",
            "solymosi,fpms-energy",
            "--no-cache",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(dir.path(), &["report", bundle.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(s["pass"], 3);
    assert_eq!(s["report_only"], 3);
    assert_eq!(s["fail"], 0);
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--format", "csv", "sweep", "--family", "interval", "--range", "8..32"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("n,size,sumset,product_set"));
    assert!(lines[1].starts_with("8,8,15,"));

    let empty = run(dir.path(), &["--format", "csv", "sweep", "--range", "9..8"]);
    assert!(empty.status.success());
    assert_eq!(stdout(&empty).lines().count(), 1);
}

#[test]
fn pipeline_runs_on_a_progression() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["pipeline", "sumset-theorem", r#"{"generator":"convex_power","params":{"n":16,"e":2}}"#]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["general"]["verdict"], "report-only");
    assert!(v["convex"].is_object());
}
