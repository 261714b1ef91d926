use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_lagput");

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("schema")
}

fn lagput(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("LAGPUT_WORKERS").output().expect("binary runs")
}

fn scenario(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn small(lag: f64) -> String {
    format!(
        r#"{{"market":{{"strike":100,"rate":0.05,"dividend":0.02,"volatility":0.2}},
"contract":{{"maturity":1,"lag":{lag}}},"spot":100,"grid":{{"nx":120,"nt":120}}}}"#
    )
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid(schema: &str, doc: &Value) {
    let schema = read_json(&schema_dir().join(format!("{schema}.schema.json")));
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn price_writes_every_output_and_they_validate() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = scenario(tmp.path(), "s.json", &small(0.25));
    let out = tmp.path().join("out");
    let o = lagput(&["price", "--scenario", sc.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    for (file, schema) in [("summary.json", "summary"), ("surface.json", "surface"), ("boundary.json", "boundary")] {
        assert_valid(schema, &read_json(&out.join(file)));
    }
    assert_valid("scenario", &read_json(&sc));

    let summary = read_json(&out.join("summary.json"));
    let d = &summary["data"];
    let value = d["value"].as_f64().unwrap();
    assert!(value > 5.0 && value < 8.0, "{value}");
    assert!((d["x_bar"].as_f64().unwrap() + 0.142013549494).abs() < 1e-9);
    assert!((d["x_under"].as_f64().unwrap() + 0.439481704247).abs() < 1e-9);

    let surface = std::fs::read_to_string(out.join("surface.csv")).unwrap();
    let mut lines = surface.lines();
    assert_eq!(lines.next(), Some("tau,x,value"));
    assert_eq!(lines.count(), 121 * 122);
    let boundary = std::fs::read_to_string(out.join("boundary.csv")).unwrap();
    assert_eq!(boundary.lines().next(), Some("tau,x_boundary"));
}

#[test]
fn zero_lag_boundary_ends_at_the_strike() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = scenario(tmp.path(), "s.json", &small(0.0));
    let out = tmp.path().join("out");
    let o = lagput(&["price", "--scenario", sc.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read_json(&out.join("summary.json"));
    assert_valid("summary", &summary);
    let d = &summary["data"];
    assert!(d["decomposition_max_gap"].is_null());
    let h = d["h"].as_f64().unwrap();
    let end = d["boundary_end_stock"].as_f64().unwrap();
    assert!((end / 100.0).ln().abs() <= 2.0 * h, "{end}");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = scenario(tmp.path(), "s.json", &small(0.25));
    let run = |dir: &str, workers: &str| {
        let out = tmp.path().join(dir);
        let o = Command::new(BIN)
            .args(["price", "--scenario", sc.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .env("LAGPUT_WORKERS", workers)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
        out
    };
    let (a, b) = (run("a", "1"), run("b", "4"));
    for f in ["surface.csv", "boundary.csv", "surface.json", "boundary.json", "summary.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn study_reports_validate() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = scenario(tmp.path(), "s.json", &small(0.25));
    let out = tmp.path().join("out");
    let o = lagput(&["study", "--name", "lag-monotonicity", "--scenario", sc.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().any(|l| l == "study lag-monotonicity: passed"), "{stdout}");
    let report = read_json(&out.join("report.json"));
    assert_valid("report", &report);
    assert_eq!(report["data"]["passed"], Value::Bool(true));
    let rows = std::fs::read_to_string(out.join("rows.csv")).unwrap();
    assert_eq!(rows.lines().next(), Some("lag,quantity,value"));
}

#[test]
fn a_failed_study_check_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    // A value tolerance nobody can meet on a short horizon.
    let body = r#"{"market":{"strike":100,"rate":0.05,"dividend":0.02,"volatility":0.2},
"contract":{"maturity":1,"lag":0.25},"grid":{"nx":100,"nt":100},
"study":{"name":"large-maturity","tau_max":2,"value_tol":1e-9}}"#;
    let sc = scenario(tmp.path(), "s.json", body);
    let out = tmp.path().join("out");
    let o = lagput(&["study", "--scenario", sc.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    let report = read_json(&out.join("report.json"));
    assert_valid("report", &report);
    assert_eq!(report["data"]["passed"], Value::Bool(false));
}

#[test]
fn invalid_input_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let out = out.to_str().unwrap();

    let bad = scenario(tmp.path(), "bad.json", "{\"market\": {\"strike\": 100,\n  \"rate\": }");
    let o = lagput(&["price", "--scenario", bad.to_str().unwrap(), "--out", out]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2 column"), "{err}");

    let q_ge_r = small(0.25).replace("\"dividend\":0.02", "\"dividend\":0.05");
    let sc = scenario(tmp.path(), "q.json", &q_ge_r);
    assert_eq!(code(&lagput(&["price", "--scenario", sc.to_str().unwrap(), "--out", out])), 2);

    let unknown = small(0.25).replace("\"spot\":100", "\"spot\":100,\"colour\":1");
    let sc = scenario(tmp.path(), "u.json", &unknown);
    let o = lagput(&["price", "--scenario", sc.to_str().unwrap(), "--out", out]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));

    let sc = scenario(tmp.path(), "ok.json", &small(0.25));
    let o = Command::new(BIN)
        .args(["price", "--scenario", sc.to_str().unwrap(), "--out", out])
        .env("LAGPUT_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);

    let o = lagput(&["price", "--scenario", tmp.path().join("missing.json").to_str().unwrap(), "--out", out]);
    assert_eq!(code(&o), 2);
}

#[test]
fn shipped_scenarios_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            assert_valid("scenario", &read_json(&path));
            seen += 1;
        }
    }
    assert!(seen >= 2);
}

#[test]
fn selftest_passes_and_catches_a_corrupted_theta() {
    let start = std::time::Instant::now();
    let o = lagput(&["selftest"]);
    assert!(start.elapsed().as_secs() < 60);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let o = lagput(&["selftest", "--corrupt-theta"]);
    assert_ne!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL theta"));
}
