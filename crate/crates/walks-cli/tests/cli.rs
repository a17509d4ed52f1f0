use std::process::{Command, Output};

use serde_json::{json, Value};

fn walks(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_walks")).args(args).output().expect("binary runs")
}

fn json_of(args: &[&str]) -> Value {
    let out = walks(args);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn gb_classify_balanced() {
    let v = json_of(&["gb", "classify", "--a", "1", "--b", "1"]);
    assert_eq!(v, json!({"class": "balanced", "rho": "4", "alpha": "2"}));
}

#[test]
fn gb_classify_other_regions() {
    let v = json_of(&["gb", "classify", "--a", "3", "--b", "2"]);
    assert_eq!(v, json!({"class": "directed-2", "rho": "16/3", "alpha": "3/2"}));
    let v = json_of(&["gb", "classify", "--a", "1/2", "--b", "1/2"]);
    assert_eq!(v["class"], "reluctant");
    assert_eq!(v["alpha"], "5");
}

#[test]
fn conjecture_gb() {
    let v = json_of(&["conjecture2", "--model", "gb", "--cap", "5"]);
    assert_eq!(v["N_S"], 3);
    assert_eq!(v["dims"], json!([3, 1, 0, 0, 0]));
    assert_eq!(v["verified"], true);
}

#[test]
fn count_totals() {
    let v = json_of(&["count", "--model", "gb", "--a", "1", "--b", "1", "--start", "0,0", "--n", "3"]);
    assert_eq!(v["totals"], json!(["1", "1", "3", "6"]));
    let csv = walks(&["count", "--model", "gb", "--n", "3", "--emit", "csv"]);
    assert_eq!(String::from_utf8(csv.stdout).unwrap(), "n,total\n0,1\n1,1\n2,3\n3,6\n");
}

fn frac(v: &Value) -> f64 {
    let mut it = v.as_str().unwrap().split('/').map(|x| x.parse::<f64>().unwrap());
    let n = it.next().unwrap();
    it.next().map_or(n, |d| n / d)
}

#[test]
fn count_endpoints_sum_to_total() {
    let v = json_of(&["count", "--model", "gessel", "--a", "2", "--b", "1/3", "--n", "6", "--endpoints"]);
    let sum: f64 = v["endpoints"].as_array().unwrap().iter().map(|e| frac(&e["count"])).sum();
    assert!((sum / frac(&v["totals"][6]) - 1.0).abs() < 1e-12);
}

#[test]
fn reports_are_deterministic() {
    let args = ["sample", "--model", "tandem", "--a", "2", "--n", "40", "--seed", "9"];
    let first = walks(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, walks(&args).stdout);
    let v: Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(v["steps"].as_array().unwrap().len(), 40);
    let other = walks(&["sample", "--model", "tandem", "--a", "2", "--n", "40", "--seed", "10"]);
    assert_ne!(first.stdout, other.stdout);
}

#[test]
fn guard_abort_exits_3() {
    let out = walks(&["--guard", "5e1", "count", "--n", "30"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("resource guard"));
    let out = walks(&["conjecture2", "--cap", "40", "--guard", "100"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(walks(&["count", "--bogus"]).status.code(), Some(2));
    assert_eq!(walks(&["gb", "classify", "--a", "0", "--b", "1"]).status.code(), Some(2));
    assert_eq!(walks(&["gb", "classify", "--a", "x", "--b", "1"]).status.code(), Some(2));
    assert_eq!(walks(&["count", "--model", "kite", "--n", "2"]).status.code(), Some(2));
    assert_eq!(walks(&["count", "--n", "2", "--start", "0,0,0"]).status.code(), Some(2));
    assert_eq!(walks(&[]).status.code(), Some(2));
}

#[test]
fn validate_exit_status() {
    let ok = walks(&["validate", "--a", "2", "--b", "3", "--n-max", "400", "--tolerance", "0.01"]);
    assert_eq!(ok.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["class"], "free");
    let bad = walks(&["validate", "--a", "1/2", "--b", "1/2", "--n-max", "100", "--tolerance", "0.01"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn validate_excursions() {
    let v = json_of(&["validate", "--a", "1", "--b", "1", "--n-max", "200", "--what", "excursions", "--tolerance", "0.2"]);
    assert_eq!(v["target"], "excursions");
    assert_eq!(v["parity_zeros"], true);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = std::env::temp_dir().join(format!("walks-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cfg.json");
    std::fs::write(&path, r#"{"command": "gb classify", "a": "3", "b": "2"}"#).unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(json_of(&["--config", p])["class"], "directed-2");
    // command-line flags win over the file
    assert_eq!(json_of(&["gb", "classify", "--config", p, "--a", "1", "--b", "1"])["class"], "balanced");
    std::fs::write(&path, r#"{"start": [0, 0], "n": 2, "emit": "csv"}"#).unwrap();
    let out = walks(&["count", "--config", p]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "n,total\n0,1\n1,1\n2,3\n");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn steps_file_and_central() {
    let dir = std::env::temp_dir().join(format!("walks-cli-steps-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("steps.json");
    std::fs::write(&path, r#"{"dimension": 2, "steps": [{"v": [1,0], "w": "2"}, {"v": [-1,0], "w": "1/2"}, {"v": [-1,1], "w": "3"}, {"v": [1,-1], "w": "3/4"}]}"#)
        .unwrap();
    let p = path.to_str().unwrap();
    let v = json_of(&["central", "--steps-file", p]);
    assert_eq!(v["central"], false);
    assert_eq!(v["rank"], 3);
    assert!(v["witness"].is_string());
    // a path given to --model works too
    assert_eq!(json_of(&["central", "--model", p])["central"], false);
    let v = json_of(&["central", "--model", "gb", "--a", "2", "--b", "3", "--compare", "1,1,1,1"]);
    assert_eq!(v["central"], true);
    assert_eq!(v["decomposition"]["reproduces"], true);
    assert_eq!(v["equivalent"], true);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn diagram_csv_rows() {
    let out = walks(&["diagram", "--model", "gb", "--a-range", "1:2:1", "--b-range", "1:2:1", "--emit", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "a,b,d_x,d_y,class");
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[1], "1,1,0,0,balanced");
}

#[test]
fn gb_estimate_and_critical() {
    let v = json_of(&["gb", "estimate", "--a", "1/2", "--b", "1", "--n", "100"]);
    assert_eq!(v["class"], "transitional-2");
    assert_eq!(v["v_even_exact"], "80/3");
    let v = json_of(&["gb", "critical", "--a", "2", "--b", "3"]);
    assert_eq!(v["contributing"], json!(["c123"]));
    assert_eq!(v["points"].as_array().unwrap().len(), 6);
    let v = json_of(&["gb", "harmonic", "--a", "3", "--b", "2", "--grid", "6"]);
    assert_eq!(v["checked"], 98);
    assert_eq!(v["pass"], true);
}

#[test]
fn floats_have_fifteen_digits() {
    let v = json_of(&["classify", "--model", "tandem", "--a", "4/7", "--b", "1/2"]);
    let s = v["boundary_minimizers"][0].to_string();
    let digits = s.chars().filter(char::is_ascii_digit).count();
    assert!(digits <= 16, "{s}");
    assert_eq!(v["class"], "reluctant");
}
