use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn elicit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elicit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn verify_exit_codes() {
    let pass = elicit(&["verify", "--loss", "variance2", "--property", "variance", "--outcomes", "0,1,2,3", "--grid", "10"]);
    assert_eq!(code(&pass), 0, "{}", String::from_utf8_lossy(&pass.stderr));
    let report = json(&pass);
    assert_eq!(report["pass"], Value::Bool(true));
    assert_eq!(report["evaluated"], 286);

    let fail = elicit(&["verify", "--loss", "mean1", "--property", "variance", "--outcomes", "0,1", "--grid", "10"]);
    assert_eq!(code(&fail), 1);
    assert_eq!(json(&fail)["pass"], Value::Bool(false));

    let unknown = elicit(&["verify", "--loss", "nope", "--property", "variance", "--outcomes", "0,1"]);
    assert_eq!(code(&unknown), 2);
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("nope"));
}

#[test]
fn verify_with_identification() {
    let out = elicit(&[
        "verify", "--loss", "variance2", "--property", "variance", "--outcomes", "0,1,2", "--grid", "6", "--identification",
    ]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["verification"]["pass"], Value::Bool(true));
    assert_eq!(doc["identification"]["pass"], Value::Bool(true));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&elicit(&[])), 2);
    assert_eq!(code(&elicit(&["verify", "--grid", "ten"])), 2);
    assert_eq!(code(&elicit(&["verify", "--loss", "variance2", "--property", "variance", "--outcomes", "0,1", "--tol", "0"])), 2);
    assert_eq!(code(&elicit(&["--help"])), 0);
}

#[test]
fn witness_examples() {
    let found = elicit(&["witness", "--property", "central_moment4", "--m", "2", "--r1", "0.07", "--r2", "0.08", "--outcomes", "0,1"]);
    assert_eq!(code(&found), 0, "{}", String::from_utf8_lossy(&found.stderr));
    let w = json(&found);
    assert!(w["residual"].as_f64().unwrap() <= 1e-7);
    assert_eq!(w["m"], 2);

    let none = elicit(&["witness", "--property", "variance", "--m", "2", "--r1", "0.16", "--r2", "0.21", "--outcomes", "0,1"]);
    assert_eq!(code(&none), 1);
    assert_eq!(json(&none)["status"], "no_witness_in_sample");

    let single = elicit(&["witness", "--property", "variance", "--m", "1", "--r1", "0.16", "--r2", "0.21", "--outcomes", "0,1"]);
    assert_eq!(code(&single), 0);
    let w = json(&single);
    for group in ["group1", "group2"] {
        for member in w[group].as_array().unwrap() {
            assert!((member["lambda"].as_f64().unwrap() - 0.5).abs() < 1e-9);
        }
    }

    let unattained = elicit(&["witness", "--property", "variance", "--m", "1", "--r1", "0.16", "--r2", "0.9", "--outcomes", "0,1"]);
    assert_eq!(code(&unattained), 2);
}

#[test]
fn frontier_for_variance() {
    let out = elicit(&["frontier", "--property", "variance", "--max-d", "2", "--max-m", "2"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "d,m,status,evidence");
    assert_eq!(rows.len(), 5);
    let status: Vec<(String, String)> = rows[1..]
        .iter()
        .map(|r| {
            let f: Vec<&str> = r.splitn(4, ',').collect();
            (format!("{},{}", f[0], f[1]), f[2].to_string())
        })
        .collect();
    let get = |cell: &str| status.iter().find(|(c, _)| c == cell).unwrap().1.clone();
    assert_eq!(get("1,1"), "refuted");
    assert_eq!(get("1,2"), "verified");
    assert_eq!(get("2,1"), "verified");
    assert_eq!(get("2,2"), "verified");
}

#[test]
fn regress_is_byte_identical() {
    let args = ["regress", "--a", "10", "--n", "10000", "--trials", "100", "--seed", "42"];
    let first = elicit(&args);
    assert_eq!(code(&first), 0);
    let text = stdout(&first);
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().next().unwrap().starts_with("n,a,trials,mode,method,"));
    let again = elicit(&["--jobs", "1", "regress", "--a", "10", "--n", "10000", "--trials", "100", "--seed", "42"]);
    assert_eq!(first.stdout, again.stdout);
}

#[test]
fn voronoi_row_counts() {
    let dir = tempfile::tempdir().unwrap();
    let sites = dir.path().join("sites.json");
    std::fs::write(
        &sites,
        r#"{"m": 1, "labels": ["a", "b", "c"], "sites": [[1,0,0],[0,1,0],[0,0,1]]}"#,
    )
    .unwrap();
    let out = elicit(&["voronoi", "--sites", sites.to_str().unwrap(), "--grid", "50"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1 + 1326);
    assert!(!text.contains('\r'));

    let coarse = elicit(&["voronoi", "--sites", sites.to_str().unwrap(), "--grid", "1"]);
    assert_eq!(stdout(&coarse).lines().count(), 1 + 3);

    let bands = elicit(&["voronoi", "--bands", "two_norm", "--thresholds", "0.36,0.5", "--m", "2", "--grid", "10"]);
    assert_eq!(code(&bands), 0);
    let text = stdout(&bands);
    assert_eq!(text.lines().count(), 1 + 66);
    for label in ["low", "medium", "high"] {
        assert!(text.contains(label), "missing {label}");
    }
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"loss": "mean1", "property": "variance", "outcomes": [0, 1, 2], "grid": 4}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = elicit(&["--config", cfg, "verify"]);
    assert_eq!(code(&from_file), 1);
    assert_eq!(json(&from_file)["resolution"], 4);

    let overridden = elicit(&["--config", cfg, "verify", "--loss", "variance2"]);
    assert_eq!(code(&overridden), 0);
    let doc = json(&overridden);
    assert_eq!(doc["loss"], "variance2");
    assert_eq!(doc["evaluated"], 15);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"gird": 4}"#).unwrap();
    assert_eq!(code(&elicit(&["--config", bad.to_str().unwrap(), "verify"])), 2);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = elicit(&[
        "verify", "--loss", "mean1", "--property", "mean", "--outcomes", "0,1", "--grid", "5", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(Path::new(&path)).unwrap()).unwrap();
    assert_eq!(doc["pass"], Value::Bool(true));
}

#[test]
fn evaluate_reports_values_and_domain_errors() {
    let out = elicit(&["evaluate", "--property", "dispersion", "--dist", r#"{"values": [1, 2], "probs": [0.5, 0.5]}"#]);
    assert_eq!(code(&out), 0);
    let v = json(&out)["value"][0].as_f64().unwrap();
    assert!((v - 1.0 / 6.0).abs() < 1e-12);

    let sharpe = elicit(&["evaluate", "--property", "sharpe", "--dist", r#"{"values": [1, 2], "probs": [1, 0]}"#]);
    assert_eq!(code(&sharpe), 2);
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = ["frontier", "--property", "knorm2", "--max-d", "2", "--max-m", "2"];
    let a = elicit(&args);
    let b = elicit(&["--jobs", "2", "frontier", "--property", "knorm2", "--max-d", "2", "--max-m", "2"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}
