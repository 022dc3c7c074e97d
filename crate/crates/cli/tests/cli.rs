use std::path::Path;
use std::process::{Command, Output};

fn tf2d(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tf2d"))
        .args(args)
        .output()
        .expect("failed to launch tf2d")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is not JSON")
}

// A coarser grid keeps the solves quick in debug builds.
const GRID: [&str; 4] = ["--nodes", "401", "--r-max", "1e6"];

#[test]
fn nonpositive_lambda_is_a_usage_error() {
    let out = tf2d(&["tf-solve", "--lambda", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda"));
}

#[test]
fn ascending_h_is_a_usage_error() {
    let out = tf2d(&["semiclassics", "--potential", "hydrogen-shifted", "--exact", "--h", "0.05,0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_potential_is_a_usage_error() {
    let out = tf2d(&["semiclassics", "--potential", "yukawa"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tf_solve_reports_neutral_atom() {
    let mut args = vec!["--quiet", "tf-solve", "--lambda", "1"];
    args.extend(GRID);
    let out = tf2d(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stderr.is_empty());
    let v = json(&out);
    assert_eq!(v["lambda"], 1.0);
    assert_eq!(v["mu"], 0.0);
    let e = v["energy"].as_f64().unwrap();
    assert!((e + 0.1148).abs() < 2e-3, "{e}");
    assert!((v["mass"].as_f64().unwrap() - 1.0).abs() < 1e-5);
}

#[test]
fn tf_solve_writes_density_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rho.csv");
    let report = dir.path().join("report.csv");
    let mut args = vec![
        "--quiet",
        "--output",
        "csv",
        "tf-solve",
        "--lambda",
        "0.5",
        "--density-csv",
        csv.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ];
    args.extend(GRID);
    let out = tf2d(&args);
    assert!(out.status.success());
    let written = std::fs::read(&report).unwrap();
    assert_eq!(written, out.stdout);
    let text = String::from_utf8(written).unwrap();
    assert!(text.starts_with("lambda,mu,energy,mass,residual,support_radius\n"));
    assert_eq!(count_rows(&csv), 401);
}

fn count_rows(path: &Path) -> usize {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records().map(|r| r.unwrap()).count()
}

#[test]
fn exact_hydrogen_semiclassics_csv() {
    let out = tf2d(&["--quiet", "--output", "csv", "semiclassics", "--potential", "hydrogen-shifted", "--exact"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["h", "numeric", "formula", "residual", "scaled_residual"]);
    let scaled: Vec<f64> = rdr
        .records()
        .map(|r| r.unwrap()[4].parse::<f64>().unwrap().abs())
        .collect();
    assert_eq!(scaled.len(), 3);
    assert!(scaled[0] > scaled[1] && scaled[1] > scaled[2]);
}

#[test]
fn hydrogen_check_passes() {
    let out = tf2d(&["hydrogen-check", "--m-max", "1000"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["c_h"].as_f64().unwrap() + 2.2338728715).abs() < 1e-9);
    assert_eq!(v["ladder"].as_array().unwrap().len(), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("c_H"));
}

#[test]
fn energy_predict_shape() {
    let mut args = vec!["--quiet", "energy-predict", "--Z", "4", "--N", "2"];
    args.extend(GRID);
    let out = tf2d(&args);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["lambda"], 0.5);
    let t = &v["terms"];
    let sum = t["leading"].as_f64().unwrap() + t["second"].as_f64().unwrap();
    assert!((sum - v["E_predicted"].as_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn energy_predict_rejects_bad_atom() {
    let out = tf2d(&["energy-predict", "--Z", "-1", "--N", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn coulomb_check_has_no_violations() {
    let mut args = vec!["--quiet", "coulomb-check", "--lambda", "0.75"];
    args.extend(GRID);
    let out = tf2d(&args);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["newton_violations"], 0);
    assert!(v["self_energy"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_subset_is_deterministic() {
    let args = ["--quiet", "verify-all", "--criteria", "1,2,4", "--seed", "11"];
    let a = tf2d(&args);
    let b = tf2d(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["all_passed"], true);
    assert_eq!(v["criteria"].as_array().unwrap().len(), 3);
}

#[test]
fn verify_rejects_unknown_criterion() {
    let out = tf2d(&["verify-all", "--criteria", "12"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_tf2d"))
        .args(["hydrogen-check"])
        .env("TF2D_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
