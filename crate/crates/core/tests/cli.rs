use std::path::Path;
use std::process::{Command, Output};

use qfiport::cli::RunRecord;

fn qfiport(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfiport")).args(args).output().expect("binary runs")
}

fn qfiport_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfiport")).args(args).env(key, value).output().expect("binary runs")
}

fn record(out: &Output) -> RunRecord {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid record")
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn run_ad_matches_closed_form() {
    let rec = record(&qfiport(&["run", "--scheme", "ad", "--theta", "1.5707963", "--phi", "0", "--gamma", "0.5"]));
    assert!((rec.simulated.qfi - 0.5).abs() < 1e-8);
    assert!((rec.paper.as_ref().unwrap().qfi - 0.5).abs() < 1e-12);
    assert!(rec.stamp.is_none());
}

#[test]
fn run_b_paper_optimum() {
    let out = qfiport(&["run", "--scheme", "b", "--theta", "1.5707963", "--gamma", "0.5", "--p", "0.5", "--pr-policy", "paper-opt"]);
    let rec = record(&out);
    assert!((rec.config.pr2 - 0.8).abs() < 1e-12);
    let paper = rec.paper.unwrap();
    assert!((paper.qfi - 0.8).abs() < 1e-12);
    assert!((paper.success_probability.unwrap() - 0.25).abs() < 1e-12);
    assert!(rec.deviations.qfi.unwrap() < 1e-8);
}

#[test]
fn numeric_policy_finds_scheme_b_optimum() {
    let rec = record(&qfiport(&["run", "--scheme", "b", "--gamma", "0.5", "--p", "0.5", "--pr-policy", "numeric-opt"]));
    assert!((rec.config.pr2 - 0.8).abs() < 1e-4, "{}", rec.config.pr2);
}

#[test]
fn stamp_is_opt_in() {
    let rec = record(&qfiport(&["run", "--scheme", "ad", "--gamma", "0.1", "--stamp"]));
    assert!(rec.stamp.unwrap().starts_with("unix:"));
}

#[test]
fn domain_error_exits_2() {
    let out = qfiport(&["run", "--scheme", "a", "--gamma", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma"));
    assert_eq!(qfiport(&["run"]).status.code(), Some(2));
    assert_eq!(qfiport(&["sweep", "--scheme", "a", "--grid", "theta=0:1", "--columns", "f_ad"]).status.code(), Some(2));
}

#[test]
fn degenerate_run_exits_3() {
    assert_eq!(qfiport(&["run", "--scheme", "b", "--gamma", "1", "--pr", "1"]).status.code(), Some(3));
}

#[test]
fn fig2_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig2.csv");
    let out = qfiport(&[
        "sweep", "--scheme", "a", "--grid", "theta=0:3.14159265:51,gamma=0:1:51", "--columns", "f_ad,f_a_opt,f_imp_a", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let (header, rows) = csv_rows(&path);
    assert_eq!(header, ["theta", "gamma", "f_ad", "f_a_opt", "f_imp_a"]);
    assert_eq!(rows.len(), 2601);
    assert!(rows.iter().all(|r| r[4] >= 0.0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
}

#[test]
fn fig3b_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig3b.csv");
    let out = qfiport(&[
        "sweep", "--scheme", "b", "--grid", "p=0:0.999:50,gamma=0:0.999:50", "--columns", "p_qfi_b,p_fid_b,p_imp_b", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let (_, rows) = csv_rows(&path);
    assert_eq!(rows.len(), 2500);
    assert!(rows.iter().all(|r| r[4] >= -1e-12));
}

#[test]
fn single_cell_sweep_has_one_row() {
    let out = qfiport(&["sweep", "--scheme", "a", "--grid", "gamma=0.3", "--columns", "f_ad"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 2);
}

#[test]
fn unwritable_path_exits_4() {
    let out = qfiport(&["sweep", "--scheme", "a", "--grid", "gamma=0.3", "--columns", "f_ad", "--out", "/proc/definitely/not/here.csv"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn audit_exit_codes() {
    let grid = "p=0:0.75:4,gamma=0:0.75:4,pr=0:0.75:4,theta=pi/4:pi/2:2";
    let ok = qfiport(&["audit", "--scheme", "b", "--grid", grid, "--assert", "bloch=1e-8,qfi=1e-8,success=1e-8"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let report: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["passed"], true);

    let informational = qfiport(&["audit", "--scheme", "a", "--grid", grid]);
    assert_eq!(informational.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&informational.stdout).unwrap();
    assert!(report["quantities"].as_array().unwrap().len() >= 4);

    let strict = qfiport(&["audit", "--scheme", "b", "--grid", grid, "--assert", "qfi=1e-15"]);
    assert_eq!(strict.status.code(), Some(5));
}

#[test]
fn thread_cap_does_not_change_output() {
    let args = ["sweep", "--scheme", "b", "--grid", "gamma=0:0.9:5,pr=0:0.9:5", "--p", "0.3", "--columns", "qfi_sim,success_sim"];
    let serial = qfiport_env(&args, "QFIPORT_THREADS", "1");
    let parallel = qfiport_env(&args, "QFIPORT_THREADS", "4");
    assert!(serial.status.success() && parallel.status.success());
    assert_eq!(serial.stdout, parallel.stdout);
    assert_eq!(qfiport_env(&args, "QFIPORT_THREADS", "0").status.code(), Some(2));
    assert_eq!(qfiport_env(&args, "QFIPORT_THREADS", "many").status.code(), Some(2));
}

#[test]
fn degrees_flag() {
    let a = record(&qfiport(&["run", "--scheme", "ad", "--theta", "60", "--phi", "30", "--deg", "--gamma", "0.2"]));
    let b = record(&qfiport(&["run", "--scheme", "ad", "--theta", "pi/3", "--phi", "pi/6", "--gamma", "0.2"]));
    assert!((a.simulated.qfi - b.simulated.qfi).abs() < 1e-12);
}
