use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn escobar(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_escobar"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).expect("stderr is a JSON error record")
}

#[test]
fn constant_reports_closed_form_and_gap() {
    let dir = tempfile::tempdir().unwrap();
    let o = escobar(&["constant", "--m", "1", "--n", "3"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["command"], "constant");
    assert_eq!(v["error_budgets"]["lambda_mn"], "exact closed form");
    let lam = v["result"]["lambda_mn"].as_f64().unwrap();
    let est = v["result"]["quadrature"].as_f64().unwrap();
    assert!((lam - 1.0746613026776455).abs() < 1e-12);
    assert!((est / lam - 1.0).abs() < 1e-2);
    assert_eq!(v["result"]["gap_shrinks"], true);
    let csv = std::fs::read_to_string(dir.path().join("constant.csv")).unwrap();
    assert!(csv.starts_with("m,n,lambda_mn,quadrature,rel_error,error_budget"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn minimize_writes_trace_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = escobar(
        &["minimize", "--m", "0.5", "--n", "3", "--nodes", "8,8,9", "--phi", "2*t", "--restarts", "2"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["result"]["converged"], true);
    assert!(v["result"]["lambda_estimate"].as_f64().unwrap() < v["result"]["constant_q"].as_f64().unwrap());
    assert!(v["error_budgets"]["lambda_estimate"].is_number());
    assert_eq!(v["seed"], 0);
    let trace = std::fs::read_to_string(dir.path().join("minimize_trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,Q,grad_norm,step"));
    let field = std::fs::read_to_string(dir.path().join("minimize_field.csv")).unwrap();
    assert!(field.starts_with("x1,x2,t,value"));
    assert_eq!(field.lines().count(), 1 + 8 * 8 * 9);
}

#[test]
fn config_file_with_flag_and_set_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "command = \"eigen\"\n[space]\nm = 1.0\nn = 3\nnodes = [6, 6, 9]\nphi = \"0\"\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = escobar(
        &["eigen", "--config", cfg.to_str().unwrap(), "--nodes", "6,6,17", "--set", "numerics.eigen_tol=1e-11"],
        &out,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["config"]["space"]["nodes"], serde_json::json!([6, 6, 17]));
    assert_eq!(v["config"]["numerics"]["eigen_tol"], 1e-11);
    let rho = v["result"]["rho1"].as_f64().unwrap();
    assert!((rho / std::f64::consts::PI.powi(2) - 1.0).abs() < 1e-2);
    assert_eq!(v["result"]["sign"], "positive");
    assert!(out.join("eigen.json").exists() && out.join("eigen_field.csv").exists());
}

#[test]
fn malformed_config_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "command = \"eigen\"\n[space]\nm = = 1\n").unwrap();
    let o = escobar(&["eigen", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert_eq!(e["error"], "parse");
    assert_eq!(e["line"], 3);
    assert!(e["column"].as_u64().unwrap() >= 1);
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = escobar(&["eigen", "--m", "1", "--n", "3", "--nodes", "6,6,9", "--set", "space.typo=3"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_json(&o)["message"].as_str().unwrap().contains("typo"));
}

#[test]
fn bad_expression_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = escobar(&["eigen", "--m", "1", "--n", "3", "--nodes", "6,6,9", "--phi", "t*(1+"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert_eq!(e["error"], "config");
    assert!(e["message"].as_str().unwrap().contains("space.phi"));
}

#[test]
fn aubin_rejects_scales_beyond_the_cutoff() {
    let dir = tempfile::tempdir().unwrap();
    let o = escobar(
        &["aubin", "--m", "1", "--n", "3", "--nodes", "16,16,17", "--lengths", "1,1,0.5", "--set", "numerics.aubin.tau=[10.0, 1.0, 0.1]"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_json(&o)["message"].as_str().unwrap().contains("τ"));
}

#[test]
fn blowup_refuses_positive_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let o = escobar(&["blowup", "--m", "0.5", "--n", "3", "--nodes", "8,8,9", "--phi", "2*t"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["error"], "precondition");
}

#[test]
fn blowup_certifies_negative_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let o = escobar(&["blowup", "--m", "0.5", "--n", "3", "--nodes", "8,8,9", "--phi", "10*t"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert!(v["result"]["rho1"].as_f64().unwrap() < 0.0);
    assert_eq!(v["result"]["unbounded"], true);
    assert!(dir.path().join("blowup.csv").exists());
}

#[test]
fn exhausted_iterations_exit_with_nonconvergence() {
    let dir = tempfile::tempdir().unwrap();
    let o = escobar(
        &["minimize", "--m", "0.5", "--n", "3", "--nodes", "8,8,9", "--phi", "2*t", "--max-iter", "2", "--restarts", "1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(stderr_json(&o)["error"], "non_convergence");
    assert_eq!(stdout_json(&o)["result"]["converged"], false);
}

#[test]
fn reruns_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["minimize", "--m", "0.5", "--n", "3", "--nodes", "8,8,9", "--phi", "2*t", "--seed", "5"];
    let a = escobar(&args, &dir.path().join("a"));
    let b = escobar(&args, &dir.path().join("b"));
    assert_eq!(a.status.code(), Some(0));
    let (va, vb) = (stdout_json(&a), stdout_json(&b));
    assert_eq!(va["result"], vb["result"]);
    assert_eq!(va["seed"], 5);
    for f in ["minimize_trace.csv", "minimize_field.csv"] {
        assert_eq!(
            std::fs::read(dir.path().join("a").join(f)).unwrap(),
            std::fs::read(dir.path().join("b").join(f)).unwrap()
        );
    }
}

#[test]
fn report_merges_results_by_space() {
    let dir = tempfile::tempdir().unwrap();
    let space = ["--m", "0.5", "--n", "3", "--nodes", "8,8,9", "--phi", "2*t"];
    for cmd in ["minimize", "eigen"] {
        let mut args = vec![cmd];
        args.extend(space);
        assert_eq!(escobar(&args, dir.path()).status.code(), Some(0));
    }
    let o = escobar(&["report", "--inputs", dir.path().to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "m,n,lambda_mn,lambda_space,rho1,space_hash");
    assert_eq!(lines.len(), 2);
    let cells: Vec<&str> = lines[1].split(',').collect();
    assert!(cells[3].parse::<f64>().unwrap() < 0.0);
    assert!(cells[4].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn unknown_command_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = escobar(&["frobnicate"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
