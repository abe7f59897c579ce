use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bethe-scalar"))
}

fn config(json: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".json").tempfile().unwrap();
    f.write_all(json.as_bytes()).unwrap();
    f
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

const HOMOGENEOUS_L2: &str = r#"{"params": {"gamma": [0.6, 0.2], "mu": [[0, 0], [0, 0]], "sep_floor": 0}}"#;

#[test]
fn closed_n1_single_site_is_sinh_gamma_squared() {
    let f = config(r#"{"params": {"gamma": [0.7, 0.0], "mu": [[0.1, 0.0]]}, "n": 1, "method": "closed-n1"}"#);
    let o = run(&["compute", "--config", f.path().to_str().unwrap(), "--json"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    let re = v["value"][0].as_f64().unwrap();
    let im = v["value"][1].as_f64().unwrap();
    assert!((re - 0.7f64.sinh().powi(2)).abs() < 1e-14);
    assert!(im.abs() < 1e-14);
}

#[test]
fn offshell_integral_matches_oracle() {
    let f = config(
        r#"{"params": {"gamma": [0.5, 0.2], "mu": [[0.1, 0.0], [-0.2, 0.3], [0.3, -0.1]], "phi2": [0.6, 0.2]},
            "n": 2, "method": "integral-offshell"}"#,
    );
    let o = run(&["compute", "--config", f.path().to_str().unwrap(), "--json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert!(v["relative_delta"].as_f64().unwrap() <= 1e-8);
    assert!(v["cancellation_ratio"].as_f64().unwrap() >= 1.0);
    assert_eq!(v["residues"].as_u64().unwrap(), 4);
    assert_eq!(v["report"]["pass"], Value::Bool(true));
}

#[test]
fn closed_n1_with_two_magnons_is_a_config_error() {
    let f = config(r#"{"params": {"gamma": [0.5, 0.2], "mu": [[0.1, 0.0], [-0.2, 0.3]]}, "n": 2}"#);
    let o = run(&["compute", "--config", f.path().to_str().unwrap(), "--method", "closed-n1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("closed-n1 requires n = 1"));
}

#[test]
fn unknown_key_is_rejected_with_path() {
    let f = config(r#"{"params": {"gamma": [0.5, 0.2], "mu": [[0.1, 0.0]], "extra": 1}}"#);
    let o = run(&["compute", "--config", f.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("params.extra"));
}

#[test]
fn singular_configuration_exits_3() {
    let f = config(
        r#"{"params": {"gamma": [0.5, 0.2], "mu": [[0.1, 0.0], [-0.2, 0.3]]},
            "sets": {"lambda_c": [[0.1, 0.0]], "lambda_b": [[0.4, 0.1]]}, "method": "integral-offshell"}"#,
    );
    let o = run(&["compute", "--config", f.path().to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("w_1 - mu_1"));
}

#[test]
fn onshell_method_rejects_off_shell_roots() {
    let f = config(
        r#"{"params": {"gamma": [0.5, 0.2], "mu": [[0.1, 0.0], [-0.2, 0.3]]},
            "sets": {"lambda_c": [[0.3, 0.2]], "lambda_b": [[0.4, 0.1]]}, "method": "integral-onshell"}"#,
    );
    let o = run(&["compute", "--config", f.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not Bethe roots"));
}

#[test]
fn bethe_then_onshell_compute() {
    let f = config(HOMOGENEOUS_L2);
    let o = run(&["bethe", "--config", f.path().to_str().unwrap(), "--initial=-0.2,-0.1", "--json"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["converged"], Value::Bool(true));
    let re = v["roots"][0][0].as_f64().unwrap();
    let im = v["roots"][0][1].as_f64().unwrap();
    // -γ/2
    assert!((re + 0.3).abs() < 1e-12 && (im + 0.1).abs() < 1e-12);

    let g = config(&format!(
        r#"{{"params": {{"gamma": [0.6, 0.2], "mu": [[0, 0], [0, 0]], "sep_floor": 0}},
            "sets": {{"lambda_c": [[0.4, 0.3]], "lambda_b": [[{re}, {im}]]}}, "method": "integral-onshell"}}"#
    ));
    let o = run(&["compute", "--config", g.path().to_str().unwrap(), "--json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout_json(&o)["relative_delta"].as_f64().unwrap() <= 1e-7);
}

#[test]
fn bethe_bad_start_reports_not_converged() {
    let f = config(HOMOGENEOUS_L2);
    let o = run(&["bethe", "--config", f.path().to_str().unwrap(), "--initial", "50,0", "--json"]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout_json(&o)["converged"], Value::Bool(false));
}

#[test]
fn bethe_without_initial_is_usage_error() {
    let f = config(HOMOGENEOUS_L2);
    let o = run(&["bethe", "--config", f.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_lemmas_passes() {
    let o = run(&["verify", "--suite", "lemmas", "--trials", "4", "--json"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["suite"], "lemmas");
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == Value::Bool(true)));
}

#[test]
fn negative_control_fails_verification() {
    let o = run(&["verify", "--suite", "funceq-a", "--trials", "5", "--negative-control"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn unknown_suite_is_config_error() {
    let o = run(&["verify", "--suite", "slavnov"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn report_is_identical_across_thread_counts() {
    let one = run(&["verify", "--suite", "integral-offshell", "--trials", "10", "--threads", "1", "--json"]);
    let four = run(&["verify", "--suite", "integral-offshell", "--trials", "10", "--threads", "4", "--json"]);
    assert_eq!(code(&one), 0);
    let (mut a, mut b) = (stdout_json(&one), stdout_json(&four));
    a["environment"]["threads"] = Value::Null;
    b["environment"]["threads"] = Value::Null;
    assert_eq!(a, b);
}

#[test]
fn seed_flag_overrides_config() {
    let f = config(r#"{"seed": 1, "trials": 2}"#);
    let o = run(&["verify", "--config", f.path().to_str().unwrap(), "--suite", "vacuum", "--seed", "9", "--json"]);
    let v = stdout_json(&o);
    assert_eq!(v["environment"]["seed"], 9);
    assert_eq!(v["environment"]["trials"], 2);
}

#[test]
fn tolerance_override_can_fail_a_suite() {
    let f = config(r#"{"tolerances": {"yang-baxter": 0.0}}"#);
    let o = run(&["verify", "--config", f.path().to_str().unwrap(), "--suite", "yang-baxter", "--trials", "10"]);
    assert_eq!(code(&o), 1);
}
