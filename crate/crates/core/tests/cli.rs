use std::process::{Command, Output};

use serde_json::Value;

const R: &str = r#"{"type":"harmonic","p0":"1",
  "analytic":[{"m":3,"coef":{"mod":"2/3","arg_over_pi":"0"}}],
  "coanalytic":[{"n":3,"coef":{"mod":"1/3","arg_over_pi":"0"}}]}"#;

const P: &str = r#"{"type":"harmonic","p0":2,
  "analytic":[{"m":1,"coef":{"re":0.5}}],
  "coanalytic":[{"n":2,"coef":{"re":0.5}}]}"#;

fn bergtol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergtol")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn eval_at_origin_returns_p0() {
    let out = bergtol(&["--symbol", P, "eval", "--z", "0+0i"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"][0]["value"][0].as_f64(), Some(2.0));
    assert_eq!(v["result"][0]["value"][1].as_f64(), Some(0.0));
}

#[test]
fn decide_reports_witness() {
    let out = bergtol(&["--symbol", R, "decide"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["outcome"], "not_invertible");
    assert_eq!(v["result"]["witness"]["lambda_over_pi"], "1/3");
    let lambda = v["result"]["witness"]["lambda"].as_f64().unwrap();
    assert!((lambda - std::f64::consts::FRAC_PI_3).abs() < 1e-15);
}

#[test]
fn float_mode_decides_too() {
    let out = bergtol(&["--symbol", R, "decide", "--mode", "float"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["outcome"], "not_invertible");
}

#[test]
fn csv_output_starts_with_config() {
    let out = bergtol(&["--symbol", P, "--format", "csv", "eval", "--z", "0.5i"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert_eq!(lines.next().unwrap(), "z_re,z_im,value_re,value_im");
    assert_eq!(lines.count(), 1);
}

#[test]
fn point_outside_disc_is_an_input_error() {
    let out = bergtol(&["--symbol", P, "eval", "--z", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_symbol_is_an_input_error() {
    let out = bergtol(&["--symbol", r#"{"type":"harmonic","p0":1,"bogus":2}"#, "eval", "--z", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("$.bogus"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = bergtol(&["--bogus"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn help_exits_cleanly() {
    let out = bergtol(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("decide"));
}

#[test]
fn output_is_deterministic() {
    let args = ["--symbol", P, "svd", "--n-sweep", "4:16:4"];
    let a = bergtol(&args);
    let b = bergtol(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn reproduce_checks_pass() {
    let out = bergtol(&["reproduce-paper"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["pass"], true);
    assert!(v["result"]["checks"].as_array().unwrap().len() >= 10);
}
