use std::io::Write;
use std::process::{Command, Output};

use heston_fx::analytic::{vanilla_price, CfFormulation};
use heston_fx::calibration::{synthetic_slice, DEFAULT_PILLARS};
use heston_fx::quadrature::QuadratureConfig;
use heston_fx::{HestonParams, MarketEnv, VanillaOption};
use serde_json::Value;
use tempfile::NamedTempFile;

const FIG1: &str = r#"{"kappa":2.0,"theta":0.04,"sigma":0.3,"rho":-0.05,"v0":0.04,"spot":4.0,"rd":0.05,"rf":0.03}"#;

fn file(contents: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_heston-fx"));
    cmd.args(args).env_remove("HESTON_FX_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_report(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap()
}

fn fig1() -> (HestonParams, MarketEnv) {
    (
        HestonParams::new(2.0, 0.04, 0.3, -0.05, 0.04).unwrap(),
        MarketEnv::new(4.0, 0.05, 0.03).unwrap(),
    )
}

#[test]
fn price_matches_library_exactly() {
    let params = file(FIG1);
    let path = params.path().to_str().unwrap();
    let doc = json(&run(&["--params", path, "price", "--strike", "4", "--tau", "0.5"]));
    let (p, env) = fig1();
    let direct = vanilla_price(
        &p,
        &env,
        &VanillaOption::call(4.0, 0.5),
        &QuadratureConfig::default(),
        CfFormulation::Transformed,
    )
    .unwrap();
    assert_eq!(doc["result"][0]["price"].as_f64().unwrap(), direct);
    assert_eq!(doc["config"]["subcommand"], "price");
}

#[test]
fn rows_sorted_by_tenor_then_strike() {
    let params = file(FIG1);
    let path = params.path().to_str().unwrap();
    let doc = json(&run(&["--params", path, "price", "--strike", "4.5,3.5", "--tau", "1,0.25", "--kind", "put"]));
    let keys: Vec<(f64, f64)> = doc["result"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["tau"].as_f64().unwrap(), r["strike"].as_f64().unwrap()))
        .collect();
    assert_eq!(keys, vec![(0.25, 3.5), (0.25, 4.5), (1.0, 3.5), (1.0, 4.5)]);
}

#[test]
fn flags_override_file_and_are_echoed() {
    let params = file(FIG1);
    let path = params.path().to_str().unwrap();
    let doc = json(&run(&["--params", path, "--sigma", "0.5", "feller"]));
    assert_eq!(doc["config"]["params"]["sigma"].as_f64(), Some(0.5));
    assert_eq!(doc["config"]["params"]["kappa"].as_f64(), Some(2.0));
    let alpha = doc["result"]["alpha_dim"].as_f64().unwrap();
    assert!((alpha - 0.32 / 0.25).abs() < 1e-12);
    assert_eq!(doc["result"]["satisfied"], false);
}

#[test]
fn params_from_flags_alone() {
    let out = run(&["--kappa", "0.5", "--theta", "0.01", "--sigma", "0.3", "feller"]);
    assert_eq!(json(&out)["result"]["regime"], "HitsZeroRecurrent");
}

#[test]
fn fft_csv_columns() {
    let params = file(FIG1);
    let path = params.path().to_str().unwrap();
    let out = run(&["--params", path, "--format", "csv", "fft", "--tau", "0.5", "--strike-min", "3", "--strike-max", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: "));
    assert_eq!(lines.next().unwrap(), "strike,call_price,put_price");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert!(rows.len() > 50);
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0] && w[1][1] <= w[0][1]));
}

#[test]
fn simulation_output_is_byte_identical() {
    let params = file(FIG1);
    let path = params.path().to_str().unwrap();
    let args = ["--params", path, "--format", "csv", "simulate", "--horizon", "0.5", "--paths", "2000", "--seed", "9"];
    let a = run_env(&args, &[("HESTON_FX_THREADS", "1")]);
    let b = run_env(&args, &[("HESTON_FX_THREADS", "4")]);
    let c = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn simulated_price_brackets_analytic() {
    let params = file(FIG1);
    let path = params.path().to_str().unwrap();
    let doc = json(&run(&["--params", path, "simulate", "--horizon", "0.5", "--paths", "100000", "--strike", "4"]));
    let o = &doc["result"]["options"][0];
    let (p, env) = fig1();
    let a = vanilla_price(&p, &env, &VanillaOption::call(4.0, 0.5), &QuadratureConfig::default(), CfFormulation::Transformed)
        .unwrap();
    let z = (o["price"].as_f64().unwrap() - a).abs() / o["std_error"].as_f64().unwrap();
    assert!(z < 3.0, "z = {z}");
}

#[test]
fn paths_mode_emits_trajectories() {
    let params = file(FIG1);
    let path = params.path().to_str().unwrap();
    let doc = json(&run(&["--params", path, "simulate", "--horizon", "0.1", "--paths", "4", "--mode", "paths"]));
    assert_eq!(doc["result"]["time_grid"].as_array().unwrap().len(), 11);
    assert_eq!(doc["result"]["paths"].as_array().unwrap().len(), 4);
    assert_eq!(doc["result"]["paths"][0]["spot"][0].as_f64(), Some(4.0));
}

#[test]
fn smile_sweep_convexity_increases_with_sigma() {
    let params = file(FIG1);
    let path = params.path().to_str().unwrap();
    let doc = json(&run(&["--params", path, "smile-sweep", "--param", "sigma", "--values", "0.1,0.2,0.3,0.4"]));
    let c: Vec<f64> = doc["result"]["smiles"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["convexity_25d"].as_f64().unwrap())
        .collect();
    assert!(c.windows(2).all(|w| w[1] > w[0]), "{c:?}");
}

#[test]
fn calibrate_round_trip() {
    let p = HestonParams::new(1.5, 0.015, 0.2, 0.05, 0.01).unwrap();
    let env = MarketEnv::new(4.0, 0.05, 0.03).unwrap();
    let slice = synthetic_slice(&p, &env, 0.5, &DEFAULT_PILLARS, &QuadratureConfig::default()).unwrap();
    let mut csv = String::from("tenor_years,delta,quote_vol\n");
    for q in &slice.quotes {
        csv.push_str(&format!("0.5,{},{}\n", q.delta_pillar, q.implied_vol));
    }
    let smile = file(&csv);
    let out = run(&[
        "--spot", "4", "--rd", "0.05", "--rf", "0.03",
        "calibrate", "--smile", smile.path().to_str().unwrap(), "--fixed-v0", "0.01",
    ]);
    let doc = json(&out);
    let fit = &doc["result"]["slices"][0]["Ok"];
    assert_eq!(fit["converged"], true);
    assert!(fit["sse"].as_f64().unwrap() < 1e-12);
    assert!((fit["sigma"].as_f64().unwrap() - 0.2).abs() < 1e-3);
    assert!((fit["rho"].as_f64().unwrap() - 0.05).abs() < 1e-3);
}

#[test]
fn calibrate_csv_output() {
    let smile = file("tenor_years,delta,quote_vol\n1,-0.25,0.11\n1,0.5,0.10\n1,0.25,0.105\n0.5,-0.25,0.12\n0.5,0.5,0.11\n0.5,0.25,0.115\n");
    let out = run(&[
        "--spot", "1.3", "--rd", "0.02", "--rf", "0.01", "--format", "csv",
        "calibrate", "--smile", smile.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], "tenor_years,delta,strike,market_vol,model_vol");
    assert_eq!(lines.len(), 8);
    assert!(lines[2].starts_with("0.5,"));
    assert!(lines[7].starts_with("1,"));
}

#[test]
fn degenerate_slice_is_reported() {
    let smile = file("tenor_years,delta,quote_vol\n0.5,-0.25,0.12\n0.5,0.5,0.11\n");
    let out = run(&["--spot", "1.3", "--rd", "0.02", "--rf", "0.01", "calibrate", "--smile", smile.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_report(&out)["error"], "DegenerateSlice");
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["result"]["slices"][0]["Err"], "DegenerateSlice");
}

#[test]
fn missing_file_is_usage_error() {
    let out = run(&["--params", "/nonexistent/params.json", "feller"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_report(&out)["error"], "UsageError");
}

#[test]
fn invalid_parameters_exit_2() {
    let params = file(FIG1);
    let path = params.path().to_str().unwrap();
    let out = run(&["--params", path, "--rho", "1.5", "price", "--strike", "4", "--tau", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let r = error_report(&out);
    assert_eq!(r["error"], "ValidationFailed");
    assert!(r["message"].as_str().unwrap().contains("CorrelationOutOfRange"));
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_parameter_exit_2() {
    let out = run(&["--kappa", "1", "price", "--strike", "4", "--tau", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_report(&out)["message"].as_str().unwrap().contains("theta"));
}

#[test]
fn unknown_key_in_params_file_is_input_error() {
    let params = file(r#"{"kappa":2.0,"vol":0.3}"#);
    let out = run(&["--params", params.path().to_str().unwrap(), "feller"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_report(&out)["error"], "InputError");
}

#[test]
fn computation_error_exit_1() {
    let params = file(FIG1);
    let path = params.path().to_str().unwrap();
    let out = run(&["--params", path, "forward-vol", "--t1", "0.5", "--t2", "1", "--sigma-t1", "0.6", "--sigma-t2", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_report(&out)["error"], "NegativeForwardVariance");
}

#[test]
fn bad_thread_count_rejected() {
    let out = run_env(&["--kappa", "1", "--theta", "0.04", "--sigma", "0.3", "feller"], &[("HESTON_FX_THREADS", "0")]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_report(&out)["error"], "UsageError");
}

#[test]
fn density_csv_integrates_close_to_one() {
    let params = file(FIG1);
    let path = params.path().to_str().unwrap();
    let doc = json(&run(&["--params", path, "density", "--x-min", "-1.5", "--x-max", "1.5", "--n-points", "601"]));
    let d: Vec<f64> = doc["result"]["density"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let mass: f64 = d.iter().sum::<f64>() * 3.0 / 600.0;
    assert!((mass - 1.0).abs() < 1e-3, "{mass}");
}
