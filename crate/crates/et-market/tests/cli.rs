//! End-to-end runs of the `et-market` binary: exit codes, report shapes,
//! byte-level determinism, and the trace CSV contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_et-market"))
}

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .unwrap_or_else(|e| panic!("failed to spawn {:?}: {e}", bin()))
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn valuate_emits_ranked_prices() {
    let path = scenario_path("capital_costs.json");
    let out = run(&["valuate", "--scenario", path.to_str().unwrap(), "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["top_set"], serde_json::json!(["fund"]));
    let p_top = v["p_top"].as_f64().unwrap();
    assert!((p_top - 1.0 / 1.1).abs() < 1e-12);
    assert!((v["per_buyer"]["desk"].as_f64().unwrap() - 1.0 / 1.2).abs() < 1e-12);
}

#[test]
fn equilibrium_honors_lambda_flag() {
    let path = scenario_path("capital_costs.json");
    let at_second = run(&["equilibrium", "--scenario", path.to_str().unwrap(), "--format", "json"]);
    assert!(at_second.status.success());
    let v: serde_json::Value = serde_json::from_slice(&at_second.stdout).unwrap();
    assert!((v["price"].as_f64().unwrap() - 1.0 / 1.2).abs() < 1e-12);

    let at_top = run(&[
        "equilibrium",
        "--scenario",
        path.to_str().unwrap(),
        "--format",
        "json",
        "--lambda",
        "1.0",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&at_top.stdout).unwrap();
    assert!((v["price"].as_f64().unwrap() - 1.0 / 1.1).abs() < 1e-12);
    assert_eq!(v["holdings"]["fund"].as_f64().unwrap(), 100.0);
}

#[test]
fn identical_invocations_emit_identical_bytes() {
    let path = scenario_path("total_capture.json");
    let args = [
        "simulate",
        "--scenario",
        path.to_str().unwrap(),
        "--format",
        "json",
        "--slots",
        "2000",
        "--seed",
        "99",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "same inputs must emit identical bytes");

    let c = run(&[
        "simulate",
        "--scenario",
        path.to_str().unwrap(),
        "--format",
        "json",
        "--slots",
        "2000",
        "--seed",
        "100",
    ]);
    assert_ne!(a.stdout, c.stdout, "different seed must change the report");
}

#[test]
fn simulate_writes_trace_csv_with_fixed_header() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("trace.csv");
    let out_path = dir.path().join("report.json");
    let path = scenario_path("total_capture.json");
    let out = run(&[
        "simulate",
        "--scenario",
        path.to_str().unwrap(),
        "--slots",
        "50",
        "--seed",
        "3",
        "--format",
        "json",
        "--out",
        out_path.to_str().unwrap(),
        "--trace-csv",
        csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "slot,winner_id,realized_mev,pnl,exercised_self"
    );
    assert_eq!(lines.count(), 50);

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["slots"].as_u64().unwrap(), 50);
    assert!(report["chi_hat"].as_f64().is_some());
    assert_eq!(report["wins"].as_object().unwrap().len(), 4);
}

#[test]
fn pbs_derive_summarizes_payoffs() {
    let path = scenario_path("pbs_builders.json");
    let out = run(&["pbs-derive", "--scenario", path.to_str().unwrap(), "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let fund = rows.iter().find(|r| r["buyer_id"] == "fund").unwrap();
    assert_eq!(fund["payoff_mean"].as_f64().unwrap(), 4.0);
    assert_eq!(fund["outsource_probability"].as_f64().unwrap(), 1.0);
}

#[test]
fn verify_builtin_passes_with_exit_zero() {
    let out = run(&["verify", "--format", "json"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["all_pass"], serde_json::json!(true));
    assert!(v["per_check"].as_array().unwrap().len() >= 20);

    let text = run(&["verify"]);
    assert!(text.status.success());
    let body = stdout_of(&text);
    assert!(body.contains("[PASS]"));
    assert!(body.trim_end().ends_with("all checks passed"));
}

#[test]
fn verify_custom_suite_with_wrong_expectation_exits_one() {
    // Take a shipped scenario and inject chi = 0.9 where the closed form
    // gives 1/1.2.
    let scenario_text = std::fs::read_to_string(scenario_path("capital_costs.json")).unwrap();
    let mut scenario: serde_json::Value = serde_json::from_str(&scenario_text).unwrap();
    scenario["expect"]["chi"] = serde_json::json!(0.9);
    let suite = serde_json::json!({"schema": 1, "scenarios": [scenario]});

    let dir = tempfile::tempdir().unwrap();
    let suite_path = dir.path().join("suite.json");
    std::fs::write(&suite_path, serde_json::to_string_pretty(&suite).unwrap()).unwrap();

    let out = run(&["verify", "--suite", suite_path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["all_pass"], serde_json::json!(false));
    let failing: Vec<_> = v["per_check"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == serde_json::json!(false))
        .collect();
    assert_eq!(failing.len(), 1);
    assert_eq!(failing[0]["claim"], serde_json::json!("chi"));
}

#[test]
fn empty_suite_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let suite_path = dir.path().join("empty.json");
    std::fs::write(&suite_path, r#"{"schema": 1, "scenarios": []}"#).unwrap();
    let out = run(&["verify", "--suite", suite_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_scenarios_exit_two_with_named_field() {
    let dir = tempfile::tempdir().unwrap();

    let bad_rate = dir.path().join("bad_rate.json");
    let text = std::fs::read_to_string(scenario_path("capital_costs.json"))
        .unwrap()
        .replace(r#""r": 0.001"#, r#""r": -0.1"#);
    std::fs::write(&bad_rate, text).unwrap();
    let out = run(&["valuate", "--scenario", bad_rate.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cost_of_capital"));

    let malformed = dir.path().join("malformed.json");
    std::fs::write(&malformed, "{ not json").unwrap();
    let out = run(&["valuate", "--scenario", malformed.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));
}

#[test]
fn simulate_without_slots_is_an_input_error() {
    // Scenario without a sim block and no --slots flag.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("no_sim.json");
    let text = std::fs::read_to_string(scenario_path("capital_costs.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v.as_object_mut().unwrap().remove("sim");
    std::fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();

    let out = run(&["simulate", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("slots"));
}

#[test]
fn pbs_scenario_flows_through_all_commands() {
    let path = scenario_path("pbs_random_floor.json");
    let path = path.to_str().unwrap();

    let val = run(&["valuate", "--scenario", path, "--format", "json"]);
    assert!(val.status.success());

    let eq = run(&["equilibrium", "--scenario", path, "--format", "json"]);
    assert!(eq.status.success());
    let v: serde_json::Value = serde_json::from_slice(&eq.stdout).unwrap();
    let chi = v["chi"].as_f64().unwrap();
    assert!(chi > 0.0 && chi <= 1.0, "chi = {chi}");

    let sim = run(&[
        "simulate", "--scenario", path, "--format", "json", "--slots", "5000",
    ]);
    assert!(sim.status.success());
    let v: serde_json::Value = serde_json::from_slice(&sim.stdout).unwrap();
    // PBS runs report how often winners sold block construction.
    let frac = v["outsource_fraction"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&frac));
}
