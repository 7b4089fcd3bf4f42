use std::fs;
use std::path::Path;

use lbexperts::harness::run_cli;

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("lbexperts").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const BANDIT: &str = r#"{
  "scenario": {"kind": "bandit", "num_experts": 2, "horizon": 1000, "loss_model": {"model": "uniform_iid"}},
  "learner": {"algorithm": "exp3lb", "eta_preset": "bandit"},
  "replicates": 20
}"#;

#[test]
fn estimate_writes_report_and_curve() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bandit.json", BANDIT);
    let out = dir.path().join("out");
    let (code, stdout, _) = cli(&["estimate", "--config", &cfg, "--replicates", "50", "--seed", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.contains("bandit_preset"), "{stdout}");

    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["replicates"], 50);
    assert_eq!(report["per_replicate_regret"].as_array().unwrap().len(), 50);
    let bound = report["theoretical_bound"].as_f64().unwrap();
    assert!((bound - 52.66).abs() < 0.01, "{bound}");
    let per: Vec<f64> = report["per_replicate_regret"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let mean = per.iter().sum::<f64>() / per.len() as f64;
    assert!((mean - report["mean_pseudo_regret"].as_f64().unwrap()).abs() < 1e-9);

    let curve = fs::read_to_string(out.join("regret_curve.csv")).unwrap();
    let mut lines = curve.lines();
    assert_eq!(lines.next(), Some("round,mean_regret,stderr,bound"));
    assert_eq!(lines.count(), 1000);
}

#[test]
fn estimate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bandit.json", BANDIT);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(cli(&["estimate", "--config", &cfg, "--quiet", "--out", a.to_str().unwrap()]).0, 0);
    assert_eq!(cli(&["estimate", "--config", &cfg, "--quiet", "--out", b.to_str().unwrap()]).0, 0);
    for f in ["report.json", "regret_curve.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
    }
}

#[test]
fn single_replicate_has_no_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bandit.json", BANDIT);
    let out = dir.path().join("out");
    assert_eq!(cli(&["estimate", "--config", &cfg, "--replicates", "1", "--quiet", "--out", out.to_str().unwrap()]).0, 0);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(report["std_error"].is_null());
}

#[test]
fn run_with_one_expert_has_zero_regret() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "one.json",
        r#"{"scenario": {"kind": "generic_lb", "slack_fraction": 0.5, "num_experts": 1, "horizon": 50,
            "loss_model": {"model": "uniform_iid"}}, "learner": {"algorithm": "exp3lb"}}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(cli(&["run", "--config", &cfg, "--quiet", "--out", out.to_str().unwrap()]).0, 0);
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("t,action,realized_loss,p_1,regret"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 50);
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells[1], "1");
        assert_eq!(cells[3], "1");
        assert_eq!(cells.last().unwrap().parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn malformed_config_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        "{\n  \"scenario\": {\"kind\": \"bandit\", \"num_experts\": 2, \"horizon\": 5, \"loss_model\": {\"model\": \"uniform_iid\"}},\n  \"learner\": {\"algorithm\": \"exp3lb\", \"etaa\": 1}\n}\n",
    );
    let (code, _, err) = cli(&["estimate", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("bad.json:3:"), "{err}");
    assert!(err.contains("etaa"), "{err}");
    assert!(!dir.path().join("o").exists());
}

#[test]
fn infeasible_settings_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "alpha.json",
        r#"{"scenario": {"kind": "bandit", "num_experts": 2, "horizon": 5, "loss_model": {"model": "uniform_iid"}},
            "learner": {"algorithm": "exp3alpha"}, "normalize": true}"#,
    );
    assert_eq!(cli(&["run", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]).0, 2);
    assert_eq!(cli(&["frobnicate"]).0, 2);
    assert_eq!(cli(&["run"]).0, 2);
}

#[test]
fn sweep_over_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bandit.json", BANDIT);
    let out = dir.path().join("out");
    let (code, _, _) = cli(&["sweep", "--config", &cfg, "--param", "horizon", "--values", "100,200", "--quiet", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "horizon,mean_regret,stderr,bound,bound_kind,eta,pass");
    assert!(lines[1].starts_with("100,"));
    assert!(lines[2].starts_with("200,"));
}
