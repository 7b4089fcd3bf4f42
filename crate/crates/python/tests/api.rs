use lbexperts_py::api;
use serde_json::Value;

const CONFIG: &str = r#"{
  "scenario": {"kind": "generic_lb", "slack_fraction": 0.5, "num_experts": 3, "horizon": 200, "loss_model": {"model": "uniform_iid"}},
  "learner": {"algorithm": "exp3lb"},
  "replicates": 20,
  "seed": 4
}"#;

#[test]
fn generate_round_trips() {
    let text = api::generate(r#"{"kind": "bandit", "num_experts": 2, "horizon": 5, "loss_model": {"model": "uniform_iid"}, "seed": 1}"#).unwrap();
    let inst = lbexperts::GameInstance::from_json(&text).unwrap();
    assert_eq!((inst.num_experts(), inst.horizon()), (2, 5));
    assert!(inst.lower_bounds().iter().all(|v| *v == 0.0));
}

#[test]
fn run_and_estimate() {
    let run: Value = serde_json::from_str(&api::run(CONFIG, Some(9)).unwrap()).unwrap();
    assert_eq!(run["trace"]["rounds"].as_array().unwrap().len(), 200);
    assert_eq!(run["bound_kind"], "second_order");
    assert_eq!(api::run(CONFIG, Some(9)).unwrap(), api::run(CONFIG, Some(9)).unwrap());

    let est: Value = serde_json::from_str(&api::estimate(CONFIG).unwrap()).unwrap();
    assert_eq!(est["report"]["replicates"], 20);
    assert_eq!(est["curve"].as_array().unwrap().len(), 200);
}

#[test]
fn bad_input_is_an_error() {
    assert!(api::generate("{}").is_err());
    let err = api::estimate(&CONFIG.replace("exp3lb", "exp9")).unwrap_err();
    assert!(err.starts_with("<config>:"), "{err}");
}
