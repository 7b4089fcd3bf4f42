//! JSON-in, JSON-out entry points shared by the Python wrappers.

use lbexperts::environments::{generate_instance, ScenarioSpec};
use lbexperts::harness::{
    estimate_with_plan, parse_config, replicate_seed, run_episode, run_verify, ExperimentConfig, ExperimentPlan,
    VerifyOptions,
};
use serde_json::json;

pub type ApiResult = Result<String, String>;

fn config(text: &str) -> Result<ExperimentConfig, String> {
    parse_config(text, std::path::Path::new("<config>"), None).map_err(|e| e.to_string())
}

/// Scenario JSON to instance JSON.
pub fn generate(spec_json: &str) -> ApiResult {
    let spec: ScenarioSpec = serde_json::from_str(spec_json).map_err(|e| e.to_string())?;
    let inst = generate_instance(&spec).map_err(|e| e.to_string())?;
    Ok(inst.to_json())
}

/// One episode of the configured experiment; `seed` overrides the config's.
pub fn run(config_json: &str, seed: Option<u64>) -> ApiResult {
    let mut cfg = config(config_json)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let plan = ExperimentPlan::from_config(&cfg).map_err(|e| e.to_string())?;
    let trace = run_episode(&plan, replicate_seed(cfg.seed, 0)).map_err(|e| e.to_string())?;
    serde_json::to_string(&json!({
        "trace": trace,
        "theoretical_bound": plan.theoretical_bound,
        "bound_kind": plan.bound_kind,
        "eta": plan.eta,
        "beta": plan.beta,
    }))
    .map_err(|e| e.to_string())
}

/// Monte Carlo report plus the per-round curve.
pub fn estimate(config_json: &str) -> ApiResult {
    let cfg = config(config_json)?;
    let plan = ExperimentPlan::from_config(&cfg).map_err(|e| e.to_string())?;
    let (report, curve) = estimate_with_plan(&cfg, &plan).map_err(|e| e.to_string())?;
    serde_json::to_string(&json!({ "report": report, "curve": curve })).map_err(|e| e.to_string())
}

pub fn verify(seed: u64, replicates: Option<usize>) -> ApiResult {
    let report = run_verify(VerifyOptions { seed, replicates }).map_err(|e| e.to_string())?;
    serde_json::to_string(&report).map_err(|e| e.to_string())
}
