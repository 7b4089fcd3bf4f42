//! Monte Carlo pseudo-regret estimation over independent replicates.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use super::checks::{bound_check, empirical_quantile, BoundCheck};
use super::config::{ExperimentConfig, LearnerKind};
use super::episode::{simulate_episode, EpisodeSummary};
use super::plan::ExperimentPlan;
use crate::error::Result;
use crate::game::RandomStream;
use crate::quantities::BoundQuantities;

const CHUNK: usize = 64;

/// Seed of replicate `index`'s stream.
pub fn replicate_seed(seed: u64, index: usize) -> u64 {
    RandomStream::for_replicate(seed, index as u64).seed()
}

/// Runs `replicates` episodes (in parallel) and returns their summaries in
/// replicate order.
pub fn run_replicates(plan: &ExperimentPlan, seed: u64, replicates: usize, keep_path: bool) -> Result<Vec<EpisodeSummary>> {
    let starts: Vec<usize> = (0..replicates).step_by(CHUNK).collect();
    let chunks: Vec<Result<Vec<EpisodeSummary>>> = starts
        .par_iter()
        .map(|&start| {
            (start..(start + CHUNK).min(replicates))
                .map(|r| simulate_episode(plan, replicate_seed(seed, r), keep_path))
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(replicates);
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

/// Sample mean and standard error (`None` for a single value).
pub fn mean_and_stderr(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub round: usize,
    pub mean_regret: f64,
    pub stderr: Option<f64>,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantile {
    pub level: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretReport {
    pub algorithm: String,
    pub scenario: String,
    pub replicates: usize,
    pub seed: u64,
    pub mean_pseudo_regret: f64,
    /// Sample standard deviation over `sqrt(R)`; absent when `R = 1`.
    pub std_error: Option<f64>,
    pub per_replicate_regret: Vec<f64>,
    pub theoretical_bound: f64,
    pub bound_kind: String,
    pub bound_check: BoundCheck,
    pub quantities: BoundQuantities,
    pub eta_used: f64,
    pub beta_used: f64,
    /// Exp3.LB.P only: fraction of replicates where the designated expert's
    /// estimate exceeded `L + log(1/delta) / beta`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation_fraction: Option<f64>,
    /// Exp3.LB.P only: empirical `(1 - delta)`-quantile of the regret.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regret_quantile: Option<Quantile>,
    pub metadata: BTreeMap<String, Value>,
}

/// Runs the configured experiment and aggregates the per-replicate regrets.
pub fn estimate_pseudo_regret(cfg: &ExperimentConfig) -> Result<(RegretReport, Vec<CurvePoint>)> {
    let plan = ExperimentPlan::from_config(cfg)?;
    estimate_with_plan(cfg, &plan)
}

pub fn estimate_with_plan(cfg: &ExperimentConfig, plan: &ExperimentPlan) -> Result<(RegretReport, Vec<CurvePoint>)> {
    let runs = run_replicates(plan, cfg.seed, cfg.replicates, true)?;
    let regrets: Vec<f64> = runs.iter().map(|r| r.final_regret).collect();
    let (mean, std_error) = mean_and_stderr(&regrets);

    let t = plan.horizon();
    let mut means = vec![0.0; t];
    let mut m2 = vec![0.0; t];
    for (k, run) in runs.iter().enumerate() {
        let count = (k + 1) as f64;
        for (r, &x) in run.regret_path.iter().enumerate() {
            let delta = x - means[r];
            means[r] += delta / count;
            m2[r] += delta * (x - means[r]);
        }
    }
    let reps = runs.len() as f64;
    let curve = plan
        .bound_curve()
        .into_iter()
        .enumerate()
        .map(|(r, bound)| CurvePoint {
            round: r + 1,
            mean_regret: means[r],
            stderr: (runs.len() > 1).then(|| (m2[r] / (reps - 1.0) / reps).sqrt()),
            bound,
        })
        .collect();

    let (violation_fraction, regret_quantile) = if plan.kind == LearnerKind::Exp3lbp && plan.beta > 0.0 {
        let i = plan.designated_expert;
        let threshold = plan.feed.cumulative_losses()[i] + (1.0 / cfg.delta).ln() / plan.beta;
        let violations = runs.iter().filter(|r| r.final_cum_est[i] > threshold).count();
        (
            Some(violations as f64 / reps),
            Some(Quantile {
                level: 1.0 - cfg.delta,
                value: empirical_quantile(&regrets, 1.0 - cfg.delta),
            }),
        )
    } else {
        (None, None)
    };

    let mut metadata = plan.metadata();
    metadata.insert("instance_seed".into(), serde_json::json!(cfg.instance_seed()));
    metadata.insert("replicate_seeds".into(), serde_json::json!("seed xor replicate index"));
    let report = RegretReport {
        algorithm: plan.kind.name().to_string(),
        scenario: cfg.scenario.kind.name().to_string(),
        replicates: cfg.replicates,
        seed: cfg.seed,
        mean_pseudo_regret: mean,
        std_error,
        bound_check: bound_check(mean, std_error, plan.theoretical_bound),
        per_replicate_regret: regrets,
        theoretical_bound: plan.theoretical_bound,
        bound_kind: plan.bound_kind.clone(),
        quantities: plan.quantities.clone(),
        eta_used: plan.eta,
        beta_used: plan.beta,
        violation_fraction,
        regret_quantile,
        metadata,
    };
    Ok((report, curve))
}
