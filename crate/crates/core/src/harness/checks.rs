//! Pass/fail comparisons of Monte Carlo estimates against theory.

use serde::Serialize;

use super::monte_carlo::run_replicates;
use super::plan::ExperimentPlan;
use crate::error::{LbError, Result};

/// Number of standard errors allowed above a bound.
pub const STDERR_ALLOWANCE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub pass: bool,
    /// `bound - mean`.
    pub margin: f64,
}

/// Passes iff `mean <= bound + 3 stderr` (a missing stderr counts as zero).
pub fn bound_check(mean: f64, std_error: Option<f64>, bound: f64) -> BoundCheck {
    BoundCheck {
        pass: mean <= bound + STDERR_ALLOWANCE * std_error.unwrap_or(0.0),
        margin: bound - mean,
    }
}

/// `delta + 3 sqrt(delta (1 - delta) / R)`.
pub fn binomial_limit(delta: f64, replicates: usize) -> f64 {
    delta + STDERR_ALLOWANCE * (delta * (1.0 - delta) / replicates as f64).sqrt()
}

/// The order statistic at sorted index `ceil(level * R) - 1`.
pub fn empirical_quantile(values: &[f64], level: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = ((level * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[k - 1]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationResult {
    pub expert: usize,
    pub threshold: f64,
    pub violation_fraction: f64,
    pub limit: f64,
    pub pass: bool,
}

/// Fraction of Exp3.LB.P replicates in which `L~_{i,T} > L_{i,T} + log(1/delta) / beta`
/// for the plan's designated expert, against the binomial allowance.
pub fn concentration_check(plan: &ExperimentPlan, delta: f64, replicates: usize, seed: u64) -> Result<ConcentrationResult> {
    let beta = plan.beta;
    if !(beta > 0.0) {
        return Err(LbError::InvalidParameter("concentration needs beta > 0".into()));
    }
    let max_s = plan.feed.slacks().into_iter().fold(0.0, f64::max);
    if beta * max_s > 1.0 {
        return Err(LbError::InvalidParameter(format!("beta * max slack = {} exceeds 1", beta * max_s)));
    }
    let i = plan.designated_expert;
    let threshold = plan.feed.cumulative_losses()[i] + (1.0 / delta).ln() / beta;
    let runs = run_replicates(plan, seed, replicates, false)?;
    let violations = runs.iter().filter(|r| r.final_cum_est[i] > threshold).count();
    let fraction = violations as f64 / replicates as f64;
    let limit = binomial_limit(delta, replicates);
    Ok(ConcentrationResult {
        expert: i,
        threshold,
        violation_fraction: fraction,
        limit,
        pass: fraction <= limit,
    })
}
