use crate::environments::feedback_for;
use crate::error::Result;
use crate::game::{sample_action, RandomStream, RoundRecord, RunTrace};
use crate::learners::OnlineLearner;

use super::plan::ExperimentPlan;

/// Final state of one episode without the per-round detail.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSummary {
    /// Regret after each round; empty unless requested.
    pub regret_path: Vec<f64>,
    pub final_regret: f64,
    pub algorithm_loss: f64,
    /// Cumulative estimated losses after the last round (feed coordinates).
    pub final_cum_est: Vec<f64>,
}

/// Plays the whole game once, recording every round.
pub fn run_episode(plan: &ExperimentPlan, seed: u64) -> Result<RunTrace> {
    let mut rng = RandomStream::new(seed);
    let mut learner = plan.learner()?;
    let kind = learner.feedback_kind();
    let n = plan.num_experts();
    let mut rounds = Vec::with_capacity(plan.horizon());
    let mut algorithm_loss = 0.0;
    for t in 0..plan.horizon() {
        let p = learner.distribution().clone();
        let i = sample_action(&p, &mut rng);
        let fb = feedback_for(&plan.feed, t, i, kind)?;
        learner.observe(&fb)?;
        let realized = plan.original.loss(i, t);
        algorithm_loss += realized;
        rounds.push(RoundRecord {
            distribution: p.into_vec(),
            chosen: i,
            realized_loss: realized,
            estimated_losses: learner.last_estimate().to_vec(),
            cum_est_losses: learner.cum_est_losses().to_vec(),
            regret: algorithm_loss - plan.best_loss_after(t),
        });
    }
    debug_assert_eq!(rounds.first().map_or(n, |r| r.distribution.len()), n);
    Ok(RunTrace {
        rounds,
        algorithm_loss,
        expert_losses: plan.original.cumulative_losses(),
    })
}

/// Plays the game once, keeping only what Monte Carlo aggregation needs.
pub fn simulate_episode(plan: &ExperimentPlan, seed: u64, keep_path: bool) -> Result<EpisodeSummary> {
    let mut rng = RandomStream::new(seed);
    let mut learner = plan.learner()?;
    let kind = learner.feedback_kind();
    let mut path = Vec::with_capacity(if keep_path { plan.horizon() } else { 0 });
    let mut algorithm_loss = 0.0;
    for t in 0..plan.horizon() {
        let i = sample_action(learner.distribution(), &mut rng);
        let fb = feedback_for(&plan.feed, t, i, kind)?;
        learner.observe(&fb)?;
        algorithm_loss += plan.original.loss(i, t);
        if keep_path {
            path.push(algorithm_loss - plan.best_loss_after(t));
        }
    }
    Ok(EpisodeSummary {
        regret_path: path,
        final_regret: algorithm_loss - plan.best_loss_after(plan.horizon() - 1),
        algorithm_loss,
        final_cum_est: learner.cum_est_losses().to_vec(),
    })
}
