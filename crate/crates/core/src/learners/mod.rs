//! Exponential-weights learners sharing one step interface: observe a
//! round's feedback, add the loss estimate into the cumulative estimates,
//! and emit the next distribution.

mod doubling;
mod estimators;

use serde::{Deserialize, Serialize};

use crate::error::{LbError, Result};
use crate::game::{distribution_from_cumloss, FeedbackKind, ProbabilityVector, RoundFeedback};

pub use doubling::{default_initial_guess, doubling_step, DoublingState};
pub use estimators::{
    correction_factor, exp3_estimate, exp3alpha_estimate, exp3lb_estimate, exp3lbp_estimate,
    exp3ub_alphas,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Full-information exponential weights.
    Hedge,
    /// Bandit exponential weights; ignores any side information.
    Exp3,
    /// Lower-bound feedback.
    Exp3Lb,
    /// Arbitrary reference values `alpha <= l`.
    Exp3Alpha,
    /// Upper-bound feedback, via `alpha = upsilon - M`.
    Exp3Ub,
    /// Lower-bound feedback with the biased, high-probability estimate.
    Exp3LbP,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Hedge => "hedge",
            Algorithm::Exp3 => "exp3",
            Algorithm::Exp3Lb => "exp3lb",
            Algorithm::Exp3Alpha => "exp3alpha",
            Algorithm::Exp3Ub => "exp3ub",
            Algorithm::Exp3LbP => "exp3lbp",
        }
    }

    /// The feedback this learner is run with.
    pub fn feedback_kind(self) -> FeedbackKind {
        match self {
            Algorithm::Hedge => FeedbackKind::FullLosses,
            Algorithm::Exp3 | Algorithm::Exp3Lb | Algorithm::Exp3LbP => FeedbackKind::LowerBounds,
            Algorithm::Exp3Alpha => FeedbackKind::Alphas,
            Algorithm::Exp3Ub => FeedbackKind::UpperBounds,
        }
    }

    fn accepts(self, kind: FeedbackKind) -> bool {
        match self {
            Algorithm::Exp3 => kind != FeedbackKind::FullLosses,
            _ => kind == self.feedback_kind(),
        }
    }
}

/// Interface the episode runner drives.
pub trait OnlineLearner {
    fn num_experts(&self) -> usize;
    /// Distribution to draw the next action from.
    fn distribution(&self) -> &ProbabilityVector;
    fn feedback_kind(&self) -> FeedbackKind;
    fn observe(&mut self, feedback: &RoundFeedback) -> Result<()>;
    fn cum_est_losses(&self) -> &[f64];
    /// The estimate formed from the most recent feedback.
    fn last_estimate(&self) -> &[f64];
}

/// State of a plain (fixed-rate) learner.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LearnerState {
    pub algorithm: Algorithm,
    pub eta: f64,
    /// Bias parameter; zero unless the algorithm is `Exp3LbP`.
    pub beta: f64,
    pub cum_est_losses: Vec<f64>,
    /// Number of rounds observed so far.
    pub round: usize,
    distribution: ProbabilityVector,
    last_estimate: Vec<f64>,
}

impl LearnerState {
    pub fn new(algorithm: Algorithm, num_experts: usize, eta: f64, beta: f64) -> Result<Self> {
        if num_experts == 0 {
            return Err(LbError::InvalidParameter("num_experts must be positive".into()));
        }
        if !(eta.is_finite() && eta > 0.0) {
            return Err(LbError::InvalidParameter(format!("eta must be positive, got {eta}")));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(LbError::InvalidParameter(format!("beta must be nonnegative, got {beta}")));
        }
        if beta != 0.0 && algorithm != Algorithm::Exp3LbP {
            return Err(LbError::InvalidParameter(format!(
                "{} takes no beta parameter",
                algorithm.name()
            )));
        }
        Ok(LearnerState {
            algorithm,
            eta,
            beta,
            cum_est_losses: vec![0.0; num_experts],
            round: 0,
            distribution: ProbabilityVector::uniform(num_experts)?,
            last_estimate: vec![0.0; num_experts],
        })
    }

    /// Forgets all observations, keeping the parameters.
    pub fn reset(&mut self, eta: f64) -> Result<()> {
        *self = LearnerState::new(self.algorithm, self.cum_est_losses.len(), eta, self.beta)?;
        Ok(())
    }

    pub fn estimate(&self, feedback: &RoundFeedback) -> Result<Vec<f64>> {
        let n = self.cum_est_losses.len();
        if !self.algorithm.accepts(feedback.kind()) {
            return Err(LbError::IncompatibleFeedback {
                algorithm: self.algorithm.name(),
                feedback: feedback.kind().name(),
            });
        }
        if feedback.width() != n {
            return Err(LbError::DimensionMismatch(format!(
                "feedback for {} experts, learner has {n}",
                feedback.width()
            )));
        }
        if feedback.chosen() >= n {
            return Err(LbError::IndexOutOfRange {
                index: feedback.chosen(),
                len: n,
            });
        }
        let p = &self.distribution;
        match (self.algorithm, feedback) {
            (Algorithm::Hedge, RoundFeedback::FullLosses { losses, .. }) => {
                if losses.iter().any(|l| !l.is_finite()) {
                    return Err(LbError::NonFinite("losses"));
                }
                Ok(losses.clone())
            }
            (Algorithm::Exp3, fb) => exp3_estimate(fb.chosen(), fb.chosen_loss(), p),
            (
                Algorithm::Exp3Lb,
                RoundFeedback::LowerBounds {
                    chosen,
                    chosen_loss,
                    lower_bounds,
                },
            ) => exp3lb_estimate(*chosen, *chosen_loss, lower_bounds, p),
            (
                Algorithm::Exp3LbP,
                RoundFeedback::LowerBounds {
                    chosen,
                    chosen_loss,
                    lower_bounds,
                },
            ) => exp3lbp_estimate(*chosen, *chosen_loss, lower_bounds, p, self.beta),
            (
                Algorithm::Exp3Alpha,
                RoundFeedback::Alphas {
                    chosen,
                    chosen_loss,
                    alphas,
                },
            ) => exp3alpha_estimate(*chosen, *chosen_loss, alphas, p),
            (
                Algorithm::Exp3Ub,
                RoundFeedback::UpperBounds {
                    chosen,
                    chosen_loss,
                    upper_bounds,
                    slack_cap,
                },
            ) => {
                let alphas = exp3ub_alphas(upper_bounds, *slack_cap);
                exp3alpha_estimate(*chosen, *chosen_loss, &alphas, p)
            }
            _ => unreachable!("accepts() admitted a mismatched feedback kind"),
        }
    }

    fn apply(&mut self, estimate: Vec<f64>) -> Result<()> {
        for (cum, e) in self.cum_est_losses.iter_mut().zip(&estimate) {
            *cum += e;
        }
        if self.cum_est_losses.iter().any(|v| !v.is_finite()) {
            return Err(LbError::NonFinite("cumulative estimated losses"));
        }
        self.distribution = distribution_from_cumloss(self.eta, &self.cum_est_losses)?;
        self.last_estimate = estimate;
        self.round += 1;
        Ok(())
    }
}

impl OnlineLearner for LearnerState {
    fn num_experts(&self) -> usize {
        self.cum_est_losses.len()
    }

    fn distribution(&self) -> &ProbabilityVector {
        &self.distribution
    }

    fn feedback_kind(&self) -> FeedbackKind {
        self.algorithm.feedback_kind()
    }

    fn observe(&mut self, feedback: &RoundFeedback) -> Result<()> {
        let estimate = self.estimate(feedback)?;
        self.apply(estimate)
    }

    fn cum_est_losses(&self) -> &[f64] {
        &self.cum_est_losses
    }

    fn last_estimate(&self) -> &[f64] {
        &self.last_estimate
    }
}

/// Pure transition: the updated state and the distribution for the next round.
pub fn learner_step(state: &LearnerState, feedback: &RoundFeedback) -> Result<(LearnerState, ProbabilityVector)> {
    let mut next = state.clone();
    next.observe(feedback)?;
    let p = next.distribution.clone();
    Ok((next, p))
}

/// Full-information step from a bare loss vector.
pub fn hedge_step(state: &LearnerState, losses: &[f64]) -> Result<(LearnerState, ProbabilityVector)> {
    learner_step(
        state,
        &RoundFeedback::FullLosses {
            chosen: 0,
            losses: losses.to_vec(),
        },
    )
}

/// Either a fixed-rate learner or the doubling-trick wrapper.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AnyLearner {
    Plain(LearnerState),
    Doubling(DoublingState),
}

impl AnyLearner {
    fn inner(&self) -> &dyn OnlineLearner {
        match self {
            AnyLearner::Plain(s) => s,
            AnyLearner::Doubling(d) => d,
        }
    }
}

impl OnlineLearner for AnyLearner {
    fn num_experts(&self) -> usize {
        self.inner().num_experts()
    }

    fn distribution(&self) -> &ProbabilityVector {
        self.inner().distribution()
    }

    fn feedback_kind(&self) -> FeedbackKind {
        self.inner().feedback_kind()
    }

    fn observe(&mut self, feedback: &RoundFeedback) -> Result<()> {
        match self {
            AnyLearner::Plain(s) => s.observe(feedback),
            AnyLearner::Doubling(d) => d.observe(feedback),
        }
    }

    fn cum_est_losses(&self) -> &[f64] {
        self.inner().cum_est_losses()
    }

    fn last_estimate(&self) -> &[f64] {
        self.inner().last_estimate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lb_feedback(chosen: usize, losses: &[f64], lbs: &[f64]) -> RoundFeedback {
        RoundFeedback::LowerBounds {
            chosen,
            chosen_loss: losses[chosen],
            lower_bounds: lbs.to_vec(),
        }
    }

    #[test]
    fn starts_uniform() {
        for alg in [Algorithm::Hedge, Algorithm::Exp3, Algorithm::Exp3Lb, Algorithm::Exp3Ub] {
            let s = LearnerState::new(alg, 4, 0.3, 0.0).unwrap();
            assert_eq!(s.distribution().as_slice(), &[0.25; 4]);
            assert_eq!(s.cum_est_losses, vec![0.0; 4]);
        }
    }

    #[test]
    fn hedge_examples() {
        let s = LearnerState::new(Algorithm::Hedge, 2, 2f64.ln(), 0.0).unwrap();
        let (s, p) = hedge_step(&s, &[0.0, 1.0]).unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.round, 1);

        let mut a = LearnerState::new(Algorithm::Hedge, 3, 0.7, 0.0).unwrap();
        for _ in 0..50 {
            a = hedge_step(&a, &[0.4, 0.4, 0.4]).unwrap().0;
        }
        for &pi in a.distribution().as_slice() {
            assert!((pi - 1.0 / 3.0).abs() < 1e-15);
        }

        let base = LearnerState::new(Algorithm::Hedge, 3, 0.7, 0.0).unwrap();
        let (_, p1) = hedge_step(&base, &[0.1, 0.5, 0.3]).unwrap();
        let (_, p2) = hedge_step(&base, &[5.1, 5.5, 5.3]).unwrap();
        for (x, y) in p1.as_slice().iter().zip(p2.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_mismatched_feedback() {
        let mut s = LearnerState::new(Algorithm::Hedge, 2, 1.0, 0.0).unwrap();
        let err = s.observe(&lb_feedback(0, &[0.5, 0.5], &[0.0, 0.0])).unwrap_err();
        assert!(matches!(err, LbError::IncompatibleFeedback { .. }));

        let mut s = LearnerState::new(Algorithm::Exp3Lb, 2, 1.0, 0.0).unwrap();
        assert!(s.observe(&lb_feedback(0, &[0.5, 0.5, 0.5], &[0.0; 3])).is_err());
        assert!(LearnerState::new(Algorithm::Exp3Lb, 2, 1.0, 0.5).is_err());
        assert!(LearnerState::new(Algorithm::Exp3Lb, 2, 0.0, 0.0).is_err());
    }

    #[test]
    fn step_is_pure() {
        let s = LearnerState::new(Algorithm::Exp3Lb, 2, 1.0, 0.0).unwrap();
        let fb = lb_feedback(1, &[0.2, 0.9], &[0.1, 0.3]);
        let (a, pa) = learner_step(&s, &fb).unwrap();
        let (b, pb) = learner_step(&s, &fb).unwrap();
        assert_eq!(a, b);
        assert_eq!(pa, pb);
        assert_eq!(s.round, 0);
        assert_eq!(a.cum_est_losses[0], 0.1);
        assert!((a.cum_est_losses[1] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn exp3_ignores_side_information() {
        let s = LearnerState::new(Algorithm::Exp3, 2, 1.0, 0.0).unwrap();
        let (a, _) = learner_step(&s, &lb_feedback(0, &[0.4, 0.9], &[0.3, 0.8])).unwrap();
        assert_eq!(a.cum_est_losses, vec![0.8, 0.0]);
    }
}
