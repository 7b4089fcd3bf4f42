use serde::Serialize;

use super::{Algorithm, LearnerState, OnlineLearner};
use crate::error::{LbError, Result};
use crate::game::{FeedbackKind, ProbabilityVector, RoundFeedback};
use crate::quantities::{tune_eta, unknown_horizon_term};

/// `4 log N`, the guess under which the first epoch runs with `eta = 1`.
pub fn default_initial_guess(num_experts: usize) -> f64 {
    4.0 * (num_experts as f64).ln()
}

/// Exp3.LB with a doubling schedule on the unknown-horizon quantity.
///
/// Each round adds the observable pessimistic contribution
/// `d(lambda)^2 / 2 + 2 sum_i (1 - lambda_i)^2 + 4 max_i (1 - lambda_i) d(lambda)`
/// to `accumulated`. Once `accumulated` passes `current_guess`, the guess is
/// doubled until it covers the total and the inner learner restarts with the
/// retuned rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingState {
    pub inner: LearnerState,
    pub current_guess: f64,
    /// Sum of per-round contributions since the start (never reset).
    pub accumulated: f64,
    /// Number of restarts so far.
    pub epoch: usize,
    pub initial_guess: f64,
    last_estimate: Vec<f64>,
}

impl DoublingState {
    pub fn new(num_experts: usize, initial_guess: Option<f64>) -> Result<Self> {
        let g0 = initial_guess.unwrap_or_else(|| default_initial_guess(num_experts));
        let eta = if num_experts < 2 {
            1.0
        } else {
            if !(g0.is_finite() && g0 > 0.0) {
                return Err(LbError::InvalidParameter(format!(
                    "initial guess must be positive, got {g0}"
                )));
            }
            tune_eta(g0, num_experts)?
        };
        Ok(DoublingState {
            inner: LearnerState::new(Algorithm::Exp3Lb, num_experts, eta, 0.0)?,
            current_guess: g0,
            accumulated: 0.0,
            epoch: 0,
            initial_guess: g0,
            last_estimate: vec![0.0; num_experts],
        })
    }

    pub fn eta(&self) -> f64 {
        self.inner.eta
    }
}

impl OnlineLearner for DoublingState {
    fn num_experts(&self) -> usize {
        self.inner.num_experts()
    }

    fn distribution(&self) -> &ProbabilityVector {
        self.inner.distribution()
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::LowerBounds
    }

    fn observe(&mut self, feedback: &RoundFeedback) -> Result<()> {
        let RoundFeedback::LowerBounds { lower_bounds, .. } = feedback else {
            return Err(LbError::IncompatibleFeedback {
                algorithm: "exp3lb_doubling",
                feedback: feedback.kind().name(),
            });
        };
        let contribution = unknown_horizon_term(lower_bounds)?;
        self.inner.observe(feedback)?;
        self.last_estimate = self.inner.last_estimate().to_vec();
        self.accumulated += contribution;
        let n = self.num_experts();
        if n >= 2 && self.accumulated > self.current_guess {
            while self.current_guess < self.accumulated {
                self.current_guess *= 2.0;
            }
            self.inner.reset(tune_eta(self.current_guess, n)?)?;
            self.epoch += 1;
        }
        Ok(())
    }

    fn cum_est_losses(&self) -> &[f64] {
        self.inner.cum_est_losses()
    }

    fn last_estimate(&self) -> &[f64] {
        &self.last_estimate
    }
}

/// Pure transition for the doubling wrapper.
pub fn doubling_step(
    state: &DoublingState,
    feedback: &RoundFeedback,
) -> Result<(DoublingState, ProbabilityVector)> {
    let mut next = state.clone();
    next.observe(feedback)?;
    let p = next.distribution().clone();
    Ok((next, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fb(lbs: &[f64]) -> RoundFeedback {
        RoundFeedback::LowerBounds {
            chosen: 0,
            chosen_loss: lbs[0],
            lower_bounds: lbs.to_vec(),
        }
    }

    #[test]
    fn initial_rate_is_one() {
        let d = DoublingState::new(5, None).unwrap();
        assert!((d.eta() - 1.0).abs() < 1e-15);
        assert_eq!(d.current_guess, 4.0 * 5f64.ln());
    }

    #[test]
    fn bandit_rounds_trigger_restarts() {
        // each bandit round contributes 2N = 8
        let mut d = DoublingState::new(4, None).unwrap();
        let g0 = d.current_guess;
        d.observe(&fb(&[0.0; 4])).unwrap();
        assert_eq!(d.accumulated, 8.0);
        assert!(d.epoch == 0 || d.current_guess >= 8.0);
        let mut epochs = vec![d.epoch];
        for _ in 0..99 {
            d.observe(&fb(&[0.0; 4])).unwrap();
            epochs.push(d.epoch);
        }
        assert_eq!(d.accumulated, 800.0);
        assert!(d.current_guess >= 800.0 && d.current_guess < 1600.0);
        let bound = (800.0f64 / g0).log2().ceil() as usize + 1;
        assert!(d.epoch <= bound, "epochs {} > {bound}", d.epoch);
        assert!(epochs.windows(2).all(|w| w[1] >= w[0]));
        assert!((d.eta() - tune_eta(d.current_guess, 4).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn full_information_needs_no_restart() {
        let mut d = DoublingState::new(3, None).unwrap();
        for _ in 0..1000 {
            d.observe(&fb(&[1.0, 1.0, 1.0])).unwrap();
        }
        assert_eq!(d.accumulated, 0.0);
        assert_eq!(d.epoch, 0);
    }

    #[test]
    fn single_expert_never_retunes() {
        let mut d = DoublingState::new(1, None).unwrap();
        for _ in 0..10 {
            d.observe(&fb(&[0.0])).unwrap();
        }
        assert_eq!(d.epoch, 0);
        assert_eq!(d.eta(), 1.0);
    }

    #[test]
    fn rejects_out_of_range_bounds() {
        let mut d = DoublingState::new(2, None).unwrap();
        assert!(d.observe(&fb(&[1.5, 0.0])).is_err());
        let full = RoundFeedback::FullLosses {
            chosen: 0,
            losses: vec![0.0, 0.0],
        };
        assert!(d.observe(&full).is_err());
    }

    #[test]
    fn step_matches_observe() {
        let d = DoublingState::new(2, Some(1.0)).unwrap();
        let (a, p) = doubling_step(&d, &fb(&[0.0, 0.5])).unwrap();
        assert_eq!(d.accumulated, 0.0);
        assert_eq!(a.distribution(), &p);
        assert!(a.epoch == 1);
    }
}
