//! Exponential-weights learners for the best-expert problem when, besides
//! its own loss, the learner observes a lower bound on every expert's loss.
//!
//! Zero slack between loss and bound is full information (the learners reduce
//! to Hedge); an uninformative bound of zero is the bandit setting (Exp3).
//! The crate also ships adversary generators and a Monte Carlo harness that
//! compares empirical pseudo-regret with the matching regret bounds.

pub mod environments;
pub mod error;
pub mod game;
pub mod harness;
pub mod learners;
pub mod quantities;

pub use error::{LbError, Result};
pub use game::{
    distribution_from_cumloss, normalize_instance, sample_action, validate_instance, FeedbackKind,
    GameInstance, ProbabilityVector, RandomStream, RoundFeedback, RoundRecord, RunTrace,
};
pub use learners::{Algorithm, AnyLearner, DoublingState, LearnerState, OnlineLearner};
pub use quantities::{BetaMode, BoundQuantities, EtaPreset};
