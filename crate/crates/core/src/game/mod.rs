//! Shared domain types: game instances, distributions, the random stream,
//! feedback records and episode traces.

mod feedback;
mod instance;
mod rng;
mod simplex;
mod trace;

pub use feedback::{FeedbackKind, RoundFeedback};
pub use instance::{normalize_instance, validate_instance, GameInstance, InstanceDocument};
pub use rng::RandomStream;
pub use simplex::{distribution_from_cumloss, sample_action, ProbabilityVector, SUM_TOLERANCE};
pub use trace::{RoundRecord, RunTrace};
