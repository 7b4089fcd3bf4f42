use serde::Serialize;

/// Which kind of per-round observation a learner consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackKind {
    /// Every expert's loss (Hedge).
    FullLosses,
    /// Chosen loss plus all lower bounds.
    LowerBounds,
    /// Chosen loss plus all upper bounds and the round's slack cap.
    UpperBounds,
    /// Chosen loss plus arbitrary reference values `alpha`.
    Alphas,
}

impl FeedbackKind {
    pub fn name(self) -> &'static str {
        match self {
            FeedbackKind::FullLosses => "full-loss",
            FeedbackKind::LowerBounds => "lower-bound",
            FeedbackKind::UpperBounds => "upper-bound",
            FeedbackKind::Alphas => "alpha",
        }
    }
}

/// What the learner observes after acting in one round.
///
/// The partial-feedback variants carry exactly one loss value, the chosen
/// expert's; there is no field through which an unchosen loss could leak.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RoundFeedback {
    FullLosses {
        chosen: usize,
        losses: Vec<f64>,
    },
    LowerBounds {
        chosen: usize,
        chosen_loss: f64,
        lower_bounds: Vec<f64>,
    },
    UpperBounds {
        chosen: usize,
        chosen_loss: f64,
        upper_bounds: Vec<f64>,
        slack_cap: f64,
    },
    Alphas {
        chosen: usize,
        chosen_loss: f64,
        alphas: Vec<f64>,
    },
}

impl RoundFeedback {
    pub fn kind(&self) -> FeedbackKind {
        match self {
            RoundFeedback::FullLosses { .. } => FeedbackKind::FullLosses,
            RoundFeedback::LowerBounds { .. } => FeedbackKind::LowerBounds,
            RoundFeedback::UpperBounds { .. } => FeedbackKind::UpperBounds,
            RoundFeedback::Alphas { .. } => FeedbackKind::Alphas,
        }
    }

    pub fn chosen(&self) -> usize {
        match self {
            RoundFeedback::FullLosses { chosen, .. }
            | RoundFeedback::LowerBounds { chosen, .. }
            | RoundFeedback::UpperBounds { chosen, .. }
            | RoundFeedback::Alphas { chosen, .. } => *chosen,
        }
    }

    pub fn chosen_loss(&self) -> f64 {
        match self {
            RoundFeedback::FullLosses { chosen, losses } => losses[*chosen],
            RoundFeedback::LowerBounds { chosen_loss, .. }
            | RoundFeedback::UpperBounds { chosen_loss, .. }
            | RoundFeedback::Alphas { chosen_loss, .. } => *chosen_loss,
        }
    }

    /// Length of the per-expert vector carried by the record.
    pub fn width(&self) -> usize {
        match self {
            RoundFeedback::FullLosses { losses: v, .. }
            | RoundFeedback::LowerBounds { lower_bounds: v, .. }
            | RoundFeedback::UpperBounds { upper_bounds: v, .. }
            | RoundFeedback::Alphas { alphas: v, .. } => v.len(),
        }
    }
}
