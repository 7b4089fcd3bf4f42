use serde::Serialize;

/// One round of an episode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    /// Distribution the action was drawn from.
    pub distribution: Vec<f64>,
    pub chosen: usize,
    pub realized_loss: f64,
    /// Per-expert loss estimates formed from this round's feedback.
    pub estimated_losses: Vec<f64>,
    /// Running sums of `estimated_losses` (the learner's state after the round).
    pub cum_est_losses: Vec<f64>,
    /// `L_{A,t} - min_i L_{i,t}` after this round.
    pub regret: f64,
}

/// Full record of one episode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunTrace {
    pub rounds: Vec<RoundRecord>,
    /// Cumulative loss of the learner after the final round.
    pub algorithm_loss: f64,
    /// Cumulative true loss of each expert after the final round.
    pub expert_losses: Vec<f64>,
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn final_regret(&self) -> f64 {
        self.rounds.last().map_or(0.0, |r| r.regret)
    }

    pub fn actions(&self) -> Vec<usize> {
        self.rounds.iter().map(|r| r.chosen).collect()
    }
}
