//! The adversary's oblivious assignment of losses and loss bounds.

use serde::{Deserialize, Serialize};

use crate::error::{LbError, Result};

/// Losses, lower bounds and optional upper bounds for `N` experts over `T`
/// rounds.
///
/// Matrices are stored round-major: the `N` entries of round `t` are
/// contiguous. The JSON form is row-per-expert (see [`InstanceDocument`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceDocument", into = "InstanceDocument")]
pub struct GameInstance {
    num_experts: usize,
    horizon: usize,
    losses: Vec<f64>,
    lower_bounds: Vec<f64>,
    upper_bounds: Option<Vec<f64>>,
    slack_caps: Option<Vec<f64>>,
}

/// Serialized layout: one row per expert, `horizon` entries each.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceDocument {
    pub num_experts: usize,
    pub horizon: usize,
    pub losses: Vec<Vec<f64>>,
    pub lower_bounds: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_bounds: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slack_caps: Option<Vec<f64>>,
}

fn rows_to_round_major(rows: &[Vec<f64>], n: usize, t: usize, what: &str) -> Result<Vec<f64>> {
    if rows.len() != n {
        return Err(LbError::DimensionMismatch(format!(
            "{what}: expected {n} expert rows, got {}",
            rows.len()
        )));
    }
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != t) {
        return Err(LbError::DimensionMismatch(format!(
            "{what}: row {i} has {} entries, expected {t}",
            row.len()
        )));
    }
    let mut out = Vec::with_capacity(n * t);
    for round in 0..t {
        out.extend(rows.iter().map(|r| r[round]));
    }
    Ok(out)
}

fn round_major_to_rows(data: &[f64], n: usize, t: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..t).map(|round| data[round * n + i]).collect())
        .collect()
}

impl GameInstance {
    /// Builds an instance from round-major matrices. Only shapes are checked
    /// here; call [`GameInstance::validate`] for the loss/bound invariants.
    pub fn new(
        num_experts: usize,
        horizon: usize,
        losses: Vec<f64>,
        lower_bounds: Vec<f64>,
        upper_bounds: Option<Vec<f64>>,
        slack_caps: Option<Vec<f64>>,
    ) -> Result<Self> {
        if num_experts == 0 {
            return Err(LbError::InvalidParameter("num_experts must be positive".into()));
        }
        if horizon == 0 {
            return Err(LbError::InvalidParameter("horizon must be positive".into()));
        }
        let cells = num_experts * horizon;
        let check = |len: usize, what: &str| {
            if len == cells {
                Ok(())
            } else {
                Err(LbError::DimensionMismatch(format!(
                    "{what}: expected {cells} cells, got {len}"
                )))
            }
        };
        check(losses.len(), "losses")?;
        check(lower_bounds.len(), "lower_bounds")?;
        match (&upper_bounds, &slack_caps) {
            (Some(ub), Some(caps)) => {
                check(ub.len(), "upper_bounds")?;
                if caps.len() != horizon {
                    return Err(LbError::DimensionMismatch(format!(
                        "slack_caps: expected {horizon} entries, got {}",
                        caps.len()
                    )));
                }
            }
            (None, None) => {}
            _ => {
                return Err(LbError::DimensionMismatch(
                    "upper_bounds and slack_caps must be given together".into(),
                ))
            }
        }
        Ok(Self {
            num_experts,
            horizon,
            losses,
            lower_bounds,
            upper_bounds,
            slack_caps,
        })
    }

    /// Builds an instance from row-per-expert matrices.
    pub fn from_rows(losses: &[Vec<f64>], lower_bounds: &[Vec<f64>]) -> Result<Self> {
        let n = losses.len();
        let t = losses.first().map_or(0, Vec::len);
        Self::new(
            n,
            t,
            rows_to_round_major(losses, n, t, "losses")?,
            rows_to_round_major(lower_bounds, n, t, "lower_bounds")?,
            None,
            None,
        )
    }

    pub fn num_experts(&self) -> usize {
        self.num_experts
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn has_upper_bounds(&self) -> bool {
        self.upper_bounds.is_some()
    }

    pub fn loss(&self, expert: usize, round: usize) -> f64 {
        self.losses[round * self.num_experts + expert]
    }

    pub fn lower_bound(&self, expert: usize, round: usize) -> f64 {
        self.lower_bounds[round * self.num_experts + expert]
    }

    fn round_slice<'a>(&self, data: &'a [f64], round: usize) -> &'a [f64] {
        &data[round * self.num_experts..(round + 1) * self.num_experts]
    }

    pub fn round_losses(&self, round: usize) -> &[f64] {
        self.round_slice(&self.losses, round)
    }

    pub fn round_lower_bounds(&self, round: usize) -> &[f64] {
        self.round_slice(&self.lower_bounds, round)
    }

    pub fn round_upper_bounds(&self, round: usize) -> Option<&[f64]> {
        self.upper_bounds.as_deref().map(|ub| self.round_slice(ub, round))
    }

    pub fn slack_cap(&self, round: usize) -> Option<f64> {
        self.slack_caps.as_ref().map(|c| c[round])
    }

    /// Round-major loss matrix.
    pub fn losses(&self) -> &[f64] {
        &self.losses
    }

    /// Round-major lower-bound matrix.
    pub fn lower_bounds(&self) -> &[f64] {
        &self.lower_bounds
    }

    pub fn upper_bounds(&self) -> Option<&[f64]> {
        self.upper_bounds.as_deref()
    }

    pub fn slack_caps(&self) -> Option<&[f64]> {
        self.slack_caps.as_deref()
    }

    /// Round-major slack matrix `l - lambda`.
    pub fn slacks(&self) -> Vec<f64> {
        self.losses
            .iter()
            .zip(&self.lower_bounds)
            .map(|(l, lb)| l - lb)
            .collect()
    }

    /// Cumulative true loss of every expert after all rounds.
    pub fn cumulative_losses(&self) -> Vec<f64> {
        let mut cum = vec![0.0; self.num_experts];
        for round in 0..self.horizon {
            for (c, l) in cum.iter_mut().zip(self.round_losses(round)) {
                *c += l;
            }
        }
        cum
    }

    /// Checks every invariant, reporting the first violating cell in
    /// round-then-expert order.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_experts;
        if self.losses.iter().any(|x| !x.is_finite()) {
            return Err(LbError::NonFinite("losses"));
        }
        if self.lower_bounds.iter().any(|x| !x.is_finite()) {
            return Err(LbError::NonFinite("lower_bounds"));
        }
        for (cell, (l, lb)) in self.losses.iter().zip(&self.lower_bounds).enumerate() {
            if lb > l {
                return Err(LbError::LowerBoundAboveLoss {
                    expert: cell % n,
                    round: cell / n,
                });
            }
        }
        if let (Some(ub), Some(caps)) = (&self.upper_bounds, &self.slack_caps) {
            if ub.iter().chain(caps).any(|x| !x.is_finite()) {
                return Err(LbError::NonFinite("upper_bounds"));
            }
            for (cell, (l, u)) in self.losses.iter().zip(ub).enumerate() {
                let (expert, round) = (cell % n, cell / n);
                if u < l {
                    return Err(LbError::UpperBoundBelowLoss { expert, round });
                }
                if u - l > caps[round] {
                    return Err(LbError::SlackCapExceeded { expert, round });
                }
            }
        }
        Ok(())
    }

    /// Subtracts `c_t = min_i lambda_{i,t}` from every loss and bound of
    /// round `t`. Slacks, spreads and regret are unchanged.
    pub fn normalized(&self) -> Result<Self> {
        self.validate()?;
        let n = self.num_experts;
        let mut out = self.clone();
        for round in 0..self.horizon {
            let shift = self
                .round_lower_bounds(round)
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            let range = round * n..(round + 1) * n;
            for x in &mut out.losses[range.clone()] {
                *x -= shift;
            }
            for x in &mut out.lower_bounds[range.clone()] {
                *x -= shift;
            }
            if let Some(ub) = &mut out.upper_bounds {
                for x in &mut ub[range] {
                    *x -= shift;
                }
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization cannot fail")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Free-function form of [`GameInstance::validate`].
pub fn validate_instance(inst: &GameInstance) -> Result<()> {
    inst.validate()
}

/// Free-function form of [`GameInstance::normalized`].
pub fn normalize_instance(inst: &GameInstance) -> Result<GameInstance> {
    inst.normalized()
}

impl TryFrom<InstanceDocument> for GameInstance {
    type Error = LbError;

    fn try_from(doc: InstanceDocument) -> Result<Self> {
        let (n, t) = (doc.num_experts, doc.horizon);
        let upper_bounds = doc
            .upper_bounds
            .as_deref()
            .map(|rows| rows_to_round_major(rows, n, t, "upper_bounds"))
            .transpose()?;
        GameInstance::new(
            n,
            t,
            rows_to_round_major(&doc.losses, n, t, "losses")?,
            rows_to_round_major(&doc.lower_bounds, n, t, "lower_bounds")?,
            upper_bounds,
            doc.slack_caps,
        )
    }
}

impl From<GameInstance> for InstanceDocument {
    fn from(inst: GameInstance) -> Self {
        let (n, t) = (inst.num_experts, inst.horizon);
        InstanceDocument {
            num_experts: n,
            horizon: t,
            losses: round_major_to_rows(&inst.losses, n, t),
            lower_bounds: round_major_to_rows(&inst.lower_bounds, n, t),
            upper_bounds: inst.upper_bounds.map(|ub| round_major_to_rows(&ub, n, t)),
            slack_caps: inst.slack_caps,
        }
    }
}
