//! Scalar quantities of a loss sequence, learning-rate and bias tunings,
//! regret-bound expressions, and the log-sum-exp potential.
//!
//! Matrices are round-major slices with `num_experts` entries per round.
//! `log` is the natural logarithm throughout.

use serde::{Deserialize, Serialize};

use crate::error::{LbError, Result};
use crate::game::{GameInstance, ProbabilityVector};

/// `max_i x_i - min_i x_i`.
pub fn spread(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(LbError::Empty("spread"));
    }
    Ok(spread_unchecked(x))
}

fn spread_unchecked(x: &[f64]) -> f64 {
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    hi - lo
}

/// Sum over rounds of the squared spread.
pub fn relative_quadratic_variation<R: AsRef<[f64]>>(rounds: &[R]) -> Result<f64> {
    let Some(first) = rounds.first() else {
        return Ok(0.0);
    };
    let n = first.as_ref().len();
    let mut total = 0.0;
    for (t, r) in rounds.iter().enumerate() {
        let r = r.as_ref();
        if r.len() != n {
            return Err(LbError::DimensionMismatch(format!(
                "round {t} has {} entries, expected {n}",
                r.len()
            )));
        }
        let d = spread(r)?;
        total += d * d;
    }
    Ok(total)
}

fn check_shape(data: &[f64], num_experts: usize, what: &str) -> Result<usize> {
    if num_experts == 0 {
        return Err(LbError::InvalidParameter("num_experts must be positive".into()));
    }
    if data.len() % num_experts != 0 {
        return Err(LbError::DimensionMismatch(format!(
            "{what}: {} cells is not a multiple of {num_experts}",
            data.len()
        )));
    }
    Ok(data.len() / num_experts)
}

/// The terms making up the second-order regret quantities of a game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundQuantities {
    /// Relative quadratic variation of the lower bounds.
    pub q_lb: f64,
    /// `sum_t ||s_t||^2`.
    pub sum_sq_slack: f64,
    /// `sum_t max_i s_{i,t} * d(lambda_t)`.
    pub hybrid: f64,
    /// `sum_t max_i s_{i,t}^2`, used by the explicit high-probability bound.
    pub sum_max_sq_slack: f64,
    /// `q_lb / 2 + 2 sum_sq_slack + 4 hybrid`.
    #[serde(rename = "Q")]
    pub q_second_order: f64,
    /// `4 (q_lb + sum_sq_slack)`.
    #[serde(rename = "Q_prime")]
    pub q_prime: f64,
    #[serde(rename = "Q_uh", default, skip_serializing_if = "Option::is_none")]
    pub q_uh: Option<f64>,
}

impl BoundQuantities {
    /// Quantities of an instance's lower bounds and slacks.
    pub fn for_instance(inst: &GameInstance) -> Result<Self> {
        second_order_q(inst.lower_bounds(), &inst.slacks(), inst.num_experts())
    }

    /// Same, plus the unknown-horizon quantity (requires bounds in `[0, 1]`).
    pub fn for_instance_with_uh(inst: &GameInstance) -> Result<Self> {
        let mut q = Self::for_instance(inst)?;
        q.q_uh = Some(q_unknown_horizon(inst.lower_bounds(), inst.num_experts())?);
        Ok(q)
    }
}

/// Evaluates every second-order quantity for the given reference values
/// (lower bounds, or any `alpha`) and slacks.
pub fn second_order_q(lower_bounds: &[f64], slacks: &[f64], num_experts: usize) -> Result<BoundQuantities> {
    let horizon = check_shape(lower_bounds, num_experts, "lower_bounds")?;
    if slacks.len() != lower_bounds.len() {
        return Err(LbError::DimensionMismatch(format!(
            "slacks have {} cells, lower_bounds {}",
            slacks.len(),
            lower_bounds.len()
        )));
    }
    let mut q_lb = 0.0;
    let mut sum_sq_slack = 0.0;
    let mut hybrid = 0.0;
    let mut sum_max_sq_slack = 0.0;
    for t in 0..horizon {
        let lb = &lower_bounds[t * num_experts..(t + 1) * num_experts];
        let s = &slacks[t * num_experts..(t + 1) * num_experts];
        if let Some((i, &v)) = s.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(LbError::NegativeSlack {
                expert: i,
                round: t,
                slack: v,
            });
        }
        let d = spread_unchecked(lb);
        let max_s = s.iter().copied().fold(0.0, f64::max);
        q_lb += d * d;
        sum_sq_slack += s.iter().map(|v| v * v).sum::<f64>();
        hybrid += max_s * d;
        sum_max_sq_slack += max_s * max_s;
    }
    Ok(BoundQuantities {
        q_lb,
        sum_sq_slack,
        hybrid,
        sum_max_sq_slack,
        q_second_order: q_lb / 2.0 + 2.0 * sum_sq_slack + 4.0 * hybrid,
        q_prime: 4.0 * (q_lb + sum_sq_slack),
        q_uh: None,
    })
}

/// Pessimistic per-round contribution to the unknown-horizon quantity:
/// `d(lambda)^2 / 2 + 2 sum_i (1 - lambda_i)^2 + 4 max_i (1 - lambda_i) d(lambda)`.
pub fn unknown_horizon_term(lower_bounds: &[f64]) -> Result<f64> {
    if lower_bounds.is_empty() {
        return Err(LbError::Empty("lower bounds"));
    }
    if let Some(v) = lower_bounds.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(LbError::InvalidParameter(format!(
            "lower bound {v} outside [0, 1]"
        )));
    }
    let d = spread_unchecked(lower_bounds);
    let sq: f64 = lower_bounds.iter().map(|l| (1.0 - l) * (1.0 - l)).sum();
    let max_gap = lower_bounds.iter().map(|l| 1.0 - l).fold(0.0, f64::max);
    Ok(0.5 * d * d + 2.0 * sq + 4.0 * max_gap * d)
}

/// Unknown-horizon quantity: slacks replaced by their upper bounds `1 - lambda`.
pub fn q_unknown_horizon(lower_bounds: &[f64], num_experts: usize) -> Result<f64> {
    let horizon = check_shape(lower_bounds, num_experts, "lower_bounds")?;
    (0..horizon)
        .map(|t| unknown_horizon_term(&lower_bounds[t * num_experts..(t + 1) * num_experts]))
        .sum()
}

/// `eta = sqrt(4 log N / Q)`.
pub fn tune_eta(q: f64, num_experts: usize) -> Result<f64> {
    if !(q.is_finite() && q > 0.0) {
        return Err(LbError::InvalidParameter(format!("Q must be positive, got {q}")));
    }
    if num_experts < 2 {
        return Err(LbError::InvalidParameter(format!(
            "learning-rate tuning needs N >= 2, got {num_experts}"
        )));
    }
    Ok((4.0 * (num_experts as f64).ln() / q).sqrt())
}

/// Expected-regret bound of exponential weights with rate `eta` against a
/// game whose second-order quantity is at most `q`: `log N / eta + eta Q / 4`.
/// Equals `sqrt(Q log N)` at the tuned rate.
pub fn expected_regret_bound(eta: f64, q: f64, num_experts: usize) -> f64 {
    (num_experts as f64).ln() / eta + eta * q / 4.0
}

/// Learning-rate presets for the special feedback settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case")]
pub enum EtaPreset {
    /// Full information with `q` bounding the relative quadratic variation.
    FullInfo { num_experts: usize, q: f64 },
    /// Pure bandit feedback with losses in `[0, 1]`.
    Bandit { num_experts: usize, horizon: usize },
    /// Each round entirely full-information or entirely bandit.
    Mixed {
        num_experts: usize,
        full_info_rounds: usize,
        bandit_rounds: usize,
    },
    /// Feedback for a subset `S_t` each round; `missing = sum_t (N - |S_t|)`.
    VariableSubset {
        num_experts: usize,
        horizon: usize,
        missing: usize,
    },
}

impl EtaPreset {
    pub fn num_experts(&self) -> usize {
        match *self {
            EtaPreset::FullInfo { num_experts, .. }
            | EtaPreset::Bandit { num_experts, .. }
            | EtaPreset::Mixed { num_experts, .. }
            | EtaPreset::VariableSubset { num_experts, .. } => num_experts,
        }
    }

    /// The quantity `Q` the preset's rate is tuned for, so that
    /// `eta = sqrt(4 log N / Q)` and the bound is `sqrt(Q log N)`.
    pub fn effective_q(&self) -> f64 {
        match *self {
            EtaPreset::FullInfo { q, .. } => q / 2.0,
            EtaPreset::Bandit { num_experts, horizon } => 2.0 * (num_experts * horizon) as f64,
            EtaPreset::Mixed {
                num_experts,
                full_info_rounds,
                bandit_rounds,
            } => full_info_rounds as f64 / 2.0 + 2.0 * (num_experts * bandit_rounds) as f64,
            EtaPreset::VariableSubset { horizon, missing, .. } => {
                4.5 * horizon as f64 + 2.0 * missing as f64
            }
        }
    }

    /// The preset's regret bound, `sqrt(Q log N)`.
    pub fn bound(&self) -> f64 {
        (self.effective_q() * (self.num_experts() as f64).ln()).sqrt()
    }

    pub fn name(&self) -> &'static str {
        match self {
            EtaPreset::FullInfo { .. } => "full_info",
            EtaPreset::Bandit { .. } => "bandit",
            EtaPreset::Mixed { .. } => "mixed",
            EtaPreset::VariableSubset { .. } => "variable_subset",
        }
    }
}

/// The learning rate stated for each special feedback setting.
pub fn tune_eta_preset(preset: &EtaPreset) -> Result<f64> {
    let n = preset.num_experts();
    if n < 2 {
        return Err(LbError::InvalidParameter(format!(
            "learning-rate tuning needs N >= 2, got {n}"
        )));
    }
    let log_n = (n as f64).ln();
    let (num, den) = match *preset {
        EtaPreset::FullInfo { q, .. } => (8.0 * log_n, q),
        EtaPreset::Bandit { num_experts, horizon } => (2.0 * log_n, (num_experts * horizon) as f64),
        EtaPreset::Mixed {
            num_experts,
            full_info_rounds,
            bandit_rounds,
        } => (
            8.0 * log_n,
            full_info_rounds as f64 + 4.0 * (num_experts * bandit_rounds) as f64,
        ),
        EtaPreset::VariableSubset { horizon, missing, .. } => {
            (8.0 * log_n, 9.0 * horizon as f64 + 4.0 * missing as f64)
        }
    };
    if !(den.is_finite() && den > 0.0) {
        return Err(LbError::InvalidParameter(format!(
            "{} preset needs a positive denominator, got {den}",
            preset.name()
        )));
    }
    Ok((num / den).sqrt())
}

/// Bias-parameter tuning modes for the high-probability learner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaMode {
    /// `beta = sqrt((2/Q) log((N+3)/delta))`.
    HpI,
    /// `beta = sqrt(2/Q)`.
    HpIi,
    /// `beta = min(1, sqrt((2/Q) log((N+3)/delta)))` with `Q` raised to `2T`.
    HpIii,
}

/// Result of [`tune_beta`], including the `Q` actually used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaTuning {
    pub beta: f64,
    pub q_used: f64,
    /// True when `hp_iii` replaced `Q` by `2T`.
    pub q_substituted: bool,
    /// `delta / (N + 3)`, the per-event confidence.
    pub delta_prime: f64,
}

pub fn tune_beta(
    q: f64,
    num_experts: usize,
    delta: f64,
    mode: BetaMode,
    horizon: Option<usize>,
) -> Result<BetaTuning> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(LbError::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(q.is_finite() && q > 0.0) {
        return Err(LbError::InvalidParameter(format!("Q must be positive, got {q}")));
    }
    let delta_prime = delta / (num_experts as f64 + 3.0);
    let log_term = (1.0 / delta_prime).ln();
    let tuning = match mode {
        BetaMode::HpI => BetaTuning {
            beta: (2.0 / q * log_term).sqrt(),
            q_used: q,
            q_substituted: false,
            delta_prime,
        },
        BetaMode::HpIi => BetaTuning {
            beta: (2.0 / q).sqrt(),
            q_used: q,
            q_substituted: false,
            delta_prime,
        },
        BetaMode::HpIii => {
            let t = horizon.ok_or_else(|| {
                LbError::InvalidParameter("hp_iii tuning needs the horizon".into())
            })?;
            let floor = 2.0 * t as f64;
            let q_used = q.max(floor);
            BetaTuning {
                beta: (2.0 / q_used * log_term).sqrt().min(1.0),
                q_used,
                q_substituted: q < floor,
                delta_prime,
            }
        }
    };
    Ok(tuning)
}

/// Explicit high-probability regret bound for the tuned modes `hp_i` and
/// `hp_iii`:
/// `(1 + 1/(2 sqrt 2)) sqrt(Q log N) + (sqrt 2 + 3/2) sqrt(Q log((N+3)/delta))`.
pub fn high_probability_bound(q: f64, num_experts: usize, delta: f64) -> f64 {
    let log_n = (num_experts as f64).ln();
    let log_dp = ((num_experts as f64 + 3.0) / delta).ln();
    (1.0 + 1.0 / (2.0 * 2f64.sqrt())) * (q * log_n).sqrt()
        + (2f64.sqrt() + 1.5) * (q * log_dp).sqrt()
}

/// Explicit high-probability regret bound for mode `hp_ii`.
pub fn high_probability_bound_ii(q: f64, num_experts: usize, delta: f64) -> f64 {
    let log_n = (num_experts as f64).ln();
    let log_dp = ((num_experts as f64 + 3.0) / delta).ln();
    (q * log_n).sqrt()
        + (q / 2.0).sqrt() * (1.0 + log_dp)
        + (1.0 + (log_n / 2.0).sqrt()) * (q / 4.0 * log_dp).sqrt()
        + (q * log_dp).sqrt()
}

/// High-probability regret bound for arbitrary `eta` and `beta > 0`
/// (with `beta * max slack <= 1`), every confidence event at `delta / (N+3)`.
pub fn high_probability_bound_general(
    eta: f64,
    beta: f64,
    num_experts: usize,
    delta: f64,
    qs: &BoundQuantities,
) -> f64 {
    let log_n = (num_experts as f64).ln();
    let log_dp = ((num_experts as f64 + 3.0) / delta).ln();
    log_n / eta
        + eta / 8.0 * qs.q_lb
        + eta / 2.0 * qs.sum_sq_slack
        + eta * qs.hybrid
        + beta * qs.sum_sq_slack
        + log_dp / beta
        + (1.0 + eta / (2.0 * beta)) * (0.5 * log_dp * qs.sum_max_sq_slack).sqrt()
        + (0.5 * qs.q_lb * log_dp).sqrt()
}

fn check_potential_inputs(z: &[f64], eta: f64, p0: &ProbabilityVector) -> Result<()> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(LbError::InvalidParameter(format!("eta must be positive, got {eta}")));
    }
    if z.len() != p0.len() {
        return Err(LbError::DimensionMismatch(format!(
            "z has {} entries, p0 has {}",
            z.len(),
            p0.len()
        )));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(LbError::NonFinite("potential argument"));
    }
    Ok(())
}

/// `Phi(z) = -(1/eta) log sum_j p0_j exp(-eta z_j)`, shifted by `min_j z_j`.
pub fn potential_phi(z: &[f64], eta: f64, p0: &ProbabilityVector) -> Result<f64> {
    check_potential_inputs(z, eta, p0)?;
    let m = z.iter().copied().fold(f64::INFINITY, f64::min);
    let s: f64 = z
        .iter()
        .zip(p0.as_slice())
        .map(|(zj, pj)| pj * (-eta * (zj - m)).exp())
        .sum();
    Ok(m - s.ln() / eta)
}

/// Gradient of the potential: the `p0`-weighted exponential-weights
/// distribution at `z`.
pub fn potential_gradient(z: &[f64], eta: f64, p0: &ProbabilityVector) -> Result<Vec<f64>> {
    check_potential_inputs(z, eta, p0)?;
    let m = z.iter().copied().fold(f64::INFINITY, f64::min);
    let mut w: Vec<f64> = z
        .iter()
        .zip(p0.as_slice())
        .map(|(zj, pj)| pj * (-eta * (zj - m)).exp())
        .collect();
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    Ok(w)
}

/// `x^T Hess(Phi)(z) x = -eta Var_p(x)` with `p` the gradient at `z`.
/// The variance is computed in centred form, so the result is never positive.
pub fn hessian_quadratic_form(
    z: &[f64],
    x: &[f64],
    eta: f64,
    p0: &ProbabilityVector,
) -> Result<f64> {
    if x.len() != z.len() {
        return Err(LbError::DimensionMismatch(format!(
            "x has {} entries, z has {}",
            x.len(),
            z.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(LbError::NonFinite("quadratic-form direction"));
    }
    let p = potential_gradient(z, eta, p0)?;
    let x0 = x[0];
    let mean: f64 = p.iter().zip(x).map(|(pi, xi)| pi * (xi - x0)).sum();
    let var: f64 = p
        .iter()
        .zip(x)
        .map(|(pi, xi)| {
            let c = xi - x0 - mean;
            pi * c * c
        })
        .sum();
    Ok(-eta * var)
}

/// Popoviciu's bound on the variance of a variable supported in `[m, M]`.
pub fn popoviciu_bound(m: f64, big_m: f64) -> Result<f64> {
    if !(big_m >= m) {
        return Err(LbError::InvalidParameter(format!("need M >= m, got m={m}, M={big_m}")));
    }
    Ok((big_m - m) * (big_m - m) / 4.0)
}
