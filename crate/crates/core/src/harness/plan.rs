//! Resolves an experiment configuration against a concrete instance: the
//! instance the learner is fed, its parameters, and the regret bound that
//! applies.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::config::{BetaSetting, EtaSetting, ExperimentConfig, LearnerKind, PresetName};
use crate::environments::generate_instance;
use crate::error::{LbError, Result};
use crate::game::GameInstance;
use crate::learners::{default_initial_guess, AnyLearner, DoublingState, LearnerState};
use crate::quantities::{
    expected_regret_bound, high_probability_bound, high_probability_bound_general,
    high_probability_bound_ii, second_order_q, tune_beta, tune_eta, unknown_horizon_term, BetaMode,
    BetaTuning, BoundQuantities, EtaPreset,
};

/// XORed into the experiment seed to seed instance generation, keeping the
/// instance stream apart from every replicate stream `seed ^ r`.
pub const INSTANCE_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Per-round ingredients of the second-order quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
struct RoundStats {
    spread: f64,
    sum_sq_slack: f64,
    max_slack: f64,
    /// Experts with zero slack.
    observed: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum BoundModel {
    Rate { eta: f64, prime: bool },
    Preset { preset: PresetName, eta: f64 },
    HighProbability { eta: f64, beta: f64, delta: f64 },
    /// Start round and rate of each epoch.
    Doubling { epochs: Vec<(usize, f64)> },
}

/// Everything needed to run episodes and judge them.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub kind: LearnerKind,
    /// The instance as generated; regret is measured on its losses.
    pub original: GameInstance,
    /// What the learner is fed (normalized in the lower-bound model by default).
    pub feed: GameInstance,
    pub normalized: bool,
    pub eta: f64,
    pub beta: f64,
    pub delta: f64,
    pub quantities: BoundQuantities,
    pub theoretical_bound: f64,
    pub bound_kind: String,
    pub beta_tuning: Option<BetaTuning>,
    pub preset: Option<EtaPreset>,
    pub initial_guess: Option<f64>,
    pub designated_expert: usize,
    model: BoundModel,
    stats: Vec<RoundStats>,
    /// `min_i L_{i,t}` of the original losses, per round.
    best_prefix: Vec<f64>,
}

fn reference_and_slacks(kind: LearnerKind, feed: &GameInstance) -> Result<(Vec<f64>, Vec<f64>)> {
    let cells = feed.num_experts() * feed.horizon();
    Ok(match kind {
        LearnerKind::Hedge => (feed.losses().to_vec(), vec![0.0; cells]),
        LearnerKind::Exp3 => (vec![0.0; cells], feed.losses().to_vec()),
        LearnerKind::Exp3lb | LearnerKind::Exp3lbp | LearnerKind::Exp3lbDoubling | LearnerKind::Exp3alpha => {
            (feed.lower_bounds().to_vec(), feed.slacks())
        }
        LearnerKind::Exp3ub => {
            let (Some(ub), Some(caps)) = (feed.upper_bounds(), feed.slack_caps()) else {
                return Err(LbError::InvalidParameter("exp3ub needs an instance with upper bounds".into()));
            };
            let n = feed.num_experts();
            let alphas: Vec<f64> = ub.iter().enumerate().map(|(c, u)| u - caps[c / n]).collect();
            let slacks = feed.losses().iter().zip(&alphas).map(|(l, a)| l - a).collect();
            (alphas, slacks)
        }
    })
}

fn round_stats(reference: &[f64], slacks: &[f64], n: usize) -> Vec<RoundStats> {
    reference
        .chunks(n)
        .zip(slacks.chunks(n))
        .map(|(r, s)| {
            let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            RoundStats {
                spread: hi - lo,
                sum_sq_slack: s.iter().map(|v| v * v).sum(),
                max_slack: s.iter().copied().fold(0.0, f64::max),
                observed: s.iter().filter(|v| **v == 0.0).count(),
            }
        })
        .collect()
}

fn unit_losses(feed: &GameInstance, what: &str) -> Result<()> {
    if feed.losses().iter().all(|l| (0.0..=1.0).contains(l)) {
        Ok(())
    } else {
        Err(LbError::InvalidParameter(format!("{what} needs losses in [0, 1]")))
    }
}

fn derive_preset(
    name: PresetName,
    feed: &GameInstance,
    reference: &[f64],
    slacks: &[f64],
    q: &BoundQuantities,
) -> Result<Option<EtaPreset>> {
    let n = feed.num_experts();
    let t = feed.horizon();
    Ok(Some(match name {
        PresetName::Simplified => return Ok(None),
        PresetName::FullInfo => {
            if slacks.iter().any(|s| *s != 0.0) {
                return Err(LbError::InvalidParameter("full_info preset needs zero slacks".into()));
            }
            EtaPreset::FullInfo { num_experts: n, q: q.q_lb }
        }
        PresetName::Bandit => {
            unit_losses(feed, "bandit preset")?;
            if reference.iter().any(|r| *r != 0.0) {
                return Err(LbError::InvalidParameter("bandit preset needs zero lower bounds".into()));
            }
            EtaPreset::Bandit { num_experts: n, horizon: t }
        }
        PresetName::Mixed => {
            unit_losses(feed, "mixed preset")?;
            let mut full = 0;
            for (r, (lb, s)) in reference.chunks(n).zip(slacks.chunks(n)).enumerate() {
                if s.iter().all(|v| *v == 0.0) {
                    full += 1;
                } else if lb.iter().any(|v| *v != 0.0) {
                    return Err(LbError::InvalidParameter(format!(
                        "mixed preset: round {r} is neither full-information nor bandit"
                    )));
                }
            }
            EtaPreset::Mixed {
                num_experts: n,
                full_info_rounds: full,
                bandit_rounds: t - full,
            }
        }
        PresetName::VariableSubset => {
            unit_losses(feed, "variable_subset preset")?;
            if let Some(c) = (0..reference.len()).find(|&c| slacks[c] != 0.0 && reference[c] != 0.0) {
                return Err(LbError::InvalidParameter(format!(
                    "variable_subset preset: expert {} at round {} is partially observed",
                    c % n,
                    c / n
                )));
            }
            let missing = slacks.iter().filter(|s| **s != 0.0).count();
            EtaPreset::VariableSubset {
                num_experts: n,
                horizon: t,
                missing,
            }
        }
    }))
}

/// `tune_eta` extended to the degenerate cases: a single expert or `Q = 0`
/// (every expert identical) both get rate 1.
fn auto_eta(q: f64, n: usize) -> Result<f64> {
    if n < 2 || q == 0.0 {
        Ok(1.0)
    } else {
        tune_eta(q, n)
    }
}

fn doubling_epochs(feed: &GameInstance, initial_guess: f64) -> Result<Vec<(usize, f64)>> {
    let n = feed.num_experts();
    let mut epochs = vec![(0, auto_eta(initial_guess, n)?)];
    if n < 2 {
        return Ok(epochs);
    }
    let mut guess = initial_guess;
    let mut acc = 0.0;
    for t in 0..feed.horizon() {
        acc += unknown_horizon_term(feed.round_lower_bounds(t))?;
        if acc > guess {
            while guess < acc {
                guess *= 2.0;
            }
            epochs.push((t + 1, tune_eta(guess, n)?));
        }
    }
    Ok(epochs)
}

impl ExperimentPlan {
    /// Generates the configured instance and resolves the plan.
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let mut spec = cfg.scenario.clone();
        spec.seed = Some(cfg.instance_seed());
        let inst = generate_instance(&spec)?;
        Self::new(cfg, inst)
    }

    pub fn new(cfg: &ExperimentConfig, original: GameInstance) -> Result<Self> {
        cfg.validate()?;
        original.validate()?;
        let kind = cfg.learner.algorithm;
        let n = original.num_experts();
        let t = original.horizon();
        let normalized = cfg.normalize();
        if normalized && !kind.lower_bound_model() {
            return Err(LbError::InvalidParameter(format!(
                "normalization applies only to the lower-bound model, not {}",
                kind.name()
            )));
        }
        let feed = if normalized { original.normalized()? } else { original.clone() };
        let (reference, slacks) = reference_and_slacks(kind, &feed)?;
        let mut quantities = second_order_q(&reference, &slacks, n)?;
        let stats = round_stats(&reference, &slacks, n);
        let log_n = (n as f64).ln();

        let mut beta = 0.0;
        let mut beta_tuning = None;
        let mut preset = None;
        let mut initial_guess = None;
        let (eta, model, bound, bound_kind) = match kind {
            LearnerKind::Exp3lbDoubling => {
                if cfg.learner.eta != EtaSetting::Auto || cfg.learner.eta_preset.is_some() {
                    return Err(LbError::InvalidParameter(
                        "the doubling trick tunes its own rate; leave eta on auto".into(),
                    ));
                }
                let g0 = cfg.learner.initial_guess.unwrap_or_else(|| default_initial_guess(n));
                initial_guess = Some(g0);
                quantities.q_uh = Some(crate::quantities::q_unknown_horizon(feed.lower_bounds(), n)?);
                let epochs = doubling_epochs(&feed, g0)?;
                let model = BoundModel::Doubling { epochs };
                let eta = match &model {
                    BoundModel::Doubling { epochs } => epochs[0].1,
                    _ => unreachable!(),
                };
                (eta, model, 0.0, "doubling_epochs".to_string())
            }
            LearnerKind::Exp3lbp => {
                let (mode, hp_delta, fixed_beta) = match cfg.learner.beta {
                    Some(BetaSetting::Fixed(b)) => (None, cfg.delta, b),
                    Some(BetaSetting::Tuned { mode, delta }) => (Some(mode), delta.unwrap_or(cfg.delta), 0.0),
                    None => (Some(BetaMode::HpI), cfg.delta, 0.0),
                };
                let q_used = match mode {
                    Some(mode) => {
                        let tuning = tune_beta(quantities.q_second_order, n, hp_delta, mode, Some(t))?;
                        beta = tuning.beta;
                        beta_tuning = Some(tuning);
                        tuning.q_used
                    }
                    None => {
                        beta = fixed_beta;
                        if !(beta.is_finite() && beta >= 0.0) {
                            return Err(LbError::InvalidParameter(format!("beta must be nonnegative, got {beta}")));
                        }
                        quantities.q_second_order
                    }
                };
                if mode == Some(BetaMode::HpIii) {
                    unit_losses(&feed, "hp_iii tuning")?;
                }
                let max_s = slacks.iter().copied().fold(0.0, f64::max);
                if beta * max_s > 1.0 {
                    return Err(LbError::InvalidParameter(format!(
                        "beta * max slack = {} exceeds 1",
                        beta * max_s
                    )));
                }
                let eta = match cfg.learner.eta {
                    EtaSetting::Fixed(e) => e,
                    EtaSetting::Auto => auto_eta(q_used, n)?,
                };
                let tuned_eta = cfg.learner.eta == EtaSetting::Auto;
                let (bound, kind_name) = match (mode, tuned_eta) {
                    (Some(BetaMode::HpI), true) => (high_probability_bound(q_used, n, hp_delta), "high_probability_hp_i"),
                    (Some(BetaMode::HpIii), true) => (high_probability_bound(q_used, n, hp_delta), "high_probability_hp_iii"),
                    (Some(BetaMode::HpIi), true) => (high_probability_bound_ii(q_used, n, hp_delta), "high_probability_hp_ii"),
                    _ => (
                        if beta > 0.0 {
                            high_probability_bound_general(eta, beta, n, hp_delta, &quantities)
                        } else {
                            f64::INFINITY
                        },
                        "high_probability_general",
                    ),
                };
                (
                    eta,
                    BoundModel::HighProbability { eta, beta, delta: hp_delta },
                    bound,
                    kind_name.to_string(),
                )
            }
            _ => {
                if cfg.learner.beta.is_some() {
                    return Err(LbError::InvalidParameter(format!("{} takes no beta", kind.name())));
                }
                let preset_name = cfg.learner.eta_preset;
                preset = match preset_name {
                    Some(p) => derive_preset(p, &feed, &reference, &slacks, &quantities)?,
                    None => None,
                };
                let (q_tune, kind_name) = match (preset_name, &preset) {
                    (Some(PresetName::Simplified), _) => (quantities.q_prime, "second_order_simplified".to_string()),
                    (Some(_), Some(p)) => (p.effective_q(), format!("{}_preset", p.name())),
                    _ if matches!(kind, LearnerKind::Exp3alpha | LearnerKind::Exp3ub) => {
                        (quantities.q_second_order, "second_order_alpha".to_string())
                    }
                    _ => (quantities.q_second_order, "second_order".to_string()),
                };
                let eta = match cfg.learner.eta {
                    EtaSetting::Fixed(e) => e,
                    EtaSetting::Auto => auto_eta(q_tune, n)?,
                };
                let model = match preset_name {
                    Some(PresetName::Simplified) => BoundModel::Rate { eta, prime: true },
                    Some(p) => BoundModel::Preset { preset: p, eta },
                    None => BoundModel::Rate { eta, prime: false },
                };
                let bound = if n < 2 { 0.0 } else { log_n / eta + eta * q_tune / 4.0 };
                (eta, model, bound, kind_name)
            }
        };
        if !(eta.is_finite() && eta > 0.0) {
            return Err(LbError::InvalidParameter(format!("eta must be positive, got {eta}")));
        }

        let cum = {
            let mut running = vec![0.0; n];
            let mut best = Vec::with_capacity(t);
            for r in 0..t {
                for (c, l) in running.iter_mut().zip(original.round_losses(r)) {
                    *c += l;
                }
                best.push(running.iter().copied().fold(f64::INFINITY, f64::min));
            }
            best
        };

        let mut plan = ExperimentPlan {
            kind,
            original,
            feed,
            normalized,
            eta,
            beta,
            delta: cfg.delta,
            quantities,
            theoretical_bound: bound,
            bound_kind,
            beta_tuning,
            preset,
            initial_guess,
            designated_expert: cfg.designated_expert,
            model,
            stats,
            best_prefix: cum,
        };
        if matches!(plan.model, BoundModel::Doubling { .. }) {
            plan.theoretical_bound = *plan.bound_curve().last().expect("horizon is positive");
        }
        Ok(plan)
    }

    pub fn num_experts(&self) -> usize {
        self.original.num_experts()
    }

    pub fn horizon(&self) -> usize {
        self.original.horizon()
    }

    /// `min_i L_{i,t}` of the original losses after round `t` (0-based).
    pub fn best_loss_after(&self, round: usize) -> f64 {
        self.best_prefix[round]
    }

    /// A fresh learner in its initial state.
    pub fn learner(&self) -> Result<AnyLearner> {
        let n = self.num_experts();
        Ok(match self.kind {
            LearnerKind::Exp3lbDoubling => AnyLearner::Doubling(DoublingState::new(n, self.initial_guess)?),
            kind => AnyLearner::Plain(LearnerState::new(kind.algorithm(), n, self.eta, self.beta)?),
        })
    }

    /// Number of doubling-trick epochs the schedule goes through.
    pub fn doubling_epochs(&self) -> Option<usize> {
        match &self.model {
            BoundModel::Doubling { epochs } => Some(epochs.len()),
            _ => None,
        }
    }

    /// The bound for every prefix of the game, evaluated with the rate and
    /// bias actually used.
    pub fn bound_curve(&self) -> Vec<f64> {
        let n = self.num_experts();
        let log_n = (n as f64).ln();
        let mut out = Vec::with_capacity(self.stats.len());
        let mut q = BoundQuantities {
            q_lb: 0.0,
            sum_sq_slack: 0.0,
            hybrid: 0.0,
            sum_max_sq_slack: 0.0,
            q_second_order: 0.0,
            q_prime: 0.0,
            q_uh: None,
        };
        let mut full_rounds = 0usize;
        let mut missing = 0usize;
        let mut epoch = 0usize;
        let mut closed = 0.0;
        let mut epoch_q = 0.0;
        for (t, s) in self.stats.iter().enumerate() {
            q.q_lb += s.spread * s.spread;
            q.sum_sq_slack += s.sum_sq_slack;
            q.hybrid += s.max_slack * s.spread;
            q.sum_max_sq_slack += s.max_slack * s.max_slack;
            q.q_second_order = q.q_lb / 2.0 + 2.0 * q.sum_sq_slack + 4.0 * q.hybrid;
            q.q_prime = 4.0 * (q.q_lb + q.sum_sq_slack);
            if s.observed == n {
                full_rounds += 1;
            }
            missing += n - s.observed;
            let rounds = t + 1;
            let value = match &self.model {
                _ if n < 2 => 0.0,
                BoundModel::Rate { eta, prime } => {
                    expected_regret_bound(*eta, if *prime { q.q_prime } else { q.q_second_order }, n)
                }
                BoundModel::Preset { preset, eta } => {
                    let q_eff = match preset {
                        PresetName::FullInfo => q.q_lb / 2.0,
                        PresetName::Bandit => 2.0 * (n * rounds) as f64,
                        PresetName::Mixed => full_rounds as f64 / 2.0 + 2.0 * (n * (rounds - full_rounds)) as f64,
                        PresetName::VariableSubset => 4.5 * rounds as f64 + 2.0 * missing as f64,
                        PresetName::Simplified => q.q_prime,
                    };
                    log_n / eta + eta * q_eff / 4.0
                }
                BoundModel::HighProbability { eta, beta, delta } => {
                    if *beta > 0.0 {
                        high_probability_bound_general(*eta, *beta, n, *delta, &q)
                    } else {
                        f64::INFINITY
                    }
                }
                BoundModel::Doubling { epochs } => {
                    let term = s.spread * s.spread / 2.0 + 2.0 * s.sum_sq_slack + 4.0 * s.max_slack * s.spread;
                    epoch_q += term;
                    let eta = epochs[epoch].1;
                    let current = log_n / eta + eta * epoch_q / 4.0;
                    if epochs.get(epoch + 1).is_some_and(|e| e.0 == t + 1) {
                        closed += current;
                        epoch += 1;
                        epoch_q = 0.0;
                        closed
                    } else {
                        closed + current
                    }
                }
            };
            out.push(value);
        }
        out
    }

    /// Output metadata describing the conventions in force.
    pub fn metadata(&self) -> BTreeMap<String, Value> {
        let mut m = BTreeMap::new();
        m.insert("algorithm".into(), json!(self.kind.name()));
        m.insert("num_experts".into(), json!(self.num_experts()));
        m.insert("horizon".into(), json!(self.horizon()));
        m.insert("normalized".into(), json!(self.normalized));
        m.insert("log".into(), json!("natural"));
        if let Some(p) = &self.preset {
            m.insert("preset".into(), serde_json::to_value(p).unwrap_or(Value::Null));
        }
        if let Some(b) = &self.beta_tuning {
            m.insert("beta_tuning".into(), serde_json::to_value(b).unwrap_or(Value::Null));
        }
        if let BoundModel::HighProbability { delta, .. } = self.model {
            m.insert("bound_delta".into(), json!(delta));
        }
        if let BoundModel::Doubling { epochs } = &self.model {
            m.insert("doubling_initial_guess".into(), json!(self.initial_guess));
            m.insert("doubling_accumulator".into(), json!("pessimistic: slacks replaced by 1 - lambda"));
            m.insert("doubling_epochs".into(), json!(epochs.len()));
            m.insert(
                "doubling_epoch_starts".into(),
                json!(epochs.iter().map(|e| e.0 + 1).collect::<Vec<_>>()),
            );
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::{LossModel, ScenarioKind, ScenarioSpec};
    use crate::harness::config::LearnerConfig;

    fn cfg(kind: ScenarioKind, n: usize, t: usize, learner: LearnerConfig) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(ScenarioSpec::new(kind, n, t, LossModel::UniformIid), learner);
        c.seed = 5;
        c
    }

    #[test]
    fn tuned_bound_is_root_q_log_n() {
        let c = cfg(ScenarioKind::GenericLb { slack_fraction: 0.5, range: None }, 4, 300, LearnerConfig::new(LearnerKind::Exp3lb));
        let p = ExperimentPlan::from_config(&c).unwrap();
        let expect = (p.quantities.q_second_order * 4f64.ln()).sqrt();
        assert!((p.theoretical_bound - expect).abs() < 1e-9 * expect);
        let curve = p.bound_curve();
        assert!((curve[299] - p.theoretical_bound).abs() < 1e-9 * expect);
        assert!(curve.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn bandit_preset_anchor() {
        let mut l = LearnerConfig::new(LearnerKind::Exp3lb);
        l.eta_preset = Some(PresetName::Bandit);
        let p = ExperimentPlan::from_config(&cfg(ScenarioKind::Bandit, 2, 1000, l)).unwrap();
        assert!((p.theoretical_bound - 52.66).abs() < 0.01);
        assert!((p.eta - (2.0 * 2f64.ln() / 2000.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn preset_validation() {
        let mut l = LearnerConfig::new(LearnerKind::Exp3lb);
        l.eta_preset = Some(PresetName::Bandit);
        assert!(ExperimentPlan::from_config(&cfg(ScenarioKind::FullInfo, 3, 20, l.clone())).is_err());
        l.eta_preset = Some(PresetName::Mixed);
        let gl = ScenarioKind::GenericLb { slack_fraction: 0.5, range: None };
        assert!(ExperimentPlan::from_config(&cfg(gl, 3, 20, l)).is_err());
    }

    #[test]
    fn degenerate_rates() {
        let p = ExperimentPlan::from_config(&cfg(ScenarioKind::Bandit, 1, 10, LearnerConfig::new(LearnerKind::Exp3lb))).unwrap();
        assert_eq!(p.eta, 1.0);
        assert_eq!(p.theoretical_bound, 0.0);
    }

    #[test]
    fn hp_iii_substitutes_two_t() {
        let mut l = LearnerConfig::new(LearnerKind::Exp3lbp);
        l.beta = Some(BetaSetting::Tuned { mode: BetaMode::HpIii, delta: None });
        let p = ExperimentPlan::from_config(&cfg(ScenarioKind::FullInfo, 3, 100, l)).unwrap();
        let tuning = p.beta_tuning.unwrap();
        assert!(tuning.q_substituted);
        assert_eq!(tuning.q_used, 200.0);
        assert_eq!(p.bound_kind, "high_probability_hp_iii");
    }

    #[test]
    fn doubling_schedule_matches_learner() {
        use crate::game::{sample_action, RandomStream};
        use crate::learners::OnlineLearner;
        let c = cfg(ScenarioKind::Bandit, 3, 200, LearnerConfig::new(LearnerKind::Exp3lbDoubling));
        let p = ExperimentPlan::from_config(&c).unwrap();
        let mut learner = p.learner().unwrap();
        let mut rng = RandomStream::new(1);
        for t in 0..200 {
            let i = sample_action(learner.distribution(), &mut rng);
            let fb = crate::environments::feedback_for(&p.feed, t, i, learner.feedback_kind()).unwrap();
            learner.observe(&fb).unwrap();
        }
        let AnyLearner::Doubling(d) = learner else { panic!() };
        assert_eq!(d.epoch + 1, p.doubling_epochs().unwrap());
        assert!(p.theoretical_bound.is_finite() && p.theoretical_bound > 0.0);
    }
}
