//! Adversary generators for each feedback scenario, and the per-round
//! feedback extractor.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{LbError, Result};
use crate::game::{FeedbackKind, GameInstance, RandomStream, RoundFeedback};

/// How the losses themselves are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum LossModel {
    /// `l ~ Uniform[0, 1)` independently per cell.
    UniformIid,
    /// Bernoulli losses; expert `best` has mean `mean - gap`, the rest `mean`.
    BernoulliGap {
        mean: f64,
        gap: f64,
        #[serde(default)]
        best: usize,
    },
    /// An explicit loss matrix, inline (row per expert) or from an instance
    /// JSON file whose `losses` are used.
    AdversarialHandcrafted {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        losses: Option<Vec<Vec<f64>>>,
    },
}

/// Round order of a mixed scenario's full-information rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arrangement {
    #[default]
    Shuffled,
    /// Spread as evenly as possible.
    Alternating,
    /// All full-information rounds first.
    Blocks,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioKind {
    /// `lambda = l`.
    FullInfo,
    /// `lambda = 0`.
    Bandit,
    /// Each round entirely full-information or entirely bandit. Give either
    /// the counts or explicit per-round `flags` (true = full information).
    Mixed {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        full_info_rounds: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bandit_rounds: Option<usize>,
        #[serde(default)]
        arrangement: Arrangement,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        flags: Option<Vec<bool>>,
    },
    /// `lambda_i = l_i` on the observed subset `S_t`, zero elsewhere.
    /// `subsets` are 0-based; otherwise `|S_t|` is uniform on
    /// `subset_size = [min, max]` (default `[0, N]`).
    VariableSubset {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        subsets: Option<Vec<Vec<usize>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        subset_size: Option<[usize; 2]>,
    },
    /// `lambda = l - f u |l|` with fresh uniforms `u`. `range = [a, b]` maps
    /// the drawn losses affinely onto `[a, b]` first.
    GenericLb {
        slack_fraction: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        range: Option<[f64; 2]>,
    },
    /// `upsilon = l + c v` with fresh uniforms `v`, slack cap `c`, `lambda = 0`.
    UpperBound { cap: f64 },
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::FullInfo => "full_info",
            ScenarioKind::Bandit => "bandit",
            ScenarioKind::Mixed { .. } => "mixed",
            ScenarioKind::VariableSubset { .. } => "variable_subset",
            ScenarioKind::GenericLb { .. } => "generic_lb",
            ScenarioKind::UpperBound { .. } => "upper_bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    #[serde(flatten)]
    pub kind: ScenarioKind,
    pub num_experts: usize,
    pub horizon: usize,
    pub loss_model: LossModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, num_experts: usize, horizon: usize, loss_model: LossModel) -> Self {
        ScenarioSpec {
            kind,
            num_experts,
            horizon,
            loss_model,
            seed: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

fn bad(msg: impl Into<String>) -> LbError {
    LbError::InvalidScenario(msg.into())
}

fn draw_losses(spec: &ScenarioSpec, rng: &mut RandomStream) -> Result<Vec<f64>> {
    let (n, t) = (spec.num_experts, spec.horizon);
    match &spec.loss_model {
        LossModel::UniformIid => Ok((0..n * t).map(|_| rng.next_f64()).collect()),
        LossModel::BernoulliGap { mean, gap, best } => {
            if *best >= n {
                return Err(bad(format!("best expert {best} out of range for {n} experts")));
            }
            let low = mean - gap;
            if !(0.0..=1.0).contains(mean) || !(0.0..=1.0).contains(&low) || *gap < 0.0 {
                return Err(bad(format!(
                    "bernoulli_gap needs 0 <= mean - gap <= mean <= 1, got mean {mean}, gap {gap}"
                )));
            }
            let mut out = Vec::with_capacity(n * t);
            for _ in 0..t {
                for i in 0..n {
                    let mu = if i == *best { low } else { *mean };
                    out.push(if rng.next_f64() < mu { 1.0 } else { 0.0 });
                }
            }
            Ok(out)
        }
        LossModel::AdversarialHandcrafted { path, losses } => {
            let rows = match (path, losses) {
                (Some(p), None) => {
                    let text = std::fs::read_to_string(p)
                        .map_err(|e| LbError::Io(format!("{}: {e}", p.display())))?;
                    let inst = GameInstance::from_json(&text)
                        .map_err(|e| bad(format!("{}: {e}", p.display())))?;
                    if inst.num_experts() != n || inst.horizon() != t {
                        return Err(bad(format!(
                            "{} holds a {}x{} instance, scenario asks for {n}x{t}",
                            p.display(),
                            inst.num_experts(),
                            inst.horizon()
                        )));
                    }
                    return Ok(inst.losses().to_vec());
                }
                (None, Some(rows)) => rows,
                _ => return Err(bad("adversarial_handcrafted needs exactly one of path, losses")),
            };
            let lbs = vec![vec![0.0; t]; rows.len()];
            let inst = GameInstance::from_rows(rows, &lbs).map_err(|e| bad(e.to_string()))?;
            if inst.num_experts() != n || inst.horizon() != t {
                return Err(bad(format!(
                    "inline losses are {}x{}, scenario asks for {n}x{t}",
                    inst.num_experts(),
                    inst.horizon()
                )));
            }
            Ok(inst.losses().to_vec())
        }
    }
}

fn shuffle<T>(v: &mut [T], rng: &mut RandomStream) {
    for i in (1..v.len()).rev() {
        let j = rng.next_below(i + 1);
        v.swap(i, j);
    }
}

fn mixed_flags(
    t: usize,
    full: Option<usize>,
    bandit: Option<usize>,
    arrangement: Arrangement,
    flags: &Option<Vec<bool>>,
    rng: &mut RandomStream,
) -> Result<Vec<bool>> {
    if let Some(flags) = flags {
        if flags.len() != t {
            return Err(bad(format!("mixed: {} flags for horizon {t}", flags.len())));
        }
        let n_full = flags.iter().filter(|f| **f).count();
        if full.is_some_and(|f| f != n_full) || bandit.is_some_and(|b| b != t - n_full) {
            return Err(bad("mixed: flags disagree with the round counts"));
        }
        return Ok(flags.clone());
    }
    let (tf, tb) = match (full, bandit) {
        (Some(f), Some(b)) => (f, b),
        (Some(f), None) if f <= t => (f, t - f),
        (None, Some(b)) if b <= t => (t - b, b),
        (None, None) => return Err(bad("mixed: give full_info_rounds/bandit_rounds or flags")),
        _ => return Err(bad(format!("mixed: round counts exceed horizon {t}"))),
    };
    if tf + tb != t {
        return Err(bad(format!("mixed: T_f + T_b = {} but horizon is {t}", tf + tb)));
    }
    Ok(match arrangement {
        Arrangement::Blocks => (0..t).map(|r| r < tf).collect(),
        Arrangement::Alternating => (0..t).map(|r| (r + 1) * tf / t > r * tf / t).collect(),
        Arrangement::Shuffled => {
            let mut f: Vec<bool> = (0..t).map(|r| r < tf).collect();
            shuffle(&mut f, rng);
            f
        }
    })
}

/// Materializes the scenario. Deterministic given the scenario (seed defaults to 0).
pub fn generate_instance(spec: &ScenarioSpec) -> Result<GameInstance> {
    let (n, t) = (spec.num_experts, spec.horizon);
    if n == 0 || t == 0 {
        return Err(bad("num_experts and horizon must be positive"));
    }
    let mut rng = RandomStream::new(spec.seed.unwrap_or(0));
    let mut losses = draw_losses(spec, &mut rng)?;
    let range_override = matches!(spec.kind, ScenarioKind::GenericLb { range: Some(_), .. });
    if !range_override {
        if let Some(pos) = losses.iter().position(|l| !(0.0..=1.0).contains(l)) {
            return Err(bad(format!(
                "loss {} of expert {} at round {} lies outside [0, 1]",
                losses[pos],
                pos % n,
                pos / n
            )));
        }
    }

    let mut upper = None;
    let mut caps = None;
    let lower = match &spec.kind {
        ScenarioKind::FullInfo => losses.clone(),
        ScenarioKind::Bandit => vec![0.0; n * t],
        ScenarioKind::Mixed {
            full_info_rounds,
            bandit_rounds,
            arrangement,
            flags,
        } => {
            let flags = mixed_flags(t, *full_info_rounds, *bandit_rounds, *arrangement, flags, &mut rng)?;
            let mut lb = vec![0.0; n * t];
            for (r, full) in flags.iter().enumerate() {
                if *full {
                    lb[r * n..(r + 1) * n].copy_from_slice(&losses[r * n..(r + 1) * n]);
                }
            }
            lb
        }
        ScenarioKind::VariableSubset { subsets, subset_size } => {
            let mut lb = vec![0.0; n * t];
            if let Some(sets) = subsets {
                if sets.len() != t {
                    return Err(bad(format!("variable_subset: {} subsets for horizon {t}", sets.len())));
                }
                for (r, set) in sets.iter().enumerate() {
                    for &i in set {
                        if i >= n {
                            return Err(bad(format!("variable_subset: expert {i} out of range at round {r}")));
                        }
                        lb[r * n + i] = losses[r * n + i];
                    }
                }
            } else {
                let [lo, hi] = subset_size.unwrap_or([0, n]);
                if lo > hi || hi > n {
                    return Err(bad(format!("variable_subset: bad subset_size [{lo}, {hi}] for {n} experts")));
                }
                let mut idx: Vec<usize> = (0..n).collect();
                for r in 0..t {
                    let k = lo + rng.next_below(hi - lo + 1);
                    for j in 0..k {
                        let pick = j + rng.next_below(n - j);
                        idx.swap(j, pick);
                    }
                    for &i in &idx[..k] {
                        lb[r * n + i] = losses[r * n + i];
                    }
                }
            }
            lb
        }
        ScenarioKind::GenericLb { slack_fraction, range } => {
            if !(0.0..=1.0).contains(slack_fraction) {
                return Err(bad(format!("generic_lb: slack_fraction {slack_fraction} outside [0, 1]")));
            }
            if let Some([a, b]) = range {
                if !(a.is_finite() && b.is_finite() && a <= b) {
                    return Err(bad(format!("generic_lb: bad range [{a}, {b}]")));
                }
                for l in &mut losses {
                    *l = a + (b - a) * *l;
                }
            }
            losses
                .iter()
                .map(|l| l - slack_fraction * rng.next_f64() * l.abs())
                .collect()
        }
        ScenarioKind::UpperBound { cap } => {
            if !(cap.is_finite() && *cap >= 0.0) {
                return Err(bad(format!("upper_bound: cap must be nonnegative, got {cap}")));
            }
            upper = Some(losses.iter().map(|l| l + cap * rng.next_f64()).collect());
            caps = Some(vec![*cap; t]);
            vec![0.0; n * t]
        }
    };
    let inst = GameInstance::new(n, t, losses, lower, upper, caps)?;
    inst.validate()?;
    Ok(inst)
}

/// What the learner sees after choosing `chosen` in round `round` (0-based).
///
/// `Alphas` feedback uses the instance's lower bounds as the reference values.
pub fn feedback_for(inst: &GameInstance, round: usize, chosen: usize, kind: FeedbackKind) -> Result<RoundFeedback> {
    if round >= inst.horizon() {
        return Err(LbError::IndexOutOfRange {
            index: round,
            len: inst.horizon(),
        });
    }
    if chosen >= inst.num_experts() {
        return Err(LbError::IndexOutOfRange {
            index: chosen,
            len: inst.num_experts(),
        });
    }
    let chosen_loss = inst.loss(chosen, round);
    Ok(match kind {
        FeedbackKind::FullLosses => RoundFeedback::FullLosses {
            chosen,
            losses: inst.round_losses(round).to_vec(),
        },
        FeedbackKind::LowerBounds => RoundFeedback::LowerBounds {
            chosen,
            chosen_loss,
            lower_bounds: inst.round_lower_bounds(round).to_vec(),
        },
        FeedbackKind::Alphas => RoundFeedback::Alphas {
            chosen,
            chosen_loss,
            alphas: inst.round_lower_bounds(round).to_vec(),
        },
        FeedbackKind::UpperBounds => {
            let (Some(ub), Some(cap)) = (inst.round_upper_bounds(round), inst.slack_cap(round)) else {
                return Err(LbError::IncompatibleFeedback {
                    algorithm: "instance without upper bounds",
                    feedback: kind.name(),
                });
            };
            RoundFeedback::UpperBounds {
                chosen,
                chosen_loss,
                upper_bounds: ub.to_vec(),
                slack_cap: cap,
            }
        }
    })
}

/// Index and value of the smallest cumulative true loss; ties go to the
/// smallest index.
pub fn best_expert_loss(inst: &GameInstance) -> (usize, f64) {
    let cum = inst.cumulative_losses();
    let mut best = (0, cum[0]);
    for (i, &v) in cum.iter().enumerate().skip(1) {
        if v < best.1 {
            best = (i, v);
        }
    }
    best
}
