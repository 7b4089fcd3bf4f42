//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::environments::{LossModel, ScenarioSpec};
use crate::error::{LbError, Result};
use crate::learners::Algorithm;
use crate::quantities::BetaMode;
use super::plan::INSTANCE_SEED_SALT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Hedge,
    Exp3,
    Exp3lb,
    Exp3alpha,
    Exp3ub,
    Exp3lbp,
    Exp3lbDoubling,
}

impl LearnerKind {
    pub fn algorithm(self) -> Algorithm {
        match self {
            LearnerKind::Hedge => Algorithm::Hedge,
            LearnerKind::Exp3 => Algorithm::Exp3,
            LearnerKind::Exp3lb | LearnerKind::Exp3lbDoubling => Algorithm::Exp3Lb,
            LearnerKind::Exp3alpha => Algorithm::Exp3Alpha,
            LearnerKind::Exp3ub => Algorithm::Exp3Ub,
            LearnerKind::Exp3lbp => Algorithm::Exp3LbP,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Exp3lbDoubling => "exp3lb_doubling",
            other => other.algorithm().name(),
        }
    }

    /// Whether the learner works in the lower-bound model, where per-round
    /// normalization applies.
    pub fn lower_bound_model(self) -> bool {
        !matches!(self, LearnerKind::Exp3alpha | LearnerKind::Exp3ub)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum AutoKeyword {
    Auto,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EtaRepr {
    Fixed(f64),
    Keyword(AutoKeyword),
}

/// `"auto"` or a fixed positive number.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "EtaRepr", into = "EtaRepr")]
pub enum EtaSetting {
    Fixed(f64),
    #[default]
    Auto,
}

impl From<EtaRepr> for EtaSetting {
    fn from(r: EtaRepr) -> Self {
        match r {
            EtaRepr::Fixed(v) => EtaSetting::Fixed(v),
            EtaRepr::Keyword(AutoKeyword::Auto) => EtaSetting::Auto,
        }
    }
}

impl From<EtaSetting> for EtaRepr {
    fn from(e: EtaSetting) -> Self {
        match e {
            EtaSetting::Fixed(v) => EtaRepr::Fixed(v),
            EtaSetting::Auto => EtaRepr::Keyword(AutoKeyword::Auto),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaSetting {
    Fixed(f64),
    Tuned {
        mode: BetaMode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
    },
}

/// Learning-rate presets selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetName {
    FullInfo,
    Bandit,
    Mixed,
    VariableSubset,
    /// Tune on `Q' = 4 (q + sum ||s||^2)` instead of the full quantity.
    Simplified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerConfig {
    pub algorithm: LearnerKind,
    #[serde(default)]
    pub eta: EtaSetting,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<BetaSetting>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_preset: Option<PresetName>,
    /// Doubling trick only: first guess of the tuning quantity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_guess: Option<f64>,
}

impl LearnerConfig {
    pub fn new(algorithm: LearnerKind) -> Self {
        LearnerConfig {
            algorithm,
            eta: EtaSetting::Auto,
            beta: None,
            eta_preset: None,
            initial_guess: None,
        }
    }
}

fn default_replicates() -> usize {
    1
}

fn default_delta() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSpec,
    pub learner: LearnerConfig,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Defaults to true for lower-bound-model learners, false otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalize: Option<bool>,
    /// Expert whose estimate is tracked by the concentration check.
    #[serde(default)]
    pub designated_expert: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(scenario: ScenarioSpec, learner: LearnerConfig) -> Self {
        ExperimentConfig {
            scenario,
            learner,
            replicates: 1,
            seed: 0,
            delta: default_delta(),
            normalize: None,
            designated_expert: 0,
            output_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.check().map_err(|(_, msg)| LbError::InvalidParameter(msg))
    }

    /// Like `validate`, but names the offending key.
    fn check(&self) -> std::result::Result<(), (&'static str, String)> {
        if self.replicates == 0 {
            return Err(("replicates", "replicates must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(("delta", format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.designated_expert >= self.scenario.num_experts {
            return Err((
                "designated_expert",
                format!("designated_expert {} out of range", self.designated_expert),
            ));
        }
        Ok(())
    }

    pub fn normalize(&self) -> bool {
        self.normalize.unwrap_or(self.learner.algorithm.lower_bound_model())
    }

    /// Seed of the generated instance: the scenario's own, else the
    /// experiment seed xor a fixed salt.
    pub fn instance_seed(&self) -> u64 {
        self.scenario.seed.unwrap_or(self.seed ^ INSTANCE_SEED_SALT)
    }
}

/// A configuration error located in the source text (1-based line/column).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: PathBuf,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.line == 0 {
            write!(f, "{}: {}", self.path.display(), self.message)
        } else {
            write!(f, "{}:{}:{}: {}", self.path.display(), self.line, self.column, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parses a configuration. Relative instance paths are resolved against
/// `base_dir`.
pub fn parse_config(text: &str, path: &Path, base_dir: Option<&Path>) -> std::result::Result<ExperimentConfig, ConfigError> {
    let mut cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| ConfigError {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string().split(" at line ").next().unwrap_or_default().to_string(),
    })?;
    if let (Some(base), LossModel::AdversarialHandcrafted { path: Some(p), .. }) =
        (base_dir, &mut cfg.scenario.loss_model)
    {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
    cfg.check().map_err(|(key, message)| {
        let (line, column) = locate_key(text, key).unwrap_or((1, 1));
        ConfigError {
            path: path.to_path_buf(),
            line,
            column,
            message,
        }
    })?;
    Ok(cfg)
}

/// 1-based position of the first occurrence of `"key"` in `text`.
fn locate_key(text: &str, key: &str) -> Option<(usize, usize)> {
    let at = text.find(&format!("\"{key}\""))?;
    let before = &text[..at];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    Some((line, column))
}

pub fn load_config(path: &Path) -> std::result::Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        path: path.to_path_buf(),
        line: 0,
        column: 0,
        message: e.to_string(),
    })?;
    parse_config(&text, path, path.parent())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
  "scenario": {"kind": "bandit", "num_experts": 2, "horizon": 10,
               "loss_model": {"model": "uniform_iid"}},
  "learner": LEARNER,
  "replicates": 5
}"#;

    fn parse(learner: &str) -> std::result::Result<ExperimentConfig, ConfigError> {
        parse_config(&BASE.replace("LEARNER", learner), Path::new("c.json"), None)
    }

    #[test]
    fn eta_and_beta_forms() {
        let c = parse(r#"{"algorithm": "exp3lb", "eta": "auto"}"#).unwrap();
        assert_eq!(c.learner.eta, EtaSetting::Auto);
        assert_eq!(c.delta, 0.05);
        assert!(c.normalize());
        let c = parse(r#"{"algorithm": "exp3lb", "eta": 0.25}"#).unwrap();
        assert_eq!(c.learner.eta, EtaSetting::Fixed(0.25));
        let c = parse(r#"{"algorithm": "exp3lbp", "beta": {"mode": "hp_iii", "delta": 0.1}}"#).unwrap();
        assert_eq!(
            c.learner.beta,
            Some(BetaSetting::Tuned {
                mode: BetaMode::HpIii,
                delta: Some(0.1)
            })
        );
        let c = parse(r#"{"algorithm": "exp3lbp", "beta": 0.5}"#).unwrap();
        assert_eq!(c.learner.beta, Some(BetaSetting::Fixed(0.5)));
        let c = parse(r#"{"algorithm": "exp3ub"}"#).unwrap();
        assert!(!c.normalize());
        let c = parse(r#"{"algorithm": "exp3lb_doubling", "eta_preset": "simplified"}"#).unwrap();
        assert_eq!(c.learner.algorithm, LearnerKind::Exp3lbDoubling);
    }

    #[test]
    fn errors_carry_location() {
        let err = parse(r#"{"algorithm": "exp4"}"#).unwrap_err();
        assert_eq!(err.line, 4);
        let shown = err.to_string();
        assert!(shown.starts_with("c.json:4:"), "{shown}");
        assert!(parse(r#"{"algorithm": "exp3", "eta": "fast"}"#).is_err());
        let bad_delta = BASE.replace("LEARNER", r#"{"algorithm": "exp3"}"#).replace("\"replicates\": 5", "\"delta\": 1.5");
        let err = parse_config(&bad_delta, Path::new("c.json"), None).unwrap_err();
        assert_eq!((err.line, err.column), (5, 3));
    }

    #[test]
    fn round_trip() {
        let c = parse(r#"{"algorithm": "exp3lbp", "beta": {"mode": "hp_i"}}"#).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(parse_config(&text, Path::new("x"), None).unwrap(), c);
    }
}
