//! Episode runner, Monte Carlo regret estimation, bound checks, the
//! verification suite and the command-line front end.

mod checks;
mod cli;
pub mod config;
mod episode;
mod monte_carlo;
mod output;
mod plan;
mod verify;

pub use checks::{
    binomial_limit, bound_check, concentration_check, empirical_quantile, BoundCheck,
    ConcentrationResult, STDERR_ALLOWANCE,
};
pub use cli::run_cli;
pub use config::{
    load_config, parse_config, BetaSetting, ConfigError, EtaSetting, ExperimentConfig,
    LearnerConfig, LearnerKind, PresetName,
};
pub use episode::{run_episode, simulate_episode, EpisodeSummary};
pub use monte_carlo::{
    estimate_pseudo_regret, estimate_with_plan, mean_and_stderr, replicate_seed, run_replicates,
    CurvePoint, Quantile, RegretReport,
};
pub use output::{write_curve_csv, write_json, write_trace_csv};
pub use plan::{ExperimentPlan, INSTANCE_SEED_SALT};
pub use verify::{run_verify, CheckOutcome, VerifyOptions, VerifyReport};
