//! `lbexperts` command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use super::config::{load_config, ExperimentConfig};
use super::episode::run_episode;
use super::monte_carlo::{estimate_with_plan, replicate_seed};
use super::output::{write_curve_csv, write_json, write_trace_csv};
use super::plan::ExperimentPlan;
use super::verify::{run_verify, VerifyOptions};
use crate::environments::ScenarioKind;
use crate::error::LbError;

#[derive(Debug, Parser)]
#[command(name = "lbexperts", version, about = "Prediction with expert advice under lower-bounded loss feedback")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Play one episode and write trace.csv.
    Run(Common),
    /// Monte Carlo pseudo-regret: report.json and regret_curve.csv.
    Estimate(Common),
    /// Run the verification suite; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Estimate regret over a grid of one parameter and write sweep.csv.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to the config's output_dir, else "out".
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the replicate counts of the Monte Carlo checks.
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepParam {
    Horizon,
    NumExperts,
    SlackFraction,
    Cap,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    param: SweepParam,
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
}

enum Failure {
    Input(String),
    Runtime(String),
}

impl From<LbError> for Failure {
    fn from(e: LbError) -> Self {
        match e {
            LbError::Io(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code: 0 success, 1 check failure, 2 invalid input. Reports go to
/// `out`, errors to `err`.
pub fn run_cli<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 2;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    let result = match cli.command {
        Command::Run(c) => cmd_run(&c, out),
        Command::Estimate(c) => cmd_estimate(&c, out),
        Command::Verify(v) => cmd_verify(&v, out),
        Command::Sweep(s) => cmd_sweep(&s, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

fn load(c: &Common) -> std::result::Result<ExperimentConfig, Failure> {
    let mut cfg = load_config(&c.config).map_err(|e| Failure::Input(e.to_string()))?;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(r) = c.replicates {
        cfg.replicates = r;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn make_dir(dir: &Path) -> std::result::Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))
}

fn out_dir(c: &Common, cfg: &ExperimentConfig) -> std::result::Result<PathBuf, Failure> {
    let dir = c.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    make_dir(&dir)?;
    Ok(dir)
}

fn say(out: &mut dyn Write, quiet: bool, line: String) {
    if !quiet {
        let _ = writeln!(out, "{line}");
    }
}

fn cmd_run(c: &Common, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let cfg = load(c)?;
    let plan = ExperimentPlan::from_config(&cfg)?;
    let trace = run_episode(&plan, replicate_seed(cfg.seed, 0))?;
    let dir = out_dir(c, &cfg)?;
    write_trace_csv(&dir.join("trace.csv"), &trace)?;
    say(
        out,
        c.quiet,
        format!(
            "{} on {}: N={} T={} final regret {} (bound {} [{}])",
            cfg.learner.algorithm.name(),
            cfg.scenario.kind.name(),
            plan.num_experts(),
            plan.horizon(),
            trace.final_regret(),
            plan.theoretical_bound,
            plan.bound_kind
        ),
    );
    Ok(0)
}

fn cmd_estimate(c: &Common, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let cfg = load(c)?;
    let plan = ExperimentPlan::from_config(&cfg)?;
    let (report, curve) = estimate_with_plan(&cfg, &plan)?;
    let dir = out_dir(c, &cfg)?;
    write_json(&dir.join("report.json"), &report)?;
    write_curve_csv(&dir.join("regret_curve.csv"), &curve)?;
    let stderr = report.std_error.map_or("n/a".to_string(), |s| format!("{s:.4}"));
    say(
        out,
        c.quiet,
        format!(
            "{} on {}: mean pseudo-regret {:.4} (stderr {stderr}) vs bound {:.4} [{}]: {}",
            report.algorithm,
            report.scenario,
            report.mean_pseudo_regret,
            report.theoretical_bound,
            report.bound_kind,
            if report.bound_check.pass { "within bound" } else { "ABOVE BOUND" }
        ),
    );
    Ok(0)
}

fn cmd_verify(v: &VerifyArgs, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    if v.replicates == Some(0) {
        return Err(Failure::Input("--replicates must be at least 1".into()));
    }
    let report = run_verify(VerifyOptions { seed: v.seed, replicates: v.replicates })?;
    make_dir(&v.out)?;
    write_json(&v.out.join("verify.json"), &report)?;
    for check in &report.checks {
        say(out, v.quiet, check.line());
    }
    let failed = report.checks.iter().filter(|c| !c.pass).count();
    say(out, v.quiet, format!("{} checks, {failed} failed", report.checks.len()));
    Ok(if report.all_pass { 0 } else { 1 })
}

fn apply_sweep(cfg: &mut ExperimentConfig, param: SweepParam, value: f64) -> std::result::Result<(), Failure> {
    let as_count = |v: f64| {
        if v >= 1.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(Failure::Input(format!("sweep value {v} is not a positive integer")))
        }
    };
    match param {
        SweepParam::Horizon => {
            cfg.scenario.horizon = as_count(value)?;
            if let ScenarioKind::Mixed { full_info_rounds, bandit_rounds, .. } = &mut cfg.scenario.kind {
                if full_info_rounds.is_some() || bandit_rounds.is_some() {
                    *full_info_rounds = Some(cfg.scenario.horizon / 2);
                    *bandit_rounds = Some(cfg.scenario.horizon - cfg.scenario.horizon / 2);
                }
            }
        }
        SweepParam::NumExperts => cfg.scenario.num_experts = as_count(value)?,
        SweepParam::SlackFraction => match &mut cfg.scenario.kind {
            ScenarioKind::GenericLb { slack_fraction, .. } => *slack_fraction = value,
            _ => return Err(Failure::Input("slack_fraction sweeps need a generic_lb scenario".into())),
        },
        SweepParam::Cap => match &mut cfg.scenario.kind {
            ScenarioKind::UpperBound { cap } => *cap = value,
            _ => return Err(Failure::Input("cap sweeps need an upper_bound scenario".into())),
        },
    }
    Ok(())
}

fn cmd_sweep(s: &SweepArgs, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let base = load(&s.common)?;
    let param = s.param.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    let mut rows = Vec::new();
    for &value in &s.values {
        let mut cfg = base.clone();
        apply_sweep(&mut cfg, s.param, value)?;
        cfg.validate()?;
        let plan = ExperimentPlan::from_config(&cfg)?;
        let (report, _) = estimate_with_plan(&cfg, &plan)?;
        say(
            out,
            s.common.quiet,
            format!("{param}={value}: mean {:.4} bound {:.4}", report.mean_pseudo_regret, report.theoretical_bound),
        );
        rows.push(json!({
            "value": format!("{value}"),
            "mean_regret": report.mean_pseudo_regret,
            "stderr": report.std_error,
            "bound": report.theoretical_bound,
            "bound_kind": report.bound_kind,
            "eta": report.eta_used,
            "pass": report.bound_check.pass,
        }));
    }
    let path = out_dir(&s.common, &base)?.join("sweep.csv");
    let io = |e: csv::Error| Failure::Runtime(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(&path).map_err(io)?;
    w.write_record([param.as_str(), "mean_regret", "stderr", "bound", "bound_kind", "eta", "pass"]).map_err(io)?;
    for r in &rows {
        let cell = |k: &str| match &r[k] {
            serde_json::Value::Null => String::new(),
            serde_json::Value::String(s) => s.clone(),
            v => v.to_string(),
        };
        w.write_record(["value", "mean_regret", "stderr", "bound", "bound_kind", "eta", "pass"].map(cell)).map_err(io)?;
    }
    w.flush().map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    Ok(0)
}
