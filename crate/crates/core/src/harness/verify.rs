//! The deterministic verification suite behind `lbexperts verify`.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::checks::{concentration_check, empirical_quantile};
use super::config::{BetaSetting, ExperimentConfig, LearnerConfig, LearnerKind, PresetName};
use super::monte_carlo::{estimate_with_plan, mean_and_stderr, run_replicates};
use super::plan::ExperimentPlan;
use crate::environments::{feedback_for, generate_instance, LossModel, ScenarioKind, ScenarioSpec};
use crate::error::Result;
use crate::game::{distribution_from_cumloss, sample_action, FeedbackKind, GameInstance, ProbabilityVector, RandomStream};
use crate::learners::{correction_factor, exp3lb_estimate, exp3lbp_estimate, Algorithm, LearnerState, OnlineLearner};
use crate::quantities::{
    hessian_quadratic_form, popoviciu_bound, potential_phi, q_unknown_horizon, spread, second_order_q, BetaMode,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Replaces the replicate counts of the Monte Carlo checks.
    pub replicates: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub id: String,
    pub name: String,
    pub pass: bool,
    pub summary: String,
    pub details: Value,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        format!(
            "{} {:<8} {:<28} {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.summary
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub replicates_override: Option<usize>,
    pub all_pass: bool,
    pub checks: Vec<CheckOutcome>,
}

fn outcome(id: &str, name: &str, pass: bool, summary: String, details: Value) -> CheckOutcome {
    CheckOutcome {
        id: id.to_string(),
        name: name.to_string(),
        pass,
        summary,
        details,
    }
}

fn sub_seed(seed: u64, tag: u64) -> u64 {
    seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(17)
}

/// Runs every check in order and collects the outcomes.
pub fn run_verify(opts: VerifyOptions) -> Result<VerifyReport> {
    let checks = vec![
        degeneracy(opts)?,
        unbiasedness(opts),
        correction_grid(),
        second_order_bounds(opts)?,
        preset_bounds(opts)?,
        concentration(opts)?,
        high_probability(opts)?,
        potential_oracles(opts)?,
        doubling_growth(opts)?,
        determinism(opts)?,
        sandwich(opts)?,
        unknown_horizon_dominance(opts)?,
        potential_bound(opts)?,
        downward_bias(opts)?,
    ];
    Ok(VerifyReport {
        seed: opts.seed,
        replicates_override: opts.replicates,
        all_pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

fn uniform_in(rng: &mut RandomStream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.next_f64()
}

fn random_simplex(rng: &mut RandomStream, n: usize) -> ProbabilityVector {
    let w: Vec<f64> = (0..n).map(|_| 0.01 + rng.next_f64()).collect();
    let total: f64 = w.iter().sum();
    let mut p: Vec<f64> = w.iter().map(|v| v / total).collect();
    let head: f64 = p[..n - 1].iter().sum();
    p[n - 1] = 1.0 - head;
    ProbabilityVector::new(p).expect("positive weights")
}

/// Plays `learner` on `inst` with feedback of `kind`; returns the
/// distributions it played and its actions.
fn drive(mut learner: LearnerState, inst: &GameInstance, seed: u64, kind: FeedbackKind) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let mut rng = RandomStream::new(seed);
    let mut dists = Vec::with_capacity(inst.horizon());
    let mut actions = Vec::with_capacity(inst.horizon());
    for t in 0..inst.horizon() {
        let p = learner.distribution().clone();
        let i = sample_action(&p, &mut rng);
        learner.observe(&feedback_for(inst, t, i, kind)?)?;
        dists.push(p.into_vec());
        actions.push(i);
    }
    Ok((dists, actions))
}

fn max_gap(a: &(Vec<Vec<f64>>, Vec<usize>), b: &(Vec<Vec<f64>>, Vec<usize>)) -> (f64, bool) {
    let gap = a
        .0
        .iter()
        .zip(&b.0)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max);
    (gap, a.1 == b.1)
}

fn degeneracy(opts: VerifyOptions) -> Result<CheckOutcome> {
    let mut rng = RandomStream::new(sub_seed(opts.seed, 1));
    let pairs = ["exp3lb_bandit_vs_exp3", "exp3lb_full_vs_hedge", "exp3lbp_beta0_vs_exp3lb", "exp3alpha_lambda_vs_exp3lb", "exp3alpha_zero_vs_exp3"];
    let mut worst = [0.0f64; 5];
    let mut same_actions = [true; 5];
    for _ in 0..20 {
        let n = 2 + rng.next_below(7);
        let t = 50 + rng.next_below(451);
        let eta = uniform_in(&mut rng, 0.05, 1.0);
        let inst_seed = rng.next_u64();
        let play_seed = rng.next_u64();
        let make = |kind: ScenarioKind| {
            generate_instance(&ScenarioSpec::new(kind, n, t, LossModel::UniformIid).with_seed(inst_seed))
        };
        let bandit = make(ScenarioKind::Bandit)?;
        let full = make(ScenarioKind::FullInfo)?;
        let generic = make(ScenarioKind::GenericLb { slack_fraction: 0.5, range: None })?;
        let state = |alg| LearnerState::new(alg, n, eta, 0.0);
        let lbp = LearnerState::new(Algorithm::Exp3LbP, n, eta, 0.0)?;

        let runs = [
            (drive(state(Algorithm::Exp3Lb)?, &bandit, play_seed, FeedbackKind::LowerBounds)?, drive(state(Algorithm::Exp3)?, &bandit, play_seed, FeedbackKind::LowerBounds)?),
            (drive(state(Algorithm::Exp3Lb)?, &full, play_seed, FeedbackKind::LowerBounds)?, drive(state(Algorithm::Hedge)?, &full, play_seed, FeedbackKind::FullLosses)?),
            (drive(lbp, &generic, play_seed, FeedbackKind::LowerBounds)?, drive(state(Algorithm::Exp3Lb)?, &generic, play_seed, FeedbackKind::LowerBounds)?),
            (drive(state(Algorithm::Exp3Alpha)?, &generic, play_seed, FeedbackKind::Alphas)?, drive(state(Algorithm::Exp3Lb)?, &generic, play_seed, FeedbackKind::LowerBounds)?),
            (drive(state(Algorithm::Exp3Alpha)?, &bandit, play_seed, FeedbackKind::Alphas)?, drive(state(Algorithm::Exp3)?, &bandit, play_seed, FeedbackKind::LowerBounds)?),
        ];
        for (k, (a, b)) in runs.iter().enumerate() {
            let (gap, same) = max_gap(a, b);
            worst[k] = worst[k].max(gap);
            same_actions[k] &= same;
        }
    }
    let pass = worst.iter().all(|g| *g <= 1e-12) && same_actions.iter().all(|s| *s);
    let details: Value = pairs
        .iter()
        .enumerate()
        .map(|(k, name)| (name.to_string(), json!({"max_abs_diff": worst[k], "same_actions": same_actions[k]})))
        .collect::<serde_json::Map<_, _>>()
        .into();
    let max = worst.iter().copied().fold(0.0, f64::max);
    Ok(outcome("1", "degeneracy", pass, format!("20 instances x 5 pairs, max |dp| = {max:e} (tol 1e-12)"), details))
}

fn unbiasedness(opts: VerifyOptions) -> CheckOutcome {
    let mut rng = RandomStream::new(sub_seed(opts.seed, 2));
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = 2 + rng.next_below(7);
        let p = random_simplex(&mut rng, n);
        let lb: Vec<f64> = (0..n).map(|_| uniform_in(&mut rng, -1.0, 1.0)).collect();
        let l: Vec<f64> = lb.iter().map(|v| v + uniform_in(&mut rng, 0.0, 2.0)).collect();
        let mut expect = vec![0.0; n];
        for i in 0..n {
            let est = exp3lb_estimate(i, l[i], &lb, &p).expect("valid inputs");
            for k in 0..n {
                expect[k] += p[i] * est[k];
            }
        }
        for k in 0..n {
            worst = worst.max((expect[k] - l[k]).abs());
        }
    }
    outcome(
        "2",
        "unbiasedness",
        worst <= 1e-14,
        format!("1000 triples, max |E l~ - l| = {worst:e} (tol 1e-14)"),
        json!({"triples": 1000, "max_abs_error": worst}),
    )
}

fn correction_grid() -> CheckOutcome {
    let tol = 1e-10;
    let mut worst = [0.0f64; 5];
    let mut points = 0;
    let mut range_ok = true;
    let grid_p: Vec<f64> = (0..200).map(|k| 0.005 + 0.99 * k as f64 / 199.0).collect();
    let grid_a: Vec<f64> = (0..200).map(|k| k as f64 / 199.0).collect();
    for &p in &grid_p {
        for &a in &grid_a {
            let x = correction_factor(p, a).expect("in domain");
            points += 1;
            range_ok &= (0.0..=1.0).contains(&x) && ((x == 0.0) == (a == 0.0));
            worst[0] = worst[0].max((x - a * ((1.0 - x) / p + 2.0 * x - 1.0)).abs());
            worst[1] = worst[1].max(a * ((1.0 - x) / p - 1.0) - 1.0);
            worst[2] = worst[2].max(p * x * a - a * a);
            worst[3] = worst[3].max(a * (1.0 - x) * (1.0 - x) / p - 1.0);
        }
        range_ok &= correction_factor(p, 1.0) == Ok(1.0) && correction_factor(p, 0.0) == Ok(0.0);
    }
    worst[4] = if range_ok { 0.0 } else { 1.0 };
    let pass = worst[0] <= tol && worst[1] <= tol && worst[2] <= tol && worst[3] <= tol && range_ok;
    outcome(
        "3",
        "correction_factor_grid",
        pass,
        format!("{points} grid points, worst identity residual {:e}, worst inequality excess {:e}", worst[0], worst[1].max(worst[2]).max(worst[3])),
        json!({
            "points": points,
            "identity_residual": worst[0],
            "excess_iii": worst[1],
            "excess_iv": worst[2],
            "excess_v": worst[3],
            "range_and_boundary_ok": range_ok,
        }),
    )
}

fn reps(opts: VerifyOptions, default: usize) -> usize {
    opts.replicates.unwrap_or(default)
}

fn mc_config(kind: ScenarioKind, n: usize, t: usize, learner: LearnerConfig, replicates: usize, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(ScenarioSpec::new(kind, n, t, LossModel::UniformIid), learner);
    cfg.replicates = replicates;
    cfg.seed = seed;
    cfg
}

fn bound_rows(opts: VerifyOptions, tag: u64, cases: Vec<(&str, ScenarioKind, LearnerConfig)>) -> Result<(bool, Vec<Value>, String)> {
    let r = reps(opts, 1000);
    let mut rows = Vec::new();
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, (label, kind, learner)) in cases.into_iter().enumerate() {
        let cfg = mc_config(kind, 8, 2000, learner, r, sub_seed(opts.seed, tag + k as u64));
        let plan = ExperimentPlan::from_config(&cfg)?;
        let (report, _) = estimate_with_plan(&cfg, &plan)?;
        pass &= report.bound_check.pass;
        parts.push(format!("{label} {:.1}/{:.1}", report.mean_pseudo_regret, report.theoretical_bound));
        rows.push(json!({
            "scenario": label,
            "mean": report.mean_pseudo_regret,
            "stderr": report.std_error,
            "bound": report.theoretical_bound,
            "bound_kind": report.bound_kind,
            "eta": report.eta_used,
            "Q": report.quantities.q_second_order,
            "pass": report.bound_check.pass,
        }));
    }
    Ok((pass, rows, parts.join(", ")))
}

fn second_order_bounds(opts: VerifyOptions) -> Result<CheckOutcome> {
    let lb = || LearnerConfig::new(LearnerKind::Exp3lb);
    let cases = vec![
        ("bandit", ScenarioKind::Bandit, lb()),
        ("full_info", ScenarioKind::FullInfo, lb()),
        ("mixed", mixed_half(), lb()),
        ("variable_subset", random_subsets(), lb()),
        ("generic_lb", ScenarioKind::GenericLb { slack_fraction: 0.5, range: None }, lb()),
    ];
    let (pass, rows, summary) = bound_rows(opts, 40, cases)?;
    Ok(outcome("4", "second_order_bound", pass, format!("mean/bound: {summary}"), json!({"replicates": reps(opts, 1000), "cases": rows})))
}

fn mixed_half() -> ScenarioKind {
    ScenarioKind::Mixed {
        full_info_rounds: Some(1000),
        bandit_rounds: Some(1000),
        arrangement: Default::default(),
        flags: None,
    }
}

fn random_subsets() -> ScenarioKind {
    ScenarioKind::VariableSubset {
        subsets: None,
        subset_size: None,
    }
}

fn preset_bounds(opts: VerifyOptions) -> Result<CheckOutcome> {
    let preset = |p| {
        let mut l = LearnerConfig::new(LearnerKind::Exp3lb);
        l.eta_preset = Some(p);
        l
    };
    let cases = vec![
        ("mixed", mixed_half(), preset(PresetName::Mixed)),
        ("variable_subset", random_subsets(), preset(PresetName::VariableSubset)),
    ];
    let (mut pass, rows, summary) = bound_rows(opts, 50, cases)?;
    let anchor_cfg = mc_config(ScenarioKind::Bandit, 2, 1000, preset(PresetName::Bandit), 1, opts.seed);
    let anchor = ExperimentPlan::from_config(&anchor_cfg)?.theoretical_bound;
    pass &= (anchor - 52.66).abs() < 0.01;
    Ok(outcome(
        "5",
        "preset_bounds",
        pass,
        format!("mean/bound: {summary}; bandit anchor {anchor:.2}"),
        json!({"replicates": reps(opts, 1000), "cases": rows, "bandit_anchor_bound": anchor}),
    ))
}

fn lbp_config(mode: BetaMode, replicates: usize, seed: u64) -> ExperimentConfig {
    let mut l = LearnerConfig::new(LearnerKind::Exp3lbp);
    l.beta = Some(BetaSetting::Tuned { mode, delta: Some(0.05) });
    let mut cfg = mc_config(ScenarioKind::Bandit, 4, 1000, l, replicates, seed);
    cfg.delta = 0.05;
    cfg.scenario.seed = Some(sub_seed(seed, 99));
    cfg
}

fn concentration(opts: VerifyOptions) -> Result<CheckOutcome> {
    let r = reps(opts, 10_000);
    let cfg = lbp_config(BetaMode::HpI, r, sub_seed(opts.seed, 6));
    let plan = ExperimentPlan::from_config(&cfg)?;
    let res = concentration_check(&plan, 0.05, r, cfg.seed)?;
    Ok(outcome(
        "6",
        "concentration",
        res.pass,
        format!("violation fraction {:.4} <= {:.4} (beta {:.4})", res.violation_fraction, res.limit, plan.beta),
        json!({"replicates": r, "beta": plan.beta, "result": res}),
    ))
}

fn high_probability(opts: VerifyOptions) -> Result<CheckOutcome> {
    let r = reps(opts, 10_000);
    let cfg = lbp_config(BetaMode::HpIii, r, sub_seed(opts.seed, 7));
    let plan = ExperimentPlan::from_config(&cfg)?;
    let runs = run_replicates(&plan, cfg.seed, r, false)?;
    let regrets: Vec<f64> = runs.iter().map(|x| x.final_regret).collect();
    let q = empirical_quantile(&regrets, 0.95);
    let pass = q <= plan.theoretical_bound;
    Ok(outcome(
        "7",
        "high_probability_regret",
        pass,
        format!("0.95-quantile {q:.2} <= bound {:.2} (beta {:.4})", plan.theoretical_bound, plan.beta),
        json!({
            "replicates": r,
            "quantile": q,
            "bound": plan.theoretical_bound,
            "beta": plan.beta,
            "eta": plan.eta,
            "beta_tuning": plan.beta_tuning,
        }),
    ))
}

/// Second directional derivative of the potential along `x`, by central
/// differences with one Richardson extrapolation step. `z` is shifted so
/// that the potential vanishes there and `x` is centred, which leaves the
/// second derivative unchanged and keeps the differenced values small.
pub(crate) fn fd_quadratic_form(z: &[f64], x: &[f64], eta: f64, p0: &ProbabilityVector, h: f64) -> f64 {
    let c = potential_phi(z, eta, p0).expect("finite inputs");
    let xm = x.iter().sum::<f64>() / x.len() as f64;
    let phi = |s: f64| {
        let zz: Vec<f64> = z.iter().zip(x).map(|(a, b)| a - c + s * (b - xm)).collect();
        potential_phi(&zz, eta, p0).expect("finite inputs")
    };
    let f0 = phi(0.0);
    let d = |h: f64| (phi(h) - 2.0 * f0 + phi(-h)) / (h * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

fn potential_oracles(opts: VerifyOptions) -> Result<CheckOutcome> {
    let mut rng = RandomStream::new(sub_seed(opts.seed, 8));
    let mut worst_rel = 0.0f64;
    let mut range_ok = true;
    for _ in 0..100 {
        let n = 2 + rng.next_below(7);
        let z: Vec<f64> = (0..n).map(|_| uniform_in(&mut rng, -2.0, 2.0)).collect();
        let x: Vec<f64> = (0..n).map(|_| uniform_in(&mut rng, -2.0, 2.0)).collect();
        let eta = uniform_in(&mut rng, 0.1, 3.0);
        let p0 = random_simplex(&mut rng, n);
        let a = hessian_quadratic_form(&z, &x, eta, &p0)?;
        let sx = spread(&x)?;
        let h = 0.1 / (eta * sx).max(1.0);
        let fd = fd_quadratic_form(&z, &x, eta, &p0, h);
        worst_rel = worst_rel.max((fd - a).abs() / a.abs());
        range_ok &= a <= 0.0 && a >= -eta * popoviciu_bound(0.0, sx)? - 1e-15;
    }
    let pass = worst_rel <= 1e-6 && range_ok;
    Ok(outcome(
        "8",
        "hessian_oracle",
        pass,
        format!("100 points, max relative error {worst_rel:e} (tol 1e-6), range ok {range_ok}"),
        json!({"points": 100, "max_relative_error": worst_rel, "range_ok": range_ok}),
    ))
}

/// Mean over `instances` random instances (each with `per_instance`
/// replicates) of `regret_T / sqrt(Q_uh ln N)` for the doubling wrapper.
fn doubling_ratio(kind: &ScenarioKind, model: LossModel, t: usize, instances: usize, per_instance: usize, seed: u64) -> Result<(f64, f64)> {
    let vals: Vec<f64> = (0..instances as u64)
        .into_par_iter()
        .map(|k| {
            let spec = ScenarioSpec::new(kind.clone(), 4, t, model.clone()).with_seed(sub_seed(seed, 2 * k));
            let mut cfg = ExperimentConfig::new(spec, LearnerConfig::new(LearnerKind::Exp3lbDoubling));
            cfg.replicates = per_instance;
            cfg.seed = sub_seed(seed, 2 * k + 1);
            let plan = ExperimentPlan::from_config(&cfg)?;
            let norm = (q_unknown_horizon(plan.feed.lower_bounds(), 4)? * 4f64.ln()).sqrt();
            let runs = run_replicates(&plan, cfg.seed, per_instance, false)?;
            Ok(runs.iter().map(|r| r.final_regret).sum::<f64>() / per_instance as f64 / norm)
        })
        .collect::<Result<_>>()?;
    let (mean, se) = mean_and_stderr(&vals);
    Ok((mean, se.unwrap_or(0.0)))
}

fn doubling_growth(opts: VerifyOptions) -> Result<CheckOutcome> {
    let instances = reps(opts, 200);
    let per_instance = 10;
    let horizons = [500usize, 1000, 2000, 4000];
    let kind = ScenarioKind::GenericLb { slack_fraction: 0.5, range: None };
    type ModelAt = fn(usize) -> LossModel;
    let regimes: [(&str, ModelAt); 2] = [
        ("uniform_iid", |_| LossModel::UniformIid),
        ("gap_sqrt_n_over_t", |t| LossModel::BernoulliGap { mean: 0.5, gap: (4.0 / t as f64).sqrt(), best: 0 }),
    ];
    let mut pass = true;
    let mut rows = Vec::new();
    let mut parts = Vec::new();
    for (k, (label, model)) in regimes.iter().enumerate() {
        let seed = sub_seed(opts.seed, 90 + k as u64);
        let ratios: Vec<(f64, f64)> = horizons
            .iter()
            .map(|&t| doubling_ratio(&kind, model(t), t, instances, per_instance, seed ^ t as u64))
            .collect::<Result<_>>()?;
        let c = ratios[0].0;
        let mut steps = Vec::new();
        for j in 1..ratios.len() {
            let froms: &[usize] = if j == 1 { &[0] } else { &[j - 1, 0] };
            for &from in froms {
                let increase = ratios[j].0 - ratios[from].0;
                let allowance = 3.0 * (ratios[j].1.powi(2) + ratios[from].1.powi(2)).sqrt();
                let ok = increase <= allowance;
                pass &= ok;
                steps.push(json!({"from": horizons[from], "to": horizons[j], "increase": increase, "allowance": allowance, "pass": ok}));
            }
        }
        let list: Vec<String> = ratios.iter().map(|r| format!("{:.3}", r.0)).collect();
        parts.push(format!("{label} {}", list.join("/")));
        rows.push(json!({
            "regime": label,
            "fitted_c": c,
            "ratios": ratios.iter().map(|r| json!({"mean": r.0, "stderr": r.1})).collect::<Vec<_>>(),
            "steps": steps,
        }));
    }
    Ok(outcome(
        "9",
        "doubling_growth",
        pass,
        format!("regret / sqrt(Q_uh ln N) at T=500..4000: {}", parts.join(", ")),
        json!({
            "instances_per_horizon": instances,
            "replicates_per_instance": per_instance,
            "horizons": horizons,
            "regimes": rows,
        }),
    ))
}

fn determinism(opts: VerifyOptions) -> Result<CheckOutcome> {
    let cfg = mc_config(
        ScenarioKind::GenericLb { slack_fraction: 0.5, range: None },
        5,
        300,
        LearnerConfig::new(LearnerKind::Exp3lb),
        50,
        sub_seed(opts.seed, 10),
    );
    let plan = ExperimentPlan::from_config(&cfg)?;
    let a = serde_json::to_string(&estimate_with_plan(&cfg, &plan)?.0).unwrap_or_default();
    let b = serde_json::to_string(&estimate_with_plan(&cfg, &ExperimentPlan::from_config(&cfg)?)?.0).unwrap_or_default();
    let t1 = super::episode::run_episode(&plan, 3)?;
    let t2 = super::episode::run_episode(&plan, 3)?;
    let pass = a == b && t1 == t2;
    Ok(outcome(
        "10",
        "determinism",
        pass,
        "repeated estimate and episode are identical".into(),
        json!({"report_bytes": a.len(), "identical": pass}),
    ))
}

fn random_instance(rng: &mut RandomStream) -> Result<GameInstance> {
    let n = 1 + rng.next_below(8);
    let t = 1 + rng.next_below(30);
    let kind = match rng.next_below(5) {
        0 => ScenarioKind::Bandit,
        1 => ScenarioKind::FullInfo,
        2 => ScenarioKind::VariableSubset { subsets: None, subset_size: None },
        3 => ScenarioKind::GenericLb { slack_fraction: rng.next_f64(), range: None },
        _ => ScenarioKind::GenericLb { slack_fraction: rng.next_f64(), range: Some([-3.0, 5.0]) },
    };
    generate_instance(&ScenarioSpec::new(kind, n, t, LossModel::UniformIid).with_seed(rng.next_u64()))
}

fn sandwich(opts: VerifyOptions) -> Result<CheckOutcome> {
    let mut rng = RandomStream::new(sub_seed(opts.seed, 11));
    let mut pass = true;
    let mut min_slack = f64::INFINITY;
    for _ in 0..1000 {
        let inst = random_instance(&mut rng)?;
        let q = second_order_q(inst.lower_bounds(), &inst.slacks(), inst.num_experts())?;
        let base = q.q_lb + q.sum_sq_slack;
        let lo = q.q_second_order - base / 2.0;
        let hi = 4.0 * base - q.q_second_order;
        let tol = 1e-12 * base.max(1.0);
        pass &= lo >= -tol && hi >= -tol;
        min_slack = min_slack.min(lo.min(hi));
    }
    Ok(outcome("extra", "sandwich", pass, format!("1000 instances, tightest side {min_slack:e}"), json!({"instances": 1000, "tightest": min_slack})))
}

fn unknown_horizon_dominance(opts: VerifyOptions) -> Result<CheckOutcome> {
    let mut rng = RandomStream::new(sub_seed(opts.seed, 12));
    let mut pass = true;
    let mut checked = 0;
    while checked < 500 {
        let inst = random_instance(&mut rng)?;
        if inst.losses().iter().any(|l| !(0.0..=1.0).contains(l)) {
            continue;
        }
        let q = second_order_q(inst.lower_bounds(), &inst.slacks(), inst.num_experts())?;
        let uh = q_unknown_horizon(inst.lower_bounds(), inst.num_experts())?;
        pass &= uh >= q.q_second_order - 1e-12;
        checked += 1;
    }
    Ok(outcome("extra", "unknown_horizon_dominance", pass, format!("{checked} instances with losses in [0, 1]"), json!({"instances": checked})))
}

fn potential_bound(opts: VerifyOptions) -> Result<CheckOutcome> {
    let mut rng = RandomStream::new(sub_seed(opts.seed, 13));
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let n = 1 + rng.next_below(16);
        let eta = uniform_in(&mut rng, 0.01, 5.0);
        let scale = uniform_in(&mut rng, 0.1, 1e4);
        let l: Vec<f64> = (0..n).map(|_| scale * rng.next_f64()).collect();
        let p0 = ProbabilityVector::uniform(n)?;
        let phi = potential_phi(&l, eta, &p0)?;
        let min = l.iter().copied().fold(f64::INFINITY, f64::min);
        worst = worst.max(phi - min - (n as f64).ln() / eta);
        let p = distribution_from_cumloss(eta, &l)?;
        worst = worst.max((p.as_slice().iter().sum::<f64>() - 1.0).abs() - 1e-12);
    }
    Ok(outcome("extra", "potential_bound", worst <= 1e-9, format!("1000 points, worst excess {worst:e}"), json!({"points": 1000, "worst_excess": worst})))
}

fn downward_bias(opts: VerifyOptions) -> Result<CheckOutcome> {
    let mut rng = RandomStream::new(sub_seed(opts.seed, 14));
    let mut pass = true;
    for _ in 0..1000 {
        let n = 2 + rng.next_below(7);
        let p = random_simplex(&mut rng, n);
        let lb: Vec<f64> = (0..n).map(|_| uniform_in(&mut rng, -1.0, 1.0)).collect();
        let s: Vec<f64> = (0..n).map(|_| uniform_in(&mut rng, 0.0, 2.0)).collect();
        let l: Vec<f64> = lb.iter().zip(&s).map(|(a, b)| a + b).collect();
        let max_s = s.iter().copied().fold(0.0, f64::max);
        let beta = uniform_in(&mut rng, 1e-3, 1.0) / max_s;
        let mut mean = vec![0.0; n];
        for i in 0..n {
            let est = exp3lbp_estimate(i, l[i], &lb, &p, beta)?;
            for k in 0..n {
                mean[k] += p[i] * est[k];
            }
        }
        for k in 0..n {
            let x = correction_factor(p[k], beta * s[k])?;
            let gap = l[k] - mean[k];
            pass &= gap >= -1e-12;
            if x == 0.0 {
                pass &= gap.abs() <= 1e-12;
            } else {
                pass &= gap > 0.0;
            }
        }
    }
    Ok(outcome("extra", "downward_bias", pass, "1000 draws, E l~ <= l with equality iff x = 0".into(), json!({"draws": 1000})))
}
