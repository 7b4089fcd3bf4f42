use proptest::prelude::*;

use lbexperts::environments::feedback_for;
use lbexperts::learners::{correction_factor, exp3lb_estimate, exp3lbp_estimate, DoublingState};
use lbexperts::quantities::{
    hessian_quadratic_form, popoviciu_bound, potential_phi, q_unknown_horizon, second_order_q, spread,
};
use lbexperts::{
    distribution_from_cumloss, sample_action, Algorithm, FeedbackKind, GameInstance, LearnerState, OnlineLearner,
    ProbabilityVector, RandomStream,
};

fn simplex(n: usize) -> impl Strategy<Value = ProbabilityVector> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|w| {
        let total: f64 = w.iter().sum();
        let mut p: Vec<f64> = w.iter().map(|v| v / total).collect();
        let head: f64 = p[..p.len() - 1].iter().sum();
        let last = p.len() - 1;
        p[last] = 1.0 - head;
        ProbabilityVector::new(p).unwrap()
    })
}

/// Round-major `(n, t, lower bounds, slacks)` with bounds in [-1, 1] and slacks in [0, 1].
fn instance_parts() -> impl Strategy<Value = (usize, usize, Vec<f64>, Vec<f64>)> {
    (1usize..6, 1usize..40).prop_flat_map(|(n, t)| {
        (
            Just(n),
            Just(t),
            prop::collection::vec(-1.0f64..1.0, n * t),
            prop::collection::vec(0.0f64..1.0, n * t),
        )
    })
}

fn build(n: usize, t: usize, lbs: &[f64], slacks: &[f64]) -> GameInstance {
    let losses = lbs.iter().zip(slacks).map(|(a, b)| a + b).collect();
    GameInstance::new(n, t, losses, lbs.to_vec(), None, None).unwrap()
}

fn play(learner: &mut LearnerState, inst: &GameInstance, kind: FeedbackKind, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = RandomStream::new(seed);
    let mut out = Vec::new();
    for t in 0..inst.horizon() {
        let p = learner.distribution().clone();
        let i = sample_action(&p, &mut rng);
        learner.observe(&feedback_for(inst, t, i, kind).unwrap()).unwrap();
        out.push(p.into_vec());
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn softmax_is_a_distribution(eta in 0.001f64..50.0, cum in prop::collection::vec(-1e4f64..1e4, 1..12), shift in -1e3f64..1e3) {
        let p = distribution_from_cumloss(eta, &cum).unwrap();
        prop_assert!((p.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.as_slice().iter().all(|v| *v >= 0.0));
        let moved: Vec<f64> = cum.iter().map(|c| c + shift).collect();
        let q = distribution_from_cumloss(eta, &moved).unwrap();
        for (a, b) in p.as_slice().iter().zip(q.as_slice()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn lb_estimate_is_unbiased(p in (2usize..8).prop_flat_map(simplex), seed in any::<u64>()) {
        let n = p.len();
        let mut rng = RandomStream::new(seed);
        let lbs: Vec<f64> = (0..n).map(|_| 2.0 * rng.next_f64() - 1.0).collect();
        let losses: Vec<f64> = lbs.iter().map(|v| v + 2.0 * rng.next_f64()).collect();
        for k in 0..n {
            let mean: f64 = (0..n).map(|i| p[i] * exp3lb_estimate(i, losses[i], &lbs, &p).unwrap()[k]).sum();
            prop_assert!((mean - losses[k]).abs() <= 1e-14);
        }
    }

    #[test]
    fn lbp_estimate_is_biased_downward(p in (2usize..8).prop_flat_map(simplex), seed in any::<u64>(), frac in 0.0f64..=1.0) {
        let n = p.len();
        let mut rng = RandomStream::new(seed);
        let lbs: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
        let losses: Vec<f64> = lbs.iter().map(|v| v + rng.next_f64()).collect();
        let max_s = losses.iter().zip(&lbs).map(|(l, b)| l - b).fold(0.0, f64::max);
        let beta = if max_s > 0.0 { frac / max_s } else { frac };
        for k in 0..n {
            let mean: f64 = (0..n).map(|i| p[i] * exp3lbp_estimate(i, losses[i], &lbs, &p, beta).unwrap()[k]).sum();
            prop_assert!(mean <= losses[k] + 1e-12);
        }
    }

    #[test]
    fn correction_factor_inequalities(p in 1e-6f64..=1.0, a in 0.0f64..=1.0) {
        let x = correction_factor(p, a).unwrap();
        prop_assert!((0.0..=1.0).contains(&x));
        prop_assert_eq!(x == 0.0, a == 0.0 || (p == 1.0 && a < 1.0));
        if p < 1.0 {
            prop_assert!((x - a * ((1.0 - x) / p + 2.0 * x - 1.0)).abs() <= 1e-10 * (1.0 + 1.0 / p));
        }
        prop_assert!(a * ((1.0 - x) / p - 1.0) <= 1.0 + 1e-10);
        prop_assert!(p * x * a <= a * a + 1e-12);
        prop_assert!(a * (1.0 - x) * (1.0 - x) / p <= 1.0 + 1e-10);
    }

    #[test]
    fn second_order_sandwich((n, t, lbs, slacks) in instance_parts()) {
        let q = second_order_q(&lbs, &slacks, n).unwrap();
        let base = q.q_lb + q.sum_sq_slack;
        let tol = 1e-12 * (1.0 + base);
        prop_assert!(q.q_second_order >= base / 2.0 - tol);
        prop_assert!(q.q_second_order <= 4.0 * base + tol);
        prop_assert!((q.q_prime - 4.0 * base).abs() <= tol);
        let _ = t;
    }

    #[test]
    fn unknown_horizon_quantity_dominates((n, t, raw, frac) in instance_parts()) {
        let losses: Vec<f64> = raw.iter().map(|v| (v + 1.0) / 2.0).collect();
        let lbs: Vec<f64> = losses.iter().zip(&frac).map(|(l, f)| l * (1.0 - f)).collect();
        let slacks: Vec<f64> = losses.iter().zip(&lbs).map(|(l, b)| l - b).collect();
        let q = second_order_q(&lbs, &slacks, n).unwrap();
        prop_assert!(q_unknown_horizon(&lbs, n).unwrap() >= q.q_second_order - 1e-12);
        let _ = t;
    }

    #[test]
    fn hessian_form_range(z in prop::collection::vec(-5.0f64..5.0, 2..9), seed in any::<u64>(), eta in 0.01f64..5.0) {
        let n = z.len();
        let mut rng = RandomStream::new(seed);
        let x: Vec<f64> = (0..n).map(|_| 6.0 * rng.next_f64() - 3.0).collect();
        let p0 = ProbabilityVector::uniform(n).unwrap();
        let h = hessian_quadratic_form(&z, &x, eta, &p0).unwrap();
        let sx = spread(&x).unwrap();
        prop_assert!(h <= 0.0);
        prop_assert!(h >= -eta * popoviciu_bound(0.0, sx).unwrap() * (1.0 + 1e-12));
        let c = 1.0 + rng.next_f64();
        let flat = vec![c; n];
        prop_assert_eq!(hessian_quadratic_form(&z, &flat, eta, &p0).unwrap(), 0.0);
    }

    #[test]
    fn potential_within_log_n_over_eta(l in prop::collection::vec(0.0f64..1e3, 1..16), eta in 0.01f64..5.0) {
        let n = l.len();
        let p0 = ProbabilityVector::uniform(n).unwrap();
        let phi = potential_phi(&l, eta, &p0).unwrap();
        let min = l.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(phi >= min - 1e-9);
        prop_assert!(phi - min <= (n as f64).ln() / eta + 1e-9);
    }

    #[test]
    fn full_information_reduces_to_hedge((n, t, lbs, slacks) in instance_parts(), eta in 0.01f64..2.0, seed in any::<u64>()) {
        let losses: Vec<f64> = lbs.iter().zip(&slacks).map(|(a, b)| a + b).collect();
        let inst = GameInstance::new(n, t, losses.clone(), losses, None, None).unwrap();
        let a = play(&mut LearnerState::new(Algorithm::Exp3Lb, n, eta, 0.0).unwrap(), &inst, FeedbackKind::LowerBounds, seed);
        let b = play(&mut LearnerState::new(Algorithm::Hedge, n, eta, 0.0).unwrap(), &inst, FeedbackKind::FullLosses, seed);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn zero_bounds_reduce_to_exp3((n, t, lbs, slacks) in instance_parts(), eta in 0.01f64..2.0, seed in any::<u64>()) {
        let _ = lbs;
        let inst = build(n, t, &vec![0.0; n * t], &slacks);
        let a = play(&mut LearnerState::new(Algorithm::Exp3Lb, n, eta, 0.0).unwrap(), &inst, FeedbackKind::LowerBounds, seed);
        let b = play(&mut LearnerState::new(Algorithm::Exp3, n, eta, 0.0).unwrap(), &inst, FeedbackKind::LowerBounds, seed);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn normalization_keeps_slacks_and_regret((n, t, lbs, slacks) in instance_parts()) {
        let inst = build(n, t, &lbs, &slacks);
        let norm = inst.normalized().unwrap();
        for (a, b) in inst.slacks().iter().zip(norm.slacks()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        for round in 0..t {
            let m = norm.round_lower_bounds(round).iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert_eq!(m, 0.0);
        }
        let gaps = |g: &GameInstance| {
            let c = g.cumulative_losses();
            let min = c.iter().copied().fold(f64::INFINITY, f64::min);
            c.iter().map(|v| v - min).collect::<Vec<_>>()
        };
        for (a, b) in gaps(&inst).iter().zip(gaps(&norm)) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn lb_learner_ignores_per_round_shifts((n, t, lbs, slacks) in instance_parts(), eta in 0.01f64..2.0, seed in any::<u64>()) {
        let inst = build(n, t, &lbs, &slacks);
        let norm = inst.normalized().unwrap();
        let a = play(&mut LearnerState::new(Algorithm::Exp3Lb, n, eta, 0.0).unwrap(), &inst, FeedbackKind::LowerBounds, seed);
        let b = play(&mut LearnerState::new(Algorithm::Exp3Lb, n, eta, 0.0).unwrap(), &norm, FeedbackKind::LowerBounds, seed);
        for (pa, pb) in a.iter().zip(&b) {
            for (x, y) in pa.iter().zip(pb) {
                prop_assert!((x - y).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn doubling_guess_covers_accumulated((n, t, raw, frac) in instance_parts(), seed in any::<u64>()) {
        let losses: Vec<f64> = raw.iter().map(|v| (v + 1.0) / 2.0).collect();
        let lbs: Vec<f64> = losses.iter().zip(&frac).map(|(l, f)| l * (1.0 - f)).collect();
        let inst = GameInstance::new(n, t, losses, lbs, None, None).unwrap().normalized().unwrap();
        let mut d = DoublingState::new(n, None).unwrap();
        let mut rng = RandomStream::new(seed);
        let mut last_eta = d.eta();
        let mut last_epoch = d.epoch;
        for round in 0..t {
            let i = sample_action(d.distribution(), &mut rng);
            d.observe(&feedback_for(&inst, round, i, FeedbackKind::LowerBounds).unwrap()).unwrap();
            prop_assert!(n < 2 || d.current_guess >= d.accumulated);
            prop_assert!(d.eta() <= last_eta);
            prop_assert!(d.epoch >= last_epoch);
            last_eta = d.eta();
            last_epoch = d.epoch;
        }
    }
}
