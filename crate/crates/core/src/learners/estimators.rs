//! Per-round loss estimators. Each returns the full length-N estimate vector
//! built from what the learner saw: its own loss and a reference value
//! (lower bound, `alpha`, or nothing) for every expert.

use crate::error::{LbError, Result};
use crate::game::ProbabilityVector;

fn chosen_probability(chosen: usize, p: &ProbabilityVector) -> Result<f64> {
    let pc = p.get(chosen).ok_or(LbError::IndexOutOfRange {
        index: chosen,
        len: p.len(),
    })?;
    if !(pc > 0.0) {
        return Err(LbError::InvalidProbability(format!(
            "expert {chosen} was chosen with probability {pc}"
        )));
    }
    Ok(pc)
}

fn check_reference(reference: &[f64], chosen: usize, chosen_loss: f64, p: &ProbabilityVector) -> Result<f64> {
    if reference.len() != p.len() {
        return Err(LbError::DimensionMismatch(format!(
            "{} reference values for {} experts",
            reference.len(),
            p.len()
        )));
    }
    let pc = chosen_probability(chosen, p)?;
    if !chosen_loss.is_finite() {
        return Err(LbError::NonFinite("chosen loss"));
    }
    if reference.iter().any(|v| !v.is_finite()) {
        return Err(LbError::NonFinite("reference values"));
    }
    if reference[chosen] > chosen_loss {
        return Err(LbError::ReferenceAboveLoss {
            reference: reference[chosen],
            loss: chosen_loss,
        });
    }
    Ok(pc)
}

/// Importance-weighted estimate: `l / p` at the chosen expert, zero elsewhere.
pub fn exp3_estimate(chosen: usize, chosen_loss: f64, p: &ProbabilityVector) -> Result<Vec<f64>> {
    let pc = chosen_probability(chosen, p)?;
    if !chosen_loss.is_finite() {
        return Err(LbError::NonFinite("chosen loss"));
    }
    let mut est = vec![0.0; p.len()];
    est[chosen] = chosen_loss / pc;
    Ok(est)
}

/// `lambda` everywhere, plus the importance-weighted slack `(l - lambda) / p`
/// at the chosen expert.
pub fn exp3lb_estimate(
    chosen: usize,
    chosen_loss: f64,
    lower_bounds: &[f64],
    p: &ProbabilityVector,
) -> Result<Vec<f64>> {
    let pc = check_reference(lower_bounds, chosen, chosen_loss, p)?;
    let mut est = lower_bounds.to_vec();
    est[chosen] += (chosen_loss - lower_bounds[chosen]) / pc;
    Ok(est)
}

/// Same shape as [`exp3lb_estimate`] with arbitrary reference values
/// `alpha <= l` (which may be negative).
pub fn exp3alpha_estimate(
    chosen: usize,
    chosen_loss: f64,
    alphas: &[f64],
    p: &ProbabilityVector,
) -> Result<Vec<f64>> {
    exp3lb_estimate(chosen, chosen_loss, alphas, p)
}

/// `alpha_i = upsilon_i - M`: the reference values used with upper-bound
/// feedback.
pub fn exp3ub_alphas(upper_bounds: &[f64], slack_cap: f64) -> Vec<f64> {
    upper_bounds.iter().map(|u| u - slack_cap).collect()
}

/// Shrinkage applied to the chosen expert's importance-weighted slack:
/// `x = a (1 - p) / (p (1 - a) + a (1 - p))` with `a = beta * s`.
///
/// At `p = 1` the expression is `0/0`; it is taken as `0` for `a < 1` and `1`
/// for `a = 1`, its limits along `p -> 1`.
pub fn correction_factor(p: f64, beta_s: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(LbError::InvalidProbability(format!("p must lie in (0, 1], got {p}")));
    }
    if !(0.0..=1.0).contains(&beta_s) {
        return Err(LbError::CorrectionDomain(beta_s));
    }
    if p == 1.0 {
        return Ok(if beta_s == 1.0 { 1.0 } else { 0.0 });
    }
    let num = beta_s * (1.0 - p);
    Ok(num / (p * (1.0 - beta_s) + num))
}

/// `lambda` everywhere, plus `s (1 - x) / p` at the chosen expert, where
/// `x` is [`correction_factor`] of the chosen expert.
pub fn exp3lbp_estimate(
    chosen: usize,
    chosen_loss: f64,
    lower_bounds: &[f64],
    p: &ProbabilityVector,
    beta: f64,
) -> Result<Vec<f64>> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(LbError::InvalidParameter(format!("beta must be nonnegative, got {beta}")));
    }
    let pc = check_reference(lower_bounds, chosen, chosen_loss, p)?;
    let s = chosen_loss - lower_bounds[chosen];
    let x = correction_factor(pc, beta * s)?;
    let mut est = lower_bounds.to_vec();
    est[chosen] += s * (1.0 - x) / pc;
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(v: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn exp3_examples() {
        let p = pv(&[0.25, 0.75]);
        assert_eq!(exp3_estimate(0, 0.5, &p).unwrap(), vec![2.0, 0.0]);
        assert_eq!(exp3_estimate(1, 0.0, &p).unwrap(), vec![0.0, 0.0]);
        assert!(exp3_estimate(2, 0.5, &p).is_err());
    }

    #[test]
    fn exp3lb_examples() {
        let p = pv(&[0.25, 0.75]);
        let est = exp3lb_estimate(0, 0.5, &[0.1, 0.2], &p).unwrap();
        assert!((est[0] - 1.7).abs() < 1e-15);
        assert_eq!(est[1], 0.2);

        let losses = [0.3, 0.6];
        for c in 0..2 {
            assert_eq!(exp3lb_estimate(c, losses[c], &losses, &p).unwrap(), losses.to_vec());
            assert_eq!(
                exp3lb_estimate(c, losses[c], &[0.0, 0.0], &p).unwrap(),
                exp3_estimate(c, losses[c], &p).unwrap()
            );
        }
        assert!(matches!(
            exp3lb_estimate(0, 0.05, &[0.1, 0.2], &p),
            Err(LbError::ReferenceAboveLoss { .. })
        ));
    }

    #[test]
    fn exp3alpha_examples() {
        let p = pv(&[0.5, 0.5]);
        let est = exp3alpha_estimate(1, 0.4, &[-0.2, 0.1], &p).unwrap();
        assert_eq!(est[0], -0.2);
        assert!((est[1] - 0.7).abs() < 1e-15);
        assert!(exp3alpha_estimate(1, 0.4, &[0.0, 0.5], &p).is_err());
    }

    #[test]
    fn exp3ub_alpha_examples() {
        assert_eq!(exp3ub_alphas(&[1.0, 1.0], 1.0), vec![0.0, 0.0]);
        let a = exp3ub_alphas(&[0.6, 0.9], 0.2);
        assert!((a[0] - 0.4).abs() < 1e-15 && (a[1] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn correction_examples() {
        assert_eq!(correction_factor(0.3, 0.0).unwrap(), 0.0);
        for p in [0.01, 0.3, 0.5, 0.99, 1.0] {
            assert_eq!(correction_factor(p, 1.0).unwrap(), 1.0);
        }
        assert_eq!(correction_factor(0.5, 0.5).unwrap(), 0.5);
        assert_eq!(correction_factor(1.0, 0.7).unwrap(), 0.0);
        assert!(matches!(correction_factor(0.5, 1.01), Err(LbError::CorrectionDomain(_))));
        assert!(correction_factor(0.0, 0.5).is_err());
    }

    #[test]
    fn exp3lbp_examples() {
        let p = pv(&[0.5, 0.5]);
        let lb = [0.1, 0.2];
        let est = exp3lbp_estimate(0, 0.6, &lb, &p, 1.0).unwrap();
        assert!((est[0] - 0.6).abs() < 1e-15);
        assert_eq!(est[1], 0.2);

        assert_eq!(
            exp3lbp_estimate(0, 0.6, &lb, &p, 0.0).unwrap(),
            exp3lb_estimate(0, 0.6, &lb, &p).unwrap()
        );
        // beta * s = 1: the slack term is switched off entirely
        assert_eq!(exp3lbp_estimate(0, 0.6, &lb, &p, 2.0).unwrap(), lb.to_vec());
        assert!(exp3lbp_estimate(0, 0.6, &lb, &p, 2.5).is_err());
    }
}
