//! Probability vectors over experts, the exponential-weights map and sampling.

use serde::Serialize;

use super::rng::RandomStream;
use crate::error::{LbError, Result};

/// Tolerance on `|sum - 1|` accepted by [`ProbabilityVector::new`].
pub const SUM_TOLERANCE: f64 = 1e-12;

/// A distribution over `N` experts.
///
/// Entries are finite, non-negative and sum to one within [`SUM_TOLERANCE`].
/// Exponential weights keep every entry positive unless `exp` underflows,
/// in which case the entry is exactly zero and [`sample_action`] never
/// returns it.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(LbError::Empty("probability vector"));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(LbError::InvalidProbability(format!("entry {w}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(LbError::InvalidProbability(format!("sum {sum}")));
        }
        Ok(Self(weights))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(LbError::Empty("probability vector"));
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        self.0.get(i).copied()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// `p_i = exp(-eta * L_i) / sum_k exp(-eta * L_k)`, evaluated after shifting
/// by `min_k L_k` so that the largest weight is exactly one.
pub fn distribution_from_cumloss(eta: f64, cum_est_losses: &[f64]) -> Result<ProbabilityVector> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(LbError::InvalidParameter(format!("eta must be positive, got {eta}")));
    }
    if cum_est_losses.is_empty() {
        return Err(LbError::Empty("cumulative losses"));
    }
    if cum_est_losses.iter().any(|l| !l.is_finite()) {
        return Err(LbError::NonFinite("cumulative losses"));
    }
    let min = cum_est_losses.iter().copied().fold(f64::INFINITY, f64::min);
    let mut weights: Vec<f64> = cum_est_losses
        .iter()
        .map(|l| (-eta * (l - min)).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Ok(ProbabilityVector(weights))
}

/// Draws an expert index by inverting the CDF at one uniform draw.
///
/// Consumes exactly one step of `rng`. Zero-probability entries are never
/// returned; if rounding leaves the uniform above the final partial sum, the
/// last expert with positive mass is returned.
pub fn sample_action(p: &ProbabilityVector, rng: &mut RandomStream) -> usize {
    let u = rng.next_f64();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &pi) in p.as_slice().iter().enumerate() {
        if pi > 0.0 {
            acc += pi;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_vectors() {
        assert!(ProbabilityVector::new(vec![]).is_err());
        assert!(ProbabilityVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbabilityVector::new(vec![1.5, -0.5]).is_err());
        assert!(ProbabilityVector::new(vec![f64::NAN, 1.0]).is_err());
        assert!(ProbabilityVector::new(vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn softmax_examples() {
        let p = distribution_from_cumloss(0.7, &[0.0; 5]).unwrap();
        assert!(p.as_slice().iter().all(|&x| (x - 0.2).abs() < 1e-15));

        let p = distribution_from_cumloss(std::f64::consts::LN_2, &[0.0, 1.0]).unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn softmax_shift_invariance() {
        let a = distribution_from_cumloss(1.3, &[0.0, 0.4, 2.0]).unwrap();
        let b = distribution_from_cumloss(1.3, &[1e4, 1e4 + 0.4, 1e4 + 2.0]).unwrap();
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_huge_losses_stay_finite() {
        let p = distribution_from_cumloss(1.0, &[1e300, 1e300 + 1e290, -1e300]).unwrap();
        assert!(p.as_slice().iter().all(|x| x.is_finite()));
        assert!((p.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(p[2], 1.0);
    }

    #[test]
    fn softmax_errors() {
        assert!(distribution_from_cumloss(0.0, &[0.0]).is_err());
        assert!(distribution_from_cumloss(-1.0, &[0.0]).is_err());
        assert!(distribution_from_cumloss(1.0, &[f64::INFINITY]).is_err());
        assert!(distribution_from_cumloss(1.0, &[]).is_err());
    }

    #[test]
    fn single_expert_always_chosen() {
        let p = ProbabilityVector::uniform(1).unwrap();
        let mut rng = RandomStream::new(3);
        for _ in 0..100 {
            assert_eq!(sample_action(&p, &mut rng), 0);
        }
        assert_eq!(rng.steps(), 100);
    }

    #[test]
    fn fair_coin_frequency() {
        let p = ProbabilityVector::uniform(2).unwrap();
        let mut rng = RandomStream::new(11);
        let n = 100_000;
        let ones = (0..n).filter(|_| sample_action(&p, &mut rng) == 0).count();
        let freq = ones as f64 / n as f64;
        assert!((freq - 0.5).abs() <= 0.01, "freq {freq}");
    }

    #[test]
    fn sampling_is_reproducible() {
        let p = ProbabilityVector::new(vec![0.3, 0.7]).unwrap();
        let draw = |seed| {
            let mut rng = RandomStream::new(seed);
            (0..200).map(|_| sample_action(&p, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(42), draw(42));
    }

    #[test]
    fn zero_mass_never_sampled() {
        let p = ProbabilityVector::new(vec![0.0, 1.0, 0.0]).unwrap();
        let mut rng = RandomStream::new(5);
        for _ in 0..1000 {
            assert_eq!(sample_action(&p, &mut rng), 1);
        }
    }
}
