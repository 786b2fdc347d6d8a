//! Pure ε-DP building blocks shared by both synthesizers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::tabular::MarginalTable;

/// Total ε and how it is divided between structure selection and marginal
/// measurement. Sequential composition: the two parts add up to ε.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    epsilon: f64,
    selection_fraction: f64,
    measurement_fraction: f64,
}

impl PrivacyBudget {
    pub const DEFAULT_SELECTION_FRACTION: f64 = 0.5;

    pub fn new(epsilon: f64, selection_fraction: f64) -> Result<Self> {
        Self::with_fractions(epsilon, selection_fraction, 1.0 - selection_fraction)
    }

    pub fn with_fractions(epsilon: f64, selection: f64, measurement: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::param(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(selection > 0.0 && selection < 1.0 && measurement > 0.0 && measurement < 1.0) {
            return Err(Error::param("budget fractions must lie in (0, 1)"));
        }
        if (selection + measurement - 1.0).abs() > 1e-12 {
            return Err(Error::param("budget fractions must sum to 1"));
        }
        Ok(Self {
            epsilon,
            selection_fraction: selection,
            measurement_fraction: measurement,
        })
    }

    /// Even split between selection and measurement.
    pub fn even(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, Self::DEFAULT_SELECTION_FRACTION)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn selection_fraction(&self) -> f64 {
        self.selection_fraction
    }

    pub fn measurement_fraction(&self) -> f64 {
        self.measurement_fraction
    }

    pub fn split(&self, selection_rounds: usize, measurements: usize) -> Result<BudgetSplit> {
        split_budget(self, selection_rounds, measurements)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BudgetSplit {
    pub per_selection_round: f64,
    pub per_measurement: f64,
}

pub fn split_budget(
    budget: &PrivacyBudget,
    selection_rounds: usize,
    measurements: usize,
) -> Result<BudgetSplit> {
    if selection_rounds == 0 || measurements == 0 {
        return Err(Error::param("budget split needs at least one round and one measurement"));
    }
    Ok(BudgetSplit {
        per_selection_round: budget.epsilon * budget.selection_fraction / selection_rounds as f64,
        per_measurement: budget.epsilon * budget.measurement_fraction / measurements as f64,
    })
}

/// Inverse-CDF Laplace(0, scale) transform of a uniform draw `u` in `[0, 1)`.
pub fn laplace_from_uniform(u: f64, scale: f64) -> f64 {
    if u < 0.5 {
        // ln(0) only when u == 0; clamp to the smallest positive double.
        scale * (2.0 * u).max(f64::MIN_POSITIVE).ln()
    } else {
        -scale * (2.0 * (1.0 - u)).ln()
    }
}

pub fn laplace_noise(scale: f64, rng: &mut RandomSource) -> Result<f64> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::param(format!("Laplace scale must be positive, got {scale}")));
    }
    Ok(laplace_from_uniform(rng.uniform(), scale))
}

/// Adds Laplace(1/ε) noise to every cell of a count table (L1 sensitivity 1)
/// and clamps negatives to zero.
pub fn noisy_marginal(
    table: &MarginalTable,
    epsilon: f64,
    rng: &mut RandomSource,
) -> Result<MarginalTable> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::param(format!("measurement epsilon must be positive, got {epsilon}")));
    }
    let scale = 1.0 / epsilon;
    let cells = table
        .cells()
        .iter()
        .map(|&c| (c + laplace_from_uniform(rng.uniform(), scale)).max(0.0))
        .collect();
    Ok(table.with_cells(cells))
}

/// Selection weights `exp(ε·(s_i − max s)/(2Δ))`, unnormalized.
fn exponential_weights(scores: &[f64], sensitivity: f64, epsilon: f64) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    scores
        .iter()
        .map(|&s| (epsilon * (s - max) / (2.0 * sensitivity)).exp())
        .collect()
}

fn check_mechanism(scores: &[f64], sensitivity: f64, epsilon: f64) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::param("exponential mechanism over an empty candidate list"));
    }
    if sensitivity.is_nan() || sensitivity <= 0.0 || epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::param("exponential mechanism needs positive epsilon and sensitivity"));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::param("non-finite score"));
    }
    Ok(())
}

/// Index `i` with probability ∝ `exp(ε·score_i / (2Δ))`.
pub fn exponential_mechanism(
    scores: &[f64],
    sensitivity: f64,
    epsilon: f64,
    rng: &mut RandomSource,
) -> Result<usize> {
    check_mechanism(scores, sensitivity, epsilon)?;
    Ok(rng.weighted(&exponential_weights(scores, sensitivity, epsilon)))
}

/// The mechanism's exact output distribution.
pub fn exponential_probabilities(scores: &[f64], sensitivity: f64, epsilon: f64) -> Result<Vec<f64>> {
    check_mechanism(scores, sensitivity, epsilon)?;
    let w = exponential_weights(scores, sensitivity, epsilon);
    let total: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / total).collect())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::tabular::{Dataset, FeatureTuple, Schema};

    #[test]
    fn budget_arithmetic() {
        let b = PrivacyBudget::even(10.0).unwrap();
        let s = b.split(5, 5).unwrap();
        assert_eq!((s.per_selection_round, s.per_measurement), (1.0, 1.0));

        let b = PrivacyBudget::new(1.0, 0.3).unwrap();
        let s = b.split(14, 14).unwrap();
        assert!((s.per_selection_round - 0.3 / 14.0).abs() < 1e-15);
        assert!((s.per_measurement - 0.7 / 14.0).abs() < 1e-15);
        assert!((s.per_selection_round * 14.0 + s.per_measurement * 14.0 - 1.0).abs() < 1e-12);

        assert!(b.split(0, 3).is_err());
        assert!(b.split(3, 0).is_err());
        assert!(PrivacyBudget::even(0.0).is_err());
        assert!(PrivacyBudget::even(f64::INFINITY).is_err());
        assert!(PrivacyBudget::new(1.0, 1.0).is_err());
        assert!(PrivacyBudget::with_fractions(1.0, 0.5, 0.6).is_err());
    }

    #[test]
    fn laplace_median_and_errors() {
        assert_eq!(laplace_from_uniform(0.5, 1.0), 0.0);
        assert!(laplace_from_uniform(0.0, 1.0).is_finite());
        assert!(laplace_from_uniform(0.25, 2.0) < 0.0);
        assert!(laplace_from_uniform(0.75, 2.0) > 0.0);
        let mut r = RandomSource::new(0, 0);
        assert!(laplace_noise(0.0, &mut r).is_err());
        assert!(laplace_noise(-1.0, &mut r).is_err());
    }

    fn table() -> MarginalTable {
        let schema = Arc::new(Schema::from_cardinalities(&[2, 2]).unwrap());
        let rows = vec![vec![0, 0]; 5];
        let d = Dataset::from_rows(schema, &rows, None).unwrap();
        MarginalTable::measure(&d, &FeatureTuple::pair(0, 1)).unwrap()
    }

    #[test]
    fn vanishing_noise() {
        let t = table();
        let mut r = RandomSource::new(3, 0);
        let n = noisy_marginal(&t, 1e9, &mut r).unwrap();
        for (a, b) in t.cells().iter().zip(n.cells()) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!(noisy_marginal(&t, 0.0, &mut r).is_err());
    }

    #[test]
    fn negative_draws_clamp() {
        let t = table();
        let mut r = RandomSource::new(11, 0);
        for _ in 0..200 {
            let n = noisy_marginal(&t, 0.01, &mut r).unwrap();
            assert!(n.cells().iter().all(|&c| c >= 0.0));
            assert!((n.total() - n.cells().iter().sum::<f64>()).abs() < 1e-9);
        }
        // A count of 5 pushed down by noise far below -5 lands on exactly 0.
        assert_eq!((5.0 + laplace_from_uniform(1e-12, 1.0)).max(0.0), 0.0);
    }

    #[test]
    fn mechanism_errors() {
        let mut r = RandomSource::new(0, 0);
        assert!(exponential_mechanism(&[], 1.0, 1.0, &mut r).is_err());
        assert!(exponential_mechanism(&[1.0], 0.0, 1.0, &mut r).is_err());
        assert!(exponential_mechanism(&[1.0], 1.0, -1.0, &mut r).is_err());
        assert!(exponential_mechanism(&[f64::NAN], 1.0, 1.0, &mut r).is_err());
        assert_eq!(exponential_mechanism(&[3.0], 1.0, 1.0, &mut r).unwrap(), 0);
    }

    #[test]
    fn huge_scores_do_not_overflow() {
        let p = exponential_probabilities(&[1e300, 1e300 - 1e290], 1.0, 1e6).unwrap();
        assert!(p.iter().all(|x| x.is_finite()));
        assert_eq!(p[0], 1.0);
    }
}
