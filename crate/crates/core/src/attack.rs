//! Density-ratio membership scores tailored to each generator.
//!
//! For every candidate record `t`, each focal-point is evaluated at `t`'s
//! values on the synthetic data and on the auxiliary data, and
//! `Λ[t] = Σ w_i · p_synth,i(t) / p_aux,i(t)`. Scores become probabilities via
//! an activation function and are averaged per household.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::GeneratorKind;
use crate::shadow::{top_focal_points, FocalPointWeights};
use crate::tabular::{Dataset, FeatureTuple, HouseholdIndex, MarginalTable};

pub const DEFAULT_SMOOTHING: f64 = 0.5;

/// Target records with their household grouping.
#[derive(Clone, Debug)]
pub struct CandidateSet {
    records: Dataset,
    households: HouseholdIndex,
}

impl CandidateSet {
    /// `min_household_size` enforces the experiment protocol; `None` relaxes it.
    pub fn new(records: Dataset, min_household_size: Option<usize>) -> Result<Self> {
        let households = records
            .household_index()
            .ok_or_else(|| Error::Dataset("candidate records need household ids".into()))?;
        if let Some(min) = min_household_size {
            if let Some((id, rows)) = households.iter().find(|(_, rows)| rows.len() < min) {
                return Err(Error::Dataset(format!(
                    "candidate household {id} has {} records (minimum {min})",
                    rows.len()
                )));
            }
        }
        Ok(Self { records, households })
    }

    pub fn records(&self) -> &Dataset {
        &self.records
    }

    pub fn households(&self) -> &HouseholdIndex {
        &self.households
    }

    pub fn len(&self) -> usize {
        self.records.n_rows()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

fn check_inputs(synth: &Dataset, aux: &Dataset, candidates: &CandidateSet) -> Result<()> {
    synth.check_same_schema(aux)?;
    synth.check_same_schema(candidates.records())
}

fn check_weights(tuples: &[FeatureTuple], weights: &[f64]) -> Result<()> {
    if tuples.is_empty() {
        return Err(Error::param("no focal-points to score with"));
    }
    if tuples.len() != weights.len() {
        return Err(Error::param(format!("{} focal-points but {} weights", tuples.len(), weights.len())));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::param("weights must be finite and non-negative"));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::param(format!("weights sum to {sum}, expected 1")));
    }
    Ok(())
}

fn check_smoothing(smoothing: f64) -> Result<()> {
    if !(smoothing >= 0.0 && smoothing.is_finite()) {
        return Err(Error::param("smoothing must be finite and >= 0"));
    }
    Ok(())
}

/// Weighted sum of synth/aux ratios. `prob` evaluates one table at a record;
/// `uniform` is the fallback denominator when the aux probability is zero
/// (only reachable without smoothing).
fn weighted_ratio_scores(
    synth: &Dataset,
    aux: &Dataset,
    tuples: &[FeatureTuple],
    weights: &[f64],
    candidates: &CandidateSet,
    prob: impl Fn(&MarginalTable, &[u32]) -> f64,
    uniform: impl Fn(&MarginalTable) -> f64,
) -> Result<Vec<f64>> {
    let tables = tuples
        .iter()
        .map(|t| Ok((MarginalTable::measure(synth, t)?, MarginalTable::measure(aux, t)?)))
        .collect::<Result<Vec<_>>>()?;
    let records = candidates.records();
    Ok((0..records.n_rows())
        .map(|r| {
            let record = records.record(r);
            tables
                .iter()
                .zip(weights)
                .map(|((s, b), w)| {
                    let denom = prob(b, &record);
                    let denom = if denom > 0.0 { denom } else { uniform(b) };
                    w * prob(s, &record) / denom
                })
                .sum()
        })
        .collect())
}

/// Scores against 2-way (or any marginal) focal-points.
pub fn score_mst(
    synth: &Dataset,
    aux: &Dataset,
    pairs: &[FeatureTuple],
    weights: &[f64],
    candidates: &CandidateSet,
    smoothing: f64,
) -> Result<Vec<f64>> {
    check_inputs(synth, aux, candidates)?;
    check_weights(pairs, weights)?;
    check_smoothing(smoothing)?;
    if let Some(t) = pairs.iter().find(|t| t.is_conditional()) {
        return Err(Error::Tuple(format!("{t} is a conditional, expected a marginal")));
    }
    weighted_ratio_scores(
        synth,
        aux,
        pairs,
        weights,
        candidates,
        |t, r| t.smoothed_probability(r, smoothing),
        |t| 1.0 / t.len() as f64,
    )
}

/// Scores against `(child | parents)` focal-points.
pub fn score_privbayes(
    synth: &Dataset,
    aux: &Dataset,
    conditionals: &[FeatureTuple],
    weights: &[f64],
    candidates: &CandidateSet,
    smoothing: f64,
) -> Result<Vec<f64>> {
    check_inputs(synth, aux, candidates)?;
    check_weights(conditionals, weights)?;
    check_smoothing(smoothing)?;
    if let Some(t) = conditionals.iter().find(|t| !t.is_conditional()) {
        return Err(Error::Tuple(format!("{t} is a marginal, expected a conditional")));
    }
    weighted_ratio_scores(
        synth,
        aux,
        conditionals,
        weights,
        candidates,
        |t, r| t.conditional_prob_of_record(r, smoothing),
        |t| 1.0 / *t.shape().last().expect("non-empty shape") as f64,
    )
}

/// Generic-density comparator: each side's density is the product of smoothed
/// 1-way marginals.
pub fn baseline_domias(synth: &Dataset, aux: &Dataset, candidates: &CandidateSet, smoothing: f64) -> Result<Vec<f64>> {
    check_inputs(synth, aux, candidates)?;
    check_smoothing(smoothing)?;
    let tables = (0..synth.n_features())
        .map(|f| {
            let t = FeatureTuple::marginal(vec![f]);
            Ok((MarginalTable::measure(synth, &t)?, MarginalTable::measure(aux, &t)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let records = candidates.records();
    Ok((0..records.n_rows())
        .map(|r| {
            let record = records.record(r);
            let log_ratio: f64 = tables
                .iter()
                .map(|(s, b)| {
                    let denom = b.smoothed_probability(&record, smoothing);
                    let denom = if denom > 0.0 { denom } else { 1.0 / b.len() as f64 };
                    s.smoothed_probability(&record, smoothing).ln() - denom.ln()
                })
                .sum();
            log_ratio.exp()
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationMode {
    /// `1 / (1 + exp(−c (ln Λ − m)))`
    Sigmoid,
    /// `min(Λ^(1/c) / 2, 1)`
    Root,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ActivationParams {
    pub mode: ActivationMode,
    /// Confidence.
    pub c: f64,
    /// Sigmoid center on the ln Λ scale; `None` uses the median of ln Λ.
    pub m: Option<f64>,
}

impl Default for ActivationParams {
    fn default() -> Self {
        Self {
            mode: ActivationMode::Sigmoid,
            c: 1.0,
            m: None,
        }
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        let (a, b) = (values[n / 2 - 1], values[n / 2]);
        if a == b {
            a
        } else {
            (a + b) / 2.0
        }
    }
}

/// Maps scores to membership probabilities. `Λ = 0` maps to 0 in both modes.
pub fn activate(lambdas: &[f64], params: &ActivationParams) -> Result<Vec<f64>> {
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::param("activation confidence c must be positive"));
    }
    if let Some(l) = lambdas.iter().find(|l| l.is_nan() || **l < 0.0) {
        return Err(Error::param(format!("density ratio {l} is negative or NaN")));
    }
    let c = params.c;
    Ok(match params.mode {
        ActivationMode::Root => lambdas.iter().map(|&l| (l.powf(1.0 / c) / 2.0).min(1.0)).collect(),
        ActivationMode::Sigmoid => {
            let m = match params.m {
                Some(m) => m,
                None if lambdas.is_empty() => 0.0,
                None => median(&mut lambdas.iter().map(|l| l.ln()).collect::<Vec<_>>()),
            };
            lambdas
                .iter()
                .map(|&l| {
                    if l == 0.0 {
                        0.0
                    } else if m == f64::NEG_INFINITY {
                        1.0
                    } else {
                        1.0 / (1.0 + (-c * (l.ln() - m)).exp())
                    }
                })
                .collect()
        }
    })
}

/// Mean record probability per household. `probs` is indexed by the row
/// positions stored in `households`.
pub fn household_scores(probs: &[f64], households: &HouseholdIndex) -> Result<BTreeMap<u64, f64>> {
    households
        .iter()
        .map(|(id, rows)| {
            if rows.is_empty() {
                return Err(Error::param(format!("household {id} has no candidate records")));
            }
            let mut sum = 0.0;
            for &r in rows {
                sum += probs
                    .get(r)
                    .ok_or_else(|| Error::param(format!("household {id} refers to missing record {r}")))?;
            }
            Ok((id, sum / rows.len() as f64))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackConfig {
    pub smoothing: f64,
    pub activation: ActivationParams,
    /// Focal-points selected in fewer shadow runs than this are dropped.
    pub min_weight: f64,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            smoothing: DEFAULT_SMOOTHING,
            activation: ActivationParams::default(),
            min_weight: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttackResult {
    pub lambda_per_record: Vec<f64>,
    pub prob_per_record: Vec<f64>,
    pub prob_per_household: BTreeMap<u64, f64>,
}

/// Full pipeline: top focal-points, the generator's scorer, activation, and
/// household averaging.
pub fn run_attack(
    synth: &Dataset,
    aux: &Dataset,
    weights: &FocalPointWeights,
    candidates: &CandidateSet,
    config: &AttackConfig,
) -> Result<AttackResult> {
    let (tuples, w) = top_focal_points(weights, config.min_weight)?;
    let lambdas = match weights.generator() {
        GeneratorKind::Mst => score_mst(synth, aux, &tuples, &w, candidates, config.smoothing)?,
        GeneratorKind::PrivBayes => score_privbayes(synth, aux, &tuples, &w, candidates, config.smoothing)?,
    };
    let probs = activate(&lambdas, &config.activation)?;
    let households = household_scores(&probs, candidates.households())?;
    Ok(AttackResult {
        lambda_per_record: lambdas,
        prob_per_record: probs,
        prob_per_household: households,
    })
}
