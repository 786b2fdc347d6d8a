//! Shadow modelling: refit the known generator on samples of the auxiliary
//! data and count how often each focal-point is selected.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dp::PrivacyBudget;
use crate::error::{Error, Result};
use crate::generator::{FittedModel, GeneratorConfig, GeneratorKind};
use crate::rng::RandomSource;
use crate::tabular::{Dataset, FeatureTuple};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowConfig {
    pub generator: GeneratorKind,
    pub budget: PrivacyBudget,
    pub runs: usize,
    pub train_sample_size: usize,
    pub base_seed: u64,
    /// Reuse a single training sample for every run instead of resampling.
    #[serde(default)]
    pub fixed_sample: bool,
    #[serde(default)]
    pub generator_config: GeneratorConfig,
}

/// Selection counts per canonical focal-point over a number of runs.
#[derive(Clone, Debug, PartialEq)]
pub struct FocalPointWeights {
    generator: GeneratorKind,
    epsilon: f64,
    runs: usize,
    seed: u64,
    counts: BTreeMap<FeatureTuple, u32>,
}

#[derive(Serialize, Deserialize)]
struct WeightsFile {
    generator: GeneratorKind,
    epsilon: f64,
    runs: usize,
    seed: u64,
    entries: Vec<WeightEntry>,
}

#[derive(Serialize, Deserialize)]
struct WeightEntry {
    tuple: FeatureTuple,
    count: u32,
    frequency: f64,
}

impl FocalPointWeights {
    pub fn new(
        generator: GeneratorKind,
        epsilon: f64,
        runs: usize,
        seed: u64,
        counts: BTreeMap<FeatureTuple, u32>,
    ) -> Result<Self> {
        if runs == 0 {
            return Err(Error::param("weights need at least one run"));
        }
        if let Some((t, &c)) = counts.iter().find(|(_, &c)| c == 0 || c as usize > runs) {
            return Err(Error::param(format!("{t} selected {c} times in {runs} runs")));
        }
        Ok(Self {
            generator,
            epsilon,
            runs,
            seed,
            counts,
        })
    }

    pub fn generator(&self) -> GeneratorKind {
        self.generator
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn runs(&self) -> usize {
        self.runs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count(&self, tuple: &FeatureTuple) -> u32 {
        self.counts.get(tuple).copied().unwrap_or(0)
    }

    /// Fraction of runs that selected `tuple`; 0 if never selected.
    pub fn frequency(&self, tuple: &FeatureTuple) -> f64 {
        self.count(tuple) as f64 / self.runs as f64
    }

    /// `(tuple, frequency)` in canonical tuple order.
    pub fn iter(&self) -> impl Iterator<Item = (&FeatureTuple, f64)> + '_ {
        self.counts.iter().map(move |(t, &c)| (t, c as f64 / self.runs as f64))
    }

    /// Share of all selected conditionals having each parent-set size.
    /// Empty for marginal focal-points.
    pub fn parent_size_distribution(&self) -> BTreeMap<usize, f64> {
        let mut sizes: BTreeMap<usize, f64> = BTreeMap::new();
        let mut total = 0.0;
        for (t, &c) in &self.counts {
            if let Some(p) = t.parent_count() {
                *sizes.entry(p).or_default() += c as f64;
                total += c as f64;
            }
        }
        sizes.values_mut().for_each(|v| *v /= total);
        sizes
    }

    /// Mean parent-set size over every selected conditional.
    pub fn mean_parent_size(&self) -> f64 {
        self.parent_size_distribution().iter().map(|(&s, &f)| s as f64 * f).sum()
    }

    /// Adds another tally over the same generator and ε.
    pub fn merge(&mut self, other: &FocalPointWeights) -> Result<()> {
        if other.generator != self.generator || other.epsilon != self.epsilon {
            return Err(Error::param("cannot merge weights of different generators or budgets"));
        }
        self.runs += other.runs;
        for (t, &c) in &other.counts {
            *self.counts.entry(t.clone()).or_default() += c;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let file = WeightsFile {
            generator: self.generator,
            epsilon: self.epsilon,
            runs: self.runs,
            seed: self.seed,
            entries: self
                .counts
                .iter()
                .map(|(t, &c)| WeightEntry {
                    tuple: t.clone(),
                    count: c,
                    frequency: c as f64 / self.runs as f64,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("weights serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: WeightsFile = serde_json::from_str(text)?;
        let mut counts = BTreeMap::new();
        for e in file.entries {
            let canonical = match e.tuple {
                FeatureTuple::Marginal(f) => FeatureTuple::marginal(f),
                FeatureTuple::Conditional { child, parents } => FeatureTuple::conditional(child, parents),
            };
            if counts.insert(canonical.clone(), e.count).is_some() {
                return Err(Error::param(format!("duplicate focal-point {canonical}")));
            }
        }
        Self::new(file.generator, file.epsilon, file.runs, file.seed, counts)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Fits the configured generator `runs` times on samples of `aux` and tallies
/// the focal-points each fit selected. Fitted models and their synthetic
/// output are dropped inside each run.
pub fn run_shadow(aux: &Dataset, config: &ShadowConfig) -> Result<FocalPointWeights> {
    let per_run = shadow_focal_points(aux, config)?;
    let mut counts: BTreeMap<FeatureTuple, u32> = BTreeMap::new();
    for points in per_run {
        for t in points {
            *counts.entry(t).or_default() += 1;
        }
    }
    FocalPointWeights::new(config.generator, config.budget.epsilon(), config.runs, config.base_seed, counts)
}

/// The focal-points of every shadow run, in run order.
pub fn shadow_focal_points(aux: &Dataset, config: &ShadowConfig) -> Result<Vec<Vec<FeatureTuple>>> {
    if config.runs == 0 {
        return Err(Error::param("shadow modelling needs at least one run"));
    }
    if config.train_sample_size == 0 || config.train_sample_size > aux.n_rows() {
        return Err(Error::param(format!(
            "shadow sample size {} does not fit auxiliary data of {} rows",
            config.train_sample_size,
            aux.n_rows()
        )));
    }
    let root = RandomSource::new(config.base_seed, 0).fork("shadow");
    let fixed = config.fixed_sample.then(|| {
        let positions = root.fork("fixed-sample").sample_indices(aux.n_rows(), config.train_sample_size);
        aux.select(&positions).without_households()
    });

    (0..config.runs)
        .into_par_iter()
        .map(|run| {
            let run_rng = root.fork_index(run as u64);
            let sampled;
            let train = match &fixed {
                Some(d) => d,
                None => {
                    let positions = run_rng.fork("sample").sample_indices(aux.n_rows(), config.train_sample_size);
                    sampled = aux.select(&positions).without_households();
                    &sampled
                }
            };
            let model = FittedModel::fit(
                config.generator,
                train,
                &config.budget,
                &config.generator_config,
                &mut run_rng.fork("fit"),
            )?;
            Ok(model.focal_points())
        })
        .collect()
}

/// Focal-points with frequency `>= min_weight`, by descending frequency then
/// canonical order, with their frequencies L1-normalized to sum to one.
pub fn top_focal_points(weights: &FocalPointWeights, min_weight: f64) -> Result<(Vec<FeatureTuple>, Vec<f64>)> {
    let mut kept: Vec<(FeatureTuple, f64)> = weights
        .iter()
        .filter(|(_, f)| *f >= min_weight)
        .map(|(t, f)| (t.clone(), f))
        .collect();
    if kept.is_empty() {
        return Err(Error::param(format!("no focal-point reaches weight {min_weight}")));
    }
    kept.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let total: f64 = kept.iter().map(|k| k.1).sum();
    Ok(kept.into_iter().map(|(t, f)| (t, f / total)).unzip())
}
