//! The repeated membership-inference experiment: sample candidate and member
//! households, train, synthesize, shadow-model, attack, score.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::attack::{run_attack, AttackConfig, CandidateSet};
use crate::dp::PrivacyBudget;
use crate::error::{Error, Result};
use crate::eval::metrics::{auc, membership_advantage, GroundTruth};
use crate::generator::{FittedModel, GeneratorConfig, GeneratorKind};
use crate::rng::RandomSource;
use crate::shadow::{run_shadow, FocalPointWeights, ShadowConfig};
use crate::tabular::Dataset;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub generators: Vec<GeneratorKind>,
    pub epsilons: Vec<f64>,
    pub trials: usize,
    pub n_candidates: usize,
    pub n_members: usize,
    pub min_household_size: usize,
    pub train_fill_size: usize,
    pub synth_rows: usize,
    pub shadow_runs: usize,
    pub seed: u64,
    pub selection_fraction: f64,
    pub generator: GeneratorConfig,
    pub attack: AttackConfig,
    /// Shadow-model on all of the auxiliary data, candidates included.
    pub shadow_full_aux: bool,
    /// Reuse one shadow training sample for every shadow run.
    pub shadow_fixed_sample: bool,
    /// Replace every household prediction with 0.5.
    pub ablate_constant: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            generators: GeneratorKind::ALL.to_vec(),
            epsilons: vec![1.0, 10.0, 100.0, 1000.0],
            trials: 50,
            n_candidates: 100,
            n_members: 50,
            min_household_size: 5,
            train_fill_size: 10_000,
            synth_rows: 10_000,
            shadow_runs: 50,
            seed: 0,
            selection_fraction: 0.5,
            generator: GeneratorConfig::default(),
            attack: AttackConfig::default(),
            shadow_full_aux: false,
            shadow_fixed_sample: false,
            ablate_constant: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("trials", self.trials),
            ("n_candidates", self.n_candidates),
            ("n_members", self.n_members),
            ("min_household_size", self.min_household_size),
            ("train_fill_size", self.train_fill_size),
            ("synth_rows", self.synth_rows),
            ("shadow_runs", self.shadow_runs),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::param(format!("{name} must be positive")));
        }
        if self.n_members > self.n_candidates {
            return Err(Error::param(format!(
                "n_members ({}) exceeds n_candidates ({})",
                self.n_members, self.n_candidates
            )));
        }
        if self.generators.is_empty() || self.epsilons.is_empty() {
            return Err(Error::param("experiment needs at least one generator and one epsilon"));
        }
        for &eps in &self.epsilons {
            self.budget(eps)?;
        }
        Ok(())
    }

    pub fn budget(&self, epsilon: f64) -> Result<PrivacyBudget> {
        PrivacyBudget::with_fractions(epsilon, self.selection_fraction, 1.0 - self.selection_fraction)
    }
}

/// One trial's shared inputs, reused by every generator and ε.
#[derive(Clone, Debug)]
pub struct TrialData {
    pub trial: usize,
    pub train: Dataset,
    pub candidates: CandidateSet,
    pub truth: GroundTruth,
    /// Auxiliary rows the shadow models may train on.
    pub shadow_pool: Dataset,
}

impl TrialData {
    /// SHA-256 over the training rows and the candidate and member ids.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for row in self.train.rows() {
            for v in row {
                h.update(v.to_le_bytes());
            }
        }
        h.update(b"candidates");
        for id in self.truth.candidates() {
            h.update(id.to_le_bytes());
        }
        h.update(b"members");
        for id in self.truth.members() {
            h.update(id.to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// Samples C, M and the record fill for `trial`. Deterministic in
/// `(config.seed, trial)`.
pub fn prepare_trial(aux: &Dataset, config: &ExperimentConfig, trial: usize) -> Result<TrialData> {
    config.validate()?;
    let index = aux
        .household_index()
        .ok_or_else(|| Error::Dataset("auxiliary data has no household ids".into()))?;
    let eligible: Vec<u64> = index
        .iter()
        .filter(|(_, rows)| rows.len() >= config.min_household_size)
        .map(|(id, _)| id)
        .collect();
    if eligible.len() < config.n_candidates {
        return Err(Error::Dataset(format!(
            "only {} households have at least {} records; {} candidates requested",
            eligible.len(),
            config.min_household_size,
            config.n_candidates
        )));
    }
    let rng = RandomSource::new(config.seed, 0).fork("trial").fork_index(trial as u64);

    let mut candidate_ids: Vec<u64> = rng
        .fork("candidates")
        .sample_indices(eligible.len(), config.n_candidates)
        .into_iter()
        .map(|i| eligible[i])
        .collect();
    candidate_ids.sort_unstable();
    let mut member_ids: Vec<u64> = rng
        .fork("members")
        .sample_indices(candidate_ids.len(), config.n_members)
        .into_iter()
        .map(|i| candidate_ids[i])
        .collect();
    member_ids.sort_unstable();

    let rows_of = |ids: &[u64]| -> Vec<usize> {
        ids.iter().flat_map(|&id| index.rows(id).unwrap_or(&[]).iter().copied()).collect()
    };
    let candidate_rows = rows_of(&candidate_ids);
    let member_rows = rows_of(&member_ids);
    let in_c: BTreeSet<usize> = candidate_rows.iter().copied().collect();
    let outside: Vec<usize> = (0..aux.n_rows()).filter(|r| !in_c.contains(r)).collect();
    if outside.len() < config.train_fill_size {
        return Err(Error::Dataset(format!(
            "{} non-candidate records cannot supply a fill of {}",
            outside.len(),
            config.train_fill_size
        )));
    }
    let mut fill: Vec<usize> = rng
        .fork("fill")
        .sample_indices(outside.len(), config.train_fill_size)
        .into_iter()
        .map(|i| outside[i])
        .collect();
    fill.sort_unstable();
    if fill.iter().any(|r| in_c.contains(r)) {
        return Err(Error::Protocol("training fill overlaps candidate records".into()));
    }

    let train = aux.select(&fill).concat(&aux.select(&member_rows))?.without_households();
    let candidates = CandidateSet::new(aux.select(&candidate_rows), Some(config.min_household_size))?;
    let truth = GroundTruth::new(
        member_ids.into_iter().collect(),
        candidate_ids.into_iter().collect(),
    )?;
    let shadow_pool = if config.shadow_full_aux {
        aux.clone().without_households()
    } else {
        aux.select(&outside).without_households()
    };
    Ok(TrialData {
        trial,
        train,
        candidates,
        truth,
        shadow_pool,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub ma: f64,
    pub auc: f64,
    pub weights: FocalPointWeights,
    /// Fingerprint of the trial data this outcome was computed from.
    pub fingerprint: String,
}

/// Runs one (generator, ε) cell of a prepared trial.
pub fn run_prepared_trial(
    aux: &Dataset,
    data: &TrialData,
    config: &ExperimentConfig,
    kind: GeneratorKind,
    epsilon: f64,
) -> Result<TrialOutcome> {
    let budget = config.budget(epsilon)?;
    let job = RandomSource::new(config.seed, 0)
        .fork("job")
        .fork_index(data.trial as u64)
        .fork(kind.name())
        .fork_index(epsilon.to_bits());

    let model = FittedModel::fit(kind, &data.train, &budget, &config.generator, &mut job.fork("fit"))?;
    let synth = model.sample(config.synth_rows, &mut job.fork("sample"))?;

    let shadow = ShadowConfig {
        generator: kind,
        budget,
        runs: config.shadow_runs,
        train_sample_size: data.train.n_rows(),
        base_seed: job.fork("shadow").next_u64(),
        fixed_sample: config.shadow_fixed_sample,
        generator_config: config.generator,
    };
    let weights = run_shadow(&data.shadow_pool, &shadow)?;

    let mut predictions = run_attack(&synth, aux, &weights, &data.candidates, &config.attack)?.prob_per_household;
    if config.ablate_constant {
        predictions.values_mut().for_each(|p| *p = 0.5);
    }
    Ok(TrialOutcome {
        ma: membership_advantage(&predictions, &data.truth)?,
        auc: auc(&predictions, &data.truth)?,
        weights,
        fingerprint: data.fingerprint(),
    })
}

/// Prepares trial `trial` and runs a single (generator, ε) cell on it.
pub fn run_trial(
    aux: &Dataset,
    config: &ExperimentConfig,
    kind: GeneratorKind,
    epsilon: f64,
    trial: usize,
) -> Result<TrialOutcome> {
    let data = prepare_trial(aux, config, trial)?;
    run_prepared_trial(aux, &data, config, kind, epsilon)
}

/// Per-trial values and aggregates for one generator at one ε.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub generator: GeneratorKind,
    pub epsilon: f64,
    pub ma: Vec<f64>,
    pub auc: Vec<f64>,
    pub mean_ma: f64,
    pub mean_auc: f64,
    /// Shadow selection frequency per focal-point, pooled over all trials.
    pub focal_points: Vec<(String, f64)>,
    /// Share of selected conditionals per parent-set size (PrivBayes only).
    pub parent_sizes: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trial: usize,
    pub fingerprint: String,
    pub train_rows: usize,
    pub members: Vec<u64>,
    pub candidates: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub aux_rows: usize,
    pub schema_fingerprint: String,
    pub trials: Vec<TrialSummary>,
    pub cells: Vec<CellResult>,
}

impl ExperimentResult {
    pub fn cell(&self, kind: GeneratorKind, epsilon: f64) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.generator == kind && c.epsilon == epsilon)
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Every trial × generator × ε. Jobs run in parallel on the current rayon
/// pool; results do not depend on scheduling.
pub fn run_experiment(aux: &Dataset, config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let prepared: Vec<TrialData> = (0..config.trials)
        .into_par_iter()
        .map(|t| prepare_trial(aux, config, t))
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, GeneratorKind, f64)> = (0..config.trials)
        .flat_map(|t| {
            config
                .generators
                .iter()
                .flat_map(move |&g| config.epsilons.iter().map(move |&e| (t, g, e)))
        })
        .collect();
    let outcomes: Vec<TrialOutcome> = jobs
        .par_iter()
        .map(|&(t, g, e)| run_prepared_trial(aux, &prepared[t], config, g, e))
        .collect::<Result<_>>()?;

    let summaries: Vec<TrialSummary> = prepared
        .iter()
        .map(|d| TrialSummary {
            trial: d.trial,
            fingerprint: d.fingerprint(),
            train_rows: d.train.n_rows(),
            members: d.truth.members().iter().copied().collect(),
            candidates: d.truth.candidates().iter().copied().collect(),
        })
        .collect();

    let mut grouped: BTreeMap<(usize, usize), Vec<&TrialOutcome>> = BTreeMap::new();
    for (&(t, g, e), outcome) in jobs.iter().zip(&outcomes) {
        if outcome.fingerprint != summaries[t].fingerprint {
            return Err(Error::Protocol(format!("trial {t} data changed between generators")));
        }
        let gi = config.generators.iter().position(|&k| k == g).unwrap_or_default();
        let ei = config.epsilons.iter().position(|&x| x == e).unwrap_or_default();
        grouped.entry((gi, ei)).or_default().push(outcome);
    }

    let mut cells = Vec::with_capacity(grouped.len());
    for ((gi, ei), outs) in grouped {
        let ma: Vec<f64> = outs.iter().map(|o| o.ma).collect();
        let au: Vec<f64> = outs.iter().map(|o| o.auc).collect();
        let mut pooled = outs[0].weights.clone();
        for o in &outs[1..] {
            pooled.merge(&o.weights)?;
        }
        cells.push(CellResult {
            generator: config.generators[gi],
            epsilon: config.epsilons[ei],
            mean_ma: mean(&ma),
            mean_auc: mean(&au),
            ma,
            auc: au,
            focal_points: pooled.iter().map(|(t, f)| (t.to_string(), f)).collect(),
            parent_sizes: pooled.parent_size_distribution().into_iter().collect(),
        });
    }
    Ok(ExperimentResult {
        config: config.clone(),
        aux_rows: aux.n_rows(),
        schema_fingerprint: aux.schema().fingerprint(),
        trials: summaries,
        cells,
    })
}
