//! Configuration file model. Every field has a default, so an empty file (or
//! none at all) is valid; command-line flags are applied on top.

use std::path::Path;

use anyhow::Context;
use focalpoint::{AttackConfig, GeneratorConfig, GeneratorKind, MstConfig, PrivBayesConfig};
use serde::{Deserialize, Serialize};

use crate::Invalid;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub seed: u64,
    pub workers: usize,
    pub budget: BudgetSection,
    pub mst: MstConfig,
    pub privbayes: PrivBayesConfig,
    pub shadow: ShadowSection,
    pub attack: AttackConfig,
    pub experiment: ExperimentSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetSection {
    pub selection_fraction: f64,
}

impl Default for BudgetSection {
    fn default() -> Self {
        Self { selection_fraction: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShadowSection {
    pub runs: usize,
    pub train_size: Option<usize>,
    pub fixed_sample: bool,
}

impl Default for ShadowSection {
    fn default() -> Self {
        Self {
            runs: 50,
            train_size: None,
            fixed_sample: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub generators: Vec<GeneratorKind>,
    pub epsilons: Vec<f64>,
    pub trials: usize,
    pub n_candidates: usize,
    pub n_members: usize,
    pub min_household_size: usize,
    pub train_fill_size: usize,
    pub synth_rows: usize,
    pub shadow_full_aux: bool,
    pub ablate_constant: bool,
    pub desk_records: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        let e = focalpoint::ExperimentConfig::default();
        Self {
            generators: e.generators,
            epsilons: e.epsilons,
            trials: e.trials,
            n_candidates: e.n_candidates,
            n_members: e.n_members,
            min_household_size: e.min_household_size,
            train_fill_size: e.train_fill_size,
            synth_rows: e.synth_rows,
            shadow_full_aux: e.shadow_full_aux,
            ablate_constant: e.ablate_constant,
            desk_records: 20_000,
        }
    }
}

impl Settings {
    /// Reads TOML, or JSON when the file ends in `.json`.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        if !path.is_file() {
            return Err(Invalid(format!("config file {} not found", path.display())).into());
        }
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Invalid(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| Invalid(format!("{}: {e}", path.display())))?
        };
        Ok(parsed)
    }

    pub fn generator_config(&self) -> GeneratorConfig {
        GeneratorConfig {
            mst: self.mst,
            privbayes: self.privbayes,
        }
    }

    pub fn experiment_config(&self) -> focalpoint::ExperimentConfig {
        let e = &self.experiment;
        focalpoint::ExperimentConfig {
            generators: e.generators.clone(),
            epsilons: e.epsilons.clone(),
            trials: e.trials,
            n_candidates: e.n_candidates,
            n_members: e.n_members,
            min_household_size: e.min_household_size,
            train_fill_size: e.train_fill_size,
            synth_rows: e.synth_rows,
            shadow_runs: self.shadow.runs,
            seed: self.seed,
            selection_fraction: self.budget.selection_fraction,
            generator: self.generator_config(),
            attack: self.attack,
            shadow_full_aux: e.shadow_full_aux,
            shadow_fixed_sample: self.shadow.fixed_sample,
            ablate_constant: e.ablate_constant,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("settings serialize")
    }
}
