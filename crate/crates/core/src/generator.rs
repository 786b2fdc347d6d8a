//! Uniform handle over the two synthesizers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dp::PrivacyBudget;
use crate::error::{Error, Result};
use crate::mst::{fit_mst, focal_points_mst, sample_mst, MstConfig, MstModel};
use crate::privbayes::{fit_privbayes, focal_points_privbayes, sample_privbayes, BayesNet, PrivBayesConfig};
use crate::rng::RandomSource;
use crate::tabular::{Dataset, FeatureTuple, Schema};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Mst,
    PrivBayes,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 2] = [GeneratorKind::Mst, GeneratorKind::PrivBayes];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::Mst => "mst",
            GeneratorKind::PrivBayes => "privbayes",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mst" => Ok(GeneratorKind::Mst),
            "privbayes" | "pb" => Ok(GeneratorKind::PrivBayes),
            other => Err(Error::param(format!("unknown generator {other:?}"))),
        }
    }
}

/// Tunables for both generators; shadow runs must reuse the target's values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub mst: MstConfig,
    pub privbayes: PrivBayesConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "lowercase")]
pub enum FittedModel {
    Mst(MstModel),
    PrivBayes(BayesNet),
}

impl FittedModel {
    pub fn fit(
        kind: GeneratorKind,
        train: &Dataset,
        budget: &PrivacyBudget,
        config: &GeneratorConfig,
        rng: &mut RandomSource,
    ) -> Result<Self> {
        Ok(match kind {
            GeneratorKind::Mst => FittedModel::Mst(fit_mst(train, budget, &config.mst, rng)?),
            GeneratorKind::PrivBayes => FittedModel::PrivBayes(fit_privbayes(train, budget, &config.privbayes, rng)?),
        })
    }

    pub fn kind(&self) -> GeneratorKind {
        match self {
            FittedModel::Mst(_) => GeneratorKind::Mst,
            FittedModel::PrivBayes(_) => GeneratorKind::PrivBayes,
        }
    }

    pub fn schema(&self) -> &Schema {
        match self {
            FittedModel::Mst(m) => m.schema(),
            FittedModel::PrivBayes(m) => m.schema(),
        }
    }

    pub fn sample(&self, n_rows: usize, rng: &mut RandomSource) -> Result<Dataset> {
        match self {
            FittedModel::Mst(m) => sample_mst(m, n_rows, rng),
            FittedModel::PrivBayes(m) => sample_privbayes(m, n_rows, rng),
        }
    }

    pub fn focal_points(&self) -> Vec<FeatureTuple> {
        match self {
            FittedModel::Mst(m) => focal_points_mst(m),
            FittedModel::PrivBayes(m) => focal_points_privbayes(m),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        match &model {
            FittedModel::Mst(m) => m.validate()?,
            FittedModel::PrivBayes(m) => m.validate()?,
        }
        Ok(model)
    }
}
