//! Marginal-based differentially private synthesizers (MST and PrivBayes),
//! shadow modelling of their focal-points, density-ratio membership inference
//! against them, and the evaluation protocol tying it together.

pub mod attack;
pub mod dp;
mod error;
pub mod eval;
pub mod generator;
pub mod mst;
pub mod privbayes;
pub mod rng;
pub mod shadow;
pub mod tabular;

pub use attack::{run_attack, ActivationMode, ActivationParams, AttackConfig, AttackResult, CandidateSet};
pub use dp::PrivacyBudget;
pub use error::{Error, Result};
pub use eval::{ExperimentConfig, ExperimentResult, GroundTruth};
pub use generator::{FittedModel, GeneratorConfig, GeneratorKind};
pub use mst::{MstConfig, MstModel};
pub use privbayes::{BayesNet, PrivBayesConfig};
pub use rng::RandomSource;
pub use shadow::{run_shadow, shadow_focal_points, FocalPointWeights, ShadowConfig};
pub use tabular::{Dataset, Feature, FeatureKind, FeatureTuple, HouseholdIndex, MarginalTable, Schema};

/// Runs `f` on a dedicated pool of `workers` threads (0 = rayon's default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}
