//! Discrete tabular data: schema, records, contingency tables and mutual
//! information.

mod dataset;
mod info;
mod io;
mod marginal;
mod schema;

pub use dataset::{Dataset, HouseholdIndex};
pub use info::{mutual_information, set_mutual_information};
pub(crate) use info::MiScratch;
pub use io::{load_dataset, read_dataset, save_dataset, write_dataset, HOUSEHOLD_COLUMN};
pub use marginal::{measure_marginal, FeatureTuple, MarginalTable};
pub use schema::{Feature, FeatureKind, Schema};

/// `conditional_prob` under its operation name.
pub fn conditional_prob(
    table: &MarginalTable,
    child_value: u32,
    parent_values: &[u32],
    smoothing: f64,
) -> crate::Result<f64> {
    table.conditional_prob(child_value, parent_values, smoothing)
}
