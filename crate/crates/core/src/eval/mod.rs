//! Ground truth, metrics, the desk dataset and the experiment protocol.

pub mod desk;
mod metrics;
mod protocol;
mod report;

pub use desk::{desk_schema, generate_desk_dataset, DeskConfig};
pub use metrics::{auc, membership_advantage, GroundTruth};
pub use protocol::{
    prepare_trial, run_experiment, run_prepared_trial, run_trial, CellResult, ExperimentConfig, ExperimentResult,
    TrialData, TrialOutcome, TrialSummary,
};
pub use report::{write_plot_data, PlotFiles};
