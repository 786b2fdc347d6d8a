//! Shared fixtures for the criterion benches.

use focalpoint::eval::{generate_desk_dataset, DeskConfig};
use focalpoint::Dataset;

/// Desk data of `records` rows with a fixed seed.
pub fn desk(records: usize) -> Dataset {
    generate_desk_dataset(&DeskConfig { records, seed: 11 }).expect("desk data")
}
