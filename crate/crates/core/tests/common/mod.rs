#![allow(dead_code)]

use std::sync::Arc;

use focalpoint::{Dataset, Schema};
use proptest::prelude::*;

/// Random discrete dataset: cardinalities in 2..=max_card, up to `max_rows` rows.
pub fn dataset(max_features: usize, max_card: usize, max_rows: usize) -> impl Strategy<Value = Dataset> {
    (prop::collection::vec(2..=max_card, 1..=max_features), 1..=max_rows).prop_flat_map(|(cards, rows)| {
        let row = cards.iter().map(|&c| 0..c as u32).collect::<Vec<_>>();
        prop::collection::vec(row, rows).prop_map(move |data| {
            let schema = Arc::new(Schema::from_cardinalities(&cards).unwrap());
            Dataset::from_rows(schema, &data, None).unwrap()
        })
    })
}

pub fn with_households(data: &Dataset, households: usize) -> Dataset {
    let ids: Vec<u64> = (0..data.n_rows() as u64).map(|r| r % households as u64).collect();
    let rows: Vec<Vec<u32>> = data.rows().collect();
    Dataset::from_rows(data.schema_arc().clone(), &rows, Some(ids)).unwrap()
}
