mod common;

use std::collections::HashMap;

use focalpoint::tabular::{measure_marginal, mutual_information, set_mutual_information};
use focalpoint::{Dataset, FeatureTuple};
use proptest::prelude::*;

fn count_oracle(data: &Dataset, axes: &[usize]) -> HashMap<Vec<u32>, f64> {
    let mut out = HashMap::new();
    for r in data.rows() {
        *out.entry(axes.iter().map(|&a| r[a]).collect()).or_default() += 1.0;
    }
    out
}

fn pick_axes(n: usize, seed: u64, k: usize) -> Vec<usize> {
    let mut axes: Vec<usize> = (0..n).collect();
    axes.rotate_left(seed as usize % n);
    axes.truncate(k.min(n));
    axes.sort_unstable();
    axes
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn marginal_counts_match_oracle(data in common::dataset(5, 4, 200), seed in any::<u64>(), k in 1usize..4) {
        let axes = pick_axes(data.n_features(), seed, k);
        let table = measure_marginal(&data, &FeatureTuple::marginal(axes.clone())).unwrap();
        let oracle = count_oracle(&data, &axes);
        prop_assert_eq!(table.total(), data.n_rows() as f64);
        for (cell, &c) in table.cells().iter().enumerate() {
            let mut rem = cell;
            let mut values = vec![0u32; axes.len()];
            for i in (0..axes.len()).rev() {
                values[i] = (rem % table.shape()[i]) as u32;
                rem /= table.shape()[i];
            }
            prop_assert_eq!(c, oracle.get(&values).copied().unwrap_or(0.0));
        }
    }

    #[test]
    fn projection_equals_direct_measurement(data in common::dataset(4, 4, 150), seed in any::<u64>()) {
        prop_assume!(data.n_features() >= 2);
        let axes = pick_axes(data.n_features(), seed, 3);
        let full = measure_marginal(&data, &FeatureTuple::marginal(axes.clone())).unwrap();
        let keep = vec![axes[0], axes[axes.len() - 1]];
        let projected = full.project(&keep).unwrap();
        let direct = measure_marginal(&data, &FeatureTuple::marginal(keep)).unwrap();
        prop_assert_eq!(projected.cells(), direct.cells());
    }

    #[test]
    fn mutual_information_is_symmetric_and_bounded(data in common::dataset(4, 5, 200)) {
        prop_assume!(data.n_features() >= 2);
        let ab = mutual_information(&data, 0, 1).unwrap();
        let ba = mutual_information(&data, 1, 0).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!(ab >= 0.0);
        let card = data.schema().cardinality(0).min(data.schema().cardinality(1)) as f64;
        prop_assert!(ab <= card.ln() + 1e-12);
    }

    #[test]
    fn mutual_information_ignores_relabeling(data in common::dataset(3, 4, 200), shift in 1u32..4) {
        prop_assume!(data.n_features() >= 2);
        let card = data.schema().cardinality(0) as u32;
        let rows: Vec<Vec<u32>> = data
            .rows()
            .map(|mut r| {
                r[0] = (r[0] + shift) % card;
                r
            })
            .collect();
        let relabeled = Dataset::from_rows(data.schema_arc().clone(), &rows, None).unwrap();
        let a = mutual_information(&data, 0, 1).unwrap();
        let b = mutual_information(&relabeled, 0, 1).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn single_parent_set_mi_equals_pairwise(data in common::dataset(3, 4, 200)) {
        prop_assume!(data.n_features() >= 2);
        let set = set_mutual_information(&data, 1, &[0]).unwrap();
        let pair = mutual_information(&data, 0, 1).unwrap();
        prop_assert!((set - pair).abs() < 1e-12);
    }

    #[test]
    fn conditionals_sum_to_one(data in common::dataset(4, 4, 100), smoothing in 0.0f64..2.0) {
        prop_assume!(data.n_features() >= 2);
        let parents: Vec<usize> = (1..data.n_features()).collect();
        let table = measure_marginal(&data, &FeatureTuple::conditional(0, parents.clone())).unwrap();
        let first = data.record(0);
        let parent_values: Vec<u32> = parents.iter().map(|&p| first[p]).collect();
        let total: f64 = (0..data.schema().cardinality(0) as u32)
            .map(|v| table.conditional_prob(v, &parent_values, smoothing).unwrap())
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }
}
