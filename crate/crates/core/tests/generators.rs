mod common;

use std::collections::BTreeSet;

use focalpoint::eval::{generate_desk_dataset, DeskConfig};
use focalpoint::mst::{fit_mst, focal_points_mst, sample_mst};
use focalpoint::privbayes::{choose_k, fit_privbayes, sample_privbayes};
use focalpoint::tabular::measure_marginal;
use focalpoint::{
    Dataset, FeatureTuple, FittedModel, GeneratorConfig, GeneratorKind, MstConfig, PrivBayesConfig, PrivacyBudget,
    RandomSource, Schema,
};
use proptest::prelude::*;

fn desk(records: usize, seed: u64) -> Dataset {
    generate_desk_dataset(&DeskConfig { records, seed }).unwrap().without_households()
}

fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    a.iter().zip(b).map(|(x, y)| (x / sa - y / sb).abs()).sum::<f64>() / 2.0
}

fn is_spanning_tree(n: usize, edges: &[(usize, usize)]) -> bool {
    if edges.len() + 1 != n {
        return false;
    }
    let mut comp: Vec<usize> = (0..n).collect();
    for &(a, b) in edges {
        let (ca, cb) = (comp[a], comp[b]);
        if ca == cb {
            return false;
        }
        comp.iter_mut().filter(|c| **c == cb).for_each(|c| *c = ca);
    }
    comp.iter().all(|&c| c == comp[0])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mst_output_is_a_spanning_tree(data in common::dataset(6, 4, 120), eps in 0.1f64..100.0, seed in any::<u64>()) {
        prop_assume!(data.n_features() >= 2);
        let budget = PrivacyBudget::even(eps).unwrap();
        let model = fit_mst(&data, &budget, &MstConfig::default(), &mut RandomSource::new(seed, 0)).unwrap();
        prop_assert!(is_spanning_tree(data.n_features(), model.edges()));
        let points = focal_points_mst(&model);
        prop_assert!(points.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(points.len(), data.n_features() - 1);
    }

    #[test]
    fn privbayes_parents_precede_children(data in common::dataset(6, 3, 120), eps in 0.1f64..1000.0, seed in any::<u64>()) {
        let budget = PrivacyBudget::even(eps).unwrap();
        let net = fit_privbayes(&data, &budget, &PrivBayesConfig::default(), &mut RandomSource::new(seed, 0)).unwrap();
        let position: Vec<usize> = {
            let mut p = vec![0; data.n_features()];
            for (i, &f) in net.order().iter().enumerate() {
                p[f] = i;
            }
            p
        };
        for f in 0..data.n_features() {
            prop_assert!(net.parents(f).len() <= net.k());
            prop_assert!(net.parents(f).iter().all(|&p| position[p] < position[f]));
        }
        prop_assert!(net.validate().is_ok());
    }

    #[test]
    fn choose_k_is_monotone_in_epsilon(
        cards in prop::collection::vec(2usize..30, 2..16),
        rows in 100usize..100_000,
        e1 in 0.01f64..1e4,
        e2 in 0.01f64..1e4,
    ) {
        let schema = Schema::from_cardinalities(&cards).unwrap();
        let config = PrivBayesConfig::default();
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let k_lo = choose_k(&PrivacyBudget::even(lo).unwrap(), &schema, rows, &config);
        let k_hi = choose_k(&PrivacyBudget::even(hi).unwrap(), &schema, rows, &config);
        prop_assert!(1 <= k_lo && k_lo <= k_hi && k_hi <= config.max_parents);
    }
}

#[test]
fn choose_k_on_desk_schema() {
    let data = desk(10_300, 0);
    let config = PrivBayesConfig::default();
    let ks: Vec<usize> = [1.0, 10.0, 100.0, 1000.0, 1e12]
        .iter()
        .map(|&e| choose_k(&PrivacyBudget::even(e).unwrap(), data.schema(), data.n_rows(), &config))
        .collect();
    assert_eq!(ks, vec![1, 1, 2, 3, 4]);
}

#[test]
fn fits_are_reproducible_and_seed_sensitive() {
    let data = desk(3_000, 4);
    let budget = PrivacyBudget::even(1.0).unwrap();
    for kind in GeneratorKind::ALL {
        let fit = |seed| FittedModel::fit(kind, &data, &budget, &GeneratorConfig::default(), &mut RandomSource::new(seed, 0)).unwrap();
        assert_eq!(fit(1), fit(1));
        assert_ne!(fit(1), fit(2));
    }
}

#[test]
fn mst_samples_reproduce_measured_pairs_at_high_epsilon() {
    let data = desk(5_000, 2);
    let budget = PrivacyBudget::even(1e9).unwrap();
    let model = fit_mst(&data, &budget, &MstConfig::default(), &mut RandomSource::new(1, 0)).unwrap();
    let synth = sample_mst(&model, 60_000, &mut RandomSource::new(2, 0)).unwrap();
    for t in focal_points_mst(&model) {
        let real = measure_marginal(&data, &t).unwrap();
        let fake = measure_marginal(&synth, &t).unwrap();
        let tv = total_variation(real.cells(), fake.cells());
        assert!(tv < 0.03, "{t}: total variation {tv}");
    }
}

#[test]
fn privbayes_samples_reproduce_conditionals_at_high_epsilon() {
    let data = desk(5_000, 3);
    let budget = PrivacyBudget::even(1e9).unwrap();
    let config = PrivBayesConfig { fixed_k: Some(1), ..PrivBayesConfig::default() };
    let net = fit_privbayes(&data, &budget, &config, &mut RandomSource::new(1, 0)).unwrap();
    let synth = sample_privbayes(&net, 60_000, &mut RandomSource::new(2, 0)).unwrap();
    for f in 0..data.n_features() {
        let mut axes = net.parents(f).to_vec();
        axes.push(f);
        let t = FeatureTuple::marginal(axes);
        let tv = total_variation(measure_marginal(&data, &t).unwrap().cells(), measure_marginal(&synth, &t).unwrap().cells());
        assert!(tv < 0.03, "{t}: total variation {tv}");
    }
}

#[test]
fn high_epsilon_selection_is_stable_across_seeds() {
    let data = desk(4_000, 5);
    let budget = PrivacyBudget::even(1e9).unwrap();
    let sets: BTreeSet<Vec<(usize, usize)>> = (0..5)
        .map(|s| {
            let m = fit_mst(&data, &budget, &MstConfig::default(), &mut RandomSource::new(s, 0)).unwrap();
            let mut e: Vec<(usize, usize)> = m.edges().iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
            e.sort_unstable();
            e
        })
        .collect();
    assert_eq!(sets.len(), 1);
}

#[test]
fn models_round_trip_through_json() {
    let data = desk(2_000, 6);
    let budget = PrivacyBudget::even(10.0).unwrap();
    for kind in GeneratorKind::ALL {
        let model = FittedModel::fit(kind, &data, &budget, &GeneratorConfig::default(), &mut RandomSource::new(3, 0)).unwrap();
        assert_eq!(FittedModel::from_json(&model.to_json()).unwrap(), model);
    }
}
