//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run alone with `cargo test -p focalpoint-core --test acceptance`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use focalpoint::attack::{activate, score_mst, score_privbayes};
use focalpoint::dp::{exponential_mechanism, exponential_probabilities};
use focalpoint::eval::{generate_desk_dataset, membership_advantage, run_experiment, DeskConfig};
use focalpoint::mst::fit_mst;
use focalpoint::tabular::measure_marginal;
use focalpoint::{
    shadow_focal_points, with_workers, ActivationMode, ActivationParams, CandidateSet, Dataset, ExperimentConfig,
    ExperimentResult, FeatureTuple, GeneratorConfig, GeneratorKind, GroundTruth, MstConfig, PrivacyBudget,
    RandomSource, Schema, ShadowConfig,
};

const EPSILONS: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn desk_aux() -> Dataset {
    generate_desk_dataset(&DeskConfig {
        records: 20_000,
        seed: 2024,
    })
    .expect("desk data")
}

fn trend_config() -> ExperimentConfig {
    ExperimentConfig {
        trials: 10,
        shadow_runs: 20,
        seed: 17,
        ..ExperimentConfig::default()
    }
}

fn mean_ma(r: &ExperimentResult, kind: GeneratorKind, eps: f64) -> f64 {
    r.cell(kind, eps).expect("cell present").mean_ma
}

fn criterion_1(r: &ExperimentResult, secs: f64) -> Outcome {
    let mut pass = secs <= 20.0 * 60.0;
    let mut parts = Vec::new();
    for kind in GeneratorKind::ALL {
        let lo = mean_ma(r, kind, 1.0);
        let hi = mean_ma(r, kind, 1000.0);
        pass &= hi - lo >= 0.10 && (0.45..=0.70).contains(&lo);
        let curve: Vec<String> = EPSILONS.iter().map(|&e| format!("{:.3}", mean_ma(r, kind, e))).collect();
        parts.push(format!("{kind} MA [{}]", curve.join(", ")));
    }
    outcome(pass, format!("{}; {secs:.0}s", parts.join("; ")))
}

fn criterion_2(r: &ExperimentResult) -> Outcome {
    let pb = mean_ma(r, GeneratorKind::PrivBayes, 1000.0);
    let mst = mean_ma(r, GeneratorKind::Mst, 1000.0);
    outcome(pb >= mst - 0.02, format!("privbayes {pb:.3} vs mst {mst:.3} at eps=1000"))
}

fn shadow(aux: &Dataset, kind: GeneratorKind, eps: f64) -> Vec<Vec<FeatureTuple>> {
    let config = ShadowConfig {
        generator: kind,
        budget: PrivacyBudget::even(eps).unwrap(),
        runs: 50,
        train_sample_size: 10_000,
        base_seed: 99,
        fixed_sample: false,
        generator_config: GeneratorConfig::default(),
    };
    shadow_focal_points(aux, &config).expect("shadow runs")
}

fn criterion_3(aux: &Dataset) -> Outcome {
    let t = Instant::now();
    let low = shadow(aux, GeneratorKind::Mst, 1.0);
    let high = shadow(aux, GeneratorKind::Mst, 1000.0);
    let distinct = |runs: &[Vec<FeatureTuple>]| runs.iter().flatten().collect::<BTreeSet<_>>().len();
    let mut sets: BTreeMap<&Vec<FeatureTuple>, usize> = BTreeMap::new();
    for run in &high {
        *sets.entry(run).or_default() += 1;
    }
    let modal = sets.values().copied().max().unwrap_or(0) as f64 / high.len() as f64;
    let secs = t.elapsed().as_secs_f64();
    let (d_low, d_high) = (distinct(&low), distinct(&high));
    outcome(
        d_low >= d_high && modal >= 0.60 && secs <= 300.0,
        format!("distinct edges eps=1: {d_low}, eps=1000: {d_high}; modal set share {modal:.2}; {secs:.0}s"),
    )
}

fn criterion_4(aux: &Dataset) -> Outcome {
    let t = Instant::now();
    let mut means = Vec::new();
    let mut max_at_one = 0;
    for eps in EPSILONS {
        let runs = shadow(aux, GeneratorKind::PrivBayes, eps);
        let sizes: Vec<usize> = runs.iter().flatten().filter_map(FeatureTuple::parent_count).collect();
        if eps == 1.0 {
            max_at_one = sizes.iter().copied().max().unwrap_or(0);
        }
        means.push(sizes.iter().sum::<usize>() as f64 / sizes.len() as f64);
    }
    let secs = t.elapsed().as_secs_f64();
    let monotone = means.windows(2).all(|w| w[1] >= w[0]);
    let shown: Vec<String> = means.iter().map(|m| format!("{m:.3}")).collect();
    outcome(
        monotone && max_at_one <= 2 && secs <= 300.0,
        format!("mean parent size [{}]; max at eps=1: {max_at_one}; {secs:.0}s", shown.join(", ")),
    )
}

fn random_dataset(rng: &mut RandomSource, max_rows: usize) -> Dataset {
    let n_features = 1 + rng.below(5);
    let cards: Vec<usize> = (0..n_features).map(|_| 2 + rng.below(4)).collect();
    let rows = 1 + rng.below(max_rows);
    let data: Vec<Vec<u32>> = (0..rows)
        .map(|_| cards.iter().map(|&c| rng.below(c) as u32).collect())
        .collect();
    Dataset::from_rows(Arc::new(Schema::from_cardinalities(&cards).unwrap()), &data, None).unwrap()
}

/// Counts by scanning every cell and every row.
fn brute_force_counts(data: &Dataset, axes: &[usize]) -> Vec<f64> {
    let shape: Vec<usize> = axes.iter().map(|&a| data.schema().cardinality(a)).collect();
    let cells: usize = shape.iter().product();
    let mut out = vec![0.0; cells];
    for (cell, slot) in out.iter_mut().enumerate() {
        let mut rem = cell;
        let mut want = vec![0u32; axes.len()];
        for i in (0..axes.len()).rev() {
            want[i] = (rem % shape[i]) as u32;
            rem /= shape[i];
        }
        *slot = data
            .rows()
            .filter(|r| axes.iter().zip(&want).all(|(&a, &v)| r[a] == v))
            .count() as f64;
    }
    out
}

/// Plug-in mutual information from a hash-map joint count.
fn oracle_mi(data: &Dataset, a: usize, b: usize) -> f64 {
    let n = data.n_rows() as f64;
    let mut joint: HashMap<(u32, u32), f64> = HashMap::new();
    let mut pa: HashMap<u32, f64> = HashMap::new();
    let mut pb: HashMap<u32, f64> = HashMap::new();
    for r in data.rows() {
        *joint.entry((r[a], r[b])).or_default() += 1.0;
        *pa.entry(r[a]).or_default() += 1.0;
        *pb.entry(r[b]).or_default() += 1.0;
    }
    joint
        .iter()
        .map(|(&(x, y), &c)| c / n * (c * n / (pa[&x] * pb[&y])).ln())
        .sum()
}

/// Maximum spanning tree by Kruskal over exact pairwise MI.
fn kruskal(data: &Dataset) -> BTreeSet<(usize, usize)> {
    let n = data.n_features();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            pairs.push((oracle_mi(data, a, b), a, b));
        }
    }
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut comp: Vec<usize> = (0..n).collect();
    let mut tree = BTreeSet::new();
    for (_, a, b) in pairs {
        let (ca, cb) = (comp[a], comp[b]);
        if ca != cb {
            comp.iter_mut().filter(|c| **c == cb).for_each(|c| *c = ca);
            tree.insert((a, b));
        }
    }
    tree
}

fn criterion_5() -> Outcome {
    let mut rng = RandomSource::new(5, 0);
    let mut counting_ok = 0;
    for _ in 0..100 {
        let data = random_dataset(&mut rng, 1_000);
        let k = 1 + rng.below(data.n_features().min(3));
        let axes = rng.sample_indices(data.n_features(), k);
        let tuple = FeatureTuple::marginal(axes);
        let FeatureTuple::Marginal(sorted) = &tuple else { unreachable!() };
        let table = measure_marginal(&data, &tuple).unwrap();
        if table.cells() == brute_force_counts(&data, sorted).as_slice() {
            counting_ok += 1;
        }
    }

    let mut mst_ok = 0;
    for seed in 0..20 {
        let data = generate_desk_dataset(&DeskConfig { records: 2_000, seed: 1_000 + seed })
            .unwrap()
            .without_households();
        let model = fit_mst(
            &data,
            &PrivacyBudget::even(1e9).unwrap(),
            &MstConfig::default(),
            &mut RandomSource::new(seed, 0),
        )
        .unwrap();
        let edges: BTreeSet<(usize, usize)> = model.edges().iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        if edges == kruskal(&data) {
            mst_ok += 1;
        }
    }

    let scores = [0.0, 1.0, 2.5, 0.5, 3.0, 1.5];
    let (sens, eps) = (1.0, 1.0);
    let analytic = exponential_probabilities(&scores, sens, eps).unwrap();
    let mut hits = vec![0usize; scores.len()];
    let mut em_rng = RandomSource::new(6, 0);
    let draws = 100_000;
    for _ in 0..draws {
        hits[exponential_mechanism(&scores, sens, eps, &mut em_rng).unwrap()] += 1;
    }
    let tv = 0.5
        * hits
            .iter()
            .zip(&analytic)
            .map(|(&h, &p)| (h as f64 / draws as f64 - p).abs())
            .sum::<f64>();

    outcome(
        counting_ok == 100 && mst_ok == 20 && tv <= 0.01,
        format!("counting {counting_ok}/100; kruskal {mst_ok}/20; exp-mech TV {tv:.4}"),
    )
}

fn criterion_6() -> Outcome {
    let members: BTreeSet<u64> = [1, 2].into();
    let truth = GroundTruth::new(members, [1, 2, 3, 4].into()).unwrap();
    let preds = |v: [f64; 4]| -> BTreeMap<u64, f64> { (1..=4).zip(v).collect() };
    let perfect = membership_advantage(&preds([1.0, 1.0, 0.0, 0.0]), &truth).unwrap();
    let constant = membership_advantage(&preds([0.5; 4]), &truth).unwrap();
    let mixed_p = [0.9, 0.4, 0.8, 0.1];
    let mixed = membership_advantage(&preds(mixed_p), &truth).unwrap();
    let flipped = membership_advantage(&preds(mixed_p.map(|p| 1.0 - p)), &truth).unwrap();
    let expected = (0.8 - 0.6 / 1.4 + 1.0) / 2.0;
    let act = activate(
        &[1.0],
        &ActivationParams {
            mode: ActivationMode::Sigmoid,
            c: 1.0,
            m: Some(0.0),
        },
    )
    .unwrap()[0];
    outcome(
        perfect == 1.0
            && constant == 0.5
            && (mixed - expected).abs() <= 1e-9
            && (mixed + flipped - 1.0).abs() <= 1e-12
            && act == 0.5,
        format!("perfect {perfect}, constant {constant}, mixed {mixed:.10}, flipped {flipped:.10}, P(1) {act}"),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = RandomSource::new(7, 0);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let mut data = random_dataset(&mut rng, 300);
        while data.n_features() < 2 {
            data = random_dataset(&mut rng, 300);
        }
        let n = data.n_features();
        let mut tuples = BTreeSet::new();
        let mut conditionals = BTreeSet::new();
        for _ in 0..1 + rng.below(6) {
            let pair = rng.sample_indices(n, 2);
            tuples.insert(FeatureTuple::pair(pair[0], pair[1]));
            let child = rng.below(n);
            let others: Vec<usize> = (0..n).filter(|&f| f != child).collect();
            let k = rng.below(others.len().min(3) + 1);
            let parents = rng.sample_indices(others.len(), k).into_iter().map(|i| others[i]).collect();
            conditionals.insert(FeatureTuple::conditional(child, parents));
        }
        let normalized = |len: usize, rng: &mut RandomSource| -> Vec<f64> {
            let raw: Vec<f64> = (0..len).map(|_| 0.01 + rng.uniform()).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|w| w / total).collect()
        };
        let tuples: Vec<FeatureTuple> = tuples.into_iter().collect();
        let conditionals: Vec<FeatureTuple> = conditionals.into_iter().collect();
        let w_mst = normalized(tuples.len(), &mut rng);
        let w_pb = normalized(conditionals.len(), &mut rng);
        let ids: Vec<u64> = (0..data.n_rows() as u64).map(|r| r % 7).collect();
        let candidates = CandidateSet::new(
            Dataset::from_rows(data.schema_arc().clone(), &data.rows().collect::<Vec<_>>(), Some(ids)).unwrap(),
            None,
        )
        .unwrap();
        let smoothing = if case % 2 == 0 { 0.5 } else { 0.0 };
        let a = score_mst(&data, &data, &tuples, &w_mst, &candidates, smoothing).unwrap();
        let b = score_privbayes(&data, &data, &conditionals, &w_pb, &candidates, smoothing).unwrap();
        for l in a.into_iter().chain(b) {
            worst = worst.max((l - 1.0).abs());
        }
    }
    outcome(worst <= 1e-9, format!("max |lambda - 1| over 100 cases: {worst:.2e}"))
}

fn criterion_8(aux: &Dataset, reference: &ExperimentResult) -> Outcome {
    let config = trend_config();
    let a = reference.to_json();
    let b = with_workers(3, || run_experiment(aux, &config)).unwrap().unwrap().to_json();
    let small = ExperimentConfig {
        trials: 2,
        shadow_runs: 4,
        seed: 8,
        ..ExperimentConfig::default()
    };
    let c = with_workers(1, || run_experiment(aux, &small)).unwrap().unwrap().to_json();
    let d = with_workers(4, || run_experiment(aux, &small)).unwrap().unwrap().to_json();
    outcome(
        a == b && c == d,
        format!("trend report 1 vs 3 workers identical: {}; small report 1 vs 4 workers identical: {}", a == b, c == d),
    )
}

fn main() -> ExitCode {
    let aux = desk_aux();
    let t = Instant::now();
    let trend = with_workers(1, || run_experiment(&aux, &trend_config()))
        .unwrap()
        .expect("trend experiment");
    let trend_secs = t.elapsed().as_secs_f64();

    let results = [
        ("1 epsilon trend", criterion_1(&trend, trend_secs)),
        ("2 privbayes vs mst at high epsilon", criterion_2(&trend)),
        ("3 focal-point variability", criterion_3(&aux)),
        ("4 parent-size monotonicity", criterion_4(&aux)),
        ("5 oracle suites", criterion_5()),
        ("6 metric identities", criterion_6()),
        ("7 self-ratio identity", criterion_7()),
        ("8 determinism", criterion_8(&aux, &trend)),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
