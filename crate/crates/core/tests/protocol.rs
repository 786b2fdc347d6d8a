use focalpoint::eval::{generate_desk_dataset, prepare_trial, run_experiment, run_trial, DeskConfig};
use focalpoint::{run_shadow, with_workers, Dataset, ExperimentConfig, GeneratorConfig, GeneratorKind, PrivacyBudget, ShadowConfig};

fn aux() -> Dataset {
    generate_desk_dataset(&DeskConfig { records: 6_000, seed: 21 }).unwrap()
}

fn small() -> ExperimentConfig {
    ExperimentConfig {
        trials: 2,
        n_candidates: 40,
        n_members: 20,
        train_fill_size: 2_000,
        synth_rows: 2_000,
        shadow_runs: 3,
        epsilons: vec![1.0, 1000.0],
        seed: 3,
        ..ExperimentConfig::default()
    }
}

#[test]
fn trial_is_deterministic() {
    let aux = aux();
    let cfg = small();
    for kind in GeneratorKind::ALL {
        let a = run_trial(&aux, &cfg, kind, 10.0, 1).unwrap();
        let b = run_trial(&aux, &cfg, kind, 10.0, 1).unwrap();
        assert_eq!(a.ma.to_bits(), b.ma.to_bits());
        assert_eq!(a.auc.to_bits(), b.auc.to_bits());
    }
}

#[test]
fn constant_predictions_give_exactly_half() {
    let aux = aux();
    let cfg = ExperimentConfig { ablate_constant: true, ..small() };
    let out = run_trial(&aux, &cfg, GeneratorKind::Mst, 100.0, 0).unwrap();
    assert_eq!(out.ma, 0.5);
    assert_eq!(out.auc, 0.5);
}

#[test]
fn overfit_generator_is_detected() {
    let aux = aux();
    let cfg = ExperimentConfig {
        trials: 10,
        train_fill_size: 200,
        generators: vec![GeneratorKind::Mst],
        epsilons: vec![1e9],
        ..small()
    };
    let result = run_experiment(&aux, &cfg).unwrap();
    let cell = result.cell(GeneratorKind::Mst, 1e9).unwrap();
    assert!(cell.mean_ma > 0.6, "mean MA {}", cell.mean_ma);
}

#[test]
fn candidate_records_never_reach_training_fill() {
    let aux = aux();
    let cfg = small();
    for trial in 0..5 {
        let data = prepare_trial(&aux, &cfg, trial).unwrap();
        let members: usize = data
            .candidates
            .households()
            .iter()
            .filter(|(id, _)| data.truth.is_member(*id))
            .map(|(_, rows)| rows.len())
            .sum();
        assert_eq!(data.train.n_rows(), cfg.train_fill_size + members);
        assert_eq!(data.shadow_pool.n_rows() + data.candidates.len(), aux.n_rows());
        assert!(data.candidates.households().iter().all(|(_, r)| r.len() >= cfg.min_household_size));
    }
}

#[test]
fn experiment_is_independent_of_worker_count() {
    let aux = aux();
    let cfg = small();
    let one = with_workers(1, || run_experiment(&aux, &cfg)).unwrap().unwrap();
    let three = with_workers(3, || run_experiment(&aux, &cfg)).unwrap().unwrap();
    assert_eq!(one.to_json(), three.to_json());
    let single = ExperimentConfig { trials: 1, ..cfg };
    let r = run_experiment(&aux, &single).unwrap();
    assert!(r.cells.iter().all(|c| c.mean_ma == c.ma[0]));
}

#[test]
fn shadow_runs_do_not_depend_on_scheduling() {
    let aux = aux().without_households();
    let config = ShadowConfig {
        generator: GeneratorKind::PrivBayes,
        budget: PrivacyBudget::even(100.0).unwrap(),
        runs: 6,
        train_sample_size: 2_000,
        base_seed: 12,
        fixed_sample: false,
        generator_config: GeneratorConfig::default(),
    };
    let serial = with_workers(1, || run_shadow(&aux, &config)).unwrap().unwrap();
    let parallel = with_workers(4, || run_shadow(&aux, &config)).unwrap().unwrap();
    assert_eq!(serial, parallel);
    let one = run_shadow(&aux, &ShadowConfig { runs: 1, ..config }).unwrap();
    assert!(one.iter().all(|(_, f)| f == 1.0));
}
