use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use anyhow::Context;
use focalpoint::eval::{auc, generate_desk_dataset, membership_advantage, run_experiment, DeskConfig, PlotFiles};
use focalpoint::tabular::{read_dataset, write_dataset, HOUSEHOLD_COLUMN};
use focalpoint::{
    run_attack, run_shadow, CandidateSet, Dataset, FittedModel, FocalPointWeights, GeneratorKind, GroundTruth,
    PrivacyBudget, RandomSource, Schema, ShadowConfig,
};
use serde::Serialize;

use crate::args::{AttackArgs, EvalArgs, ExperimentArgs, GenDeskArgs, ShadowArgs, SynthArgs};
use crate::config::Settings;
use crate::manifest::Run;
use crate::Invalid;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Households {
    Required,
    /// Ignore the column if the file has one.
    Drop,
}

fn load_schema(run: &mut Run, path: &Path) -> anyhow::Result<Arc<Schema>> {
    let bytes = run.read_input(path)?;
    let text = String::from_utf8(bytes).map_err(|_| Invalid(format!("{} is not UTF-8", path.display())))?;
    Ok(Arc::new(Schema::from_json(&text)?))
}

fn load_data(run: &mut Run, path: &Path, schema: &Arc<Schema>, households: Households) -> anyhow::Result<Dataset> {
    let bytes = run.read_input(path)?;
    let has_column = {
        let mut reader = csv::ReaderBuilder::new().from_reader(bytes.as_slice());
        reader.headers()?.iter().any(|h| h.trim() == HOUSEHOLD_COLUMN)
    };
    if households == Households::Required && !has_column {
        return Err(Invalid(format!("{} has no {HOUSEHOLD_COLUMN} column", path.display())).into());
    }
    let data = read_dataset(
        bytes.as_slice(),
        &path.display().to_string(),
        schema.clone(),
        has_column.then_some(HOUSEHOLD_COLUMN),
    )?;
    Ok(if households == Households::Drop { data.without_households() } else { data })
}

fn csv_bytes(data: &Dataset) -> anyhow::Result<Vec<u8>> {
    let mut out = Vec::new();
    write_dataset(&mut out, data)?;
    Ok(out)
}

fn budget(settings: &Settings, eps: f64) -> anyhow::Result<PrivacyBudget> {
    let s = settings.budget.selection_fraction;
    Ok(PrivacyBudget::with_fractions(eps, s, 1.0 - s)?)
}

pub fn apply_budget(settings: &mut Settings, selection_fraction: Option<f64>) {
    if let Some(s) = selection_fraction {
        settings.budget.selection_fraction = s;
    }
}

pub fn gen_desk_data(run: &mut Run, args: &GenDeskArgs) -> anyhow::Result<()> {
    let records = args.records.unwrap_or(run.settings().experiment.desk_records);
    let seed = run.settings().seed;
    run.derived_seed("desk_seed", seed);
    let data = generate_desk_dataset(&DeskConfig { records, seed })?;
    run.output("data.csv", csv_bytes(&data)?);
    run.output("schema.json", data.schema().to_json());
    Ok(())
}

pub fn synth(run: &mut Run, args: &SynthArgs) -> anyhow::Result<()> {
    let schema = load_schema(run, &args.schema)?;
    let train = load_data(run, &args.data, &schema, Households::Drop)?;
    if args.rows == 0 {
        return Err(Invalid("--rows must be positive".into()).into());
    }
    let settings = run.settings().clone();
    let kind: GeneratorKind = args.generator.into();
    let budget = budget(&settings, args.budget.eps)?;
    let rng = RandomSource::new(settings.seed, 0).fork("synth");
    let model = FittedModel::fit(kind, &train, &budget, &settings.generator_config(), &mut rng.fork("fit"))?;
    let synth = model.sample(args.rows, &mut rng.fork("sample"))?;
    run.output("model.json", model.to_json());
    run.output("synthetic.csv", csv_bytes(&synth)?);
    Ok(())
}

pub fn shadow(run: &mut Run, args: &ShadowArgs) -> anyhow::Result<()> {
    let schema = load_schema(run, &args.schema)?;
    let aux = load_data(run, &args.aux, &schema, Households::Drop)?;
    let settings = run.settings().clone();
    let config = ShadowConfig {
        generator: args.generator.into(),
        budget: budget(&settings, args.budget.eps)?,
        runs: settings.shadow.runs,
        train_sample_size: settings.shadow.train_size.unwrap_or(aux.n_rows().min(10_000)),
        base_seed: settings.seed,
        fixed_sample: settings.shadow.fixed_sample,
        generator_config: settings.generator_config(),
    };
    run.derived_seed("shadow_base_seed", config.base_seed);
    let weights = run_shadow(&aux, &config)?;
    let text = weights.to_json();
    if FocalPointWeights::from_json(&text)? != weights {
        anyhow::bail!("weights did not survive serialization");
    }
    run.output("weights.json", text);
    Ok(())
}

pub fn attack(run: &mut Run, args: &AttackArgs) -> anyhow::Result<()> {
    let schema = load_schema(run, &args.schema)?;
    let synth = load_data(run, &args.synth, &schema, Households::Drop)?;
    let aux = load_data(run, &args.aux, &schema, Households::Drop)?;
    let records = load_data(run, &args.candidates, &schema, Households::Required)?;
    let weights_text = String::from_utf8(run.read_input(&args.weights)?)
        .map_err(|_| Invalid(format!("{} is not UTF-8", args.weights.display())))?;
    let weights = FocalPointWeights::from_json(&weights_text)?;
    let candidates = CandidateSet::new(records, args.min_household_size)?;
    let result = run_attack(&synth, &aux, &weights, &candidates, &run.settings().attack)?;

    let mut predictions = String::from("household_id,probability\n");
    for (id, p) in &result.prob_per_household {
        writeln!(predictions, "{id},{p}")?;
    }
    run.output("predictions.csv", predictions);
    if args.dump_records {
        let ids = candidates.records().household_ids().expect("candidates carry household ids");
        let mut dump = String::from("row,household_id,lambda,probability\n");
        for (row, ((l, p), id)) in result.lambda_per_record.iter().zip(&result.prob_per_record).zip(ids).enumerate() {
            writeln!(dump, "{row},{id},{l},{p}")?;
        }
        run.output("records.csv", dump);
    }
    Ok(())
}

fn parse_column_pairs(bytes: &[u8], path: &Path, value_column: &str) -> anyhow::Result<Vec<(u64, String)>> {
    let invalid = |msg: String| Invalid(format!("{}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| invalid(format!("missing column {name}")))
    };
    let (id_col, value_col) = (find(HOUSEHOLD_COLUMN)?, find(value_column)?);
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let id = record
            .get(id_col)
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| invalid(format!("line {line}: bad {HOUSEHOLD_COLUMN}")))?;
        let value = record
            .get(value_col)
            .ok_or_else(|| invalid(format!("line {line}: missing {value_column}")))?;
        out.push((id, value.to_string()));
    }
    Ok(out)
}

#[derive(Serialize)]
struct Metrics {
    membership_advantage: f64,
    auc: f64,
    households: usize,
    members: usize,
}

pub fn eval(run: &mut Run, args: &EvalArgs) -> anyhow::Result<()> {
    let pred_bytes = run.read_input(&args.predictions)?;
    let truth_bytes = run.read_input(&args.truth)?;
    let mut predictions = BTreeMap::new();
    for (id, v) in parse_column_pairs(&pred_bytes, &args.predictions, "probability")? {
        let p: f64 = v
            .parse()
            .map_err(|_| Invalid(format!("{}: bad probability {v:?}", args.predictions.display())))?;
        if predictions.insert(id, p).is_some() {
            return Err(Invalid(format!("duplicate prediction for household {id}")).into());
        }
    }
    let mut members = BTreeSet::new();
    let mut all = BTreeSet::new();
    for (id, v) in parse_column_pairs(&truth_bytes, &args.truth, "member")? {
        let member = match v.to_ascii_lowercase().as_str() {
            "1" | "true" => true,
            "0" | "false" => false,
            _ => return Err(Invalid(format!("{}: bad member flag {v:?}", args.truth.display())).into()),
        };
        all.insert(id);
        if member {
            members.insert(id);
        }
    }
    let truth = GroundTruth::new(members, all)?;
    let metrics = Metrics {
        membership_advantage: membership_advantage(&predictions, &truth)?,
        auc: auc(&predictions, &truth)?,
        households: truth.candidates().len(),
        members: truth.members().len(),
    };
    run.output("metrics.json", serde_json::to_string_pretty(&metrics)?);
    Ok(())
}

pub fn apply_experiment(settings: &mut Settings, args: &ExperimentArgs) {
    let e = &mut settings.experiment;
    if !args.generators.is_empty() {
        e.generators = args.generators.iter().map(|&g| g.into()).collect();
    }
    if !args.epsilons.is_empty() {
        e.epsilons = args.epsilons.clone();
    }
    let overrides = [
        (&mut e.trials, args.trials),
        (&mut e.n_candidates, args.n_candidates),
        (&mut e.n_members, args.n_members),
        (&mut e.train_fill_size, args.train_fill_size),
        (&mut e.synth_rows, args.synth_rows),
        (&mut e.desk_records, args.desk_records),
        (&mut settings.shadow.runs, args.shadow_runs),
    ];
    for (slot, value) in overrides {
        if let Some(v) = value {
            *slot = v;
        }
    }
}

pub fn experiment(run: &mut Run, args: &ExperimentArgs) -> anyhow::Result<()> {
    let settings = run.settings().clone();
    let config = settings.experiment_config();
    config.validate()?;
    let aux = match (&args.aux, &args.schema) {
        (Some(aux), Some(schema)) => {
            let schema = load_schema(run, schema)?;
            load_data(run, aux, &schema, Households::Required)?
        }
        (None, _) => generate_desk_dataset(&DeskConfig {
            records: settings.experiment.desk_records,
            seed: settings.seed,
        })
        .context("generating desk data")?,
        (Some(_), None) => return Err(Invalid("--aux needs --schema".into()).into()),
    };
    let result = run_experiment(&aux, &config)?;
    let plots = PlotFiles::from_result(&result);
    run.output("report.json", result.to_json());
    run.output(PlotFiles::MA_VS_EPSILON, plots.ma_vs_epsilon);
    run.output(PlotFiles::FOCAL_POINT_FREQUENCY, plots.focal_point_frequency);
    run.output(PlotFiles::PARENT_SIZE_FREQUENCY, plots.parent_size_frequency);
    Ok(())
}
