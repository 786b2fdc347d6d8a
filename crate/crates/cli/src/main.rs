mod args;
mod commands;
mod config;
mod manifest;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::config::Settings;
use crate::manifest::Run;

/// Bad user input: reported with exit code 1.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

fn is_validation(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.is::<Invalid>()
            || e.downcast_ref::<focalpoint::Error>().is_some_and(focalpoint::Error::is_validation)
    })
}

fn resolve(cli: &Cli) -> anyhow::Result<Settings> {
    let mut settings = match &cli.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    if let Some(seed) = cli.seed {
        settings.seed = seed;
    }
    if let Some(workers) = cli.workers {
        settings.workers = workers;
    }
    match &cli.command {
        Command::Synth(a) => commands::apply_budget(&mut settings, a.budget.selection_fraction),
        Command::Shadow(a) => {
            commands::apply_budget(&mut settings, a.budget.selection_fraction);
            if let Some(runs) = a.runs {
                settings.shadow.runs = runs;
            }
            if a.train_size.is_some() {
                settings.shadow.train_size = a.train_size;
            }
            settings.shadow.fixed_sample |= a.fixed_sample;
        }
        Command::Attack(a) => {
            let attack = &mut settings.attack;
            if let Some(mode) = a.activation {
                attack.activation.mode = mode.into();
            }
            if let Some(c) = a.c {
                attack.activation.c = c;
            }
            if a.m.is_some() {
                attack.activation.m = a.m;
            }
            if let Some(s) = a.smoothing {
                attack.smoothing = s;
            }
            if let Some(w) = a.min_weight {
                attack.min_weight = w;
            }
        }
        Command::Experiment(a) => commands::apply_experiment(&mut settings, a),
        Command::GenDeskData(_) | Command::Eval(_) => {}
    }
    Ok(settings)
}

fn execute(cli: Cli, argv: Vec<String>) -> anyhow::Result<()> {
    let settings = resolve(&cli)?;
    let workers = settings.workers;
    let (name, out_dir) = match &cli.command {
        Command::GenDeskData(a) => ("gen-desk-data", &a.out.out_dir),
        Command::Synth(a) => ("synth", &a.out.out_dir),
        Command::Shadow(a) => ("shadow", &a.out.out_dir),
        Command::Attack(a) => ("attack", &a.out.out_dir),
        Command::Eval(a) => ("eval", &a.out.out_dir),
        Command::Experiment(a) => ("experiment", &a.out.out_dir),
    };
    let mut run = Run::new(name, argv, settings);
    focalpoint::with_workers(workers, || match &cli.command {
        Command::GenDeskData(a) => commands::gen_desk_data(&mut run, a),
        Command::Synth(a) => commands::synth(&mut run, a),
        Command::Shadow(a) => commands::shadow(&mut run, a),
        Command::Attack(a) => commands::attack(&mut run, a),
        Command::Eval(a) => commands::eval(&mut run, a),
        Command::Experiment(a) => commands::experiment(&mut run, a),
    })??;
    run.finish(out_dir)?;
    Ok(())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_validation(&e) { EXIT_VALIDATION } else { EXIT_RUNTIME })
        }
    }
}
