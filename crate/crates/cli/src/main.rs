mod args;
mod commands;
mod config;
mod output;
mod verify;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use config::{ConfigError, Mode};

/// How a subcommand failed, which fixes the exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad configuration or input (exit 2).
    Config(ConfigError),
    /// Quadrature ran out of evaluations (exit 3).
    Budget(String),
    /// One or more checks or sweep rows failed (exit 1).
    Checks(String),
    /// Anything else (exit 1).
    Runtime(anyhow::Error),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Budget(_) => 3,
            Failure::Checks(_) | Failure::Runtime(_) => 1,
        }
    }
}

fn run_verify(a: &args::VerifyArgs) -> Result<(), Failure> {
    let settings = commands::settings_for(&a.common, Mode::Single)?;
    if let Some(p) = a.perturb.as_deref() {
        if !verify::CHECK_NAMES.contains(&p) {
            return Err(Failure::Config(ConfigError(format!(
                "invalid `perturb`: unknown check {p:?}, expected one of {}",
                verify::CHECK_NAMES.join(", ")
            ))));
        }
    }
    let count = a.count.unwrap_or(settings.count);
    if count == 0 {
        return Err(Failure::Config(ConfigError(
            "invalid `count`: must be at least 1".into(),
        )));
    }
    eprintln!("verify: seed {}", settings.seed);
    let results = verify::run_checks(settings.seed, count, a.perturb.as_deref());
    let table = verify::table(&results, settings.seed);
    output::emit(settings.out.as_deref(), &table.render(settings.format))
        .map_err(Failure::Runtime)?;
    let failed: Vec<&str> = results.iter().filter(|r| !r.pass).map(|r| r.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Checks(format!(
            "failed checks: {} (reproduce with --seed {})",
            failed.join(", "),
            settings.seed
        )))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Phase(a) => commands::run_phase(&commands::settings_for(a, Mode::Single)?),
        Command::Sweep(a) => commands::run_sweep(&commands::settings_for(a, Mode::Grid)?),
        Command::Verify(a) => run_verify(a),
        Command::Expm(a) => {
            commands::run_expm(&commands::settings_for(&a.common, Mode::Single)?, a)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(e) => eprintln!("configuration error: {e}"),
                Failure::Budget(msg) => eprintln!("error: {msg}"),
                Failure::Checks(msg) => eprintln!("{msg}"),
                Failure::Runtime(e) => eprintln!("error: {e:#}"),
            }
            ExitCode::from(f.exit_code())
        }
    }
}
