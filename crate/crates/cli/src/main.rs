mod args;
mod eval;
mod prepare;
mod records;
mod train_cmd;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::Parser;
use sentifuse_core::gradcheck::{run_suite, GradCheckConfig};

use args::{Cli, Command, GlobalOpts};

const GRADCHECK_SEEDS: u64 = 20;

pub(crate) fn require<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| anyhow!("{flag} is required for this command"))
}

fn gradcheck(opts: &GlobalOpts) -> Result<bool> {
    let first = opts.seed.unwrap_or(0);
    let seeds: Vec<u64> = (first..first + GRADCHECK_SEEDS).collect();
    let cfg = GradCheckConfig {
        fault: opts.fault,
        ..Default::default()
    };
    let report = run_suite(&seeds, &cfg)?;
    for c in report.failures() {
        println!(
            "FAIL {} seed {}: relative error {:.3e}",
            c.name,
            c.seed,
            c.report.max_rel_diff()
        );
    }
    println!(
        "{} checks over {} seeds, worst relative error {:.3e} (tolerance {:e})",
        report.cases.len(),
        seeds.len(),
        report.worst_rel_diff(),
        cfg.tolerance
    );
    Ok(report.passed())
}

fn run(cli: &Cli) -> Result<bool> {
    match cli.command {
        Command::Prepare => prepare::run(&cli.opts)?,
        Command::Train => train_cmd::run(&cli.opts)?,
        Command::Eval => eval::run_eval(&cli.opts)?,
        Command::Project => eval::run_project(&cli.opts)?,
        Command::Gradcheck => return gradcheck(&cli.opts),
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
