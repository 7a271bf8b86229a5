//! Deterministic sweep tables and probe reports on top of `ecsmetro-core`.

pub mod config;
pub mod output;
pub mod sweep;

use std::fs::File;
use std::io::{self, BufWriter, Write};

use thiserror::Error;

use crate::config::{Cli, Format, RunConfig};
use crate::sweep::SweepOutput;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] ecsmetro_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Process exit status for a successful run with failing cross-checks.
pub const EXIT_AGREEMENT: u8 = 2;
pub const EXIT_INVALID: u8 = 1;

/// Tables and reports produced by a run.
pub enum RunOutput {
    Table(SweepOutput),
    Report(serde_json::Map<String, serde_json::Value>),
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    Ok(match cfg.command {
        "pure-sweep" => RunOutput::Table(sweep::run_pure_sweep(cfg)?),
        "loss-sweep" => RunOutput::Table(sweep::run_loss_sweep(cfg)?),
        "parity-sweep" => RunOutput::Table(sweep::run_parity_sweep(cfg)?),
        "resource-match" => RunOutput::Table(sweep::run_resource_match(cfg)?),
        "state-info" => RunOutput::Report(sweep::run_state_info(cfg)?),
        other => return Err(CliError::Config(format!("unknown command {other}"))),
    })
}

/// Writes `output` in the configured format and returns the exit status.
pub fn emit<W: Write>(cfg: &RunConfig, output: &RunOutput, out: W) -> Result<u8, CliError> {
    match output {
        RunOutput::Table(t) => {
            match cfg.format {
                Format::Csv => output::write_csv(&t.table, out)?,
                Format::Json => output::write_json(cfg, &t.table, out)?,
            }
            Ok(if t.failures > 0 { EXIT_AGREEMENT } else { 0 })
        }
        // reports are JSON in either format
        RunOutput::Report(r) => {
            output::write_report(cfg, r.clone(), out)?;
            Ok(0)
        }
    }
}

pub fn execute(cli: &Cli) -> Result<u8, CliError> {
    let cfg = RunConfig::from_cli(cli)?;
    let result = run(&cfg)?;
    let status = match &cfg.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            let status = emit(&cfg, &result, &mut w)?;
            w.flush()?;
            status
        }
        None => emit(&cfg, &result, io::stdout().lock())?,
    };
    if let RunOutput::Table(t) = &result {
        if t.failures > 0 {
            eprintln!("{} row(s) failed the internal agreement check", t.failures);
        }
    }
    Ok(status)
}
