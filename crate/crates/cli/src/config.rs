//! Command-line surface and the validated run configuration.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "ecsmetro",
    version,
    about = "Phase-estimation sweeps for NOON, BAT and entangled coherent states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Fock levels kept per mode.
    #[arg(long, global = true, default_value_t = 16)]
    pub cutoff: usize,
    /// Number of repetitions in the Cramér–Rao bound.
    #[arg(long, global = true, default_value_t = 1)]
    pub mu: u32,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Raise the cutoff per row until the truncation budget is met.
    #[arg(long, global = true)]
    pub auto_cutoff: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StateArg {
    Noon,
    Bat,
    Ecs,
    Scs,
    Uncorrelated,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Lossless bounds for NOON, BAT and ECS probes.
    PureSweep {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        n_values: Vec<u32>,
        /// Fixed ECS amplitude instead of matching ⟨n₁⟩ = N/2.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Bounds under equal loss on both arms.
    LossSweep {
        #[arg(long, default_value_t = 4)]
        n: u32,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5,0.55,0.6,0.65,0.7,0.75,0.8,0.85,0.9,0.95,1"
        )]
        t_values: Vec<f64>,
    },
    /// Parity-readout uncertainty of the ECS.
    ParitySweep {
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,1.5,2")]
        alpha_values: Vec<f64>,
        /// Samples of ⟨Π₂⟩(φ) on [0, π] per amplitude; 0 disables the curve.
        #[arg(long, default_value_t = 0)]
        curve_points: usize,
    },
    /// JSON report on a single probe.
    StateInfo {
        #[arg(long, value_enum)]
        state: StateArg,
        #[arg(long, default_value_t = 4)]
        n: u32,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
    },
    /// ECS amplitudes matching ⟨n₁⟩ = N/2.
    ResourceMatch {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8")]
        n_values: Vec<u32>,
    },
}

/// Everything a run depends on, echoed into JSON output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub cutoff: usize,
    pub mu: u32,
    pub format: Format,
    pub auto_cutoff: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub n_values: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub alpha_values: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub t_values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<StateArg>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn finite_nonnegative(name: &str, v: f64) -> Result<(), CliError> {
    if !v.is_finite() || v < 0.0 {
        return Err(invalid(format!(
            "{name} must be finite and non-negative, got {v}"
        )));
    }
    Ok(())
}

impl RunConfig {
    fn base(command: &'static str, common: &CommonArgs) -> Self {
        Self {
            command,
            cutoff: common.cutoff,
            mu: common.mu,
            format: common.format,
            auto_cutoff: common.auto_cutoff,
            n_values: Vec::new(),
            alpha: None,
            alpha_values: Vec::new(),
            t_values: Vec::new(),
            curve_points: None,
            state: None,
            out: common.out.clone(),
        }
    }

    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let c = &cli.common;
        let cfg = match &cli.command {
            Command::PureSweep { n_values, alpha } => Self {
                n_values: n_values.clone(),
                alpha: *alpha,
                ..Self::base("pure-sweep", c)
            },
            Command::LossSweep { n, alpha, t_values } => Self {
                n_values: vec![*n],
                alpha: Some(*alpha),
                t_values: t_values.clone(),
                ..Self::base("loss-sweep", c)
            },
            Command::ParitySweep {
                alpha_values,
                curve_points,
            } => Self {
                alpha_values: alpha_values.clone(),
                curve_points: Some(*curve_points),
                ..Self::base("parity-sweep", c)
            },
            Command::StateInfo { state, n, alpha } => Self {
                n_values: vec![*n],
                alpha: Some(*alpha),
                state: Some(*state),
                ..Self::base("state-info", c)
            },
            Command::ResourceMatch { n_values } => Self {
                n_values: n_values.clone(),
                ..Self::base("resource-match", c)
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.cutoff < 2 {
            return Err(invalid(format!(
                "cutoff must be at least 2, got {}",
                self.cutoff
            )));
        }
        if self.mu == 0 {
            return Err(invalid("mu must be at least 1"));
        }
        let photon_grid = matches!(self.command, "pure-sweep" | "loss-sweep" | "resource-match");
        if photon_grid && self.n_values.is_empty() {
            return Err(invalid("N grid is empty"));
        }
        if self.n_values.contains(&0) {
            return Err(invalid("N must be at least 1"));
        }
        let needs_fock = self.command != "resource-match"
            && !(self.command == "state-info"
                && matches!(self.state, Some(StateArg::Ecs | StateArg::Scs)));
        if needs_fock && !self.auto_cutoff {
            if let Some(&max_n) = self.n_values.iter().max() {
                if self.cutoff < max_n as usize + 1 {
                    return Err(invalid(format!(
                        "cutoff {} cannot hold N = {max_n}; need at least {}",
                        self.cutoff,
                        max_n + 1
                    )));
                }
            }
        }
        if let Some(a) = self.alpha {
            finite_nonnegative("alpha", a)?;
        }
        if self.command == "parity-sweep" && self.alpha_values.is_empty() {
            return Err(invalid("alpha grid is empty"));
        }
        for &a in &self.alpha_values {
            finite_nonnegative("alpha", a)?;
        }
        if self.command == "loss-sweep" {
            if self.t_values.is_empty() {
                return Err(invalid("T grid is empty"));
            }
            if let Some(t) = self.t_values.iter().find(|t| !(0.0..=1.0).contains(*t)) {
                return Err(invalid(format!("T must lie in [0, 1], got {t}")));
            }
        }
        Ok(())
    }
}
