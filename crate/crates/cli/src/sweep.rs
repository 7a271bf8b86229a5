//! Grid evaluation for each subcommand.
//!
//! Grid points are computed in parallel and collected in grid order, so the
//! emitted rows do not depend on scheduling.

use rayon::prelude::*;
use serde_json::{Map, Value};

use ecsmetro_core::channels::{
    apply_loss_both_modes, ecs_lossy_closed_form, phase_shift, verification_cutoff, PhaseSpec,
};
use ecsmetro_core::fock::{cutoff_for_coherent, Cutoff, Mode, OperatorMatrix, TwoModeState};
use ecsmetro_core::metrology::{
    commutator_derivative, default_generator, lossy_qfi, optimize_parity_uncertainty,
    parity_expectation_closed, qfi_mixed, qfi_pure, qfi_pure_ecs_closed, ParityCurve, QfiResult,
    WORKING_PHASE,
};
use ecsmetro_core::states::{
    alpha_for_mean_photons, ecs_mean_photons, make_ecs, scs_normalizer, ProbeKind, ProbeSpec,
};
use ecsmetro_core::TAIL_LIMIT;

use crate::config::{RunConfig, StateArg};
use crate::output::{json_float, Cell, Table};
use crate::CliError;

/// Largest entrywise gap tolerated between the two lossy-ECS constructions.
pub const AGREEMENT_TOL: f64 = 1e-8;

pub const SWEEP_HEADER: [&str; 9] = [
    "state",
    "N",
    "alpha",
    "T",
    "F",
    "delta_phi",
    "method",
    "spectrum_cut",
    "tail_mass",
];

/// One bound on disk.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub state: ProbeKind,
    pub n: Option<u32>,
    pub alpha: Option<f64>,
    pub t: f64,
    pub result: QfiResult,
    pub tail_mass: f64,
}

impl SweepRow {
    pub fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::text(self.state.name()),
            Cell::opt_int(self.n),
            Cell::opt_float(self.alpha),
            Cell::Float(self.t),
            Cell::Float(self.result.fisher),
            Cell::Float(self.result.delta_phi),
            Cell::text(self.result.method.tag()),
            Cell::Int(self.result.spectrum_cut as u64),
            Cell::Float(self.tail_mass),
        ]
    }
}

fn header(extra: &[&'static str]) -> Vec<&'static str> {
    SWEEP_HEADER.iter().chain(extra).copied().collect()
}

/// Rows plus the number of rows that failed an internal cross-check.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutput {
    pub table: Table,
    pub failures: usize,
}

pub(crate) fn photon_cutoff(cfg: &RunConfig, n: u32) -> Result<Cutoff, CliError> {
    let dim = if cfg.auto_cutoff {
        cfg.cutoff.max(n as usize + 1)
    } else {
        cfg.cutoff
    };
    Ok(Cutoff::new(dim)?)
}

pub(crate) fn coherent_cutoff(cfg: &RunConfig, alpha: f64) -> Result<Cutoff, CliError> {
    let base = Cutoff::new(cfg.cutoff)?;
    Ok(if cfg.auto_cutoff {
        cutoff_for_coherent(alpha * alpha, TAIL_LIMIT).max(base)
    } else {
        base
    })
}

fn pure_row(
    cfg: &RunConfig,
    kind: ProbeKind,
    n: u32,
    alpha: Option<f64>,
) -> Result<SweepRow, CliError> {
    let cutoff = match alpha {
        Some(a) => coherent_cutoff(cfg, a)?,
        None => photon_cutoff(cfg, n)?,
    };
    let spec = match kind {
        ProbeKind::Noon => ProbeSpec::noon(n, cutoff),
        ProbeKind::Bat => ProbeSpec::bat(n, cutoff),
        _ => ProbeSpec::ecs(alpha.unwrap_or(0.0), cutoff),
    };
    let state = spec.build()?.state().clone();
    let result = qfi_pure(&state, &default_generator(cutoff))?.with_mu(cfg.mu)?;
    Ok(SweepRow {
        state: kind,
        n: Some(n),
        alpha,
        t: 1.0,
        result,
        tail_mass: state.tail_mass(),
    })
}

/// `(kind, N, α)` for every row of one N of the lossless sweep.
fn pure_jobs(cfg: &RunConfig, n: u32) -> Vec<(ProbeKind, u32, Option<f64>)> {
    let alpha = cfg
        .alpha
        .unwrap_or_else(|| alpha_for_mean_photons(n as f64 / 2.0));
    let mut jobs = vec![(ProbeKind::Noon, n, None)];
    if n.is_multiple_of(2) {
        jobs.push((ProbeKind::Bat, n, None));
    }
    jobs.push((ProbeKind::Ecs, n, Some(alpha)));
    jobs
}

/// Lossless bounds; ECS rows also carry the optimized parity uncertainty.
pub fn run_pure_sweep(cfg: &RunConfig) -> Result<SweepOutput, CliError> {
    let jobs: Vec<_> = cfg
        .n_values
        .iter()
        .flat_map(|&n| pure_jobs(cfg, n))
        .collect();
    let rows: Vec<(SweepRow, Option<f64>)> = jobs
        .par_iter()
        .map(|&(kind, n, alpha)| {
            let row = pure_row(cfg, kind, n, alpha)?;
            let parity = match (kind, alpha) {
                (ProbeKind::Ecs, Some(a)) => optimize_parity_uncertainty(a).ok().map(|(_, d)| d),
                _ => None,
            };
            Ok((row, parity))
        })
        .collect::<Result<_, CliError>>()?;
    let mut table = Table::new(header(&["parity_delta_phi"]));
    for (row, parity) in rows {
        let mut cells = row.cells();
        cells.push(Cell::opt_float(parity));
        table.push(cells);
    }
    Ok(SweepOutput { table, failures: 0 })
}

/// Max entrywise gap between the closed-form lossy ECS and the Kraus sum,
/// evaluated on a cutoff where both are converged.
pub fn ecs_agreement(alpha: f64, t: f64, cutoff: Cutoff) -> Result<f64, CliError> {
    let c = verification_cutoff(alpha, cutoff);
    let closed = ecs_lossy_closed_form(alpha, t, WORKING_PHASE, c)?;
    let input = phase_shift(&make_ecs(alpha, c)?, &PhaseSpec::linear(WORKING_PHASE));
    let kraus = apply_loss_both_modes(&input, t)?;
    Ok(closed.rho.max_abs_diff(&kraus)?)
}

fn lossy_ecs_row(cfg: &RunConfig, n: u32, alpha: f64, t: f64) -> Result<(SweepRow, f64), CliError> {
    let cutoff = coherent_cutoff(cfg, alpha)?;
    let closed = ecs_lossy_closed_form(alpha, t, WORKING_PHASE, cutoff)?;
    let drho = commutator_derivative(&closed.rho, 1);
    let result = qfi_mixed(&closed.rho, &drho, None)?.with_mu(cfg.mu)?;
    let agreement = ecs_agreement(alpha, t, cutoff)?;
    let row = SweepRow {
        state: ProbeKind::Ecs,
        n: Some(n),
        alpha: Some(alpha),
        t,
        result,
        tail_mass: closed.rho.tail_mass(),
    };
    Ok((row, agreement))
}

fn lossy_photon_row(
    cfg: &RunConfig,
    kind: ProbeKind,
    n: u32,
    t: f64,
) -> Result<SweepRow, CliError> {
    let cutoff = photon_cutoff(cfg, n)?;
    let spec = match kind {
        ProbeKind::Noon => ProbeSpec::noon(n, cutoff),
        ProbeKind::Bat => ProbeSpec::bat(n, cutoff),
        _ => ProbeSpec::uncorrelated(n, cutoff),
    };
    let result = lossy_qfi(&spec, t, cfg.mu)?;
    Ok(SweepRow {
        state: kind,
        n: Some(n),
        alpha: None,
        t,
        result,
        tail_mass: 0.0,
    })
}

/// NOON, BAT, ECS and uncorrelated bounds across the transmissivity grid.
pub fn run_loss_sweep(cfg: &RunConfig) -> Result<SweepOutput, CliError> {
    let n = cfg.n_values[0];
    let alpha = cfg.alpha.unwrap_or(2.0);
    let mut kinds = vec![ProbeKind::Noon];
    if n.is_multiple_of(2) {
        kinds.push(ProbeKind::Bat);
    }
    kinds.extend([ProbeKind::Ecs, ProbeKind::Uncorrelated]);
    let jobs: Vec<(ProbeKind, f64)> = kinds
        .iter()
        .flat_map(|&k| cfg.t_values.iter().map(move |&t| (k, t)))
        .collect();
    let rows: Vec<(SweepRow, Option<f64>)> = jobs
        .par_iter()
        .map(|&(kind, t)| match kind {
            ProbeKind::Ecs => lossy_ecs_row(cfg, n, alpha, t).map(|(r, a)| (r, Some(a))),
            _ => lossy_photon_row(cfg, kind, n, t).map(|r| (r, None)),
        })
        .collect::<Result<_, CliError>>()?;
    let mut table = Table::new(header(&["agreement"]));
    let mut failures = 0;
    for (row, agreement) in rows {
        if agreement.is_some_and(|a| a.is_nan() || a >= AGREEMENT_TOL) {
            failures += 1;
        }
        let mut cells = row.cells();
        cells.push(Cell::opt_float(agreement));
        table.push(cells);
    }
    Ok(SweepOutput { table, failures })
}

pub const PARITY_HEADER: [&str; 7] = [
    "alpha",
    "kind",
    "phi",
    "expectation",
    "delta_phi_pm",
    "qfi_delta_phi",
    "degenerate",
];

/// Optimized parity uncertainty per amplitude, optionally followed by the sampled curve.
pub fn run_parity_sweep(cfg: &RunConfig) -> Result<SweepOutput, CliError> {
    let points = cfg.curve_points.unwrap_or(0);
    let curves: Vec<ParityCurve> = cfg
        .alpha_values
        .par_iter()
        .map(|&a| ParityCurve::compute(a, points))
        .collect();
    let mut table = Table::new(PARITY_HEADER.to_vec());
    for curve in curves {
        let a = curve.alpha;
        let qfi = qfi_pure_ecs_closed(a).delta_phi;
        match curve.minimum {
            Some((phi, best)) => table.push(vec![
                Cell::Float(a),
                Cell::text("optimum"),
                Cell::Float(phi),
                Cell::Float(parity_expectation_closed(a, phi)),
                Cell::Float(best),
                Cell::Float(qfi),
                Cell::Bool(false),
            ]),
            None => table.push(vec![
                Cell::Float(a),
                Cell::text("optimum"),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Float(qfi),
                Cell::Bool(true),
            ]),
        }
        for s in &curve.samples {
            table.push(vec![
                Cell::Float(a),
                Cell::text("sample"),
                Cell::Float(s.phi),
                Cell::Float(s.expectation),
                Cell::opt_float(s.uncertainty),
                Cell::Empty,
                Cell::Bool(curve.minimum.is_none()),
            ]);
        }
    }
    Ok(SweepOutput { table, failures: 0 })
}

pub const RESOURCE_HEADER: [&str; 5] = ["N", "target_mean_n1", "alpha", "mean_n1", "residual"];

/// ECS amplitude with `⟨n₁⟩ = N/2` for each N.
pub fn run_resource_match(cfg: &RunConfig) -> Result<SweepOutput, CliError> {
    let mut table = Table::new(RESOURCE_HEADER.to_vec());
    for &n in &cfg.n_values {
        let target = n as f64 / 2.0;
        let alpha = alpha_for_mean_photons(target);
        let mean = ecs_mean_photons(alpha);
        table.push(vec![
            Cell::Int(n as u64),
            Cell::Float(target),
            Cell::Float(alpha),
            Cell::Float(mean),
            Cell::Float(mean - target),
        ]);
    }
    Ok(SweepOutput { table, failures: 0 })
}

/// Resources, normalizer, truncation and support of one probe.
pub fn run_state_info(cfg: &RunConfig) -> Result<Map<String, Value>, CliError> {
    let state = cfg
        .state
        .ok_or_else(|| CliError::Config("state-info needs --state".into()))?;
    let n = cfg.n_values.first().copied().unwrap_or(4);
    let alpha = cfg.alpha.unwrap_or(2.0);
    let (kind, coherent) = match state {
        StateArg::Noon => (ProbeKind::Noon, false),
        StateArg::Bat => (ProbeKind::Bat, false),
        StateArg::Ecs => (ProbeKind::Ecs, true),
        StateArg::Scs => (ProbeKind::Scs, true),
        StateArg::Uncorrelated => (ProbeKind::Uncorrelated, false),
    };
    let cutoff = if coherent {
        coherent_cutoff(cfg, alpha)?
    } else {
        photon_cutoff(cfg, n)?
    };
    let spec = ProbeSpec {
        kind,
        n,
        alpha,
        cutoff,
    };
    let probe = spec.build()?;
    let s = probe.state();
    let n2 = s
        .expectation(&OperatorMatrix::number(cutoff, Mode::Two))?
        .re
        * probe.copies() as f64;
    let normalizer = match kind {
        ProbeKind::Ecs => json_float(spec.ecs_normalizer()),
        ProbeKind::Scs => json_float(scs_normalizer(alpha)),
        _ => Value::Null,
    };

    let mut report = Map::new();
    report.insert("state".into(), Value::from(kind.name()));
    if coherent {
        report.insert("alpha".into(), json_float(alpha));
    } else {
        report.insert("N".into(), Value::from(n));
    }
    report.insert("cutoff".into(), Value::from(cutoff.dim()));
    report.insert("copies".into(), Value::from(probe.copies()));
    report.insert("mean_n1".into(), json_float(probe.mean_photon_mode1()));
    report.insert("mean_n2".into(), json_float(n2));
    report.insert("normalizer".into(), normalizer);
    report.insert("tail_mass".into(), json_float(s.tail_mass()));
    report.insert("boundary_mass".into(), json_float(s.boundary_mass()));
    report.insert("support_size".into(), Value::from(s.support_size(1e-15)));
    let qfi = qfi_pure(s, &default_generator(cutoff))?
        .scaled(probe.copies())
        .with_mu(cfg.mu)?;
    report.insert("F".into(), json_float(qfi.fisher));
    report.insert("delta_phi".into(), json_float(qfi.delta_phi));
    Ok(report)
}
