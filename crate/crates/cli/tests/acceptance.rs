//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::{PI, SQRT_2};
use std::process::{Command, ExitCode};
use std::time::Instant;

use ecsmetro_core::channels::{
    apply_loss_both_modes, ecs_lossy_closed_form, phase_shift, verification_cutoff, PhaseSpec,
};
use ecsmetro_core::fock::{cutoff_for_coherent, observable_moments, Cutoff, Mode, OperatorMatrix};
use ecsmetro_core::metrology::{
    bat_pure_fisher, commutator_derivative, default_generator, drho_dphi, lossy_qfi,
    noon_lossy_fisher, optimize_parity_uncertainty, parity_expectation_closed,
    parity_expectation_numeric, qfi_mixed, qfi_pure, qfi_pure_ecs_closed,
    uncorrelated_lossy_fisher, DerivativeMethod, PhaseRecipe,
};
use ecsmetro_core::states::{
    alpha_for_mean_photons, make_bat, make_ecs, make_noon, mean_photon_mode1, prepare_ecs_via_bs,
    ProbeSpec,
};
use ecsmetro_core::CMatrix;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn dim16() -> Cutoff {
    Cutoff::default()
}

fn dim(d: usize) -> Cutoff {
    Cutoff::new(d).unwrap()
}

/// {0.05, 0.10, …, 0.95}
fn t_grid() -> Vec<f64> {
    (1..=19).map(|k| k as f64 * 0.05).collect()
}

fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn lossy_ecs_delta(alpha: f64, t: f64, cutoff: Cutoff) -> f64 {
    let d = ecs_lossy_closed_form(alpha, t, 0.3, cutoff).unwrap();
    qfi_mixed(&d.rho, &commutator_derivative(&d.rho, 1), None)
        .unwrap()
        .delta_phi
}

fn ac1_noon_pure() -> Outcome {
    let s = make_noon(4, dim16()).unwrap();
    let r = qfi_pure(&s, &default_generator(dim16())).unwrap();
    let vs_quarter = (r.delta_phi - 0.25).abs() / 0.25;
    let vs_heisenberg = (r.delta_phi - 1.0 / 4.0).abs() / 0.25;
    check(
        vs_quarter < 1e-10 && vs_heisenberg < 1e-10,
        format!(
            "delta_phi = {:.15}, relative error {vs_quarter:.2e}",
            r.delta_phi
        ),
    )
}

fn ac2_bat_pure() -> Outcome {
    let r = qfi_pure(&make_bat(4, dim16()).unwrap(), &default_generator(dim16())).unwrap();
    let err = (r.delta_phi - 1.0 / 12f64.sqrt()).abs();
    let mut worst = 0.0f64;
    for n in [2u32, 4, 6, 8] {
        let s = make_bat(n, dim16()).unwrap();
        let (_, var) = observable_moments(&s, &OperatorMatrix::number(dim16(), Mode::Two)).unwrap();
        worst = worst.max((4.0 * var - bat_pure_fisher(n)).abs());
    }
    let rounded =
        format!("{:.6}", r.delta_phi) == "0.288675" && format!("{:.3}", r.delta_phi) == "0.289";
    check(
        err < 1e-8 && rounded && worst < 1e-10,
        format!("delta_phi = {:.10}, |delta_phi - 1/sqrt(12)| = {err:.2e}, max |4Var(n2) - N(N/2+1)| = {worst:.2e}", r.delta_phi),
    )
}

fn ac3_ecs_pure() -> Outcome {
    // numerics on a grid whose truncation is far below the comparison tolerance
    let c = cutoff_for_coherent(4.0, 1e-13);
    let numeric = qfi_pure(&make_ecs(2.0, c).unwrap(), &default_generator(c)).unwrap();
    let closed = qfi_pure_ecs_closed(2.0);
    let rel = (numeric.fisher - closed.fisher).abs() / closed.fisher;
    let round = format!("{:.3}", closed.delta_phi) == "0.205"
        && format!("{:.3}", numeric.delta_phi) == "0.205";
    let mean = mean_photon_mode1(&make_ecs(2.0, dim16()).unwrap());
    check(
        rel < 1e-8 && round && (mean - 1.964).abs() < 5e-4,
        format!(
            "dim {}: F closed {:.10} numeric {:.10} (rel {rel:.2e}), delta_phi {:.6}; <n1> = {mean:.6}",
            c.dim(),
            closed.fisher,
            numeric.fisher,
            closed.delta_phi
        ),
    )
}

fn reported_deltas(cutoff: Cutoff) -> Vec<(String, f64)> {
    let g = default_generator(cutoff);
    let mut out = Vec::new();
    for n in 1..=4u32 {
        out.push((
            format!("pure NOON N={n}"),
            qfi_pure(&make_noon(n, cutoff).unwrap(), &g)
                .unwrap()
                .delta_phi,
        ));
        if n % 2 == 0 {
            out.push((
                format!("pure BAT N={n}"),
                qfi_pure(&make_bat(n, cutoff).unwrap(), &g)
                    .unwrap()
                    .delta_phi,
            ));
        }
        let a = alpha_for_mean_photons(n as f64 / 2.0);
        out.push((
            format!("pure ECS alpha={a:.4}"),
            qfi_pure(&make_ecs(a, cutoff).unwrap(), &g)
                .unwrap()
                .delta_phi,
        ));
    }
    out.push((
        "pure ECS alpha=2".into(),
        qfi_pure(&make_ecs(2.0, cutoff).unwrap(), &g)
            .unwrap()
            .delta_phi,
    ));
    for t in t_grid() {
        out.push((
            format!("lossy ECS alpha=2 T={t:.2}"),
            lossy_ecs_delta(2.0, t, cutoff),
        ));
    }
    out
}

fn ac4_truncation_budget() -> Outcome {
    let tail = make_ecs(2.0, dim16()).unwrap().tail_mass();
    let base = reported_deltas(dim16());
    let doubled = reported_deltas(dim16().doubled());
    let (label, change) = base
        .iter()
        .zip(&doubled)
        .map(|((l, a), (_, b))| (l.clone(), (a - b).abs()))
        .fold(
            (String::new(), 0.0f64),
            |acc, x| if x.1 > acc.1 { x } else { acc },
        );
    check(
        tail < 1e-5 && change < 1e-6,
        format!("tail mass at dim 16 = {tail:.3e}; largest change on doubling the cutoff = {change:.3e} ({label})"),
    )
}

fn ac5_closed_form_equivalence() -> Outcome {
    let mut worst = (0.0f64, 0.0, 0.0);
    let mut budget = 0.0f64;
    for alpha in [0.5, 1.0, 2.0] {
        let c = verification_cutoff(alpha, dim16());
        let input = phase_shift(&make_ecs(alpha, c).unwrap(), &PhaseSpec::linear(0.3));
        for k in 1..=9 {
            let t = k as f64 / 10.0;
            let d = ecs_lossy_closed_form(alpha, t, 0.3, c).unwrap();
            budget = budget.max((d.p00 + 2.0 * d.pd - 1.0).abs());
            let err = d
                .rho
                .max_abs_diff(&apply_loss_both_modes(&input, t).unwrap())
                .unwrap();
            if err > worst.0 {
                worst = (err, alpha, t);
            }
        }
    }
    check(
        worst.0 < 1e-8 && budget < 1e-12,
        format!(
            "max entrywise gap {:.2e} (alpha={}, T={}); max |P00 + 2PD - 1| = {budget:.2e}",
            worst.0, worst.1, worst.2
        ),
    )
}

fn ac6_lossy_oracles() -> Outcome {
    let mut grid = t_grid();
    grid.push(1.0);
    let mut worst_noon = 0.0f64;
    let mut worst_unc = 0.0f64;
    for &t in &grid {
        for n in [2u32, 4, 6] {
            let f = lossy_qfi(&ProbeSpec::noon(n, dim16()), t, 1)
                .unwrap()
                .fisher;
            worst_noon = worst_noon.max((f - noon_lossy_fisher(n, t)).abs());
        }
        let f = lossy_qfi(&ProbeSpec::uncorrelated(4, dim16()), t, 1)
            .unwrap()
            .fisher;
        worst_unc = worst_unc.max((f - uncorrelated_lossy_fisher(4, t)).abs());
    }
    check(
        worst_noon < 1e-8 && worst_unc < 1e-8,
        format!(
            "max |F - N^2 T^N| = {worst_noon:.2e} (N = 2, 4, 6); max |F - N T| = {worst_unc:.2e}"
        ),
    )
}

fn lossy_deltas(t: f64) -> [f64; 4] {
    let c = dim16();
    [
        lossy_qfi(&ProbeSpec::ecs(2.0, c), t, 1).unwrap().delta_phi,
        lossy_qfi(&ProbeSpec::noon(4, c), t, 1).unwrap().delta_phi,
        lossy_qfi(&ProbeSpec::bat(4, c), t, 1).unwrap().delta_phi,
        lossy_qfi(&ProbeSpec::uncorrelated(4, c), t, 1)
            .unwrap()
            .delta_phi,
    ]
}

fn ac7_lossy_ordering() -> Outcome {
    let mut violations = Vec::new();
    for t in t_grid() {
        let [e, n, b, u] = lossy_deltas(t);
        if e > n.min(b).min(u) + 1e-9 {
            violations.push(format!("T={t:.2}"));
        }
    }
    let start = lossy_deltas(1.0)[0];
    let [e99, n99, ..] = lossy_deltas(0.99);
    let noon_gap = (e99 - n99).abs() / n99;
    let [e05, _, _, u05] = lossy_deltas(0.05);
    let [e50, _, _, u50] = lossy_deltas(0.5);
    let gap05 = (u05 - e05) / u05;
    let gap50 = (u50 - e50) / u50;
    let ordering = violations.is_empty();
    let starts = format!("{start:.3}") == "0.205";
    let near_noon = noon_gap < 0.05;
    let merges = e05 < u05 && gap05 < gap50;
    check(
        ordering && starts && near_noon && merges,
        format!(
            "ordering {} ({} violations); ECS(1) = {start:.4}; T=0.99 ECS {e99:.4} vs NOON {n99:.4} (gap {:.1}%, need < 5%); \
             T=0.05 ECS {e05:.4} vs UNC {u05:.4} (gap {:.1}%, T=0.5 gap {:.1}%)",
            if ordering { "holds" } else { "broken" },
            violations.len(),
            100.0 * noon_gap,
            100.0 * gap05,
            100.0 * gap50
        ),
    )
}

fn matched_ratio(n: u32) -> f64 {
    let a = alpha_for_mean_photons(n as f64 / 2.0);
    let c = cutoff_for_coherent(a * a, 1e-13).max(dim(n as usize + 1));
    let ecs = qfi_pure(&make_ecs(a, c).unwrap(), &default_generator(c))
        .unwrap()
        .delta_phi;
    let noon = qfi_pure(&make_noon(n, c).unwrap(), &default_generator(c))
        .unwrap()
        .delta_phi;
    ecs / noon
}

fn ac8_matched_resources() -> Outcome {
    let ratios: Vec<(u32, f64)> = (2..=8).map(|n| (n, matched_ratio(n))).collect();
    let beats = ratios.iter().all(|&(_, r)| r < 1.0);
    let r16 = matched_ratio(16);
    let rising = ratios.windows(2).all(|w| w[1].1 > w[0].1) && r16 > ratios.last().unwrap().1;
    check(
        beats && rising && (1.0 - r16) < 0.05,
        format!(
            "ratio ECS/NOON: {}; N=16: {r16:.4} (gap {:.1}%, need < 5%)",
            ratios
                .iter()
                .map(|(n, r)| format!("N={n} {r:.4}"))
                .collect::<Vec<_>>()
                .join(", "),
            100.0 * (1.0 - r16)
        ),
    )
}

fn ac9_parity() -> Outcome {
    let c = dim(30);
    let mut grid_err = 0.0f64;
    for i in 0..20 {
        let alpha = 0.1 * (i + 1) as f64;
        for j in 0..20 {
            let phi = PI * j as f64 / 19.0;
            let n = parity_expectation_numeric(alpha, phi, c).unwrap();
            grid_err = grid_err.max((n - parity_expectation_closed(alpha, phi)).abs());
        }
    }
    let mut end_err = 0.0f64;
    for i in 0..20 {
        let alpha = 0.1 * (i + 1) as f64;
        let vc = verification_cutoff(alpha, c);
        for (phi, want) in [(0.0, (-alpha * alpha).exp()), (PI, 1.0)] {
            end_err = end_err.max((parity_expectation_closed(alpha, phi) - want).abs());
            end_err =
                end_err.max((parity_expectation_numeric(alpha, phi, vc).unwrap() - want).abs());
        }
    }
    let (phi, best) = optimize_parity_uncertainty(2.0).unwrap();
    check(
        grid_err < 1e-6 && end_err < 1e-10 && best > 0.2048 && best < 0.25,
        format!("20x20 grid max gap {grid_err:.2e}; endpoint error {end_err:.2e}; alpha=2 optimum {best:.6} at phi={phi:.8}"),
    )
}

fn ac10_derivatives() -> Outcome {
    let mut fd_gap = 0.0f64;
    for probe in [
        make_ecs(2.0, dim16()).unwrap(),
        make_noon(4, dim16()).unwrap(),
    ] {
        let recipe = PhaseRecipe::lossy(probe, 0.5);
        let rho = recipe.build(0.3).unwrap();
        let a = drho_dphi(&rho, DerivativeMethod::Analytic, &recipe, 0.3).unwrap();
        let f = drho_dphi(&rho, DerivativeMethod::FiniteDifference, &recipe, 0.3).unwrap();
        fd_gap = fd_gap.max(max_diff(&a, &f));
    }
    let mut drift = 0.0f64;
    let probes = [
        make_ecs(2.0, dim16()).unwrap(),
        make_noon(4, dim16()).unwrap(),
        make_bat(4, dim16()).unwrap(),
        make_noon(1, dim16()).unwrap(),
    ];
    for probe in probes {
        for t in [0.2, 0.5, 0.9] {
            let recipe = PhaseRecipe::lossy(probe.clone(), t);
            let at = |phi: f64| {
                let rho = recipe.build(phi).unwrap();
                let d = drho_dphi(&rho, DerivativeMethod::Analytic, &recipe, phi).unwrap();
                qfi_mixed(&rho, &d, None).unwrap().fisher
            };
            let base = at(0.0);
            for phi in [0.3, 1.2, 2.7] {
                drift = drift.max((at(phi) - base).abs());
            }
        }
    }
    check(
        fd_gap < 1e-6 && drift < 1e-8,
        format!("max |analytic - finite difference| = {fd_gap:.2e}; max QFI drift over phi = {drift:.2e}"),
    )
}

fn ac11_preparation() -> Outcome {
    let (_, fidelity) = prepare_ecs_via_bs(SQRT_2, dim16()).unwrap();
    check(
        fidelity >= 1.0 - 1e-8,
        format!("1 - fidelity = {:.2e}", 1.0 - fidelity),
    )
}

fn ac12_cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_ecsmetro"))
            .args(["loss-sweep", "--out", path.to_str().unwrap()])
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("loss-sweep exited with {status}"));
        }
        outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    let text = String::from_utf8(outputs[0].clone()).map_err(|e| e.to_string())?;
    let header: Vec<&str> = text.lines().next().unwrap_or("").split(',').collect();
    let col = header
        .iter()
        .position(|h| *h == "agreement")
        .ok_or("no agreement column")?;
    let mut worst = 0.0f64;
    let mut checked = 0;
    for line in text.lines().skip(1) {
        let cell = line.split(',').nth(col).unwrap_or("");
        if !cell.is_empty() {
            worst = worst.max(cell.parse::<f64>().map_err(|e| e.to_string())?);
            checked += 1;
        }
    }
    check(
        outputs[0] == outputs[1] && checked > 0 && worst < 1e-8,
        format!(
            "{} bytes, identical = {}; {checked} agreement cells, max {worst:.2e}",
            outputs[0].len(),
            outputs[0] == outputs[1]
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("NOON N=4 pure bound", ac1_noon_pure),
        ("BAT N=4 pure bound", ac2_bat_pure),
        ("ECS alpha=2 pure bound", ac3_ecs_pure),
        ("truncation budget", ac4_truncation_budget),
        (
            "closed-form lossy ECS equals Kraus output",
            ac5_closed_form_equivalence,
        ),
        ("lossy NOON and uncorrelated oracles", ac6_lossy_oracles),
        ("lossy comparison at N=4, alpha=2", ac7_lossy_ordering),
        ("matched-resource comparison", ac8_matched_resources),
        ("parity readout", ac9_parity),
        (
            "derivative consistency and phase invariance",
            ac10_derivatives,
        ),
        ("ECS preparation by beam splitter", ac11_preparation),
        ("CLI determinism", ac12_cli_determinism),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{tag} AC{:02} {name} [{:.2}s]: {detail}",
            i + 1,
            t0.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        criteria.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
