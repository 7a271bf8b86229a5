//! Quantum Fisher information, the Cramér–Rao bound and parity readout.

use alloc::vec;
use alloc::vec::Vec;

use crate::channels::{
    apply_loss_both_modes, beam_splitter_5050, phase_shift, reduced_support_basis, BsConvention,
    PhaseSpec, PARITY_RECOMBINER, SUPPORT_LEAKAGE_TOL,
};
use crate::eig::hermitian_eig;
use crate::fock::{
    hermiticity_deviation, Cutoff, DensityOp2M, Mode, OperatorMatrix, PureState2M, TwoModeState,
};
use crate::states::{ecs_normalizer, make_ecs, ProbeKind, ProbeSpec};
use crate::{math, CMatrix, Error, Result, C64};

/// Pairs with `λᵢ + λⱼ` at or below this fraction of `λ_max` are dropped.
pub const DEFAULT_PAIR_CUTOFF_REL: f64 = 1e-12;
/// Central-difference step for `∂ρ/∂φ`.
pub const FD_STEP: f64 = 1e-5;
/// Phase used for lossy sweeps. Any value works since the mixed QFI does not depend on it.
pub const WORKING_PHASE: f64 = 0.3;
/// Slope below which the parity error propagation is undefined.
pub const STATIONARY_TOL: f64 = 1e-12;
pub const PARITY_GRID: usize = 2048;
pub const GOLDEN_TOL: f64 = 1e-8;

const DENSITY_TOL: f64 = 1e-8;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum QfiMethod {
    PureAnalytic,
    PureNumeric,
    MixedEig,
    ClosedForm,
}

impl QfiMethod {
    pub fn tag(self) -> &'static str {
        match self {
            QfiMethod::PureAnalytic => "pure-analytic",
            QfiMethod::PureNumeric => "pure-numeric",
            QfiMethod::MixedEig => "mixed-eig",
            QfiMethod::ClosedForm => "closed-form",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct QfiResult {
    pub fisher: f64,
    /// Cramér–Rao bound at `mu` shots, infinite when `fisher` is zero.
    pub delta_phi: f64,
    pub mu: u32,
    pub method: QfiMethod,
    /// Eigen-pairs dropped from the mixed-state sum.
    pub spectrum_cut: usize,
}

impl QfiResult {
    pub fn new(fisher: f64, method: QfiMethod, spectrum_cut: usize) -> Self {
        let fisher = fisher.max(0.0);
        let delta_phi = crb(fisher, 1).unwrap_or(f64::INFINITY);
        Self {
            fisher,
            delta_phi,
            mu: 1,
            method,
            spectrum_cut,
        }
    }

    /// Same information, bound recomputed for `mu` shots.
    pub fn with_mu(self, mu: u32) -> Result<Self> {
        if mu == 0 {
            return Err(Error::InvalidShots);
        }
        let delta_phi = crb(self.fisher, mu).unwrap_or(f64::INFINITY);
        Ok(Self {
            delta_phi,
            mu,
            ..self
        })
    }

    /// Information of `count` independent copies.
    pub fn scaled(self, count: u32) -> Self {
        let r = Self::new(self.fisher * count as f64, self.method, self.spectrum_cut);
        Self {
            mu: self.mu,
            delta_phi: crb(r.fisher, self.mu).unwrap_or(f64::INFINITY),
            ..r
        }
    }
}

/// `1/√(μF)`.
pub fn crb(fisher: f64, mu: u32) -> Result<f64> {
    if mu == 0 {
        return Err(Error::InvalidShots);
    }
    if !(fisher > 0.0) {
        return Err(Error::ZeroInformation);
    }
    Ok(1.0 / math::sqrt(mu as f64 * fisher))
}

/// `a†₂a₂`, the generator of the linear phase shifter.
pub fn default_generator(cutoff: Cutoff) -> OperatorMatrix {
    OperatorMatrix::number(cutoff, Mode::Two)
}

fn pure_fisher(psi: &crate::CVector, dpsi: &crate::CVector) -> f64 {
    4.0 * (dpsi.norm_squared() - dpsi.dotc(psi).norm_sqr())
}

/// `4[⟨ψ′|ψ′⟩ − |⟨ψ′|ψ⟩|²]` with `|ψ′⟩ = iG|ψ⟩`.
pub fn qfi_pure(state: &PureState2M, generator: &OperatorMatrix) -> Result<QfiResult> {
    let dpsi = generator.apply(state.amplitudes())? * C64::new(0.0, 1.0);
    Ok(QfiResult::new(
        pure_fisher(state.amplitudes(), &dpsi),
        QfiMethod::PureAnalytic,
        0,
    ))
}

/// Pure-state QFI with `|ψ′⟩` from a central difference of the phase shifter.
pub fn qfi_pure_numeric(state: &PureState2M, k: u32) -> Result<QfiResult> {
    let plus = phase_shift(state, &PhaseSpec::nonlinear(FD_STEP, k)?);
    let minus = phase_shift(state, &PhaseSpec::nonlinear(-FD_STEP, k)?);
    let dpsi = (plus.amplitudes() - minus.amplitudes()) / C64::new(2.0 * FD_STEP, 0.0);
    Ok(QfiResult::new(
        pure_fisher(state.amplitudes(), &dpsi),
        QfiMethod::PureNumeric,
        0,
    ))
}

/// Untruncated ECS information `4α²𝒩²(1 + (1 − 𝒩²)α²)`.
pub fn qfi_pure_ecs_closed(alpha: f64) -> QfiResult {
    let n2 = {
        let n = ecs_normalizer(alpha);
        n * n
    };
    let a2 = alpha * alpha;
    QfiResult::new(
        4.0 * a2 * n2 * (1.0 + (1.0 - n2) * a2),
        QfiMethod::ClosedForm,
        0,
    )
}

/// Lossy NOON information `N²Tᴺ`.
pub fn noon_lossy_fisher(n: u32, t: f64) -> f64 {
    let n = n as f64;
    n * n * math::powf(t, n)
}

/// `N` lossy single photons, `N·T`.
pub fn uncorrelated_lossy_fisher(n: u32, t: f64) -> f64 {
    n as f64 * t
}

/// Pure BAT information `N(N/2 + 1)`.
pub fn bat_pure_fisher(n: u32) -> f64 {
    let n = n as f64;
    n * (n / 2.0 + 1.0)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum DerivativeMethod {
    /// `i[G, ρ]`.
    Analytic,
    /// `(ρ(φ+h) − ρ(φ−h))/2h`.
    FiniteDifference,
}

/// A channel applied after the phase shifter.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum PostPhaseStep {
    Loss(f64),
    BeamSplitter(BsConvention),
}

/// Probe, phase shifter of order `k`, then the listed steps.
#[derive(Clone, Debug)]
pub struct PhaseRecipe {
    pub probe: PureState2M,
    pub k: u32,
    pub steps: Vec<PostPhaseStep>,
}

impl PhaseRecipe {
    pub fn new(probe: PureState2M) -> Self {
        Self {
            probe,
            k: 1,
            steps: Vec::new(),
        }
    }

    pub fn lossy(probe: PureState2M, t: f64) -> Self {
        Self {
            probe,
            k: 1,
            steps: vec![PostPhaseStep::Loss(t)],
        }
    }

    pub fn then(mut self, step: PostPhaseStep) -> Self {
        self.steps.push(step);
        self
    }

    pub fn with_order(mut self, k: u32) -> Self {
        self.k = k;
        self
    }

    pub fn generator(&self) -> OperatorMatrix {
        OperatorMatrix::number_power(self.probe.cutoff(), Mode::Two, self.k)
    }

    /// Whether `ρ(φ) = U(φ) ρ(0) U(φ)†` holds, so that `∂ρ = i[G, ρ]`.
    pub fn check_covariant(&self) -> Result<()> {
        for step in &self.steps {
            match step {
                PostPhaseStep::BeamSplitter(_) => {
                    return Err(Error::PipelineNotCovariant(
                        "beam splitter after the phase shifter",
                    ))
                }
                PostPhaseStep::Loss(_) if self.k != 1 => {
                    return Err(Error::PipelineNotCovariant(
                        "loss does not commute with a nonlinear phase",
                    ))
                }
                PostPhaseStep::Loss(_) => {}
            }
        }
        Ok(())
    }

    pub fn build(&self, phi: f64) -> Result<DensityOp2M> {
        let mut pure = phase_shift(&self.probe, &PhaseSpec::nonlinear(phi, self.k)?);
        let mut mixed: Option<DensityOp2M> = None;
        for step in &self.steps {
            match *step {
                PostPhaseStep::Loss(t) => {
                    mixed = Some(match &mixed {
                        Some(rho) => apply_loss_both_modes(rho, t)?,
                        None => apply_loss_both_modes(&pure, t)?,
                    })
                }
                PostPhaseStep::BeamSplitter(conv) => match &mixed {
                    None => pure = beam_splitter_5050(&pure, conv)?,
                    Some(_) => {
                        return Err(Error::InvalidProbe(
                            "beam splitter on a mixed state is not supported",
                        ))
                    }
                },
            }
        }
        Ok(mixed.unwrap_or_else(|| pure.projector()))
    }
}

/// `i[G, ρ]` for the diagonal generator `(a†₂a₂)^k`.
pub fn commutator_derivative(rho: &DensityOp2M, k: u32) -> CMatrix {
    let cutoff = rho.cutoff();
    let g: Vec<f64> = (0..cutoff.two_mode_dim())
        .map(|i| math::powf(cutoff.levels(i).1 as f64, k as f64))
        .collect();
    let m = rho.matrix();
    CMatrix::from_fn(m.nrows(), m.ncols(), |a, b| {
        m[(a, b)] * C64::new(0.0, g[a] - g[b])
    })
}

/// `∂ρ/∂φ` at `phi`. The analytic route requires a covariant recipe; the
/// finite-difference route rebuilds the state at `phi ± h`.
pub fn drho_dphi(
    rho: &DensityOp2M,
    method: DerivativeMethod,
    recipe: &PhaseRecipe,
    phi: f64,
) -> Result<CMatrix> {
    match method {
        DerivativeMethod::Analytic => {
            recipe.check_covariant()?;
            Ok(commutator_derivative(rho, recipe.k))
        }
        DerivativeMethod::FiniteDifference => {
            let plus = recipe.build(phi + FD_STEP)?;
            let minus = recipe.build(phi - FD_STEP)?;
            Ok((plus.matrix() - minus.matrix()) / C64::new(2.0 * FD_STEP, 0.0))
        }
    }
}

fn check_density(m: &CMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotDensityOperator("matrix is not square"));
    }
    if hermiticity_deviation(m) > DENSITY_TOL {
        return Err(Error::NotDensityOperator("matrix is not Hermitian"));
    }
    let trace: C64 = (0..m.nrows()).map(|i| m[(i, i)]).sum();
    if (trace.re - 1.0).abs() > DENSITY_TOL || trace.im.abs() > DENSITY_TOL {
        return Err(Error::NotDensityOperator("trace differs from one"));
    }
    Ok(())
}

fn count_pairs_below(sorted: &[f64], cut: f64) -> usize {
    // ordered pairs (i, j) with λᵢ + λⱼ ≤ cut, two-pointer over ascending values
    let n = sorted.len();
    let mut count = 0;
    let mut j = n;
    for i in 0..n {
        while j > 0 && sorted[i] + sorted[j - 1] > cut {
            j -= 1;
        }
        count += j;
    }
    count
}

fn pair_sum(lambda: &nalgebra::DVector<f64>, v: &CMatrix, drho: &CMatrix, cut: f64) -> f64 {
    let d = v.adjoint() * drho * v;
    let mut f = 0.0;
    for i in 0..lambda.len() {
        for j in 0..lambda.len() {
            let s = lambda[i] + lambda[j];
            if s > cut {
                f += 2.0 / s * d[(i, j)].norm_sqr();
            }
        }
    }
    f
}

fn dense_fisher(rho: &CMatrix, drho: &CMatrix, pair_cutoff: Option<f64>) -> Result<QfiResult> {
    check_pair(rho, drho)?;
    let e = hermitian_eig(rho)?;
    let mut values: Vec<f64> = e.eigenvalues().iter().copied().collect();
    let lmax = values.iter().copied().fold(0.0, f64::max);
    let cut = pair_cutoff.unwrap_or(DEFAULT_PAIR_CUTOFF_REL * lmax);
    let fisher = pair_sum(e.eigenvalues(), e.eigenvectors(), drho, cut);
    finish(&mut values, fisher, cut)
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn connected_blocks(rho: &CMatrix, drho: &CMatrix) -> Vec<Vec<usize>> {
    let n = rho.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let coupled = rho[(i, j)] != C64::new(0.0, 0.0)
                || rho[(j, i)] != C64::new(0.0, 0.0)
                || drho[(i, j)] != C64::new(0.0, 0.0)
                || drho[(j, i)] != C64::new(0.0, 0.0);
            if coupled {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

fn check_pair(rho: &CMatrix, drho: &CMatrix) -> Result<()> {
    check_density(rho)?;
    if drho.nrows() != rho.nrows() || drho.ncols() != rho.ncols() {
        return Err(Error::DimensionMismatch {
            expected: rho.nrows(),
            found: drho.nrows(),
        });
    }
    Ok(())
}

fn finish(values: &mut [f64], fisher: f64, cut: f64) -> Result<QfiResult> {
    values.sort_by(f64::total_cmp);
    if values.first().is_some_and(|&v| v < -DENSITY_TOL) {
        return Err(Error::NotDensityOperator("negative eigenvalue"));
    }
    Ok(QfiResult::new(
        fisher,
        QfiMethod::MixedEig,
        count_pairs_below(values, cut),
    ))
}

/// Mixed-state QFI from the spectral sum over pairs with `λᵢ + λⱼ` above
/// `pair_cutoff` (default `1e-12·λ_max`).
///
/// `ρ` and `∂ρ` are split into the connected blocks of their joint
/// sparsity pattern and each block is diagonalized separately; the result
/// equals [`qfi_mixed_dense`].
pub fn qfi_mixed(rho: &DensityOp2M, drho: &CMatrix, pair_cutoff: Option<f64>) -> Result<QfiResult> {
    qfi_from_matrices(rho.matrix(), drho, pair_cutoff)
}

/// [`qfi_mixed`] on raw matrices.
pub fn qfi_from_matrices(
    rho: &CMatrix,
    drho: &CMatrix,
    pair_cutoff: Option<f64>,
) -> Result<QfiResult> {
    check_pair(rho, drho)?;
    let mut spectra = Vec::new();
    let mut lmax = 0.0_f64;
    for idx in connected_blocks(rho, drho) {
        let sub = CMatrix::from_fn(idx.len(), idx.len(), |i, j| rho[(idx[i], idx[j])]);
        let dsub = CMatrix::from_fn(idx.len(), idx.len(), |i, j| drho[(idx[i], idx[j])]);
        let e = hermitian_eig(&sub)?;
        lmax = e.eigenvalues().iter().copied().fold(lmax, f64::max);
        spectra.push((e, dsub));
    }
    let cut = pair_cutoff.unwrap_or(DEFAULT_PAIR_CUTOFF_REL * lmax);
    let mut fisher = 0.0;
    let mut values = Vec::with_capacity(rho.nrows());
    for (e, dsub) in &spectra {
        if dsub.iter().any(|z| *z != C64::new(0.0, 0.0)) {
            fisher += pair_sum(e.eigenvalues(), e.eigenvectors(), dsub, cut);
        }
        values.extend(e.eigenvalues().iter().copied());
    }
    finish(&mut values, fisher, cut)
}

/// Reference path diagonalizing the full matrix at once.
pub fn qfi_mixed_dense(
    rho: &DensityOp2M,
    drho: &CMatrix,
    pair_cutoff: Option<f64>,
) -> Result<QfiResult> {
    dense_fisher(rho.matrix(), drho, pair_cutoff)
}

/// [`qfi_mixed_dense`] restricted to the `2·dim − 1` two-ray support.
pub fn qfi_mixed_reduced(
    rho: &DensityOp2M,
    drho: &CMatrix,
    pair_cutoff: Option<f64>,
) -> Result<QfiResult> {
    let (basis, small) = reduced_support_basis(rho)?;
    let leakage = basis.leakage(drho);
    if leakage > SUPPORT_LEAKAGE_TOL {
        return Err(Error::SupportLeakage { leakage });
    }
    dense_fisher(&small, &basis.compress(drho), pair_cutoff)
}

/// QFI of a probe after the phase shifter and equal loss `T`, evaluated at
/// [`WORKING_PHASE`] with the analytic derivative.
pub fn lossy_qfi(probe: &ProbeSpec, t: f64, mu: u32) -> Result<QfiResult> {
    let built = probe.build()?;
    let recipe = PhaseRecipe::lossy(built.state().clone(), t);
    let rho = recipe.build(WORKING_PHASE)?;
    let drho = drho_dphi(&rho, DerivativeMethod::Analytic, &recipe, WORKING_PHASE)?;
    let per_copy = qfi_mixed(&rho, &drho, None)?;
    let count = if probe.kind == ProbeKind::Uncorrelated {
        built.copies()
    } else {
        1
    };
    per_copy.scaled(count).with_mu(mu)
}

/// [`lossy_qfi`] over a transmissivity grid.
pub fn lossy_bound_sweep(probe: &ProbeSpec, t_grid: &[f64], mu: u32) -> Result<Vec<QfiResult>> {
    t_grid.iter().map(|&t| lossy_qfi(probe, t, mu)).collect()
}

fn parity_parts(alpha: f64, phi: f64) -> (f64, f64, f64) {
    // θ = π − φ keeps the φ → π limit free of cancellation
    let a2 = alpha * alpha;
    let theta = core::f64::consts::PI - phi;
    let s = math::sin(0.5 * theta);
    let u = 2.0 * a2 * s * s;
    let v = a2 * math::sin(theta);
    (theta, u, v)
}

/// Closed-form mode-2 parity of the phase-imprinted ECS after recombination,
/// `[2 + 2e^{−α²cosφ}cos(α²sinφ)]/(2 + 2e^{α²})`.
pub fn parity_expectation_closed(alpha: f64, phi: f64) -> f64 {
    let (_, u, v) = parity_parts(alpha, phi);
    let e = math::exp(-alpha * alpha);
    (e + math::exp(-u) * math::cos(v)) / (1.0 + e)
}

/// `1 − ⟨Π₂⟩` without cancellation near `φ = π`.
pub fn parity_deficit(alpha: f64, phi: f64) -> f64 {
    let (_, u, v) = parity_parts(alpha, phi);
    let e = math::exp(-alpha * alpha);
    let sh = math::sin(0.5 * v);
    (-math::expm1(-u) + math::exp(-u) * 2.0 * sh * sh) / (1.0 + e)
}

/// `∂⟨Π₂⟩/∂φ`.
pub fn parity_slope(alpha: f64, phi: f64) -> f64 {
    let (theta, u, v) = parity_parts(alpha, phi);
    let a2 = alpha * alpha;
    a2 * math::exp(-u) * math::sin(theta + v) / (1.0 + math::exp(-a2))
}

/// Mode-2 parity of the phase-imprinted ECS after the recombining beam
/// splitter, evaluated on the Fock grid.
pub fn parity_expectation_numeric(alpha: f64, phi: f64, cutoff: Cutoff) -> Result<f64> {
    let probe = make_ecs(alpha, cutoff)?;
    let shifted = phase_shift(&probe, &PhaseSpec::linear(phi));
    let out = beam_splitter_5050(&shifted, PARITY_RECOMBINER)?;
    Ok(out
        .expectation(&OperatorMatrix::parity(cutoff, Mode::Two))?
        .re)
}

/// `Δφ = √(1 − ⟨Π₂⟩²)/|∂⟨Π₂⟩/∂φ|`.
pub fn parity_uncertainty(alpha: f64, phi: f64) -> Result<f64> {
    let slope = parity_slope(alpha, phi);
    if !(slope.abs() >= STATIONARY_TOL) {
        return Err(Error::StationaryPoint { phi });
    }
    let deficit = parity_deficit(alpha, phi).max(0.0);
    Ok(math::sqrt(deficit * (2.0 - deficit)) / slope.abs())
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = 0.5 * (math::sqrt(5.0) - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        c
    } else {
        d
    }
}

/// Minimizes [`parity_uncertainty`] over `φ ∈ (0, π)` with a
/// [`PARITY_GRID`]-point grid and golden-section refinement.
pub fn optimize_parity_uncertainty(alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::DegenerateParity { alpha });
    }
    let step = core::f64::consts::PI / PARITY_GRID as f64;
    let objective = |phi: f64| parity_uncertainty(alpha, phi).unwrap_or(f64::INFINITY);
    let mut best = (f64::INFINITY, 0);
    for k in 0..PARITY_GRID {
        let value = objective((k as f64 + 0.5) * step);
        if value < best.0 {
            best = (value, k);
        }
    }
    if !best.0.is_finite() {
        return Err(Error::DegenerateParity { alpha });
    }
    let centre = (best.1 as f64 + 0.5) * step;
    let lo = (centre - step).max(0.0);
    let hi = (centre + step).min(core::f64::consts::PI);
    let phi = golden_section(objective, lo, hi, GOLDEN_TOL);
    let refined = objective(phi);
    Ok(if refined <= best.0 {
        (phi, refined)
    } else {
        (centre, best.0)
    })
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ParitySample {
    pub phi: f64,
    pub expectation: f64,
    /// `None` at stationary points.
    pub uncertainty: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParityCurve {
    pub alpha: f64,
    pub samples: Vec<ParitySample>,
    /// `(φ*, Δφ*)`, absent for the vacuum.
    pub minimum: Option<(f64, f64)>,
}

impl ParityCurve {
    /// `points` samples on `[0, π]` including both ends.
    pub fn compute(alpha: f64, points: usize) -> Self {
        let samples = (0..points)
            .map(|j| {
                let phi = if points > 1 {
                    core::f64::consts::PI * j as f64 / (points - 1) as f64
                } else {
                    0.0
                };
                ParitySample {
                    phi,
                    expectation: parity_expectation_closed(alpha, phi),
                    uncertainty: parity_uncertainty(alpha, phi).ok(),
                }
            })
            .collect();
        Self {
            alpha,
            samples,
            minimum: optimize_parity_uncertainty(alpha).ok(),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.minimum.is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::max_abs_diff;
    use crate::states::{make_bat, make_noon};

    fn dim16() -> Cutoff {
        Cutoff::default()
    }

    #[test]
    fn crb_examples() {
        assert_eq!(crb(16.0, 1).unwrap(), 0.25);
        assert_eq!(crb(16.0, 4).unwrap(), 0.125);
        assert!((crb(23.851, 1).unwrap() - 0.2048).abs() < 1e-4);
        assert_eq!(crb(0.0, 1), Err(Error::ZeroInformation));
        assert_eq!(crb(1.0, 0), Err(Error::InvalidShots));
    }

    #[test]
    fn pure_noon_and_bat() {
        let g = default_generator(dim16());
        let r = qfi_pure(&make_noon(4, dim16()).unwrap(), &g).unwrap();
        assert!((r.fisher - 16.0).abs() < 1e-12 && r.method == QfiMethod::PureAnalytic);
        let r = qfi_pure(&make_bat(4, dim16()).unwrap(), &g).unwrap();
        assert!((r.delta_phi - 0.288_675_134_594_812_9).abs() < 1e-10);
        let r = qfi_pure(&PureState2M::vacuum(dim16()), &g).unwrap();
        assert_eq!(r.fisher, 0.0);
        assert!(r.delta_phi.is_infinite());
    }

    #[test]
    fn numeric_pure_qfi_tracks_analytic() {
        let s = make_bat(6, dim16()).unwrap();
        let a = qfi_pure(&s, &default_generator(dim16())).unwrap().fisher;
        let n = qfi_pure_numeric(&s, 1).unwrap();
        assert!((a - n.fisher).abs() < 1e-8 * a);
        assert_eq!(n.method, QfiMethod::PureNumeric);
    }

    #[test]
    fn ecs_closed_form() {
        let r = qfi_pure_ecs_closed(2.0);
        assert!((r.fisher - 23.851).abs() < 1e-3);
        assert!((r.delta_phi - 0.2048).abs() < 1e-4);
        assert_eq!(qfi_pure_ecs_closed(0.0).fisher, 0.0);
    }

    #[test]
    fn pair_counting() {
        assert_eq!(count_pairs_below(&[0.0, 0.0, 1.0], 1e-12), 4);
        assert_eq!(count_pairs_below(&[0.5, 0.5], 1e-12), 0);
        assert_eq!(count_pairs_below(&[], 1.0), 0);
    }

    #[test]
    fn lossy_noon_oracle() {
        let spec = ProbeSpec::noon(4, dim16());
        let r = lossy_qfi(&spec, 0.8, 1).unwrap();
        assert!((r.fisher - 6.5536).abs() < 1e-8, "{}", r.fisher);
        assert!(r.spectrum_cut > 0);
    }

    #[test]
    fn block_and_dense_paths_agree() {
        let c = Cutoff::new(8).unwrap();
        let recipe = PhaseRecipe::lossy(make_bat(4, c).unwrap(), 0.6);
        let rho = recipe.build(0.3).unwrap();
        let d = drho_dphi(&rho, DerivativeMethod::Analytic, &recipe, 0.3).unwrap();
        let a = qfi_mixed(&rho, &d, None).unwrap();
        let b = qfi_mixed_dense(&rho, &d, None).unwrap();
        assert!((a.fisher - b.fisher).abs() < 1e-10);
        assert_eq!(a.spectrum_cut, b.spectrum_cut);
    }

    #[test]
    fn maximally_mixed_has_no_information() {
        let rho = DensityOp2M::maximally_mixed(Cutoff::new(4).unwrap());
        let d = CMatrix::zeros(16, 16);
        assert_eq!(qfi_mixed(&rho, &d, None).unwrap().fisher, 0.0);
    }

    #[test]
    fn rejects_non_density_input() {
        let m = CMatrix::identity(4, 4);
        assert!(matches!(
            qfi_from_matrices(&m, &m, None),
            Err(Error::NotDensityOperator(_))
        ));
    }

    #[test]
    fn covariance_checks() {
        let p = make_noon(2, dim16()).unwrap();
        let bad = PhaseRecipe::new(p.clone())
            .then(PostPhaseStep::BeamSplitter(BsConvention::ModeTwoNegated));
        let rho = bad.build(0.1).unwrap();
        assert!(matches!(
            drho_dphi(&rho, DerivativeMethod::Analytic, &bad, 0.1),
            Err(Error::PipelineNotCovariant(_))
        ));
        let bad = PhaseRecipe::lossy(p.clone(), 0.5).with_order(2);
        assert!(bad.check_covariant().is_err());
        assert!(PhaseRecipe::lossy(p, 0.5).check_covariant().is_ok());
    }

    #[test]
    fn trivial_derivative_of_vacuum() {
        let recipe = PhaseRecipe::lossy(make_noon(2, dim16()).unwrap(), 0.0);
        let rho = recipe.build(0.4).unwrap();
        let d = drho_dphi(&rho, DerivativeMethod::Analytic, &recipe, 0.4).unwrap();
        assert!(d.iter().all(|z| z.norm() == 0.0));
        let d = drho_dphi(&rho, DerivativeMethod::FiniteDifference, &recipe, 0.4).unwrap();
        assert!(d.iter().all(|z| z.norm() < 1e-10));
    }

    #[test]
    fn noon_derivative_magnitude() {
        let recipe = PhaseRecipe::new(make_noon(4, dim16()).unwrap());
        let rho = recipe.build(0.2).unwrap();
        let d = drho_dphi(&rho, DerivativeMethod::Analytic, &recipe, 0.2).unwrap();
        let top = d.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!((top - 2.0).abs() < 1e-12);
        let fd = drho_dphi(&rho, DerivativeMethod::FiniteDifference, &recipe, 0.2).unwrap();
        assert!(max_abs_diff(&d, &fd).unwrap() < 1e-6);
    }

    #[test]
    fn parity_endpoints() {
        assert_eq!(parity_expectation_closed(0.0, 1.3), 1.0);
        assert!((parity_expectation_closed(2.0, 0.0) - libm::exp(-4.0)).abs() < 1e-15);
        assert!((parity_expectation_closed(2.0, core::f64::consts::PI) - 1.0).abs() < 1e-15);
        assert!(matches!(
            parity_uncertainty(2.0, 0.0),
            Err(Error::StationaryPoint { .. })
        ));
    }

    #[test]
    fn parity_closed_form_matches_textbook_expression() {
        for &(a, phi) in &[(0.7, 0.4), (1.5, 2.0), (2.0, 2.9)] {
            let a2: f64 = a * a;
            let direct = (2.0
                + 2.0 * libm::exp(-a2 * libm::cos(phi)) * libm::cos(a2 * libm::sin(phi)))
                / (2.0 + 2.0 * libm::exp(a2));
            assert!((parity_expectation_closed(a, phi) - direct).abs() < 1e-13);
            assert!((parity_deficit(a, phi) - (1.0 - direct)).abs() < 1e-13);
            let h = 1e-6;
            let fd = (parity_expectation_closed(a, phi + h)
                - parity_expectation_closed(a, phi - h))
                / (2.0 * h);
            assert!((parity_slope(a, phi) - fd).abs() < 1e-7);
        }
    }

    #[test]
    fn parity_numeric_locks_convention() {
        let c = Cutoff::new(30).unwrap();
        let n = parity_expectation_numeric(2.0, 0.5, c).unwrap();
        assert!((n - parity_expectation_closed(2.0, 0.5)).abs() < 1e-6);
        assert!((parity_expectation_numeric(0.0, 0.5, c).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parity_optimum_alpha_two() {
        let (phi, best) = optimize_parity_uncertainty(2.0).unwrap();
        assert!(phi > 3.0 && phi < core::f64::consts::PI);
        // φ → π limit √((1+e^{−α²})/(α²+α⁴))
        let limit = libm::sqrt((1.0 + libm::exp(-4.0)) / 20.0);
        assert!((best - limit).abs() < 1e-6, "{best} vs {limit}");
        assert!(best > qfi_pure_ecs_closed(2.0).delta_phi && best < 0.25);
        assert!(optimize_parity_uncertainty(1.0).unwrap().1 > best);
        assert!(optimize_parity_uncertainty(0.0).is_err());
    }

    #[test]
    fn parity_curve_flags_vacuum() {
        let curve = ParityCurve::compute(0.0, 5);
        assert!(curve.is_degenerate());
        assert!(curve
            .samples
            .iter()
            .all(|s| s.expectation == 1.0 && s.uncertainty.is_none()));
        let curve = ParityCurve::compute(2.0, 9);
        assert_eq!(curve.samples.last().unwrap().expectation, 1.0);
    }
}
