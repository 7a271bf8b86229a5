//! Probe states and photon-number resource matching.

use alloc::vec;
use alloc::vec::Vec;

use crate::channels::{beam_splitter_5050, BsConvention};
use crate::fock::{
    coherent_tail_mass, coherent_vector_with, poisson_tail, Cutoff, FockVector, Mode,
    OperatorMatrix, PureState2M, Truncation, TwoModeState,
};
use crate::{math, CVector, Error, Result, C64};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum ProbeKind {
    Noon,
    Bat,
    Ecs,
    Scs,
    Uncorrelated,
}

impl ProbeKind {
    pub fn name(self) -> &'static str {
        match self {
            ProbeKind::Noon => "NOON",
            ProbeKind::Bat => "BAT",
            ProbeKind::Ecs => "ECS",
            ProbeKind::Scs => "SCS",
            ProbeKind::Uncorrelated => "UNCORRELATED",
        }
    }
}

/// What to build and on which cutoff. Photon-number probes use `n`,
/// coherent-state probes use `alpha`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ProbeSpec {
    pub kind: ProbeKind,
    pub n: u32,
    pub alpha: f64,
    pub cutoff: Cutoff,
}

impl ProbeSpec {
    pub fn noon(n: u32, cutoff: Cutoff) -> Self {
        Self {
            kind: ProbeKind::Noon,
            n,
            alpha: 0.0,
            cutoff,
        }
    }

    pub fn bat(n: u32, cutoff: Cutoff) -> Self {
        Self {
            kind: ProbeKind::Bat,
            n,
            alpha: 0.0,
            cutoff,
        }
    }

    pub fn ecs(alpha: f64, cutoff: Cutoff) -> Self {
        Self {
            kind: ProbeKind::Ecs,
            n: 0,
            alpha,
            cutoff,
        }
    }

    pub fn scs(alpha: f64, cutoff: Cutoff) -> Self {
        Self {
            kind: ProbeKind::Scs,
            n: 0,
            alpha,
            cutoff,
        }
    }

    pub fn uncorrelated(n: u32, cutoff: Cutoff) -> Self {
        Self {
            kind: ProbeKind::Uncorrelated,
            n,
            alpha: 0.0,
            cutoff,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            ProbeKind::Noon | ProbeKind::Uncorrelated if self.n == 0 => {
                Err(Error::InvalidProbe("photon number must be at least 1"))
            }
            ProbeKind::Bat if self.n < 2 || self.n % 2 == 1 => Err(Error::OddN(self.n)),
            ProbeKind::Ecs | ProbeKind::Scs if !(self.alpha >= 0.0) || !self.alpha.is_finite() => {
                Err(Error::InvalidProbe("alpha must be finite and non-negative"))
            }
            _ => Ok(()),
        }
    }

    /// 𝒩_α, the ECS normalizer.
    pub fn ecs_normalizer(&self) -> f64 {
        ecs_normalizer(self.alpha)
    }

    /// N_α, the cat-state normalizer.
    pub fn scs_normalizer(&self) -> f64 {
        scs_normalizer(self.alpha)
    }

    pub fn build(&self) -> Result<Probe> {
        self.validate()?;
        Ok(match self.kind {
            ProbeKind::Noon => Probe::Single(make_noon(self.n, self.cutoff)?),
            ProbeKind::Bat => Probe::Single(make_bat(self.n, self.cutoff)?),
            ProbeKind::Ecs => Probe::Single(make_ecs(self.alpha, self.cutoff)?),
            // the cat sits in the phase arm with an empty reference arm
            ProbeKind::Scs => {
                let scs = make_scs(self.alpha, self.cutoff)?;
                Probe::Single(PureState2M::product(
                    &FockVector::vacuum(self.cutoff),
                    &scs,
                )?)
            }
            ProbeKind::Uncorrelated => Probe::Copies {
                copy: single_photon(self.cutoff)?,
                count: self.n,
            },
        })
    }
}

/// A built probe: either one two-mode state or `count` identical copies.
#[derive(Clone, Debug, PartialEq)]
pub enum Probe {
    Single(PureState2M),
    Copies { copy: PureState2M, count: u32 },
}

impl Probe {
    /// The two-mode state a single interferometer pass sees.
    pub fn state(&self) -> &PureState2M {
        match self {
            Probe::Single(s) => s,
            Probe::Copies { copy, .. } => copy,
        }
    }

    pub fn copies(&self) -> u32 {
        match self {
            Probe::Single(_) => 1,
            Probe::Copies { count, .. } => *count,
        }
    }

    /// Mode-1 photon number summed over copies.
    pub fn mean_photon_mode1(&self) -> f64 {
        self.copies() as f64 * mean_photon_mode1(self.state())
    }
}

/// 𝒩_α = 1/√(2(1+e^{−α²})).
pub fn ecs_normalizer(alpha: f64) -> f64 {
    1.0 / math::sqrt(2.0 * (1.0 + math::exp(-alpha * alpha)))
}

/// N_α = 1/√(2(1+e^{−2α²})).
pub fn scs_normalizer(alpha: f64) -> f64 {
    1.0 / math::sqrt(2.0 * (1.0 + math::exp(-2.0 * alpha * alpha)))
}

/// Mode-1 photon number of the ECS, 𝒩²_α α².
pub fn ecs_mean_photons(alpha: f64) -> f64 {
    let norm = ecs_normalizer(alpha);
    norm * norm * alpha * alpha
}

/// `(|N,0⟩ + |0,N⟩)/√2`.
pub fn make_noon(n: u32, cutoff: Cutoff) -> Result<PureState2M> {
    if n == 0 {
        return Err(Error::InvalidProbe("NOON needs at least one photon"));
    }
    let n = n as usize;
    cutoff.require(n)?;
    let mut amplitudes = CVector::zeros(cutoff.two_mode_dim());
    let h = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
    amplitudes[cutoff.index(n, 0)] = h;
    amplitudes[cutoff.index(0, n)] = h;
    PureState2M::new(cutoff, amplitudes, 0.0)
}

/// Twin-Fock input `|N/2, N/2⟩` through a 50:50 beam splitter.
pub fn make_bat(n: u32, cutoff: Cutoff) -> Result<PureState2M> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::OddN(n));
    }
    cutoff.require(n as usize)?;
    let half = (n / 2) as usize;
    let twin = PureState2M::basis(half, half, cutoff)?;
    beam_splitter_5050(&twin, BsConvention::ModeTwoNegated)
}

fn ecs_tail(alpha: f64, dim: usize) -> f64 {
    let norm = ecs_normalizer(alpha);
    2.0 * norm * norm * coherent_tail_mass(alpha * alpha, dim)
}

/// 𝒩_α(|α⟩₁|0⟩₂ + |0⟩₁|α⟩₂), rejecting cutoffs that discard [`crate::TAIL_LIMIT`] or more.
pub fn make_ecs(alpha: f64, cutoff: Cutoff) -> Result<PureState2M> {
    make_ecs_with(alpha, cutoff, Truncation::Strict)
}

pub fn make_ecs_with(alpha: f64, cutoff: Cutoff, truncation: Truncation) -> Result<PureState2M> {
    ProbeSpec::ecs(alpha, cutoff).validate()?;
    let tail_mass = ecs_tail(alpha, cutoff.dim());
    truncation.check(tail_mass)?;
    let ray = coherent_vector_with(C64::new(alpha, 0.0), cutoff, Truncation::Lenient)?;
    let mut amplitudes = CVector::zeros(cutoff.two_mode_dim());
    for n in 0..cutoff.dim() {
        amplitudes[cutoff.index(n, 0)] += ray.amplitude(n);
        amplitudes[cutoff.index(0, n)] += ray.amplitude(n);
    }
    PureState2M::new(cutoff, amplitudes, tail_mass)
}

/// The two unnormalized-superposition rays `|α⟩|0⟩` and `|0⟩|α⟩` of the ECS.
pub fn ecs_rays(alpha: f64, cutoff: Cutoff) -> Result<(PureState2M, PureState2M)> {
    let ray = coherent_vector_with(C64::new(alpha, 0.0), cutoff, Truncation::Strict)?;
    let vac = FockVector::vacuum(cutoff);
    Ok((
        PureState2M::product(&ray, &vac)?,
        PureState2M::product(&vac, &ray)?,
    ))
}

/// Single-mode cat state N_α(|α⟩ + |−α⟩).
pub fn make_scs(alpha: f64, cutoff: Cutoff) -> Result<FockVector> {
    make_scs_with(alpha, cutoff, Truncation::Strict)
}

pub fn make_scs_with(alpha: f64, cutoff: Cutoff, truncation: Truncation) -> Result<FockVector> {
    ProbeSpec::scs(alpha, cutoff).validate()?;
    let norm = scs_normalizer(alpha);
    // even-n weights of |α⟩+|−α⟩ are 4 e^{-α²} α^{2n}/n!
    let tail_mass = (4.0 * norm * norm * poisson_tail(alpha * alpha, cutoff.dim(), true)).min(1.0);
    truncation.check(tail_mass)?;
    let plus = coherent_vector_with(C64::new(alpha, 0.0), cutoff, Truncation::Lenient)?;
    let minus = coherent_vector_with(C64::new(-alpha, 0.0), cutoff, Truncation::Lenient)?;
    FockVector::new(plus.amplitudes() + minus.amplitudes(), tail_mass)
}

fn single_photon(cutoff: Cutoff) -> Result<PureState2M> {
    make_noon(1, cutoff)
}

/// `N` copies of `(|1,0⟩ + |0,1⟩)/√2`.
pub fn make_uncorrelated(n: u32, cutoff: Cutoff) -> Result<Vec<PureState2M>> {
    if n == 0 {
        return Err(Error::InvalidProbe(
            "uncorrelated probe needs at least one photon",
        ));
    }
    let copy = single_photon(cutoff)?;
    Ok(vec![copy; n as usize])
}

/// `⟨a†₁a₁⟩` on the truncated space.
pub fn mean_photon_mode1<S: TwoModeState + ?Sized>(state: &S) -> f64 {
    let n1 = OperatorMatrix::number(state.cutoff(), Mode::One);
    state.expectation(&n1).map(|z| z.re).unwrap_or(f64::NAN)
}

/// Inverts 𝒩²_α α² = `target_n` by bisection on `[0, 2√target + 1]`.
pub fn alpha_for_mean_photons(target_n: f64) -> f64 {
    if !(target_n > 0.0) {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = 2.0 * math::sqrt(target_n) + 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let residual = ecs_mean_photons(mid) - target_n;
        if residual.abs() < 1e-12 || hi - lo < 1e-15 {
            return mid;
        }
        if residual > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Builds the ECS with α′ = √2·α from `|α⟩₁ ⊗ SCS(α)₂` on a 50:50 beam
/// splitter. Returns the output and its fidelity with `make_ecs(√2·α)`.
pub fn prepare_ecs_via_bs(alpha: f64, cutoff: Cutoff) -> Result<(PureState2M, f64)> {
    let alpha_out = core::f64::consts::SQRT_2 * alpha;
    Truncation::Strict.check(coherent_tail_mass(alpha_out * alpha_out, cutoff.dim()))?;
    let coherent = coherent_vector_with(C64::new(alpha, 0.0), cutoff, Truncation::Strict)?;
    let cat = make_scs(alpha, cutoff)?;
    let input = PureState2M::product(&coherent, &cat)?;
    let output = beam_splitter_5050(&input, BsConvention::ModeTwoNegated)?;
    let target = make_ecs(alpha_out, cutoff)?;
    let fidelity = output.fidelity(&target)?;
    Ok((output, fidelity))
}
