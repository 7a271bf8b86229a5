//! Phase shifter, 50:50 beam splitter and photon loss.
//!
//! Loss is modelled as a beam splitter of transmissivity `T` on each arm
//! whose reflected port is traced out. Two equivalent routes are provided:
//! the generic Kraus sum ([`apply_loss_both_modes`]) and, for the ECS, the
//! two-component closed form ([`ecs_lossy_closed_form`]).

use alloc::vec;
use alloc::vec::Vec;

use crate::fock::{
    coherent_tail_mass, coherent_vector_with, cutoff_for_coherent, Cutoff, DensityOp2M, FockVector,
    Mode, OperatorKind, OperatorMatrix, PureState2M, Truncation, TwoModeState,
};
use crate::states::ecs_normalizer;
use crate::{math, CMatrix, CVector, Error, Result, C64};

/// `U(φ, k) = exp(iφ (a†₂a₂)^k)`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PhaseSpec {
    pub phi: f64,
    pub k: u32,
}

impl PhaseSpec {
    /// Conventional phase shifter, `k = 1`.
    pub fn linear(phi: f64) -> Self {
        Self { phi, k: 1 }
    }

    pub fn nonlinear(phi: f64, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidProbe("phase order k must be positive"));
        }
        Ok(Self { phi, k })
    }

    /// Diagonal generator `(a†₂a₂)^k`.
    pub fn generator(&self, cutoff: Cutoff) -> OperatorMatrix {
        OperatorMatrix::number_power(cutoff, Mode::Two, self.k)
    }

    fn factors(&self, cutoff: Cutoff) -> Vec<C64> {
        (0..cutoff.dim())
            .map(|n| C64::from_polar(1.0, self.phi * math::powf(n as f64, self.k as f64)))
            .collect()
    }
}

pub trait PhaseShift: Sized {
    fn phase_shift(&self, spec: &PhaseSpec) -> Self;
}

impl PhaseShift for PureState2M {
    fn phase_shift(&self, spec: &PhaseSpec) -> Self {
        let cutoff = self.cutoff();
        let f = spec.factors(cutoff);
        let d = cutoff.dim();
        let amplitudes = CVector::from_fn(d * d, |i, _| self.amplitudes()[i] * f[i % d]);
        PureState2M::from_parts(cutoff, amplitudes, self.tail_mass())
    }
}

impl PhaseShift for DensityOp2M {
    fn phase_shift(&self, spec: &PhaseSpec) -> Self {
        let cutoff = self.cutoff();
        let f = spec.factors(cutoff);
        let d = cutoff.dim();
        let m = self.matrix();
        let matrix = CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
            f[i % d] * m[(i, j)] * f[j % d].conj()
        });
        DensityOp2M::from_parts(cutoff, matrix, self.tail_mass())
    }
}

pub fn phase_shift<S: PhaseShift>(state: &S, spec: &PhaseSpec) -> S {
    state.phase_shift(spec)
}

/// Sign convention of the 50:50 beam splitter. Mode 1 always maps as
/// `a†₁ → (b†₁ + b†₂)/√2`, so `|α⟩|0⟩ → |α/√2⟩|α/√2⟩`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum BsConvention {
    /// `a†₂ → (b†₁ − b†₂)/√2`: `|0⟩|β⟩ → |β/√2⟩|−β/√2⟩`, `|α⟩|α⟩ → |√2α⟩|0⟩`.
    ModeTwoNegated,
    /// `a†₂ → (b†₂ − b†₁)/√2`: `|0⟩|β⟩ → |−β/√2⟩|β/√2⟩`.
    ModeOneNegated,
}

/// Recombiner in front of the mode-2 parity readout. This is the sign
/// choice under which the numeric parity signal matches the closed form.
pub const PARITY_RECOMBINER: BsConvention = BsConvention::ModeOneNegated;

fn bs_amplitude(n1: usize, n2: usize, m1: usize, convention: BsConvention) -> f64 {
    // ⟨m1, n−m1| U |n1, n2⟩ from expanding (b†₁+b†₂)^{n1} (x b†₁ + y b†₂)^{n2}
    let n = n1 + n2;
    let m2 = n - m1;
    let norm = 0.5
        * (math::ln_factorial(m1) + math::ln_factorial(m2)
            - math::ln_factorial(n1)
            - math::ln_factorial(n2))
        - 0.5 * n as f64 * core::f64::consts::LN_2;
    let lo = m1.saturating_sub(n2);
    let hi = m1.min(n1);
    let mut acc = 0.0;
    for j in lo..=hi {
        let k = m1 - j;
        let negative = match convention {
            BsConvention::ModeTwoNegated => (n2 - k) % 2 == 1,
            BsConvention::ModeOneNegated => k % 2 == 1,
        };
        let mag = math::exp(math::ln_binomial(n1, j) + math::ln_binomial(n2, k) + norm);
        acc += if negative { -mag } else { mag };
    }
    acc
}

/// 50:50 beam splitter on both modes. Output components pushed past the
/// cutoff are dropped and counted into the tail mass.
pub fn beam_splitter_5050(state: &PureState2M, convention: BsConvention) -> Result<PureState2M> {
    let cutoff = state.cutoff();
    let d = cutoff.dim();
    let mut out = CVector::zeros(d * d);
    for (i, a) in state.amplitudes().iter().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let (n1, n2) = cutoff.levels(i);
        let n = n1 + n2;
        let first = n.saturating_sub(d - 1);
        for m1 in first..=n.min(d - 1) {
            out[cutoff.index(m1, n - m1)] += *a * bs_amplitude(n1, n2, m1, convention);
        }
    }
    let kept: f64 = out.iter().map(|z| z.norm_sqr()).sum();
    let dropped = (1.0 - kept).max(0.0);
    let tail_mass = state.tail_mass() + dropped;
    Truncation::Strict.check(tail_mass)?;
    PureState2M::new(cutoff, out, tail_mass)
}

fn check_transmissivity(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::BadTransmissivity(t));
    }
    Ok(())
}

/// Single-mode loss operators `K_l`, `l = 0..dim`, with
/// `⟨n−l|K_l|n⟩ = √C(n,l) (√T)^{n−l} (√(1−T))^l`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausSet {
    transmissivity: f64,
    cutoff: Cutoff,
    // row-major (l, n)
    table: Vec<f64>,
}

/// Loss operators for transmissivity `t`.
pub fn loss_kraus(t: f64, cutoff: Cutoff) -> Result<KrausSet> {
    check_transmissivity(t)?;
    let d = cutoff.dim();
    let mut table = vec![0.0; d * d];
    let (st, sr) = (math::sqrt(t), math::sqrt(1.0 - t));
    for l in 0..d {
        for n in l..d {
            let kept = if n == l {
                1.0
            } else {
                math::powf(st, (n - l) as f64)
            };
            let lost = if l == 0 {
                1.0
            } else {
                math::powf(sr, l as f64)
            };
            table[l * d + n] = math::sqrt(math::binomial(n, l)) * kept * lost;
        }
    }
    Ok(KrausSet {
        transmissivity: t,
        cutoff,
        table,
    })
}

impl KrausSet {
    pub fn transmissivity(&self) -> f64 {
        self.transmissivity
    }

    pub fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.cutoff.dim()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `⟨n−l|K_l|n⟩`, zero for `n < l`.
    pub fn coefficient(&self, l: usize, n: usize) -> f64 {
        if n < l {
            0.0
        } else {
            self.table[l * self.cutoff.dim() + n]
        }
    }

    pub fn element(&self, l: usize) -> OperatorMatrix {
        let d = self.cutoff.dim();
        let mut m = CMatrix::zeros(d, d);
        for n in l..d {
            m[(n - l, n)] = C64::new(self.coefficient(l, n), 0.0);
        }
        OperatorMatrix::dense(OperatorKind::Kraus(l), m).expect("square by construction")
    }

    pub fn elements(&self) -> Vec<OperatorMatrix> {
        (0..self.len()).map(|l| self.element(l)).collect()
    }

    /// Largest entry of `Σ K_l†K_l − 1`.
    pub fn completeness_deviation(&self) -> f64 {
        // K_l†K_l is diagonal with entries |⟨n−l|K_l|n⟩|²
        let d = self.cutoff.dim();
        (0..d)
            .map(|n| {
                let s: f64 = (0..=n)
                    .map(|l| {
                        let c = self.coefficient(l, n);
                        c * c
                    })
                    .sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Channel on a single-mode `dim × dim` density matrix.
    pub fn apply_single_mode(&self, rho: &CMatrix) -> Result<CMatrix> {
        let d = self.cutoff.dim();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: rho.nrows(),
            });
        }
        let mut out = CMatrix::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                let r = rho[(a, b)];
                if r.norm_sqr() == 0.0 {
                    continue;
                }
                for l in 0..=a.min(b) {
                    out[(a - l, b - l)] += r * (self.coefficient(l, a) * self.coefficient(l, b));
                }
            }
        }
        Ok(out)
    }
}

/// `ρ → Σ_{l,m} (K_l⊗K_m) ρ (K_l⊗K_m)†` with equal `T` on both arms.
pub fn apply_loss_both_modes<S: TwoModeState + ?Sized>(state: &S, t: f64) -> Result<DensityOp2M> {
    check_transmissivity(t)?;
    let rho = state.to_density();
    let cutoff = rho.cutoff();
    if t == 1.0 {
        return Ok(rho);
    }
    let side = cutoff.two_mode_dim();
    let m = rho.matrix();
    let mut out = CMatrix::zeros(side, side);
    if t == 0.0 {
        out[(0, 0)] = rho.trace();
        return Ok(DensityOp2M::from_parts(cutoff, out, rho.tail_mass()));
    }
    let kraus = loss_kraus(t, cutoff)?;
    for a in 0..side {
        let (a1, a2) = cutoff.levels(a);
        for b in 0..side {
            let r = m[(a, b)];
            if r.norm_sqr() == 0.0 {
                continue;
            }
            let (b1, b2) = cutoff.levels(b);
            for l in 0..=a1.min(b1) {
                let w1 = kraus.coefficient(l, a1) * kraus.coefficient(l, b1);
                for k in 0..=a2.min(b2) {
                    let w = w1 * kraus.coefficient(k, a2) * kraus.coefficient(k, b2);
                    out[(cutoff.index(a1 - l, a2 - k), cutoff.index(b1 - l, b2 - k))] += r * w;
                }
            }
        }
    }
    Ok(DensityOp2M::from_parts(cutoff, out, rho.tail_mass()))
}

/// Phase-imprinted ECS after equal loss on both arms, in two-component form
/// `ρ = P₀₀|S₀₀⟩⟨S₀₀| + P_D(ρ_L + ρ_R)`.
#[derive(Clone, Debug)]
pub struct LossyEcsDecomposition {
    pub alpha: f64,
    pub transmissivity: f64,
    pub phi: f64,
    /// Probability that neither loss port registers a photon.
    pub p00: f64,
    /// Weight of each one-sided loss branch.
    pub pd: f64,
    /// `|α√T⟩` in mode 1.
    pub s_left: FockVector,
    /// `|α√T e^{iφ}⟩` in mode 2.
    pub s_right: FockVector,
    pub s00: PureState2M,
    pub rho: DensityOp2M,
}

/// `P₀₀ = (e^{α²T} + 1)/(e^{α²} + 1)`, evaluated without overflow.
pub fn ecs_no_loss_probability(alpha: f64, t: f64) -> f64 {
    let x = alpha * alpha;
    math::exp(x * (t - 1.0)) * (1.0 + math::exp(-x * t)) / (1.0 + math::exp(-x))
}

/// `P_D = 𝒩²_α (1 − e^{α²(T−1)})`.
pub fn ecs_loss_branch_probability(alpha: f64, t: f64) -> f64 {
    let norm = ecs_normalizer(alpha);
    -norm * norm * math::expm1(alpha * alpha * (t - 1.0))
}

pub fn ecs_lossy_closed_form(
    alpha: f64,
    t: f64,
    phi: f64,
    cutoff: Cutoff,
) -> Result<LossyEcsDecomposition> {
    check_transmissivity(t)?;
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidProbe("alpha must be finite and non-negative"));
    }
    let beta = alpha * math::sqrt(t);
    let ray_tail = coherent_tail_mass(beta * beta, cutoff.dim());
    Truncation::Strict.check(ray_tail)?;
    let s_left = coherent_vector_with(C64::new(beta, 0.0), cutoff, Truncation::Strict)?;
    let s_right = coherent_vector_with(C64::from_polar(beta, phi), cutoff, Truncation::Strict)?;
    let vac = FockVector::vacuum(cutoff);

    let left = PureState2M::product(&s_left, &vac)?;
    let right = PureState2M::product(&vac, &s_right)?;
    let n_beta = ecs_normalizer(beta);
    let s00_tail = 2.0 * n_beta * n_beta * ray_tail;
    let s00 = PureState2M::new(cutoff, left.amplitudes() + right.amplitudes(), s00_tail)?;

    let p00 = ecs_no_loss_probability(alpha, t);
    let pd = ecs_loss_branch_probability(alpha, t);
    let proj = |v: &CVector| v * v.adjoint();
    let matrix = proj(s00.amplitudes()) * C64::new(p00, 0.0)
        + (proj(left.amplitudes()) + proj(right.amplitudes())) * C64::new(pd, 0.0);
    let tail_mass = p00 * s00_tail + 2.0 * pd * ray_tail;
    let rho = DensityOp2M::from_parts(cutoff, matrix, tail_mass);
    Ok(LossyEcsDecomposition {
        alpha,
        transmissivity: t,
        phi,
        p00,
        pd,
        s_left,
        s_right,
        s00,
        rho,
    })
}

/// Coherent tail below which truncated and untruncated ECS constructions
/// agree entrywise to about `1e-10`. Entry errors scale with the square root
/// of the discarded probability, not with the probability itself.
pub const VERIFICATION_TAIL: f64 = 1e-20;

/// `cutoff`, or a larger one on which rays of amplitude `alpha` are exact
/// to [`VERIFICATION_TAIL`].
pub fn verification_cutoff(alpha: f64, cutoff: Cutoff) -> Cutoff {
    cutoff_for_coherent(alpha * alpha, VERIFICATION_TAIL).max(cutoff)
}

/// The `2·dim − 1` basis states `|0,0⟩, |n,0⟩, |0,m⟩` spanned by two-ray states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportBasis {
    cutoff: Cutoff,
    indices: Vec<usize>,
}

/// Largest off-support weight [`reduced_support_basis`] tolerates.
pub const SUPPORT_LEAKAGE_TOL: f64 = 1e-10;

impl SupportBasis {
    pub fn two_ray(cutoff: Cutoff) -> Self {
        let d = cutoff.dim();
        let mut indices = Vec::with_capacity(2 * d - 1);
        indices.push(cutoff.index(0, 0));
        indices.extend((1..d).map(|n| cutoff.index(n, 0)));
        indices.extend((1..d).map(|m| cutoff.index(0, m)));
        indices.sort_unstable();
        Self { cutoff, indices }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Flattened two-mode indices, ascending.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn compress(&self, full: &CMatrix) -> CMatrix {
        let n = self.len();
        CMatrix::from_fn(n, n, |i, j| full[(self.indices[i], self.indices[j])])
    }

    pub fn expand(&self, compressed: &CMatrix) -> CMatrix {
        let side = self.cutoff.two_mode_dim();
        let mut full = CMatrix::zeros(side, side);
        for (i, &a) in self.indices.iter().enumerate() {
            for (j, &b) in self.indices.iter().enumerate() {
                full[(a, b)] = compressed[(i, j)];
            }
        }
        full
    }

    /// Largest modulus of any entry with a row or column off the support.
    pub fn leakage(&self, full: &CMatrix) -> f64 {
        let side = full.nrows();
        let mut on = vec![false; side];
        for &i in &self.indices {
            on[i] = true;
        }
        let mut worst = 0.0_f64;
        for i in 0..side {
            for j in 0..side {
                if !(on[i] && on[j]) {
                    worst = worst.max(full[(i, j)].norm());
                }
            }
        }
        worst
    }
}

/// Re-expresses a two-ray state on its `(2·dim − 1)`-dimensional support.
pub fn reduced_support_basis(rho: &DensityOp2M) -> Result<(SupportBasis, CMatrix)> {
    let basis = SupportBasis::two_ray(rho.cutoff());
    let leakage = basis.leakage(rho.matrix());
    if leakage > SUPPORT_LEAKAGE_TOL {
        return Err(Error::SupportLeakage { leakage });
    }
    let compressed = basis.compress(rho.matrix());
    Ok((basis, compressed))
}
