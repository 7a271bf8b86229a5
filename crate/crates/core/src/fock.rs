//! Truncated Fock-space containers.
//!
//! A [`Cutoff`] keeps Fock levels `0..dim` on each mode. Single-mode kets are
//! [`FockVector`]s, two-mode kets are [`PureState2M`] and mixed two-mode
//! states are [`DensityOp2M`]. Every state carries the probability its
//! untruncated counterpart places beyond the cutoff (`tail_mass`), so callers
//! can refuse states whose truncation error exceeds [`TAIL_LIMIT`].

use crate::{math, CMatrix, CVector, Error, Result, C64, TAIL_LIMIT};

/// Entrywise Hermiticity tolerance for density operators.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Trace tolerance for density operators.
pub const TRACE_TOL: f64 = 1e-8;

/// Number of retained Fock levels per mode.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cutoff(usize);

impl Cutoff {
    /// Levels 0..=15 on each mode.
    pub const DEFAULT_DIM: usize = 16;

    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidCutoff(dim));
        }
        Ok(Self(dim))
    }

    pub fn dim(self) -> usize {
        self.0
    }

    pub fn max_occupation(self) -> usize {
        self.0 - 1
    }

    /// Side of the two-mode space, `dim²`.
    pub fn two_mode_dim(self) -> usize {
        self.0 * self.0
    }

    pub fn index(self, n1: usize, n2: usize) -> usize {
        debug_assert!(n1 < self.0 && n2 < self.0);
        n1 * self.0 + n2
    }

    pub fn levels(self, index: usize) -> (usize, usize) {
        (index / self.0, index % self.0)
    }

    pub fn doubled(self) -> Self {
        Self(2 * self.0)
    }

    pub(crate) fn require(self, occupation: usize) -> Result<()> {
        if occupation >= self.0 {
            return Err(Error::CutoffTooSmall {
                required: occupation,
                dim: self.0,
            });
        }
        Ok(())
    }
}

impl Default for Cutoff {
    fn default() -> Self {
        Self(Self::DEFAULT_DIM)
    }
}

/// One of the two interferometer arms.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    One,
    Two,
}

/// Whether a constructor may silently discard more than [`TAIL_LIMIT`].
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum Truncation {
    #[default]
    Strict,
    Lenient,
}

impl Truncation {
    pub(crate) fn check(self, tail_mass: f64) -> Result<()> {
        if self == Truncation::Strict && tail_mass >= TAIL_LIMIT {
            return Err(Error::TruncationOverflow {
                tail_mass,
                limit: TAIL_LIMIT,
            });
        }
        Ok(())
    }
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

fn normalize(amplitudes: &mut CVector) -> Result<()> {
    let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::ZeroNorm);
    }
    let scale = 1.0 / math::sqrt(norm);
    amplitudes.iter_mut().for_each(|a| *a *= scale);
    Ok(())
}

/// Normalized single-mode ket on `0..dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    amplitudes: CVector,
    tail_mass: f64,
}

impl FockVector {
    /// Normalizes `amplitudes`; fails on a zero vector.
    pub fn new(mut amplitudes: CVector, tail_mass: f64) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::InvalidCutoff(amplitudes.len()));
        }
        normalize(&mut amplitudes)?;
        Ok(Self {
            amplitudes,
            tail_mass,
        })
    }

    pub fn vacuum(cutoff: Cutoff) -> Self {
        Self::number(0, cutoff).expect("vacuum fits every cutoff")
    }

    pub fn number(n: usize, cutoff: Cutoff) -> Result<Self> {
        cutoff.require(n)?;
        let mut amplitudes = CVector::zeros(cutoff.dim());
        amplitudes[n] = one();
        Ok(Self {
            amplitudes,
            tail_mass: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn cutoff(&self) -> Cutoff {
        Cutoff(self.dim())
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, n: usize) -> C64 {
        self.amplitudes[n]
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|self⟩⟨self|` as a `dim × dim` matrix.
    pub fn projector(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }
}

/// Probability `Σ_{n ≥ dim} e^{-x} xⁿ/n!` that a coherent state with
/// `|α|² = x` places beyond the cutoff.
pub fn coherent_tail_mass(abs2: f64, dim: usize) -> f64 {
    poisson_tail(abs2, dim, false)
}

/// Poisson tail from `dim` upward; `even_only` keeps even `n` only.
/// Smallest cutoff whose coherent tail for `|α|² = abs2` is below `tail`.
pub fn cutoff_for_coherent(abs2: f64, tail: f64) -> Cutoff {
    let mut dim = 2;
    while coherent_tail_mass(abs2, dim) >= tail && dim < 4096 {
        dim += 1;
    }
    Cutoff(dim)
}

pub(crate) fn poisson_tail(abs2: f64, dim: usize, even_only: bool) -> f64 {
    if abs2 <= 0.0 {
        return 0.0;
    }
    let ln_x = math::ln(abs2);
    let mut term = math::exp(-abs2 + dim as f64 * ln_x - math::ln_factorial(dim));
    let mut sum = 0.0;
    let mut n = dim;
    loop {
        if !even_only || n.is_multiple_of(2) {
            sum += term;
        }
        n += 1;
        term *= abs2 / n as f64;
        let past_peak = n as f64 > abs2;
        if (past_peak && term <= 1e-18 * sum) || term == 0.0 || n > dim + 100_000 {
            break;
        }
    }
    sum.min(1.0)
}

/// Truncated coherent state `|α⟩`, renormalized on `0..dim`.
///
/// Fails with [`Error::TruncationOverflow`] when the discarded tail reaches
/// [`TAIL_LIMIT`]; use [`coherent_vector_with`] to accept it anyway.
pub fn coherent_vector(alpha: C64, cutoff: Cutoff) -> Result<FockVector> {
    coherent_vector_with(alpha, cutoff, Truncation::Strict)
}

pub fn coherent_vector_with(
    alpha: C64,
    cutoff: Cutoff,
    truncation: Truncation,
) -> Result<FockVector> {
    let abs2 = alpha.norm_sqr();
    let tail_mass = coherent_tail_mass(abs2, cutoff.dim());
    truncation.check(tail_mass)?;
    let mut amplitudes = CVector::zeros(cutoff.dim());
    let mut c = C64::new(math::exp(-abs2 / 2.0), 0.0);
    amplitudes[0] = c;
    for n in 1..cutoff.dim() {
        c = c * alpha / math::sqrt(n as f64);
        amplitudes[n] = c;
    }
    if abs2 == 0.0 {
        return Ok(FockVector::vacuum(cutoff));
    }
    FockVector::new(amplitudes, tail_mass)
}

/// Normalized two-mode ket, amplitudes flattened as `n1 * dim + n2`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState2M {
    amplitudes: CVector,
    cutoff: Cutoff,
    tail_mass: f64,
}

impl PureState2M {
    /// Normalizes `amplitudes`, which must have length `dim²`.
    pub fn new(cutoff: Cutoff, mut amplitudes: CVector, tail_mass: f64) -> Result<Self> {
        if amplitudes.len() != cutoff.two_mode_dim() {
            return Err(Error::DimensionMismatch {
                expected: cutoff.two_mode_dim(),
                found: amplitudes.len(),
            });
        }
        normalize(&mut amplitudes)?;
        Ok(Self {
            amplitudes,
            cutoff,
            tail_mass,
        })
    }

    pub fn basis(n1: usize, n2: usize, cutoff: Cutoff) -> Result<Self> {
        cutoff.require(n1.max(n2))?;
        let mut amplitudes = CVector::zeros(cutoff.two_mode_dim());
        amplitudes[cutoff.index(n1, n2)] = one();
        Ok(Self {
            amplitudes,
            cutoff,
            tail_mass: 0.0,
        })
    }

    pub fn vacuum(cutoff: Cutoff) -> Self {
        Self::basis(0, 0, cutoff).expect("vacuum fits every cutoff")
    }

    /// `|a⟩₁ ⊗ |b⟩₂`.
    pub fn product(a: &FockVector, b: &FockVector) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                found: b.dim(),
            });
        }
        let cutoff = a.cutoff();
        let d = cutoff.dim();
        let amplitudes = CVector::from_fn(d * d, |i, _| a.amplitudes[i / d] * b.amplitudes[i % d]);
        let tail_mass = 1.0 - (1.0 - a.tail_mass) * (1.0 - b.tail_mass);
        Self::new(cutoff, amplitudes, tail_mass)
    }

    pub(crate) fn from_parts(cutoff: Cutoff, amplitudes: CVector, tail_mass: f64) -> Self {
        Self {
            amplitudes,
            cutoff,
            tail_mass,
        }
    }

    pub fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, n1: usize, n2: usize) -> C64 {
        self.amplitudes[self.cutoff.index(n1, n2)]
    }

    /// Probability the untruncated state places outside the grid.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState2M) -> Result<C64> {
        if self.cutoff != other.cutoff {
            return Err(Error::DimensionMismatch {
                expected: self.cutoff.two_mode_dim(),
                found: other.cutoff.two_mode_dim(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn fidelity(&self, other: &PureState2M) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Probability on the outermost retained level of either mode.
    pub fn boundary_mass(&self) -> f64 {
        let top = self.cutoff.max_occupation();
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let (n1, n2) = self.cutoff.levels(*i);
                n1 == top || n2 == top
            })
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Number of basis states with probability above `threshold`.
    pub fn support_size(&self, threshold: f64) -> usize {
        self.amplitudes
            .iter()
            .filter(|a| a.norm_sqr() > threshold)
            .count()
    }

    pub fn projector(&self) -> DensityOp2M {
        let matrix = &self.amplitudes * self.amplitudes.adjoint();
        DensityOp2M::from_parts(self.cutoff, matrix, self.tail_mass)
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }
}

pub(crate) fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Hermitian, unit-trace two-mode density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOp2M {
    matrix: CMatrix,
    cutoff: Cutoff,
    tail_mass: f64,
}

impl DensityOp2M {
    /// Validates shape, Hermiticity (entrywise [`HERMITIAN_TOL`]) and trace
    /// ([`TRACE_TOL`]).
    pub fn new(cutoff: Cutoff, matrix: CMatrix, tail_mass: f64) -> Result<Self> {
        let side = cutoff.two_mode_dim();
        if matrix.nrows() != side || matrix.ncols() != side {
            return Err(Error::DimensionMismatch {
                expected: side,
                found: matrix.nrows(),
            });
        }
        let deviation = hermiticity_deviation(&matrix);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = matrix.trace();
        if (trace - one()).norm() > TRACE_TOL {
            return Err(Error::NotDensityOperator("trace differs from 1"));
        }
        Ok(Self {
            matrix,
            cutoff,
            tail_mass,
        })
    }

    pub(crate) fn from_parts(cutoff: Cutoff, matrix: CMatrix, tail_mass: f64) -> Self {
        Self {
            matrix,
            cutoff,
            tail_mass,
        }
    }

    /// Maximally mixed state on the full truncated space.
    pub fn maximally_mixed(cutoff: Cutoff) -> Self {
        let side = cutoff.two_mode_dim();
        let matrix = CMatrix::identity(side, side) / C64::new(side as f64, 0.0);
        Self::from_parts(cutoff, matrix, 0.0)
    }

    pub fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(&self.matrix)
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &DensityOp2M) -> Result<f64> {
        max_abs_diff(&self.matrix, &other.matrix)
    }
}

pub(crate) fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    Ok(a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max))
}

/// Role of an [`OperatorMatrix`].
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    Number(Mode),
    /// `(a†a)^k` on one mode, the generator of the order-`k` phase shifter.
    NumberPower(Mode, u32),
    Parity(Mode),
    Identity,
    Phase,
    BeamSplitter,
    Kraus(usize),
    Custom,
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Diagonal(CVector),
    Dense(CMatrix),
}

/// Square operator on a single-mode (`dim`) or two-mode (`dim²`) space.
/// Diagonal operators are stored as their diagonal only.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    kind: OperatorKind,
    repr: Repr,
}

fn two_mode_diagonal(cutoff: Cutoff, mode: Mode, f: impl Fn(usize) -> f64) -> CVector {
    CVector::from_fn(cutoff.two_mode_dim(), |i, _| {
        let (n1, n2) = cutoff.levels(i);
        let n = match mode {
            Mode::One => n1,
            Mode::Two => n2,
        };
        C64::new(f(n), 0.0)
    })
}

fn parity_sign(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl OperatorMatrix {
    /// Two-mode `a†a` on `mode`.
    pub fn number(cutoff: Cutoff, mode: Mode) -> Self {
        Self::number_power(cutoff, mode, 1)
    }

    /// Two-mode `(a†a)^k` on `mode`.
    pub fn number_power(cutoff: Cutoff, mode: Mode, k: u32) -> Self {
        let kind = if k == 1 {
            OperatorKind::Number(mode)
        } else {
            OperatorKind::NumberPower(mode, k)
        };
        let diag = two_mode_diagonal(cutoff, mode, |n| math::powf(n as f64, k as f64));
        Self {
            kind,
            repr: Repr::Diagonal(diag),
        }
    }

    /// Two-mode `(−1)^{a†a}` on `mode`.
    pub fn parity(cutoff: Cutoff, mode: Mode) -> Self {
        let diag = two_mode_diagonal(cutoff, mode, parity_sign);
        Self {
            kind: OperatorKind::Parity(mode),
            repr: Repr::Diagonal(diag),
        }
    }

    pub fn single_mode_number(cutoff: Cutoff) -> Self {
        let diag = CVector::from_fn(cutoff.dim(), |n, _| C64::new(n as f64, 0.0));
        Self {
            kind: OperatorKind::Number(Mode::One),
            repr: Repr::Diagonal(diag),
        }
    }

    pub fn single_mode_parity(cutoff: Cutoff) -> Self {
        let diag = CVector::from_fn(cutoff.dim(), |n, _| C64::new(parity_sign(n), 0.0));
        Self {
            kind: OperatorKind::Parity(Mode::One),
            repr: Repr::Diagonal(diag),
        }
    }

    pub fn identity(side: usize) -> Self {
        let diag = CVector::from_element(side, one());
        Self {
            kind: OperatorKind::Identity,
            repr: Repr::Diagonal(diag),
        }
    }

    pub fn diagonal(kind: OperatorKind, entries: CVector) -> Self {
        Self {
            kind,
            repr: Repr::Diagonal(entries),
        }
    }

    pub fn dense(kind: OperatorKind, matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        Ok(Self {
            kind,
            repr: Repr::Dense(matrix),
        })
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn side(&self) -> usize {
        match &self.repr {
            Repr::Diagonal(d) => d.len(),
            Repr::Dense(m) => m.nrows(),
        }
    }

    pub fn diagonal_entries(&self) -> Option<&CVector> {
        match &self.repr {
            Repr::Diagonal(d) => Some(d),
            Repr::Dense(_) => None,
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        match &self.repr {
            Repr::Diagonal(d) => CMatrix::from_diagonal(d),
            Repr::Dense(m) => m.clone(),
        }
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        match &self.repr {
            Repr::Diagonal(d) => d.iter().map(|z| z.im.abs()).fold(0.0, f64::max),
            Repr::Dense(m) => hermiticity_deviation(m),
        }
    }

    fn check_side(&self, side: usize) -> Result<()> {
        if self.side() != side {
            return Err(Error::DimensionMismatch {
                expected: self.side(),
                found: side,
            });
        }
        Ok(())
    }

    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        self.check_side(v.len())?;
        Ok(match &self.repr {
            Repr::Diagonal(d) => d.component_mul(v),
            Repr::Dense(m) => m * v,
        })
    }

    /// `O·M`.
    pub fn mul_left(&self, m: &CMatrix) -> Result<CMatrix> {
        self.check_side(m.nrows())?;
        Ok(match &self.repr {
            Repr::Diagonal(d) => CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| d[i] * m[(i, j)]),
            Repr::Dense(o) => o * m,
        })
    }

    /// `M·O`.
    pub fn mul_right(&self, m: &CMatrix) -> Result<CMatrix> {
        self.check_side(m.ncols())?;
        Ok(match &self.repr {
            Repr::Diagonal(d) => CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * d[j]),
            Repr::Dense(o) => m * o,
        })
    }

    fn squared(&self) -> OperatorMatrix {
        let repr = match &self.repr {
            Repr::Diagonal(d) => Repr::Diagonal(d.component_mul(d)),
            Repr::Dense(m) => Repr::Dense(m * m),
        };
        OperatorMatrix {
            kind: OperatorKind::Custom,
            repr,
        }
    }
}

fn trace_product(rho: &CMatrix, op: &OperatorMatrix) -> C64 {
    match &op.repr {
        Repr::Diagonal(d) => (0..d.len()).map(|i| rho[(i, i)] * d[i]).sum(),
        Repr::Dense(o) => {
            let n = rho.nrows();
            let mut acc = zero();
            for i in 0..n {
                for j in 0..n {
                    acc += rho[(i, j)] * o[(j, i)];
                }
            }
            acc
        }
    }
}

/// Common surface of pure and mixed two-mode states.
pub trait TwoModeState {
    fn cutoff(&self) -> Cutoff;
    fn tail_mass(&self) -> f64;
    /// `⟨O⟩`.
    fn expectation(&self, op: &OperatorMatrix) -> Result<C64>;
    fn to_density(&self) -> DensityOp2M;
}

impl TwoModeState for PureState2M {
    fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    fn expectation(&self, op: &OperatorMatrix) -> Result<C64> {
        let image = op.apply(&self.amplitudes)?;
        Ok(self.amplitudes.dotc(&image))
    }

    fn to_density(&self) -> DensityOp2M {
        self.projector()
    }
}

impl TwoModeState for DensityOp2M {
    fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    fn expectation(&self, op: &OperatorMatrix) -> Result<C64> {
        op.check_side(self.matrix.nrows())?;
        Ok(trace_product(&self.matrix, op))
    }

    fn to_density(&self) -> DensityOp2M {
        self.clone()
    }
}

/// Mean and variance of a Hermitian observable.
pub fn observable_moments<S: TwoModeState + ?Sized>(
    state: &S,
    obs: &OperatorMatrix,
) -> Result<(f64, f64)> {
    let deviation = obs.hermiticity_deviation();
    if deviation > 1e-8 {
        return Err(Error::NotHermitian { deviation });
    }
    let mean = state.expectation(obs)?.re;
    let second = state.expectation(&obs.squared())?.re;
    Ok((mean, (second - mean * mean).max(0.0)))
}
