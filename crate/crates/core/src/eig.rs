//! Hermitian eigendecomposition with a reproducible eigenbasis.
//!
//! Backed by nalgebra's Householder tridiagonalization with implicit QR
//! sweeps. Eigenvalues come back ascending; each eigenvector is rotated so
//! its largest-magnitude component is real and positive, which pins the
//! otherwise free phase of every column.

use alloc::vec::Vec;

use nalgebra::{DVector, SymmetricEigen};

use crate::fock::{hermiticity_deviation, DensityOp2M, OperatorMatrix};
use crate::{CMatrix, Error, Result, C64};

/// Largest pre-symmetrization asymmetry accepted by [`hermitian_eig`].
pub const SYMMETRIZE_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct EigDecomposition {
    eigenvalues: DVector<f64>,
    eigenvectors: CMatrix,
}

impl EigDecomposition {
    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Column `i` is the unit eigenvector of eigenvalue `i`.
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `V·diag(λ)·V†`.
    pub fn reconstruct(&self) -> CMatrix {
        let v = &self.eigenvectors;
        let scaled = CMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * self.eigenvalues[j]);
        scaled * v.adjoint()
    }
}

fn pivot(column: &[C64]) -> usize {
    // first index of maximal modulus; ties within roundoff resolve to the lowest index
    let mut best = 0;
    let mut best_norm = -1.0;
    for (i, z) in column.iter().enumerate() {
        let n = z.norm();
        if n > best_norm * (1.0 + 1e-12) {
            best = i;
            best_norm = n;
        }
    }
    best
}

/// Full spectrum and orthonormal eigenbasis of a Hermitian matrix.
///
/// The input is symmetrized as `(m + m†)/2` first; an asymmetry larger
/// than [`SYMMETRIZE_TOL`] is rejected with [`Error::NotHermitian`].
pub fn hermitian_eig(m: &CMatrix) -> Result<EigDecomposition> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let deviation = hermiticity_deviation(m);
    if deviation > SYMMETRIZE_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(EigDecomposition {
            eigenvalues: DVector::zeros(0),
            eigenvectors: CMatrix::zeros(0, 0),
        });
    }
    if n == 1 {
        return Ok(EigDecomposition {
            eigenvalues: DVector::from_element(1, m[(0, 0)].re),
            eigenvectors: CMatrix::identity(1, 1),
        });
    }
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let raw = SymmetricEigen::new(sym);

    let mut columns: Vec<(f64, usize, Vec<C64>)> = (0..n)
        .map(|j| {
            let col: Vec<C64> = raw.eigenvectors.column(j).iter().copied().collect();
            let p = pivot(&col);
            (raw.eigenvalues[j], p, col)
        })
        .collect();
    columns.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut eigenvalues = DVector::zeros(n);
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (j, (value, p, col)) in columns.into_iter().enumerate() {
        eigenvalues[j] = value;
        let lead = col[p];
        let phase = if lead.norm() > 0.0 {
            lead.conj() / lead.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for (i, z) in col.into_iter().enumerate() {
            eigenvectors[(i, j)] = z * phase;
        }
    }
    Ok(EigDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

impl DensityOp2M {
    pub fn eig(&self) -> Result<EigDecomposition> {
        hermitian_eig(self.matrix())
    }
}

impl OperatorMatrix {
    pub fn eig(&self) -> Result<EigDecomposition> {
        hermitian_eig(&self.to_dense())
    }
}
