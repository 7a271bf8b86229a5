//! Two-mode bosonic phase estimation on a truncated Fock space.
//!
//! The crate builds NOON, BAT, entangled-coherent (ECS), cat and uncorrelated
//! single-photon probes, pushes them through a mode-2 phase shifter followed by
//! equal photon loss on both arms, and evaluates the quantum Fisher information
//! (QFI) and the resulting Cramér–Rao phase bound. A parity readout on the
//! recombined output is available both in closed form and numerically.
//!
//! Everything here is `no_std` (with `alloc`). File formats, sweeps and the
//! command-line front end live in the `ecsmetro` crate.
//!
//! # Layout
//! - [`fock`]: cutoffs, single- and two-mode containers, operators, moments.
//! - [`eig`]: deterministic Hermitian eigendecomposition.
//! - [`states`]: probe-state constructors and resource matching.
//! - [`channels`]: phase shifter, beam splitter, loss channels.
//! - [`metrology`]: QFI for pure and mixed states, Cramér–Rao bound, parity.
//!
//! Two-mode amplitudes are stored flattened with index `n1 * dim + n2`.
//!
//! ```
//! use ecsmetro_core::{fock::Cutoff, states, metrology};
//!
//! let cutoff = Cutoff::default();
//! let noon = states::make_noon(4, cutoff).unwrap();
//! let qfi = metrology::qfi_pure(&noon, &metrology::default_generator(cutoff)).unwrap();
//! assert!((qfi.delta_phi - 0.25).abs() < 1e-12);
//! ```
#![no_std]
// `!(x > 0.0)` is used on purpose so NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod channels;
pub mod eig;
mod error;
pub mod fock;
mod math;
pub mod metrology;
pub mod states;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Dense complex matrix used for every operator and density matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;

/// Largest discarded probability a state may carry into a metrology computation.
pub const TAIL_LIMIT: f64 = 1e-5;
