//! Magnons in Heisenberg ferromagnets at large spin.
//!
//! The crate is organised in four layers:
//!
//! * [`lattice`]: periodic lattices, displacement-keyed exchange couplings,
//!   their lattice Fourier transforms and the ferromagnetic-regime check.
//! * [`spinwave`]: the infinite-spin quasi-free theory. Magnon occupation,
//!   dispersion, the self-consistent magnetization and its low-temperature bound.
//! * [`oracle`]: exact Gibbs states of the rescaled Heisenberg Hamiltonian at
//!   finite spin, block-diagonalised by per-site total-spin sectors, with the
//!   fluctuation-operator observables used to test the large-spin predictions.
//! * [`dynamics`]: Gaussian magnon states evolved exactly under the quadratic
//!   magnon Hamiltonian, and the site-resolved number-density equation of motion.
//!
//! Conventions: spin operators are Pauli sums, so `S3(x)` on `n = 2S+1` copies
//! has eigenvalues `-n, -n+2, ..., n`, and `S±(x) = Σ_i (σ¹_i ± iσ²_i)/2`.
//! A positive field favours `S3 = -n`, so magnetizations live in `[-1, 0]`.

pub mod dynamics;
pub mod error;
pub mod lattice;
pub mod oracle;
pub mod output;
pub mod spinwave;

pub use error::{Error, Result};
