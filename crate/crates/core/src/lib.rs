//! Simulation engine for a cavity-coupled quantum-dot biexciton cascade driven
//! by a pulsed pump plus a CW control field (cavity-assisted adiabatic
//! passage), with LA-phonon coupling treated by a time-local polaron master
//! equation.
//!
//! The crate is `no_std` (it needs `alloc`). All frequencies and rates are
//! angular frequencies in ns⁻¹ with ħ = 1; see [`units`] for conversions.
//!
//! Layout:
//! - [`units`]: unit system, physical constants, and [`ModelParams`].
//! - [`linalg`]: dense complex matrices, Hermitian eigensolver, `expm`.
//! - [`hilbert`]: the QD ⊗ Fock basis and its operators.
//! - [`phonon`]: spectral density, IBM phase function, polaron Green functions.
//! - [`model`]: the polaron-frame Hamiltonian, drive operators, and collapse set.
//! - [`solver`]: the master-equation generator and time propagation.
//! - [`correlators`]: two-time correlators, photon number, indistinguishability,
//!   and the cavity-emitted spectrum.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod correlators;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod model;
pub mod phonon;
pub mod pipeline;
pub mod quadrature;
pub mod solver;
pub mod units;

pub use error::{Error, Result};
pub use linalg::{C64, CMatrix};
pub use units::{ModelParams, PulseShape, UnitSystem};

/// Engine version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
