//! Operators on the composite space (4-level QD) ⊗ (cavity Fock space
//! truncated at `n_max` photons).
//!
//! Basis ordering: QD levels |g⟩, |X⟩, |Y⟩, |XX⟩ (outer index) tensored with
//! Fock states |0⟩…|n_max⟩ (inner index), so basis index = 4-level index ·
//! (n_max+1) + photon number.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

/// Quantum-dot level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    G = 0,
    X = 1,
    Y = 2,
    XX = 3,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::G, Level::X, Level::Y, Level::XX];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }
}

/// The operator set of one truncation: dyads σ_ij ⊗ 1, a, a†, a†a.
#[derive(Clone, Debug)]
pub struct BasisOperators {
    n_max: usize,
    dyads: Vec<CMatrix>,
    pub a: CMatrix,
    pub a_dag: CMatrix,
    pub number: CMatrix,
    pub identity: CMatrix,
}

impl BasisOperators {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::invalid("n_max", "must be >= 1"));
        }
        let nf = n_max + 1;
        let d = 4 * nf;
        let fock_id = CMatrix::identity(nf);
        let mut dyads = Vec::with_capacity(16);
        for i in 0..4 {
            for j in 0..4 {
                dyads.push(CMatrix::unit(4, i, j).kron(&fock_id));
            }
        }
        let a_fock = annihilation(n_max);
        let a = CMatrix::identity(4).kron(&a_fock);
        let a_dag = a.adjoint();
        let number = a_dag.matmul(&a);
        Ok(BasisOperators { n_max, dyads, a, a_dag, number, identity: CMatrix::identity(d) })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        4 * (self.n_max + 1)
    }

    /// `|i⟩⟨j| ⊗ 1`.
    pub fn dyad(&self, i: Level, j: Level) -> &CMatrix {
        &self.dyads[4 * i.index() + j.index()]
    }

    /// Projector `|i⟩⟨i| ⊗ 1`.
    pub fn projector(&self, i: Level) -> &CMatrix {
        self.dyad(i, i)
    }

    /// Composite basis index of `|level⟩ ⊗ |n⟩`.
    pub fn index(&self, level: Level, n: usize) -> usize {
        debug_assert!(n <= self.n_max);
        level.index() * (self.n_max + 1) + n
    }

    /// Pure state `|level, n⟩⟨level, n|`.
    pub fn pure_state(&self, level: Level, n: usize) -> CMatrix {
        let k = self.index(level, n);
        CMatrix::unit(self.dim(), k, k)
    }
}

/// Truncated Fock annihilation operator, a|n⟩ = √n |n−1⟩.
pub fn annihilation(n_max: usize) -> CMatrix {
    let mut a = CMatrix::zeros(n_max + 1);
    for n in 1..=n_max {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// `Tr(op · rho)`.
pub fn expectation(rho: &CMatrix, op: &CMatrix) -> Result<C64> {
    if rho.dim() != op.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), found: rho.dim() });
    }
    Ok(op.trace_product(rho))
}

/// A density matrix with its time tag.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    pub time: f64,
    pub rho: CMatrix,
}

impl DensityMatrix {
    /// QD in |g⟩, cavity in vacuum.
    pub fn ground(ops: &BasisOperators) -> Self {
        DensityMatrix { time: 0.0, rho: ops.pure_state(Level::G, 0) }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix { time: 0.0, rho: CMatrix::identity(dim).scale_real(1.0 / dim as f64) }
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn expectation(&self, op: &CMatrix) -> Result<C64> {
        expectation(&self.rho, op)
    }

    pub fn population(&self, ops: &BasisOperators, level: Level) -> f64 {
        ops.projector(level).trace_product(&self.rho).re
    }
}
