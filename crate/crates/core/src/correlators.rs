//! Two-time cavity correlators from the quantum regression theorem and the
//! figures of merit derived from them.
//!
//! For each outer time t the seeds Λ₁(t;0) = aρ(t) and Λ₂(t;0) = aρ(t)a† are
//! propagated in τ under the same time-dependent generator as ρ (absolute
//! time t+τ, pump included), giving
//!
//! - g1(t,τ) = ⟨a†(t+τ)a(t)⟩ = Tr[a† Λ₁(t;τ)], whose conjugate is
//!   ⟨a†(t)a(t+τ)⟩,
//! - g2(t,τ) = ⟨a†(t)a†(t+τ)a(t+τ)a(t)⟩ = Tr[a†a Λ₂(t;τ)].
//!
//! Once a seed reaches the constant-generator tail, Tr[A e^{Ls} Λ] is read
//! off with precomputed row vectors vec(Aᵀ)ᵀ e^{Ls}, so a full table costs one
//! dot product per entry.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::quadrature;
use crate::solver::{Propagator, Trajectory};

/// Cavity occupation below which the run counts as fully decayed.
pub const DECAY_THRESHOLD: f64 = 1e-5;
/// Relative tail mass tolerated by the two-time integrals.
pub const TAIL_TOLERANCE: f64 = 1e-4;

/// Emitted photon number and its running integral.
#[derive(Clone, Debug, PartialEq)]
pub struct Emission {
    /// N_e = ∫₀^T κ⟨a†a⟩ dt.
    pub photon_number: f64,
    /// P_e(t) on the outer grid.
    pub cumulative: Vec<f64>,
}

/// N_e and P_e(t) by trapezoid on the trajectory grid.
pub fn emitted_photon_number(traj: &Trajectory, number: &CMatrix, kappa: f64) -> Result<Emission> {
    let n = traj.expectation(number);
    let remaining = *n.last().unwrap_or(&0.0);
    if remaining >= DECAY_THRESHOLD {
        return Err(Error::NotDecayed { remaining });
    }
    let flux: Vec<f64> = n.iter().map(|v| kappa * v).collect();
    let cumulative = quadrature::cumulative_trapezoid(&flux, traj.grid.outer_dt);
    Ok(Emission { photon_number: *cumulative.last().unwrap_or(&0.0), cumulative })
}

/// Two-time tables on the outer grid. Row `k` holds τ = 0, h, …, (K−k)h.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationGrid {
    /// Grid spacing h (both t and τ), ns.
    pub step: f64,
    /// ⟨a†a⟩(t_k).
    pub n: Vec<f64>,
    /// ⟨a†(t+τ)a(t)⟩.
    pub g1: Vec<Vec<C64>>,
    /// ⟨a†(t)a†(t+τ)a(t+τ)a(t)⟩.
    pub g2: Vec<Vec<f64>>,
}

impl CorrelationGrid {
    pub fn len(&self) -> usize {
        self.n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    /// ⟨a†(t)a(t+τ)⟩, the conjugate ordering.
    pub fn g1_forward(&self, k: usize, s: usize) -> C64 {
        self.g1[k][s].conj()
    }
}

/// Row vectors vec(Aᵀ)ᵀ e^{L·s·h} for s = 0..len.
fn observable_rows(prop: &Propagator<'_>, obs: &CMatrix, len: usize) -> Vec<Vec<C64>> {
    let mut rows = Vec::with_capacity(len);
    let mut w = obs.transpose().into_vec();
    for _ in 0..len {
        let next = prop.step_superoperator().vecmat(&w);
        rows.push(w);
        w = next;
    }
    rows
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Shared state for computing correlation rows; rows are independent and may
/// be evaluated in any order or concurrently.
pub struct RegressionPlan<'p, 'm> {
    prop: &'p Propagator<'m>,
    traj: &'p Trajectory,
    a: CMatrix,
    a_dag: CMatrix,
    number: CMatrix,
    w_g1: Vec<Vec<C64>>,
    w_g2: Vec<Vec<C64>>,
}

/// One row of the correlation tables.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationRow {
    pub g1: Vec<C64>,
    pub g2: Vec<f64>,
}

impl<'p, 'm> RegressionPlan<'p, 'm> {
    pub fn new(prop: &'p Propagator<'m>, traj: &'p Trajectory) -> Result<Self> {
        let expected = prop.grid().len();
        if traj.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: traj.len() });
        }
        let ops = &prop.model().ops;
        let tail_len = expected - prop.tail_start().min(expected - 1);
        Ok(RegressionPlan {
            prop,
            traj,
            a: ops.a.clone(),
            a_dag: ops.a_dag.clone(),
            number: ops.number.clone(),
            w_g1: observable_rows(prop, &ops.a_dag, tail_len),
            w_g2: observable_rows(prop, &ops.number, tail_len),
        })
    }

    pub fn rows(&self) -> usize {
        self.traj.len()
    }

    /// Correlators for outer index `k`, τ = 0 … t_end − t_k.
    pub fn row(&self, k: usize) -> CorrelationRow {
        let last = self.traj.len() - 1;
        let rho = &self.traj.states[k];
        let mut l1 = self.a.matmul(rho);
        let mut l2 = l1.matmul(&self.a_dag);
        let mut g1 = Vec::with_capacity(last - k + 1);
        let mut g2 = Vec::with_capacity(last - k + 1);
        let tail = self.prop.tail_start();
        let mut j = k;
        while j < last && j < tail {
            g1.push(self.a_dag.trace_product(&l1));
            g2.push(self.number.trace_product(&l2).re);
            l1 = self.prop.step_outer(j, &l1);
            l2 = self.prop.step_outer(j, &l2);
            j += 1;
        }
        for s in 0..=(last - j) {
            g1.push(dot(&self.w_g1[s], l1.as_slice()));
            g2.push(dot(&self.w_g2[s], l2.as_slice()).re);
        }
        CorrelationRow { g1, g2 }
    }

    /// Assembles rows (in index order) into a grid.
    pub fn assemble(&self, rows: Vec<CorrelationRow>) -> CorrelationGrid {
        let n = self.traj.expectation(&self.number);
        let (g1, g2) = rows.into_iter().map(|r| (r.g1, r.g2)).unzip();
        CorrelationGrid { step: self.traj.grid.outer_dt, n, g1, g2 }
    }

    /// All rows, sequentially.
    pub fn compute(&self) -> CorrelationGrid {
        let rows = (0..self.rows()).map(|k| self.row(k)).collect();
        self.assemble(rows)
    }
}

/// Both correlator tables for a trajectory.
pub fn correlation_grid(prop: &Propagator<'_>, traj: &Trajectory) -> Result<CorrelationGrid> {
    Ok(RegressionPlan::new(prop, traj)?.compute())
}

/// g1(t,τ) = ⟨a†(t+τ)a(t)⟩ table.
pub fn regression_g1(prop: &Propagator<'_>, traj: &Trajectory) -> Result<Vec<Vec<C64>>> {
    Ok(correlation_grid(prop, traj)?.g1)
}

/// g2(t,τ) table.
pub fn regression_g2(prop: &Propagator<'_>, traj: &Trajectory) -> Result<Vec<Vec<f64>>> {
    Ok(correlation_grid(prop, traj)?.g2)
}

/// 2-D trapezoid over the triangle 0 ≤ t ≤ T, 0 ≤ τ ≤ T − t.
fn triangle_integral(grid: &CorrelationGrid, f: impl Fn(usize, usize) -> f64) -> f64 {
    let h = grid.step;
    let rows = grid.len();
    let row_integrals: Vec<f64> = (0..rows)
        .map(|k| {
            let vals: Vec<f64> = (0..rows - k).map(|s| f(k, s)).collect();
            quadrature::trapezoid(&vals, h)
        })
        .collect();
    quadrature::trapezoid(&row_integrals, h)
}

/// I = ½[1 − ∬(g2 − |g1|²) / ∬ n(t)n(t+τ)].
pub fn indistinguishability(grid: &CorrelationGrid) -> Result<f64> {
    if grid.len() < 2 {
        return Err(Error::NoEmission);
    }
    let peak = grid.n.iter().fold(0.0f64, |m, &v| m.max(v));
    if !(peak > 0.0) {
        return Err(Error::NoEmission);
    }
    let remaining = grid.n[grid.len() - 1];
    if remaining > TAIL_TOLERANCE * peak {
        return Err(Error::NotDecayed { remaining });
    }
    let numerator = triangle_integral(grid, |k, s| grid.g2[k][s] - grid.g1[k][s].norm_sqr());
    let denominator = triangle_integral(grid, |k, s| grid.n[k] * grid.n[k + s]);
    if !(denominator > 1e-300) {
        return Err(Error::NoEmission);
    }
    Ok(0.5 * (1.0 - numerator / denominator))
}

/// Time-averaged first-order correlation ∫₀^{T−τ} ⟨a†(t+τ)a(t)⟩ dt for each τ.
pub fn time_averaged_g1(grid: &CorrelationGrid) -> Vec<C64> {
    let rows = grid.len();
    (0..rows)
        .map(|s| {
            let vals: Vec<C64> = (0..rows - s).map(|k| grid.g1[k][s]).collect();
            quadrature::trapezoid_complex(&vals, grid.step)
        })
        .collect()
}

/// S_c(ω) = Re ∫₀^∞ dτ e^{−i(ω−ω_c)τ} ∫₀^∞ dt ⟨a†(t+τ)a(t)⟩ at each ω.
pub fn emission_spectrum(grid: &CorrelationGrid, omegas: &[f64], omega_c: f64) -> Result<Vec<f64>> {
    if grid.len() < 2 {
        return Err(Error::NoEmission);
    }
    let averaged = time_averaged_g1(grid);
    let peak = averaged.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if !(peak > 0.0) {
        return Err(Error::NoEmission);
    }
    // The final sample integrates over a single point, so probe the last 5%.
    let tail = averaged.len() - averaged.len() / 20 - 1;
    let ratio = averaged[tail.min(averaged.len() - 2)..].iter().fold(0.0f64, |m, z| m.max(z.norm())) / peak;
    if ratio > TAIL_TOLERANCE {
        return Err(Error::InsufficientTauCoverage { ratio });
    }
    let h = grid.step;
    Ok(omegas
        .iter()
        .map(|&w| {
            let detuning = w - omega_c;
            let vals: Vec<C64> = averaged
                .iter()
                .enumerate()
                .map(|(s, z)| z * C64::from_polar(1.0, -detuning * h * s as f64))
                .collect();
            quadrature::trapezoid_complex(&vals, h).re
        })
        .collect())
}
