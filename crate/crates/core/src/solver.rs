//! Time-local polaron master equation:
//!
//! dρ/dt = −i[H'_S, ρ] − Σ_m ∫₀^∞ dτ (G_m(τ) [X_m, X_m(t,τ) ρ] + H.c.) + Σ_μ L[O_μ]ρ
//!
//! with X_m(t,τ) = e^{−iH'_S(t)τ} X_m(t) e^{iH'_S(t)τ}. In the eigenbasis of
//! H'_S(t) the τ integral is exact: element (j,k) of X_m picks up the factor
//! Γ_m(E_k − E_j) with Γ_m(ω) = ∫₀^∞ G_m(τ) e^{iωτ} dτ.
//!
//! Every generator is written as L(ρ) = −Kρ − ρK† + Σ_j A_j ρ B_j, which is
//! linear in ρ even for non-Hermitian arguments, so the same generator drives
//! regression seeds like aρ.
//!
//! Time integration runs on a two-level grid: an outer grid of spacing
//! `outer_dt` where states are stored, subdivided into fixed RK4 steps while
//! the pump is on. Outside the pump window the generator is constant and each
//! outer step is the exact propagator exp(L·outer_dt).

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, Level};
use crate::linalg::{self, gemm_acc, CMatrix, C64};
use crate::model::{self, SystemModel};
use crate::units::Warnings;

/// Default RK4 step, ns.
pub const DEFAULT_DT: f64 = 2e-4;
/// Default outer (storage) grid spacing, ns.
pub const DEFAULT_OUTER_DT: f64 = 5e-3;

/// Eigenbasis-assembled phonon kernel at one instant: X_m and
/// X̃_m = ∫₀^∞ G_m(τ) X_m(t,τ) dτ for m ∈ {g, u}.
#[derive(Clone, Debug)]
pub struct PhononKernel {
    pub x: [CMatrix; 2],
    pub x_tilde: [CMatrix; 2],
}

/// Builds X̃_g, X̃_u at time `t`; `None` when phonons are disabled.
pub fn phonon_kernel(model: &SystemModel, t: f64) -> Result<Option<PhononKernel>> {
    let Some(bath) = &model.bath else { return Ok(None) };
    let (xg, xu) = model.drive_operators(t);
    let h = model.hamiltonian(t);
    let eig = match linalg::eigh(&h) {
        Ok(e) => e,
        Err(_) => {
            let d = h.dim();
            let scale = h.max_abs().max(1.0) * 1e-12;
            let jitter = CMatrix::from_fn(d, |i, j| {
                if i == j { C64::new(scale * (i as f64 + 1.0) / d as f64, 0.0) } else { C64::new(0.0, 0.0) }
            });
            linalg::eigh(&(&h + &jitter))?
        }
    };
    let v = &eig.vectors;
    let v_adj = v.adjoint();
    let d = h.dim();
    let mut weights_g = CMatrix::zeros(d);
    let mut weights_u = CMatrix::zeros(d);
    for j in 0..d {
        for k in 0..d {
            let (gg, gu) = bath.half_fourier_at(eig.values[k] - eig.values[j])?;
            weights_g[(j, k)] = gg;
            weights_u[(j, k)] = gu;
        }
    }
    let tilde = |x: &CMatrix, w: &CMatrix| {
        let mut xe = v_adj.matmul(x).matmul(v);
        for (z, wz) in xe.as_mut_slice().iter_mut().zip(w.as_slice()) {
            *z *= wz;
        }
        v.matmul(&xe).matmul(&v_adj)
    };
    let xtg = tilde(&xg, &weights_g);
    let xtu = tilde(&xu, &weights_u);
    Ok(Some(PhononKernel { x: [xg, xu], x_tilde: [xtg, xtu] }))
}

/// Phonon contribution to dρ/dt at time `t`:
/// −Σ_m (X_m X̃_m ρ − X̃_m ρ X_m + ρ X̃_m† X_m − X_m ρ X̃_m†).
pub fn phonon_dissipator(model: &SystemModel, t: f64, rho: &CMatrix) -> Result<CMatrix> {
    let d = rho.dim();
    let mut out = CMatrix::zeros(d);
    if let Some(k) = phonon_kernel(model, t)? {
        for (x, xt) in k.x.iter().zip(&k.x_tilde) {
            let xt_rho = xt.matmul(rho);
            let rho_xt_adj = rho.matmul(&xt.adjoint());
            gemm_acc(x, &xt_rho, C64::new(-1.0, 0.0), &mut out);
            gemm_acc(&xt_rho, x, C64::new(1.0, 0.0), &mut out);
            gemm_acc(&rho_xt_adj, x, C64::new(-1.0, 0.0), &mut out);
            gemm_acc(x, &rho_xt_adj, C64::new(1.0, 0.0), &mut out);
        }
    }
    Ok(out)
}

/// The master-equation generator frozen at one instant.
#[derive(Clone, Debug)]
pub struct Generator {
    k: CMatrix,
    k_adj: CMatrix,
    sandwiches: Vec<(CMatrix, CMatrix)>,
}

impl Generator {
    pub fn at(model: &SystemModel, t: f64) -> Result<Self> {
        let d = model.dim();
        let mut k = model.hamiltonian(t).scale(linalg::I);
        let mut sandwiches = Vec::new();
        for o in model.collapse.scaled_operators() {
            let o_adj = o.adjoint();
            gemm_acc(&o_adj, &o, C64::new(0.5, 0.0), &mut k);
            sandwiches.push((o, o_adj));
        }
        if let Some(pk) = phonon_kernel(model, t)? {
            for (x, xt) in pk.x.into_iter().zip(pk.x_tilde) {
                gemm_acc(&x, &xt, C64::new(1.0, 0.0), &mut k);
                let xt_adj = xt.adjoint();
                sandwiches.push((xt, x.clone()));
                sandwiches.push((x, xt_adj));
            }
        }
        debug_assert_eq!(k.dim(), d);
        let k_adj = k.adjoint();
        Ok(Generator { k, k_adj, sandwiches })
    }

    pub fn dim(&self) -> usize {
        self.k.dim()
    }

    /// L(ρ).
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let d = rho.dim();
        let mut out = CMatrix::zeros(d);
        let minus = C64::new(-1.0, 0.0);
        let one = C64::new(1.0, 0.0);
        gemm_acc(&self.k, rho, minus, &mut out);
        gemm_acc(rho, &self.k_adj, minus, &mut out);
        let mut tmp = CMatrix::zeros(d);
        for (a, b) in &self.sandwiches {
            tmp.as_mut_slice().fill(C64::new(0.0, 0.0));
            gemm_acc(a, rho, one, &mut tmp);
            gemm_acc(&tmp, b, one, &mut out);
        }
        out
    }

    /// Matrix of L acting on row-major vec(ρ): vec(AρB) = (A ⊗ Bᵀ) vec(ρ).
    pub fn superoperator(&self) -> CMatrix {
        let d = self.dim();
        let id = CMatrix::identity(d);
        let mut s = self.k.kron(&id).scale_real(-1.0);
        s += &id.kron(&self.k_adj.transpose()).scale_real(-1.0);
        for (a, b) in &self.sandwiches {
            s += &a.kron(&b.transpose());
        }
        s
    }
}

fn axpy(y: &CMatrix, a: f64, x: &CMatrix) -> CMatrix {
    let mut out = y.clone();
    for (o, xv) in out.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *o += xv * a;
    }
    out
}

/// One classical RK4 step given the generator at t, t+dt/2, t+dt.
pub fn rk4_with(gens: [&Generator; 3], rho: &CMatrix, dt: f64) -> CMatrix {
    let k1 = gens[0].apply(rho);
    let k2 = gens[1].apply(&axpy(rho, 0.5 * dt, &k1));
    let k3 = gens[1].apply(&axpy(rho, 0.5 * dt, &k2));
    let k4 = gens[2].apply(&axpy(rho, dt, &k3));
    let mut out = rho.clone();
    let c = dt / 6.0;
    for (((o, a), (b, cc)), d) in out
        .as_mut_slice()
        .iter_mut()
        .zip(k1.as_slice())
        .zip(k2.as_slice().iter().zip(k3.as_slice()))
        .zip(k4.as_slice())
    {
        *o += (a + (b + cc) * 2.0 + d) * c;
    }
    out
}

/// Largest stable RK4 step: 0.1 / max(spectral radius of H'_S, κ, Ω_l').
pub fn max_step(model: &SystemModel) -> Result<f64> {
    let p = &model.pulse;
    let mut radius: f64 = 0.0;
    let samples = 32;
    for k in 0..=samples {
        let t = p.t0 + p.tau_p * k as f64 / samples as f64;
        radius = radius.max(model::spectral_radius(&model.hamiltonian(t))?);
    }
    radius = radius.max(model::spectral_radius(&model.hamiltonian(p.end() + 1.0))?);
    let scale = radius.max(model.params.kappa).max(model.primed.omega_l);
    Ok(if scale > 0.0 { 0.1 / scale } else { f64::INFINITY })
}

/// A single RK4 step of the master equation from `t` to `t + dt`.
pub fn step(model: &SystemModel, rho: &CMatrix, t: f64, dt: f64) -> Result<CMatrix> {
    let dt_max = max_step(model)?;
    if dt > dt_max {
        return Err(Error::StepSizeViolation { dt, dt_max });
    }
    let g0 = Generator::at(model, t)?;
    let g1 = Generator::at(model, t + 0.5 * dt)?;
    let g2 = Generator::at(model, t + dt)?;
    Ok(rk4_with([&g0, &g1, &g2], rho, dt))
}

/// Time-grid settings.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSettings {
    /// Storage grid spacing (also the τ spacing of correlation tables), ns.
    pub outer_dt: f64,
    /// Requested RK4 step, ns; `None` picks min(2e-4, stability limit).
    pub dt: Option<f64>,
    /// End of the run, ns; `None` means pulse end + 5/γ_X.
    pub t_end: Option<f64>,
    /// Use the exact propagator where the generator is constant. When false,
    /// trajectories use RK4 throughout.
    pub exact_tail: bool,
}

impl Default for GridSettings {
    fn default() -> Self {
        GridSettings { outer_dt: DEFAULT_OUTER_DT, dt: None, t_end: None, exact_tail: true }
    }
}

/// Resolved two-level time grid.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeGrid {
    pub outer_dt: f64,
    /// RK4 substeps per outer step.
    pub substeps: usize,
    pub dt: f64,
    /// Number of outer steps; the grid has `steps + 1` points.
    pub steps: usize,
    /// Outer indices `[start, stop)` whose steps see a time-dependent generator.
    pub window: (usize, usize),
    pub exact_tail: bool,
}

impl TimeGrid {
    pub fn resolve(model: &SystemModel, settings: &GridSettings) -> Result<Self> {
        let p = &model.params;
        let h = settings.outer_dt;
        if !(h > 0.0) {
            return Err(Error::invalid("outer_dt", "must be > 0"));
        }
        let dt_max = max_step(model)?;
        let dt_req = match settings.dt {
            Some(dt) => {
                if !(dt > 0.0) {
                    return Err(Error::invalid("dt", "must be > 0"));
                }
                if dt > dt_max {
                    return Err(Error::StepSizeViolation { dt, dt_max });
                }
                dt
            }
            None => DEFAULT_DT.min(dt_max),
        };
        let substeps = ((h / dt_req) - 1e-9).ceil().max(1.0) as usize;
        let t_end = match settings.t_end {
            Some(t) => t,
            None => {
                let tail = if p.gamma_x > 0.0 {
                    5.0 / p.gamma_x
                } else if p.kappa > 0.0 {
                    20.0 / p.kappa
                } else {
                    10.0
                };
                p.pulse_end() + tail
            }
        };
        if !(t_end > 0.0) {
            return Err(Error::invalid("t_end", "must be > 0"));
        }
        let steps = ((t_end / h) - 1e-9).ceil() as usize;
        let start = ((p.pulse_start / h) + 1e-9).floor() as usize;
        let stop = ((p.pulse_end() / h) - 1e-9).ceil() as usize;
        let window = if p.pulse_width > 0.0 && model.pulse.omega_p_max != 0.0 {
            (start.min(steps), stop.clamp(start, steps))
        } else {
            (0, 0)
        };
        Ok(TimeGrid { outer_dt: h, substeps, dt: h / substeps as f64, steps, window, exact_tail: settings.exact_tail })
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.outer_dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.steps)
    }

    fn in_window(&self, k: usize) -> bool {
        k >= self.window.0 && k < self.window.1
    }
}

/// Precomputed generators and step propagators for one model and grid.
#[derive(Clone, Debug)]
pub struct Propagator<'m> {
    model: &'m SystemModel,
    grid: TimeGrid,
    constant: Generator,
    /// Generators at window start + j·dt/2.
    window: Vec<Generator>,
    /// exp(L_const · outer_dt) on row-major vec(ρ).
    step_super: CMatrix,
}

impl<'m> Propagator<'m> {
    pub fn new(model: &'m SystemModel, settings: &GridSettings) -> Result<Self> {
        let grid = TimeGrid::resolve(model, settings)?;
        // The pump is off outside its window; any time past the end will do.
        let constant = Generator::at(model, model.pulse.end() + 1.0)?;
        let half = 0.5 * grid.dt;
        let t_start = grid.time(grid.window.0);
        let window = if grid.window.1 > grid.window.0 {
            let n_half = 2 * grid.substeps * (grid.window.1 - grid.window.0);
            (0..=n_half)
                .map(|j| Generator::at(model, t_start + j as f64 * half))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        let step_super = linalg::expm(&constant.superoperator().scale_real(grid.outer_dt));
        Ok(Propagator { model, grid, constant, window, step_super })
    }

    pub fn model(&self) -> &SystemModel {
        self.model
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn constant_generator(&self) -> &Generator {
        &self.constant
    }

    /// exp(L_const · outer_dt).
    pub fn step_superoperator(&self) -> &CMatrix {
        &self.step_super
    }

    /// Index of the first outer point from which the generator stays constant.
    pub fn tail_start(&self) -> usize {
        self.grid.window.1
    }

    /// Advances an operator from outer point `k` to `k + 1`.
    pub fn step_outer(&self, k: usize, v: &CMatrix) -> CMatrix {
        let g = &self.grid;
        if g.in_window(k) {
            let base = 2 * g.substeps * (k - g.window.0);
            let mut x = v.clone();
            for s in 0..g.substeps {
                let j = base + 2 * s;
                x = rk4_with([&self.window[j], &self.window[j + 1], &self.window[j + 2]], &x, g.dt);
            }
            x
        } else {
            self.step_constant(v)
        }
    }

    /// One outer step under the constant generator.
    pub fn step_constant(&self, v: &CMatrix) -> CMatrix {
        if self.grid.exact_tail {
            self.apply_step_super(v)
        } else {
            let g = &self.constant;
            let mut x = v.clone();
            for _ in 0..self.grid.substeps {
                x = rk4_with([g, g, g], &x, self.grid.dt);
            }
            x
        }
    }

    /// exp(L_const·outer_dt) applied to an operator.
    pub fn apply_step_super(&self, v: &CMatrix) -> CMatrix {
        let d = v.dim();
        CMatrix::from_vec(d, self.step_super.matvec(v.as_slice())).expect("superoperator dimension")
    }

    /// Propagates from |g,0⟩⟨g,0| at t = 0.
    pub fn propagate(&self) -> Result<Trajectory> {
        self.propagate_from(DensityMatrix::ground(&self.model.ops).rho)
    }

    /// Propagates an arbitrary initial state given at t = 0.
    pub fn propagate_from(&self, rho0: CMatrix) -> Result<Trajectory> {
        if rho0.dim() != self.model.dim() {
            return Err(Error::DimensionMismatch { expected: self.model.dim(), found: rho0.dim() });
        }
        let mut states = Vec::with_capacity(self.grid.len());
        states.push(rho0);
        for k in 0..self.grid.steps {
            let next = self.step_outer(k, &states[k]);
            states.push(next);
        }
        Ok(Trajectory::new(self.grid, states, self.model.warnings.clone()))
    }
}

/// Run diagnostics.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub max_trace_drift: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
    pub warnings: Warnings,
}

/// Eigenvalues below this are reported; TCL2 does not guarantee complete
/// positivity.
pub const NEGATIVITY_WARNING: f64 = -1e-6;

/// States on the outer grid plus diagnostics.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<CMatrix>,
    pub diagnostics: Diagnostics,
}

impl Trajectory {
    fn new(grid: TimeGrid, states: Vec<CMatrix>, mut warnings: Warnings) -> Self {
        let tr0 = states[0].trace().re;
        let mut drift: f64 = 0.0;
        let mut herm: f64 = 0.0;
        let mut min_eig = f64::INFINITY;
        let mut worst_t = 0.0;
        for (k, s) in states.iter().enumerate() {
            drift = drift.max((s.trace().re - tr0).abs());
            herm = herm.max(s.hermiticity_error());
            if let Ok(e) = linalg::eigh(s) {
                if e.values[0] < min_eig {
                    min_eig = e.values[0];
                    worst_t = grid.time(k);
                }
            }
        }
        if min_eig < NEGATIVITY_WARNING {
            warnings.push(format!("density matrix eigenvalue {min_eig:.3e} at t = {worst_t:.4} ns"));
        }
        Trajectory {
            grid,
            states,
            diagnostics: Diagnostics {
                max_trace_drift: drift,
                max_hermiticity_error: herm,
                min_eigenvalue: min_eig,
                warnings,
            },
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.times()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// ⟨op⟩(t), real part.
    pub fn expectation(&self, op: &CMatrix) -> Vec<f64> {
        self.states.iter().map(|s| op.trace_product(s).re).collect()
    }

    pub fn population(&self, model: &SystemModel, level: Level) -> Vec<f64> {
        self.expectation(model.ops.projector(level))
    }

    /// ⟨a†a⟩(t).
    pub fn cavity_number(&self, model: &SystemModel) -> Vec<f64> {
        self.expectation(&model.ops.number)
    }

    pub fn final_state(&self) -> DensityMatrix {
        DensityMatrix { time: self.grid.t_end(), rho: self.states[self.states.len() - 1].clone() }
    }
}
