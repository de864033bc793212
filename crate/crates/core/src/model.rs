//! The polaron-frame system: pump envelope, Hamiltonian H'_S(t), phonon drive
//! operators X_g/X_u, and the Lindblad collapse set.
//!
//! Frequencies are rotating-frame values: the pump, CW laser, and cavity
//! frequencies have been removed by the interaction-picture transformation
//! with H₀ = ω_p|X⟩⟨X| + (ω_p+ω_l−ω_c)|Y⟩⟨Y| + (ω_p+ω_l)|XX⟩⟨XX| + ω_c a†a and
//! counter-rotating terms dropped, so only the detunings Δ and Δ_l appear.
//! `omega_c` only sets the origin of the spectrum axis.
//!
//! The fluctuation operators ζ_g, ζ_u never appear explicitly; they enter
//! through the Green functions G_g, G_u of the bath.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Result;
use crate::hilbert::{BasisOperators, Level};
use crate::linalg::{self, CMatrix};
use crate::phonon::PhononBath;
use crate::units::{ModelParams, PulseShape, Warnings, POLARON_VALIDITY_LIMIT};

/// Pump Rabi-frequency envelope Ω_p(t).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseEnvelope {
    pub shape: PulseShape,
    /// Peak value, ns⁻¹.
    pub omega_p_max: f64,
    /// Window length τ_p, ns.
    pub tau_p: f64,
    /// Window start, ns.
    pub t0: f64,
}

impl PulseEnvelope {
    pub fn value(&self, t: f64) -> f64 {
        pulse_value(t, self)
    }

    pub fn end(&self) -> f64 {
        self.t0 + self.tau_p
    }

    pub fn scaled(&self, factor: f64) -> Self {
        PulseEnvelope { omega_p_max: self.omega_p_max * factor, ..*self }
    }
}

/// Ω_p(t). Every shape vanishes outside [t0, t0+τ_p].
pub fn pulse_value(t: f64, env: &PulseEnvelope) -> f64 {
    let s = t - env.t0;
    if env.tau_p <= 0.0 || s < 0.0 || t > env.end() {
        return 0.0;
    }
    let x = (s / env.tau_p).min(1.0);
    match env.shape {
        PulseShape::SawtoothRising => env.omega_p_max * x,
        PulseShape::SawtoothFalling => env.omega_p_max * (1.0 - x),
        PulseShape::Gaussian => {
            let z = (x - 0.5) * 6.0;
            env.omega_p_max * (-0.5 * z * z).exp()
        }
    }
}

/// Renormalized (primed) and bare couplings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Couplings {
    pub g: f64,
    pub omega_l: f64,
    pub omega_p_max: f64,
}

/// Collapse operators with their rates folded in (O = √rate · operator).
#[derive(Clone, Debug)]
pub struct CollapseSet {
    pub channels: Vec<(CMatrix, f64)>,
}

impl CollapseSet {
    /// Spontaneous emission XX→X, XX→Y (γ_XX), X→g, Y→g (γ_X); pure
    /// dephasing 2γ' on |XX⟩, γ' on |X⟩ and |Y⟩; cavity loss κ.
    pub fn new(ops: &BasisOperators, params: &ModelParams) -> Self {
        use Level::*;
        let gp = params.gamma_prime();
        let channels = alloc::vec![
            (ops.dyad(X, XX).clone(), params.gamma_xx),
            (ops.dyad(Y, XX).clone(), params.gamma_xx),
            (ops.dyad(G, X).clone(), params.gamma_x),
            (ops.dyad(G, Y).clone(), params.gamma_x),
            (ops.projector(XX).clone(), 2.0 * gp),
            (ops.projector(X).clone(), gp),
            (ops.projector(Y).clone(), gp),
            (ops.a.clone(), params.kappa),
        ];
        CollapseSet { channels }
    }

    /// Operators scaled by √rate, skipping zero-rate channels.
    pub fn scaled_operators(&self) -> Vec<CMatrix> {
        self.channels
            .iter()
            .filter(|(_, r)| *r > 0.0)
            .map(|(o, r)| o.scale_real(r.sqrt()))
            .collect()
    }
}

/// Everything time-independent about one simulation: parameters, bath,
/// couplings, operators.
#[derive(Clone, Debug)]
pub struct SystemModel {
    pub params: ModelParams,
    pub bath: Option<PhononBath>,
    pub ops: BasisOperators,
    /// ⟨B⟩, or 1 without phonons.
    pub mean_displacement: f64,
    /// Couplings entering H'_S.
    pub primed: Couplings,
    /// Couplings entering X_g, X_u.
    pub bare: Couplings,
    pub pulse: PulseEnvelope,
    pub collapse: CollapseSet,
    pub warnings: Warnings,
}

impl SystemModel {
    /// Builds the model. `bath` must be given iff phonons are enabled; a bath
    /// passed with phonons disabled is ignored.
    pub fn new(params: ModelParams, bath: Option<PhononBath>) -> Result<Self> {
        params.validate()?;
        let bath = if params.phonons_enabled { bath } else { None };
        if params.phonons_enabled && bath.is_none() {
            return Err(crate::error::Error::invalid(
                "phonons_enabled",
                "a phonon bath is required when phonons are enabled",
            ));
        }
        let ops = BasisOperators::new(params.n_max)?;
        let b = bath.as_ref().map_or(1.0, |b| b.mean_displacement);
        let given = Couplings {
            g: params.g_prime,
            omega_l: params.omega_l_prime,
            omega_p_max: params.omega_p_max_prime,
        };
        let (primed, bare) = if params.renormalize_inputs {
            (given.scaled(b), given)
        } else {
            (given, given.scaled(1.0 / b))
        };
        let pulse = PulseEnvelope {
            shape: params.pulse_shape,
            omega_p_max: primed.omega_p_max,
            tau_p: params.pulse_width,
            t0: params.pulse_start,
        };
        let collapse = CollapseSet::new(&ops, &params);

        let mut warnings = Warnings::default();
        if bath.is_some() {
            let v = params.polaron_validity(b);
            if v > POLARON_VALIDITY_LIMIT {
                warnings.push(format!(
                    "polaron validity measure (Omega/omega_b)^2 (1-<B>)^4 = {v:.3} exceeds {POLARON_VALIDITY_LIMIT}"
                ));
            }
        }
        Ok(SystemModel { params, bath, ops, mean_displacement: b, primed, bare, pulse, collapse, warnings })
    }

    /// Model without a bath; requires `phonons_enabled = false`.
    pub fn without_phonons(params: ModelParams) -> Result<Self> {
        Self::new(ModelParams { phonons_enabled: false, ..params }, None)
    }

    pub fn dim(&self) -> usize {
        self.ops.dim()
    }

    /// Bare pump envelope entering the drive operators.
    pub fn bare_pulse(&self) -> PulseEnvelope {
        PulseEnvelope { omega_p_max: self.bare.omega_p_max, ..self.pulse }
    }

    /// Coupling part `Ω_p|X⟩⟨g| + Ω_l|XX⟩⟨X| + g|XX⟩⟨Y|a` (without H.c.).
    fn raising(&self, omega_p: f64, c: &Couplings) -> CMatrix {
        use Level::*;
        let ops = &self.ops;
        let mut m = ops.dyad(X, G).scale_real(omega_p);
        m += &ops.dyad(XX, X).scale_real(c.omega_l);
        m += &ops.dyad(XX, Y).matmul(&ops.a).scale_real(c.g);
        m
    }

    /// Diagonal part: Δ|X⟩⟨X| + Δ_l|Y⟩⟨Y| + (Δ+Δ_l)|XX⟩⟨XX|, plus the explicit
    /// polaron shifts when requested.
    fn diagonal(&self) -> CMatrix {
        use Level::*;
        let p = &self.params;
        let shift = if p.explicit_polaron_shift {
            self.bath.as_ref().map_or(0.0, |b| b.polaron_shift)
        } else {
            0.0
        };
        let mut h = self.ops.projector(X).scale_real(p.delta - shift);
        h += &self.ops.projector(Y).scale_real(p.delta_l - shift);
        h += &self.ops.projector(XX).scale_real(p.delta + p.delta_l - 2.0 * shift);
        h
    }

    /// H'_S(t) in ns⁻¹.
    pub fn hamiltonian(&self, t: f64) -> CMatrix {
        let up = self.raising(self.pulse.value(t), &self.primed);
        let mut h = self.diagonal();
        h += &up;
        h += &up.adjoint();
        h
    }

    /// (X_g, X_u) built from bare couplings.
    pub fn drive_operators(&self, t: f64) -> (CMatrix, CMatrix) {
        let up = self.raising(self.bare_pulse().value(t), &self.bare);
        let down = up.adjoint();
        let xg = &up + &down;
        let xu = &up.scale(linalg::I) + &down.scale(-linalg::I);
        (xg, xu)
    }

    /// Whether the generator at `t` differs from the undriven one.
    pub fn pulse_active(&self, t: f64) -> bool {
        self.pulse.value(t) != 0.0
    }
}

impl Couplings {
    fn scaled(&self, f: f64) -> Couplings {
        Couplings { g: self.g * f, omega_l: self.omega_l * f, omega_p_max: self.omega_p_max * f }
    }
}

/// Instantaneous eigenvalues of H'_S(t) on a grid of times, computed on a
/// copy of the model truncated at `n_max_trunc` photons and ordered by
/// continuity: each curve follows the eigenvector with the largest overlap
/// with its predecessor.
pub fn quasi_eigenenergies(
    model: &SystemModel,
    times: &[f64],
    n_max_trunc: usize,
) -> Result<Vec<Vec<f64>>> {
    let params = ModelParams { n_max: n_max_trunc, ..model.params.clone() };
    let trunc = SystemModel::new(params, model.bath.clone())?;

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(times.len());
    let mut prev: Option<CMatrix> = None;
    for &t in times {
        let e = linalg::eigh(&trunc.hamiltonian(t))?;
        let d = e.values.len();
        let (values, vectors) = match &prev {
            None => (e.values.clone(), e.vectors.clone()),
            Some(pv) => {
                // Greedy matching on |⟨prev_i|new_j⟩|².
                let overlap = pv.adjoint().matmul(&e.vectors);
                let mut taken = alloc::vec![false; d];
                let mut perm = alloc::vec![0usize; d];
                let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(d * d);
                for i in 0..d {
                    for j in 0..d {
                        pairs.push((overlap[(i, j)].norm_sqr(), i, j));
                    }
                }
                pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
                let mut assigned = alloc::vec![false; d];
                for (_, i, j) in pairs {
                    if !assigned[i] && !taken[j] {
                        perm[i] = j;
                        assigned[i] = true;
                        taken[j] = true;
                    }
                }
                let values = perm.iter().map(|&j| e.values[j]).collect();
                let vectors = CMatrix::from_fn(d, |r, c| e.vectors[(r, perm[c])]);
                (values, vectors)
            }
        };
        prev = Some(vectors);
        rows.push(values);
    }
    Ok(rows)
}

/// Spectral radius of H'_S(t).
pub fn spectral_radius(h: &CMatrix) -> Result<f64> {
    let e = linalg::eigh(h)?;
    Ok(e.values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}
