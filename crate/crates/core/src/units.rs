//! Unit system and the validated parameter record.
//!
//! Internally every angular frequency and rate is in ns⁻¹ with ħ = 1. Energies
//! given in μeV or meV are converted with ω = E/ħ; the phonon coupling α is
//! stored in ns².

use alloc::vec::Vec;
use alloc::string::String;
use alloc::format;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Conversion constants between lab units and internal ns⁻¹.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UnitSystem {
    /// ħ in μeV·ns.
    pub hbar_microev_ns: f64,
    /// k_B in μeV/K.
    pub kb_microev_per_k: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        UnitSystem::STANDARD
    }
}

impl UnitSystem {
    pub const STANDARD: UnitSystem = UnitSystem {
        hbar_microev_ns: 0.658_211_95,
        kb_microev_per_k: 86.173_33,
    };

    pub fn microev_to_rate(&self, e: f64) -> f64 {
        e / self.hbar_microev_ns
    }

    pub fn rate_to_microev(&self, w: f64) -> f64 {
        w * self.hbar_microev_ns
    }

    pub fn mev_to_rate(&self, e: f64) -> f64 {
        self.microev_to_rate(e * 1e3)
    }

    pub fn rate_to_mev(&self, w: f64) -> f64 {
        self.rate_to_microev(w) * 1e-3
    }

    /// k_B T / ħ in ns⁻¹.
    pub fn thermal_rate(&self, temperature: f64) -> f64 {
        self.kb_microev_per_k * temperature / self.hbar_microev_ns
    }
}

pub fn ps2_to_ns2(alpha_ps2: f64) -> f64 {
    alpha_ps2 * 1e-6
}

pub fn ns2_to_ps2(alpha_ns2: f64) -> f64 {
    alpha_ns2 * 1e6
}

/// Temperature slope of the empirical linear pure-dephasing law, ns⁻¹/K.
pub const EMPIRICAL_DEPHASING_SLOPE: f64 = 2.127;

/// Pump pulse envelope shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum PulseShape {
    /// Linear ramp from 0 up to the peak, then an abrupt cutoff.
    #[default]
    SawtoothRising,
    /// Abrupt turn-on at the peak, then a linear ramp down to 0.
    SawtoothFalling,
    /// Gaussian centered in the pulse window with σ = τ_p/6, zero outside
    /// the window.
    Gaussian,
}

impl PulseShape {
    pub fn name(self) -> &'static str {
        match self {
            PulseShape::SawtoothRising => "sawtooth-rising",
            PulseShape::SawtoothFalling => "sawtooth-falling",
            PulseShape::Gaussian => "gaussian",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sawtooth-rising" | "rising" => Some(PulseShape::SawtoothRising),
            "sawtooth-falling" | "falling" => Some(PulseShape::SawtoothFalling),
            "gaussian" => Some(PulseShape::Gaussian),
            _ => None,
        }
    }
}

/// Every physical input of one simulation, in internal units.
///
/// The couplings `g_prime`, `omega_l_prime`, and `omega_p_max_prime` are the
/// polaron-renormalized values ⟨B⟩·(bare) unless `renormalize_inputs` is set,
/// in which case they are read as bare couplings and multiplied by ⟨B⟩.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    pub gamma_x: f64,
    pub gamma_xx: f64,
    pub gamma_prime_0: f64,
    /// ns⁻¹/K; zero means temperature-independent dephasing.
    pub dephasing_slope: f64,
    pub kappa: f64,
    pub g_prime: f64,
    pub omega_l_prime: f64,
    pub omega_p_max_prime: f64,
    /// Common pump/cavity detuning Δ = Δ_p = Δ_c.
    pub delta: f64,
    /// CW detuning Δ_l; must stay 0 unless `allow_nonzero_delta_l`.
    pub delta_l: f64,
    pub allow_nonzero_delta_l: bool,
    /// τ_p, ns.
    pub pulse_width: f64,
    /// Pulse window start t0, ns.
    pub pulse_start: f64,
    pub pulse_shape: PulseShape,
    /// Phonon coupling, ns².
    pub alpha: f64,
    /// Phonon cutoff, ns⁻¹.
    pub omega_b: f64,
    /// Bath temperature, K.
    pub temperature: f64,
    pub n_max: usize,
    pub phonons_enabled: bool,
    pub renormalize_inputs: bool,
    /// Keep the −δ_P, −2δ_P level shifts explicitly instead of absorbing them
    /// into the detunings.
    pub explicit_polaron_shift: bool,
    /// Cavity frequency used as the spectrum axis origin, ns⁻¹.
    pub omega_c: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams::baseline()
    }
}

impl ModelParams {
    /// The reference parameter set: γ = 0.5 ns⁻¹, κ = 25 ns⁻¹, γ'₀ = 1 ns⁻¹,
    /// α = 0.03 ps², ω_b = 0.9 meV, g' = 50 ns⁻¹, Ω_l' = 5g', Ω_p,max' = 2.5g',
    /// g'τ_p = 3π, T = 5 K, resonant driving.
    pub fn baseline() -> Self {
        let units = UnitSystem::STANDARD;
        let g_prime = 50.0;
        ModelParams {
            gamma_x: 0.5,
            gamma_xx: 0.5,
            gamma_prime_0: 1.0,
            dephasing_slope: 0.0,
            kappa: 25.0,
            g_prime,
            omega_l_prime: 5.0 * g_prime,
            omega_p_max_prime: 2.5 * g_prime,
            delta: 0.0,
            delta_l: 0.0,
            allow_nonzero_delta_l: false,
            pulse_width: 3.0 * PI / g_prime,
            pulse_start: 0.0,
            pulse_shape: PulseShape::SawtoothRising,
            alpha: ps2_to_ns2(0.03),
            omega_b: units.mev_to_rate(0.9),
            temperature: 5.0,
            n_max: 2,
            phonons_enabled: true,
            renormalize_inputs: false,
            explicit_polaron_shift: false,
            omega_c: 0.0,
        }
    }

    /// Pure-dephasing rate γ'(T) = γ'₀ + slope·T.
    pub fn dephasing_rate(&self, temperature: f64) -> f64 {
        dephasing_rate(self.gamma_prime_0, self.dephasing_slope, temperature)
    }

    /// Dephasing rate at the configured bath temperature.
    pub fn gamma_prime(&self) -> f64 {
        self.dephasing_rate(self.temperature)
    }

    /// End of the pump window, ns.
    pub fn pulse_end(&self) -> f64 {
        self.pulse_start + self.pulse_width
    }

    /// Hilbert space dimension 4·(n_max+1).
    pub fn dim(&self) -> usize {
        4 * (self.n_max + 1)
    }

    /// Checks sign and range constraints.
    pub fn validate(&self) -> Result<()> {
        let nonneg: [(&'static str, f64); 12] = [
            ("gamma_x", self.gamma_x),
            ("gamma_xx", self.gamma_xx),
            ("gamma_prime_0", self.gamma_prime_0),
            ("dephasing_slope", self.dephasing_slope),
            ("kappa", self.kappa),
            ("g_prime", self.g_prime),
            ("omega_l_prime", self.omega_l_prime),
            ("omega_p_max_prime", self.omega_p_max_prime),
            ("pulse_width", self.pulse_width),
            ("alpha", self.alpha),
            ("omega_b", self.omega_b),
            ("temperature", self.temperature),
        ];
        for (name, v) in nonneg {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
            if v < 0.0 {
                return Err(Error::invalid(name, format!("must be >= 0, got {v}")));
            }
        }
        for (name, v) in [
            ("delta", self.delta),
            ("delta_l", self.delta_l),
            ("pulse_start", self.pulse_start),
            ("omega_c", self.omega_c),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        if self.pulse_start < 0.0 {
            return Err(Error::invalid("pulse_start", "must be >= 0"));
        }
        if self.n_max < 1 {
            return Err(Error::invalid("n_max", "must be >= 1"));
        }
        if self.delta_l != 0.0 && !self.allow_nonzero_delta_l {
            return Err(Error::invalid(
                "delta_l",
                "multi-photon resonance requires delta_l = 0; set allow_nonzero_delta_l to override",
            ));
        }
        if self.phonons_enabled && self.omega_b <= 0.0 {
            return Err(Error::invalid("omega_b", "must be > 0 when phonons are enabled"));
        }
        Ok(())
    }

    /// Polaron validity measure (Ω/ω_b)²(1−⟨B⟩)⁴ at the largest Rabi frequency.
    pub fn polaron_validity(&self, mean_displacement: f64) -> f64 {
        let scale = if self.renormalize_inputs { mean_displacement } else { 1.0 };
        let omega = self
            .omega_p_max_prime
            .max(self.omega_l_prime)
            .max(self.g_prime)
            * scale;
        if self.omega_b <= 0.0 {
            return 0.0;
        }
        (omega / self.omega_b).powi(2) * (1.0 - mean_displacement).powi(4)
    }
}

/// γ'(T) = γ'₀ + slope·T.
pub fn dephasing_rate(gamma_prime_0: f64, slope: f64, temperature: f64) -> f64 {
    gamma_prime_0 + slope * temperature
}

/// Threshold above which the polaron validity measure draws a warning.
pub const POLARON_VALIDITY_LIMIT: f64 = 0.1;

/// Non-fatal diagnostics gathered while preparing a model.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Warnings(pub Vec<String>);

impl Warnings {
    pub fn push(&mut self, w: String) {
        self.0.push(w);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &String> {
        self.0.iter()
    }
}
