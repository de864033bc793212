//! LA-phonon bath: spectral density, independent-boson phase function, mean
//! displacement ⟨B⟩, polaron shift, polaron Green functions, and their
//! half-Fourier transforms.
//!
//! The spectral density is the deformation-potential form
//! J(ω) = α ω³ exp(−ω²/2ω_b²) with a *negative* exponent; the growing
//! exponential sometimes printed for this model diverges and is not physical.
//!
//! The master equation needs Γ_m(ω) = ∫₀^∞ G_m(τ) e^{iωτ} dτ, a one-sided
//! (half) Fourier transform. Plots of "G(ω)" elsewhere may use a two-sided
//! convention; this module only exports the one-sided one.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::quadrature;
use crate::units::UnitSystem;

/// J(ω) = α ω³ exp(−ω²/2ω_b²).
pub fn spectral_density(omega: f64, alpha: f64, omega_b: f64) -> f64 {
    alpha * omega.powi(3) * (-omega * omega / (2.0 * omega_b * omega_b)).exp()
}

/// Closed form of φ(0) at T = 0: ∫₀^∞ αω e^{−ω²/2ω_b²} dω = α ω_b².
pub fn phi0_zero_temperature(alpha: f64, omega_b: f64) -> f64 {
    alpha * omega_b * omega_b
}

/// Closed form of δ_P = ∫₀^∞ J(ω)/ω dω = α √(π/2) ω_b³.
pub fn polaron_shift_closed_form(alpha: f64, omega_b: f64) -> f64 {
    alpha * (PI / 2.0).sqrt() * omega_b.powi(3)
}

/// Numerical settings for bath quadratures and tables.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BathSettings {
    /// Relative tolerance of every frequency quadrature.
    pub rel_tol: f64,
    /// Tolerance relative to ∫|integrand|, used once the integral itself has
    /// cancelled down to nothing (large τ).
    pub cancellation_tol: f64,
    /// Initial τ truncation, ns.
    pub tau_max: f64,
    /// Largest τ truncation tried before giving up, ns.
    pub tau_max_limit: f64,
    /// τ sampling step of the Green-function tables, ns.
    pub tau_step: f64,
    /// Required decay |G_m(τ_max)| / |G_m(0)|.
    pub decay_ratio: f64,
    /// Half-span of the ω table in units of ω_b.
    pub omega_span: f64,
    /// Number of ω table points (odd, so ω = 0 is a node).
    pub omega_points: usize,
}

impl Default for BathSettings {
    fn default() -> Self {
        BathSettings {
            rel_tol: 1e-10,
            cancellation_tol: 1e-14,
            tau_max: 0.01,
            tau_max_limit: 0.2,
            tau_step: 2.5e-6,
            decay_ratio: 1e-12,
            omega_span: 5.0,
            omega_points: 4001,
        }
    }
}

/// The continuum bath parameters without any tabulation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BathSpectrum {
    /// ns².
    pub alpha: f64,
    /// ns⁻¹.
    pub omega_b: f64,
    /// K.
    pub temperature: f64,
    /// k_B T / ħ, ns⁻¹.
    pub thermal_rate: f64,
}

impl BathSpectrum {
    pub fn new(alpha: f64, omega_b: f64, temperature: f64, units: &UnitSystem) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(Error::invalid("alpha", "must be >= 0"));
        }
        if !(omega_b > 0.0) {
            return Err(Error::invalid("omega_b", "must be > 0"));
        }
        if !(temperature >= 0.0) {
            return Err(Error::invalid("temperature", "must be >= 0"));
        }
        Ok(BathSpectrum { alpha, omega_b, temperature, thermal_rate: units.thermal_rate(temperature) })
    }

    pub fn spectral_density(&self, omega: f64) -> f64 {
        spectral_density(omega, self.alpha, self.omega_b)
    }

    /// Upper frequency cutoff for quadratures; the Gaussian factor is
    /// below 1e-31 there.
    fn omega_upper(&self) -> f64 {
        12.0 * self.omega_b
    }

    /// J(ω)/ω² · coth(ω/2k_BT) with the removable ω→0 singularity replaced
    /// by its limit.
    fn thermal_weight(&self, omega: f64) -> f64 {
        let gauss = (-omega * omega / (2.0 * self.omega_b * self.omega_b)).exp();
        if self.thermal_rate == 0.0 {
            return self.alpha * omega * gauss;
        }
        if omega < self.omega_b * 1e-6 {
            // ω coth(ω/2kT) → 2kT (1 + x²/3), x = ω/2kT
            let x = omega / (2.0 * self.thermal_rate);
            return self.alpha * 2.0 * self.thermal_rate * (1.0 + x * x / 3.0) * gauss;
        }
        let x = omega / (2.0 * self.thermal_rate);
        self.alpha * omega * gauss / x.tanh()
    }

    /// IBM phase function
    /// φ(τ) = ∫₀^∞ dω J(ω)/ω² [coth(ω/2k_BT) cos ωτ − i sin ωτ].
    pub fn phase_function(&self, tau: f64, settings: &BathSettings) -> Result<C64> {
        if self.alpha == 0.0 {
            return Ok(C64::zero());
        }
        let r = quadrature::integrate(
            |w| {
                let (s, c) = (w * tau).sin_cos();
                let odd = self.alpha * w * (-w * w / (2.0 * self.omega_b * self.omega_b)).exp();
                C64::new(self.thermal_weight(w) * c, -odd * s)
            },
            0.0,
            self.omega_upper(),
            settings.rel_tol,
            settings.cancellation_tol,
        )?;
        Ok(r.value)
    }

    /// φ(0), real.
    pub fn phi0(&self, settings: &BathSettings) -> Result<f64> {
        Ok(self.phase_function(0.0, settings)?.re)
    }

    /// ⟨B⟩ = exp(−φ(0)/2).
    pub fn mean_displacement(&self, settings: &BathSettings) -> Result<f64> {
        Ok((-0.5 * self.phi0(settings)?).exp())
    }

    /// δ_P = ∫₀^∞ J(ω)/ω dω by quadrature.
    pub fn polaron_shift(&self, settings: &BathSettings) -> Result<f64> {
        if self.alpha == 0.0 {
            return Ok(0.0);
        }
        let r = quadrature::integrate(
            |w| C64::new(self.spectral_density(w) / w.max(f64::MIN_POSITIVE), 0.0),
            0.0,
            self.omega_upper(),
            settings.rel_tol,
            settings.cancellation_tol,
        )?;
        Ok(r.value.re)
    }
}

/// (G_g, G_u) = (⟨B⟩²(cosh φ − 1), ⟨B⟩² sinh φ).
pub fn green_functions(phi: C64, mean_displacement: f64) -> (C64, C64) {
    let b2 = mean_displacement * mean_displacement;
    (( phi.cosh() - 1.0) * b2, phi.sinh() * b2)
}

/// A bath at fixed (α, ω_b, T) with every quantity the master equation needs.
#[derive(Clone, Debug)]
pub struct PhononBath {
    pub spectrum: BathSpectrum,
    pub settings: BathSettings,
    pub phi0: f64,
    pub mean_displacement: f64,
    /// ns⁻¹.
    pub polaron_shift: f64,
    /// τ step of `gg_table` / `gu_table`, ns.
    pub tau_step: f64,
    pub gg_table: Vec<C64>,
    pub gu_table: Vec<C64>,
    /// First ω node of the Γ tables, ns⁻¹.
    pub omega_min: f64,
    pub omega_step: f64,
    pub gamma_g_table: Vec<C64>,
    pub gamma_u_table: Vec<C64>,
}

impl PhononBath {
    /// Computes ⟨B⟩, δ_P, the Green-function tables, and their half-Fourier
    /// transforms.
    pub fn new(
        alpha: f64,
        omega_b: f64,
        temperature: f64,
        units: &UnitSystem,
        settings: BathSettings,
    ) -> Result<Self> {
        let spectrum = BathSpectrum::new(alpha, omega_b, temperature, units)?;
        let phi0 = spectrum.phi0(&settings)?;
        let mean_displacement = (-0.5 * phi0).exp();
        let polaron_shift = spectrum.polaron_shift(&settings)?;

        let (gg_table, gu_table) = if alpha == 0.0 {
            (vec![C64::zero(); 2], vec![C64::zero(); 2])
        } else {
            sample_green_functions(&spectrum, mean_displacement, &settings)?
        };

        let half_span = settings.omega_span * omega_b;
        let points = settings.omega_points.max(3) | 1;
        let omega_step = 2.0 * half_span / (points - 1) as f64;
        let omega_min = -half_span;
        let omegas: Vec<f64> = (0..points).map(|j| omega_min + j as f64 * omega_step).collect();
        let gamma_g_table = half_fourier_simpson(&gg_table, settings.tau_step, &omegas);
        let gamma_u_table = half_fourier_simpson(&gu_table, settings.tau_step, &omegas);

        Ok(PhononBath {
            spectrum,
            settings,
            phi0,
            mean_displacement,
            polaron_shift,
            tau_step: settings.tau_step,
            gg_table,
            gu_table,
            omega_min,
            omega_step,
            gamma_g_table,
            gamma_u_table,
        })
    }

    /// Baseline-resolution bath with default settings.
    pub fn with_defaults(alpha: f64, omega_b: f64, temperature: f64) -> Result<Self> {
        Self::new(alpha, omega_b, temperature, &UnitSystem::STANDARD, BathSettings::default())
    }

    pub fn alpha(&self) -> f64 {
        self.spectrum.alpha
    }

    pub fn omega_b(&self) -> f64 {
        self.spectrum.omega_b
    }

    pub fn temperature(&self) -> f64 {
        self.spectrum.temperature
    }

    /// τ of the last Green-function sample, ns.
    pub fn tau_max(&self) -> f64 {
        (self.gg_table.len() - 1) as f64 * self.tau_step
    }

    /// Direct (G_g, G_u) at τ from the phase function.
    pub fn green_functions(&self, tau: f64) -> Result<(C64, C64)> {
        let phi = self.spectrum.phase_function(tau, &self.settings)?;
        Ok(green_functions(phi, self.mean_displacement))
    }

    /// ω nodes of the Γ tables.
    pub fn omega_grid(&self) -> Vec<f64> {
        (0..self.gamma_g_table.len()).map(|j| self.omega_min + j as f64 * self.omega_step).collect()
    }

    /// Largest |ω| covered by the Γ tables.
    pub fn omega_limit(&self) -> f64 {
        -self.omega_min
    }

    /// Γ_g(ω), Γ_u(ω) by cubic interpolation of the tables.
    pub fn half_fourier_at(&self, omega: f64) -> Result<(C64, C64)> {
        let limit = self.omega_limit();
        if !(omega.abs() <= limit) {
            return Err(Error::FrequencyOutOfRange { omega, limit });
        }
        let n = self.gamma_g_table.len();
        let x = (omega - self.omega_min) / self.omega_step;
        let base = (x.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let u = x - base as f64;
        // Lagrange weights for nodes base..base+3 at local coordinate u.
        let w = [
            -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0,
            u * (u - 2.0) * (u - 3.0) / 2.0,
            -u * (u - 1.0) * (u - 3.0) / 2.0,
            u * (u - 1.0) * (u - 2.0) / 6.0,
        ];
        let mut gg = C64::zero();
        let mut gu = C64::zero();
        for (k, wk) in w.iter().enumerate() {
            gg += self.gamma_g_table[base + k] * *wk;
            gu += self.gamma_u_table[base + k] * *wk;
        }
        Ok((gg, gu))
    }

    /// Γ_g(ω), Γ_u(ω) evaluated directly from the τ samples (no ω
    /// interpolation).
    pub fn half_fourier_direct(&self, omega: f64) -> (C64, C64) {
        (
            half_fourier_simpson(&self.gg_table, self.tau_step, &[omega])[0],
            half_fourier_simpson(&self.gu_table, self.tau_step, &[omega])[0],
        )
    }
}

fn sample_green_functions(
    spectrum: &BathSpectrum,
    mean_displacement: f64,
    settings: &BathSettings,
) -> Result<(Vec<C64>, Vec<C64>)> {
    let h = settings.tau_step;
    let mut gg = Vec::new();
    let mut gu = Vec::new();
    let mut tau_max = settings.tau_max;
    let g0 = green_functions(spectrum.phase_function(0.0, settings)?, mean_displacement);
    let head = g0.0.norm().max(g0.1.norm());
    loop {
        let n_target = (tau_max / h).round() as usize + 1;
        // Sparse probe of the last 5% before paying for the dense table.
        let mut probe: f64 = 0.0;
        for j in 0..=16 {
            let tau = tau_max * (0.95 + 0.05 * j as f64 / 16.0);
            let (g, u) = green_functions(spectrum.phase_function(tau, settings)?, mean_displacement);
            probe = probe.max(g.norm().max(u.norm()));
        }
        if head > 0.0 && probe / head >= settings.decay_ratio {
            if tau_max >= settings.tau_max_limit {
                return Err(Error::InsufficientDecay { tau_max, ratio: probe / head });
            }
            tau_max = (2.0 * tau_max).min(settings.tau_max_limit);
            continue;
        }
        for k in gg.len()..n_target {
            let phi = spectrum.phase_function(k as f64 * h, settings)?;
            let (g, u) = green_functions(phi, mean_displacement);
            gg.push(g);
            gu.push(u);
        }
        let tail_start = n_target - n_target / 20 - 1;
        let ratio = |table: &[C64]| {
            let head = table[0].norm();
            let tail = table[tail_start..].iter().fold(0.0f64, |m, z| m.max(z.norm()));
            if head == 0.0 { 0.0 } else { tail / head }
        };
        let worst = ratio(&gg).max(ratio(&gu));
        if worst < settings.decay_ratio {
            return Ok((gg, gu));
        }
        if tau_max >= settings.tau_max_limit {
            return Err(Error::InsufficientDecay { tau_max, ratio: worst });
        }
        tau_max = (2.0 * tau_max).min(settings.tau_max_limit);
    }
}

/// ∫₀^{τ_max} G(τ) e^{iωτ} dτ by composite Simpson on the stored samples.
fn half_fourier_simpson(samples: &[C64], h: f64, omegas: &[f64]) -> Vec<C64> {
    const RESYNC: usize = 128;
    let mut weighted: Vec<C64> = Vec::with_capacity(samples.len());
    // Simpson weights folded in once; odd interval counts end with a trapezoid.
    let n = samples.len();
    let intervals = n.saturating_sub(1);
    let even = intervals - intervals % 2;
    for (k, &s) in samples.iter().enumerate() {
        let w = if n < 3 {
            if n == 2 { 0.5 } else { 0.0 }
        } else if k == 0 {
            1.0 / 3.0
        } else if k < even {
            if k % 2 == 1 { 4.0 / 3.0 } else { 2.0 / 3.0 }
        } else if k == even {
            if even < intervals { 1.0 / 3.0 + 0.5 } else { 1.0 / 3.0 }
        } else {
            0.5
        };
        weighted.push(s * (w * h));
    }
    omegas
        .iter()
        .map(|&omega| {
            let step = C64::from_polar(1.0, omega * h);
            let mut acc = C64::zero();
            let mut phase = C64::new(1.0, 0.0);
            for (k, w) in weighted.iter().enumerate() {
                if k % RESYNC == 0 {
                    phase = C64::from_polar(1.0, omega * h * k as f64);
                }
                acc += w * phase;
                phase *= step;
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALPHA: f64 = 3e-8;
    const OMEGA_B: f64 = 1367.4;

    fn spectrum(t: f64) -> BathSpectrum {
        BathSpectrum::new(ALPHA, OMEGA_B, t, &UnitSystem::STANDARD).unwrap()
    }

    #[test]
    fn spectral_density_values() {
        assert_eq!(spectral_density(0.0, ALPHA, OMEGA_B), 0.0);
        let j = spectral_density(OMEGA_B, ALPHA, OMEGA_B);
        assert!((j - 46.5).abs() < 0.05, "{j}");
        // maximum at √3 ω_b
        let peak = 3f64.sqrt() * OMEGA_B;
        let jp = spectral_density(peak, ALPHA, OMEGA_B);
        assert!(jp > spectral_density(peak * 1.001, ALPHA, OMEGA_B));
        assert!(jp > spectral_density(peak * 0.999, ALPHA, OMEGA_B));
    }

    #[test]
    fn phi0_zero_temperature_oracle() {
        let s = spectrum(0.0);
        let phi0 = s.phi0(&BathSettings::default()).unwrap();
        let exact = phi0_zero_temperature(ALPHA, OMEGA_B);
        assert!(((phi0 - exact) / exact).abs() < 1e-8);
        assert!((phi0 - 0.0561).abs() < 1e-4);
        assert!(((-phi0 / 2.0).exp() - 0.972).abs() < 1e-3);
    }

    #[test]
    fn polaron_shift_oracle() {
        let s = spectrum(5.0);
        let dp = s.polaron_shift(&BathSettings::default()).unwrap();
        let exact = polaron_shift_closed_form(ALPHA, OMEGA_B);
        assert!(((dp - exact) / exact).abs() < 1e-8);
        assert!((dp - 96.1).abs() < 0.1);
        let doubled = BathSpectrum { alpha: 2.0 * ALPHA, ..s };
        let dp2 = doubled.polaron_shift(&BathSettings::default()).unwrap();
        assert!((dp2 / dp - 2.0).abs() < 1e-12);
        let none = BathSpectrum { alpha: 0.0, ..s };
        assert_eq!(none.polaron_shift(&BathSettings::default()).unwrap(), 0.0);
    }

    #[test]
    fn imaginary_part_is_temperature_independent() {
        let settings = BathSettings::default();
        for tau in [1e-4, 7e-4, 2e-3] {
            let a = spectrum(0.0).phase_function(tau, &settings).unwrap().im;
            let b = spectrum(30.0).phase_function(tau, &settings).unwrap().im;
            // closed form of the odd part
            let exact = -ALPHA * (PI / 2.0).sqrt() * OMEGA_B.powi(3) * tau
                * (-OMEGA_B * OMEGA_B * tau * tau / 2.0).exp();
            assert!((a - b).abs() < 1e-12);
            assert!((a - exact).abs() < 1e-10 * exact.abs().max(1e-3));
            assert!(a <= 0.0);
        }
    }

    #[test]
    fn green_function_identity() {
        let b = 0.957;
        for phi in [C64::new(0.08, 0.0), C64::new(0.03, -0.02), C64::new(1e-4, 3e-3)] {
            let (gg, gu) = green_functions(phi, b);
            let lhs = (gg + b * b).powi(2) - gu.powi(2);
            assert!((lhs - C64::new(b.powi(4), 0.0)).norm() < 1e-14);
        }
    }
}
