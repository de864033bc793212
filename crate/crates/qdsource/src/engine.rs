//! Single-point execution on top of the core pipeline, with correlation rows
//! spread over the rayon pool.

use qdsource_core::correlators::{self, CorrelationRow, RegressionPlan};
use qdsource_core::model::{self, SystemModel};
use qdsource_core::pipeline::{self, RowExecutor, RunOutput};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::Result;

/// Rows evaluated concurrently; collection keeps index order, so the result
/// is identical to the sequential one.
pub struct Parallel;

impl RowExecutor for Parallel {
    fn run(&self, plan: &RegressionPlan<'_, '_>) -> Vec<CorrelationRow> {
        (0..plan.rows()).into_par_iter().map(|k| plan.row(k)).collect()
    }
}

/// Builds the model (and bath) for a resolved config.
pub fn build_model(cfg: &RunConfig) -> Result<SystemModel> {
    Ok(pipeline::build_model(cfg.params.clone(), cfg.bath)?)
}

/// Runs one point end to end.
pub fn run(cfg: &RunConfig) -> Result<(SystemModel, RunOutput)> {
    let model = build_model(cfg)?;
    let out = pipeline::run_model(&model, &cfg.grid, &Parallel)?;
    Ok((model, out))
}

/// Run diagnostics worth persisting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSummary {
    pub max_trace_drift: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
    pub warnings: Vec<String>,
}

impl DiagnosticsSummary {
    /// Model warnings are already folded into the trajectory diagnostics.
    pub fn of(out: &RunOutput) -> Self {
        let d = &out.trajectory.diagnostics;
        let warnings = d.warnings.iter().cloned().collect();
        DiagnosticsSummary {
            max_trace_drift: d.max_trace_drift,
            max_hermiticity_error: d.max_hermiticity_error,
            min_eigenvalue: d.min_eigenvalue,
            warnings,
        }
    }
}

/// Evenly spaced grid of `points` values on [lo, hi].
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect(),
    }
}

/// Default spectrum axis: ω_c ± 600 ns⁻¹ in 0.5 ns⁻¹ steps.
pub fn default_spectrum_axis(omega_c: f64) -> Vec<f64> {
    linspace(omega_c - 600.0, omega_c + 600.0, 2401)
}

/// S_c(ω) on `omegas` for a finished run.
pub fn spectrum(model: &SystemModel, out: &RunOutput, omegas: &[f64]) -> Result<Vec<f64>> {
    Ok(correlators::emission_spectrum(&out.correlations, omegas, model.params.omega_c)?)
}

/// Default quasi-eigenenergy time axis: `points` samples spanning the pulse
/// window with 10% margins.
pub fn default_eigen_times(model: &SystemModel, points: usize) -> Vec<f64> {
    let p = &model.params;
    let margin = 0.1 * p.pulse_width;
    linspace((p.pulse_start - margin).max(0.0), p.pulse_end() + margin, points)
}

/// Quasi-eigenenergies at `n_max = 1` (eight curves).
pub fn eigenenergies(model: &SystemModel, times: &[f64]) -> Result<Vec<Vec<f64>>> {
    Ok(model::quasi_eigenenergies(model, times, 1)?)
}
