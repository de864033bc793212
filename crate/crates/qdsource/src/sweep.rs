//! Parameter sweeps.
//!
//! A [`SweepSpec`] expands into a [`SweepPlan`]: a list of fully resolved
//! point configurations. The plan is what gets executed and what the
//! manifest records, so replaying a manifest reruns exactly the same inputs.
//!
//! Output layout of a sweep directory:
//!
//! ```text
//! points.csv            one row per point, in plan order
//! comparison.csv        paired bare/primed rows (renormalization comparison only)
//! manifest.json         plan + per-point wall time and diagnostics
//! points/0007/result.json
//! points/0007/trajectory.csv, spectrum.csv, ...   (requested extras)
//! ```
//!
//! Each point directory is complete once its `result.json` exists; a rerun
//! into the same directory skips such points when their configuration
//! matches.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use qdsource_core::phonon::BathSpectrum;
use qdsource_core::units::ns2_to_ps2;
use qdsource_core::{ModelParams, UnitSystem, VERSION};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{set_temperature_dependent_dephasing, Kind, RawSweep, RunConfig};
use crate::engine::{self, DiagnosticsSummary};
use crate::error::{AppError, Result};
use crate::output;

/// The swept parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Temperature,
    GammaPrime,
    Delta,
    PulseWidth,
    Alpha,
}

impl Axis {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "temperature" => Some(Axis::Temperature),
            "gamma_prime" => Some(Axis::GammaPrime),
            "delta" => Some(Axis::Delta),
            "pulse_width" => Some(Axis::PulseWidth),
            "alpha" => Some(Axis::Alpha),
            _ => None,
        }
    }

    pub fn kind(self) -> Kind {
        match self {
            Axis::Temperature => Kind::Temperature,
            Axis::GammaPrime | Axis::Delta => Kind::Rate,
            Axis::PulseWidth => Kind::Time,
            Axis::Alpha => Kind::Alpha,
        }
    }

    /// Column name in `points.csv`, with the unit of the printed value.
    pub fn column(self) -> &'static str {
        match self {
            Axis::Temperature => "temperature_K",
            Axis::GammaPrime => "gamma_prime_per_ns",
            Axis::Delta => "delta_per_ns",
            Axis::PulseWidth => "pulse_width_ns",
            Axis::Alpha => "alpha_ps2",
        }
    }

    /// Internal value as printed in `points.csv`.
    pub fn display(self, value: f64) -> f64 {
        match self {
            Axis::Alpha => ns2_to_ps2(value),
            _ => value,
        }
    }

    /// Sets the axis value (internal units) on `params`. A γ' point fixes
    /// the dephasing rate, so it also removes any temperature slope.
    pub fn apply(self, params: &mut ModelParams, value: f64) {
        match self {
            Axis::Temperature => params.temperature = value,
            Axis::GammaPrime => {
                params.gamma_prime_0 = value;
                params.dephasing_slope = 0.0;
            }
            Axis::Delta => params.delta = value,
            Axis::PulseWidth => params.pulse_width = value,
            Axis::Alpha => params.alpha = value,
        }
    }
}

/// Extra per-point artifacts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extra {
    Trajectory,
    Spectrum,
    Eigenenergies,
    Correlations,
}

impl Extra {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "trajectory" => Some(Extra::Trajectory),
            "spectrum" => Some(Extra::Spectrum),
            "eigenenergies" => Some(Extra::Eigenenergies),
            "correlations" => Some(Extra::Correlations),
            _ => None,
        }
    }
}

/// Which coupling convention a point uses in a renormalization comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Couplings as configured.
    Configured,
    /// Primed couplings held fixed.
    PrimedFixed,
    /// Bare couplings held fixed at their T = 0 values.
    BareFixed,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Configured => "configured",
            Mode::PrimedFixed => "primed_fixed",
            Mode::BareFixed => "bare_fixed",
        }
    }
}

/// A sweep as the user describes it.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    /// Internal units.
    pub values: Vec<f64>,
    pub base: RunConfig,
    /// Some(true/false) forces γ'(T) on or off; None keeps the base config.
    pub temperature_dependent_dephasing: Option<bool>,
    pub extras: Vec<Extra>,
    pub compare_renormalization: bool,
}

impl SweepSpec {
    pub fn from_raw(raw: &RawSweep, base: RunConfig) -> Result<Self> {
        let units = UnitSystem::STANDARD;
        let axis_name = raw.axis.as_deref().ok_or_else(|| AppError::Config("sweep.axis is required".into()))?;
        let axis = Axis::parse(axis_name)
            .ok_or_else(|| AppError::Config(format!("sweep.axis: unknown axis {axis_name:?}")))?;
        let key = "sweep.values";
        let values = match (&raw.values, &raw.start, &raw.stop, raw.points) {
            (Some(v), None, None, None) => {
                v.iter().map(|q| q.resolve(axis.kind(), key, &units)).collect::<Result<Vec<f64>>>()?
            }
            (None, Some(a), Some(b), Some(n)) => engine::linspace(
                a.resolve(axis.kind(), "sweep.start", &units)?,
                b.resolve(axis.kind(), "sweep.stop", &units)?,
                n,
            ),
            _ => {
                return Err(AppError::Config(
                    "sweep: give either `values` or all of `start`, `stop`, `points`".into(),
                ))
            }
        };
        let extras = raw
            .outputs
            .iter()
            .flatten()
            .filter(|s| !matches!(s.as_str(), "n_e" | "N_e" | "indistinguishability" | "I"))
            .map(|s| Extra::parse(s).ok_or_else(|| AppError::Config(format!("sweep.outputs: unknown output {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        let spec = SweepSpec {
            axis,
            values,
            base,
            temperature_dependent_dephasing: raw.temperature_dependent_dephasing,
            extras,
            compare_renormalization: raw.compare_renormalization.unwrap_or(false),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(AppError::Config("sweep: no values".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(AppError::Config("sweep: values must be finite".into()));
        }
        let up = self.values.windows(2).all(|w| w[1] > w[0]);
        let down = self.values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(AppError::Config("sweep: values must be strictly monotone".into()));
        }
        if self.compare_renormalization && self.axis != Axis::Temperature {
            return Err(AppError::Config("sweep: compare_renormalization needs the temperature axis".into()));
        }
        Ok(())
    }
}

/// One fully resolved point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSpec {
    pub index: usize,
    /// Axis value, internal units.
    pub value: f64,
    pub mode: Mode,
    pub config: RunConfig,
}

/// What gets executed; recorded verbatim in the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub axis: Axis,
    pub extras: Vec<Extra>,
    pub compare_renormalization: bool,
    pub points: Vec<PointSpec>,
}

/// ⟨B⟩ at T = 0 for the bath of `params`, the reference for fixed bare
/// couplings.
fn zero_temperature_displacement(cfg: &RunConfig) -> Result<f64> {
    let p = &cfg.params;
    if !p.phonons_enabled {
        return Ok(1.0);
    }
    let s = BathSpectrum::new(p.alpha, p.omega_b, 0.0, &UnitSystem::STANDARD)?;
    Ok(s.mean_displacement(&cfg.bath)?)
}

impl SweepPlan {
    pub fn from_spec(spec: &SweepSpec) -> Result<Self> {
        spec.validate()?;
        let mut points = Vec::new();
        for &value in &spec.values {
            let mut cfg = spec.base.clone();
            if let Some(on) = spec.temperature_dependent_dephasing {
                set_temperature_dependent_dephasing(&mut cfg.params, on);
            }
            spec.axis.apply(&mut cfg.params, value);
            if spec.compare_renormalization {
                let mut primed = cfg.clone();
                primed.params.renormalize_inputs = false;
                let b0 = zero_temperature_displacement(&cfg)?;
                let mut bare = cfg.clone();
                bare.params.renormalize_inputs = true;
                bare.params.g_prime /= b0;
                bare.params.omega_l_prime /= b0;
                bare.params.omega_p_max_prime /= b0;
                for (mode, c) in [(Mode::PrimedFixed, primed), (Mode::BareFixed, bare)] {
                    c.params.validate()?;
                    points.push(PointSpec { index: points.len(), value, mode, config: c });
                }
            } else {
                cfg.params.validate()?;
                points.push(PointSpec { index: points.len(), value, mode: Mode::Configured, config: cfg });
            }
        }
        Ok(SweepPlan {
            axis: spec.axis,
            extras: spec.extras.clone(),
            compare_renormalization: spec.compare_renormalization,
            points,
        })
    }
}

/// Outcome of one point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub index: usize,
    pub value: f64,
    pub mode: Mode,
    pub config: RunConfig,
    pub photon_number: Option<f64>,
    pub indistinguishability: Option<f64>,
    pub mean_displacement: Option<f64>,
    pub error: Option<String>,
    pub diagnostics: Option<DiagnosticsSummary>,
    pub wall_time_s: f64,
}

impl PointResult {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// The manifest written next to `points.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub engine_version: String,
    pub plan: SweepPlan,
    pub results: Vec<PointResult>,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(AppError::io(path))?;
        serde_json::from_str(&text).map_err(|source| AppError::Manifest { path: path.to_path_buf(), source })
    }
}

/// Result of a whole sweep.
#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    /// Points reused from an earlier, interrupted run.
    pub resumed: usize,
}

fn point_dir(out: &Path, index: usize) -> PathBuf {
    out.join("points").join(format!("{index:04}"))
}

fn run_point(plan: &SweepPlan, point: &PointSpec, out: &Path) -> Result<(PointResult, bool)> {
    let dir = point_dir(out, point.index);
    let result_path = dir.join("result.json");
    if result_path.exists() {
        if let Ok(text) = fs::read_to_string(&result_path) {
            if let Ok(prev) = serde_json::from_str::<PointResult>(&text) {
                if prev.config == point.config && prev.mode == point.mode && prev.value == point.value {
                    log::debug!("point {} already complete", point.index);
                    return Ok((prev, true));
                }
            }
        }
    }
    let started = Instant::now();
    let mut result = PointResult {
        index: point.index,
        value: point.value,
        mode: point.mode,
        config: point.config.clone(),
        photon_number: None,
        indistinguishability: None,
        mean_displacement: None,
        error: None,
        diagnostics: None,
        wall_time_s: 0.0,
    };
    match engine::run(&point.config) {
        Ok((model, run)) => {
            result.photon_number = Some(run.figures.photon_number);
            result.indistinguishability = Some(run.figures.indistinguishability);
            result.mean_displacement = Some(run.figures.mean_displacement);
            result.diagnostics = Some(DiagnosticsSummary::of(&run));
            for extra in &plan.extras {
                match extra {
                    Extra::Trajectory => {
                        output::write_trajectory(&dir.join("trajectory.csv"), &model, &run.trajectory, &run.emission)?
                    }
                    Extra::Correlations => output::write_correlations(&dir.join("correlations.csv"), &run.correlations)?,
                    Extra::Spectrum => {
                        let axis = engine::default_spectrum_axis(model.params.omega_c);
                        match engine::spectrum(&model, &run, &axis) {
                            Ok(s) => output::write_spectrum(&dir.join("spectrum.csv"), &axis, &s)?,
                            Err(e) => result.error = Some(e.to_string()),
                        }
                    }
                    Extra::Eigenenergies => {
                        let times = engine::default_eigen_times(&model, 401);
                        match engine::eigenenergies(&model, &times) {
                            Ok(rows) => output::write_eigenenergies(&dir.join("eigenenergies.csv"), &times, &rows)?,
                            Err(e) => result.error = Some(e.to_string()),
                        }
                    }
                }
            }
        }
        Err(e @ (AppError::Numerical(_) | AppError::Config(_))) => {
            log::warn!("point {} failed: {e}", point.index);
            result.error = Some(e.to_string());
        }
        Err(e) => return Err(e),
    }
    result.wall_time_s = started.elapsed().as_secs_f64();
    let json = serde_json::to_vec_pretty(&result)
        .map_err(|source| AppError::Manifest { path: result_path.clone(), source })?;
    output::write_atomic(&result_path, &json)?;
    Ok((result, false))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_points_csv(path: &Path, plan: &SweepPlan, results: &[PointResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", plan.axis.column(), "mode", "N_e", "I", "B", "status", "error"])
        .map_err(AppError::csv(path))?;
    for r in results {
        w.write_record([
            r.index.to_string(),
            plan.axis.display(r.value).to_string(),
            r.mode.name().to_string(),
            opt(r.photon_number),
            opt(r.indistinguishability),
            opt(r.mean_displacement),
            if r.is_ok() { "ok" } else { "error" }.to_string(),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(AppError::csv(path))?;
    }
    let bytes = w.into_inner().map_err(|e| AppError::io(path)(e.into_error()))?;
    output::write_atomic(path, &bytes)
}

/// Paired bare/primed rows: value, N_e and I for both modes, and differences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComparisonRow {
    pub value: f64,
    pub photon_number_primed: f64,
    pub photon_number_bare: f64,
    pub indistinguishability_primed: f64,
    pub indistinguishability_bare: f64,
}

/// Pairs up the results of a renormalization comparison; points that failed
/// in either mode are skipped.
pub fn comparison_rows(results: &[PointResult]) -> Vec<ComparisonRow> {
    results
        .chunks(2)
        .filter_map(|pair| match pair {
            [a, b] if a.mode == Mode::PrimedFixed && b.mode == Mode::BareFixed => Some(ComparisonRow {
                value: a.value,
                photon_number_primed: a.photon_number?,
                photon_number_bare: b.photon_number?,
                indistinguishability_primed: a.indistinguishability?,
                indistinguishability_bare: b.indistinguishability?,
            }),
            _ => None,
        })
        .collect()
}

fn write_comparison_csv(path: &Path, plan: &SweepPlan, results: &[PointResult]) -> Result<()> {
    let rows = comparison_rows(results).into_iter().map(|r| {
        [
            plan.axis.display(r.value),
            r.photon_number_primed,
            r.photon_number_bare,
            r.indistinguishability_primed,
            r.indistinguishability_bare,
            r.photon_number_bare - r.photon_number_primed,
            r.indistinguishability_bare - r.indistinguishability_primed,
        ]
    });
    output::write_table(
        path,
        &[plan.axis.column(), "N_e_primed", "N_e_bare", "I_primed", "I_bare", "dN_e", "dI"],
        rows,
    )
}

/// Executes a plan into `out` with at most `jobs` workers (0 = all cores).
pub fn run_plan(plan: &SweepPlan, out: &Path, jobs: usize) -> Result<SweepOutcome> {
    fs::create_dir_all(out).map_err(AppError::io(out))?;
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| AppError::Config(format!("worker pool: {e}")))?;
    let outcomes: Vec<Result<(PointResult, bool)>> =
        pool.install(|| plan.points.par_iter().map(|p| run_point(plan, p, out)).collect());
    let mut results = Vec::with_capacity(outcomes.len());
    let mut resumed = 0;
    for o in outcomes {
        let (r, reused) = o?;
        resumed += usize::from(reused);
        results.push(r);
    }
    write_points_csv(&out.join("points.csv"), plan, &results)?;
    if plan.compare_renormalization {
        write_comparison_csv(&out.join("comparison.csv"), plan, &results)?;
    }
    let manifest = RunManifest {
        engine_version: VERSION.to_string(),
        plan: plan.clone(),
        results,
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    let path = out.join("manifest.json");
    let json = serde_json::to_vec_pretty(&manifest).map_err(|source| AppError::Manifest { path: path.clone(), source })?;
    output::write_atomic(&path, &json)?;
    Ok(SweepOutcome { dir: out.to_path_buf(), manifest, resumed })
}

/// `run_sweep`: expands and executes a spec.
pub fn run_sweep(spec: &SweepSpec, out: &Path, jobs: usize) -> Result<SweepOutcome> {
    run_plan(&SweepPlan::from_spec(spec)?, out, jobs)
}

/// `compare_renormalization`: the same sweep run in both coupling modes.
pub fn compare_renormalization(spec: &SweepSpec, out: &Path, jobs: usize) -> Result<(SweepOutcome, Vec<ComparisonRow>)> {
    let spec = SweepSpec { compare_renormalization: true, ..spec.clone() };
    let outcome = run_sweep(&spec, out, jobs)?;
    let rows = comparison_rows(&outcome.manifest.results);
    Ok((outcome, rows))
}

/// Reruns the plan recorded in a manifest.
pub fn replay(manifest: &Path, out: &Path, jobs: usize) -> Result<SweepOutcome> {
    let m = RunManifest::read(manifest)?;
    run_plan(&m.plan, out, jobs)
}
