//! CSV exports. Every file is written to a temporary sibling and renamed
//! into place, so readers never see a partial file.

use std::fs;
use std::path::{Path, PathBuf};

use qdsource_core::correlators::{CorrelationGrid, Emission};
use qdsource_core::hilbert::Level;
use qdsource_core::model::SystemModel;
use qdsource_core::phonon::PhononBath;
use qdsource_core::solver::Trajectory;

use crate::error::{AppError, Result};

fn temp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".partial");
    path.with_file_name(name)
}

/// Writes `bytes` to `path` atomically.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(AppError::io(dir))?;
    }
    let tmp = temp_path(path);
    fs::write(&tmp, bytes).map_err(AppError::io(&tmp))?;
    fs::rename(&tmp, path).map_err(AppError::io(path))
}

/// Writes a header and rows of numbers as CSV, atomically.
pub fn write_table<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(AppError::csv(path))?;
    for row in rows {
        w.write_record(row.as_ref().iter().map(|v| v.to_string())).map_err(AppError::csv(path))?;
    }
    let bytes = w.into_inner().map_err(|e| AppError::io(path)(e.into_error()))?;
    write_atomic(path, &bytes)
}

/// Reads a numeric CSV back: (header, rows).
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(AppError::csv(path))?;
    let header = r.headers().map_err(AppError::csv(path))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(AppError::csv(path))?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| AppError::Config(format!("{}: {e}", path.display()))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// `t, rho_X, rho_Y, rho_XX, n_cav, P_e`.
pub fn write_trajectory(path: &Path, model: &SystemModel, traj: &Trajectory, emission: &Emission) -> Result<()> {
    let x = traj.population(model, Level::X);
    let y = traj.population(model, Level::Y);
    let xx = traj.population(model, Level::XX);
    let n = traj.cavity_number(model);
    let rows = traj
        .times()
        .into_iter()
        .enumerate()
        .map(|(k, t)| [t, x[k], y[k], xx[k], n[k], emission.cumulative[k]]);
    write_table(path, &["t", "rho_X", "rho_Y", "rho_XX", "n_cav", "P_e"], rows)
}

/// `t, P_e`.
pub fn write_emission(path: &Path, traj: &Trajectory, emission: &Emission) -> Result<()> {
    let rows = traj.times().into_iter().zip(&emission.cumulative).map(|(t, p)| [t, *p]);
    write_table(path, &["t", "P_e"], rows)
}

/// `t, tau, Re g1, Im g1, g2` over the whole triangle.
pub fn write_correlations(path: &Path, grid: &CorrelationGrid) -> Result<()> {
    let rows = (0..grid.len()).flat_map(|k| {
        (0..grid.g1[k].len()).map(move |s| [grid.time(k), grid.time(s), grid.g1[k][s].re, grid.g1[k][s].im, grid.g2[k][s]])
    });
    write_table(path, &["t", "tau", "Re g1", "Im g1", "g2"], rows)
}

/// `omega, S_c`.
pub fn write_spectrum(path: &Path, omegas: &[f64], values: &[f64]) -> Result<()> {
    write_table(path, &["omega", "S_c"], omegas.iter().zip(values).map(|(w, s)| [*w, *s]))
}

/// `t, λ1, …, λd`.
pub fn write_eigenenergies(path: &Path, times: &[f64], rows: &[Vec<f64>]) -> Result<()> {
    let d = rows.first().map_or(0, Vec::len);
    let names: Vec<String> = (1..=d).map(|i| format!("lambda{i}")).collect();
    let mut header = vec!["t"];
    header.extend(names.iter().map(String::as_str));
    let data = times.iter().zip(rows).map(|(t, r)| {
        let mut row = Vec::with_capacity(d + 1);
        row.push(*t);
        row.extend_from_slice(r);
        row
    });
    write_table(path, &header, data)
}

/// `T, B, delta_P` (δ_P in ns⁻¹).
pub fn write_bath_temperatures(path: &Path, rows: &[(f64, f64, f64)]) -> Result<()> {
    write_table(path, &["T", "B", "delta_P"], rows.iter().map(|(t, b, d)| [*t, *b, *d]))
}

/// `tau, Re G_g, Im G_g`, every `stride`-th stored sample.
pub fn write_green_function(path: &Path, bath: &PhononBath, stride: usize) -> Result<()> {
    let stride = stride.max(1);
    let rows = bath
        .gg_table
        .iter()
        .enumerate()
        .step_by(stride)
        .map(|(k, g)| [k as f64 * bath.tau_step, g.re, g.im]);
    write_table(path, &["tau", "Re G_g", "Im G_g"], rows)
}

/// `omega, Re Gamma_g, Re Gamma_u` on the table nodes.
pub fn write_half_fourier(path: &Path, bath: &PhononBath) -> Result<()> {
    let rows = bath
        .omega_grid()
        .into_iter()
        .zip(bath.gamma_g_table.iter().zip(&bath.gamma_u_table))
        .map(|(w, (g, u))| [w, g.re, u.re]);
    write_table(path, &["omega", "Re Gamma_g", "Re Gamma_u"], rows)
}
