//! Acceptance gate. Prints one PASS/FAIL line per criterion, with the
//! measured values underneath, and exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use qdsource::config::RunConfig;
use qdsource::engine::Parallel;
use qdsource::sweep::{self, Axis, SweepSpec};
use qdsource_core::correlators::{self, CorrelationGrid};
use qdsource_core::hilbert::Level;
use qdsource_core::linalg::{self, CMatrix, C64};
use qdsource_core::model::SystemModel;
use qdsource_core::phonon::{self, BathSettings, BathSpectrum, PhononBath};
use qdsource_core::pipeline::{self, RunOutput};
use qdsource_core::quadrature;
use qdsource_core::solver::{self, GridSettings, Propagator};
use qdsource_core::{ModelParams, UnitSystem};

struct Criterion {
    name: &'static str,
    lines: Vec<(bool, String)>,
}

impl Criterion {
    fn new(name: &'static str) -> Self {
        Criterion { name, lines: Vec::new() }
    }

    fn check(&mut self, ok: bool, detail: impl Into<String>) {
        self.lines.push((ok, detail.into()));
    }

    fn fail(&mut self, detail: impl Into<String>) {
        self.check(false, detail);
    }

    fn passed(&self) -> bool {
        !self.lines.is_empty() && self.lines.iter().all(|(ok, _)| *ok)
    }

    fn report(&self) -> bool {
        let ok = self.passed();
        println!("{} {}", if ok { "PASS" } else { "FAIL" }, self.name);
        for (ok, line) in &self.lines {
            println!("     {} {line}", if *ok { "ok " } else { "BAD" });
        }
        ok
    }
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn baseline(phonons: bool) -> ModelParams {
    ModelParams { phonons_enabled: phonons, ..ModelParams::baseline() }
}

fn baseline_bath() -> PhononBath {
    let p = ModelParams::baseline();
    PhononBath::new(p.alpha, p.omega_b, p.temperature, &UnitSystem::STANDARD, BathSettings::default()).unwrap()
}

fn model_with(params: ModelParams, bath: &PhononBath) -> SystemModel {
    let bath = params.phonons_enabled.then(|| bath.clone());
    SystemModel::new(params, bath).unwrap()
}

fn photon_number(model: &SystemModel, grid: &GridSettings) -> qdsource_core::Result<f64> {
    let traj = Propagator::new(model, grid)?.propagate()?;
    Ok(correlators::emitted_photon_number(&traj, &model.ops.number, model.params.kappa)?.photon_number)
}

struct Baselines {
    free: RunOutput,
    phonon: RunOutput,
    free_seconds: f64,
    phonon_seconds: f64,
}

fn run_baselines(bath: &PhononBath) -> Baselines {
    let timed = |phonons: bool| {
        let started = Instant::now();
        let model = model_with(baseline(phonons), bath);
        let out = pipeline::run_model(&model, &GridSettings::default(), &Parallel).unwrap();
        (out, started.elapsed().as_secs_f64())
    };
    let (free, free_seconds) = timed(false);
    let (phonon, phonon_seconds) = timed(true);
    Baselines { free, phonon, free_seconds, phonon_seconds }
}

fn reference_values(b: &Baselines) -> Criterion {
    let mut c = Criterion::new("reference-value regression (baseline, n_max = 2, T = 5 K)");
    for (label, out, seconds, ne, i) in [
        ("without phonons", &b.free, b.free_seconds, 1.00, 0.96),
        ("with phonons", &b.phonon, b.phonon_seconds, 0.93, 0.90),
    ] {
        let f = out.figures;
        c.check(within(f.photon_number, ne, 0.02), format!("{label}: N_e = {:.4} (target {ne:.2} ± 0.02)", f.photon_number));
        c.check(
            within(f.indistinguishability, i, 0.02),
            format!("{label}: I = {:.4} (target {i:.2} ± 0.02)", f.indistinguishability),
        );
        c.check(seconds < 300.0, format!("{label}: N_e and I in {seconds:.1} s (limit 300 s for N_e)"));
    }
    c
}

fn bath_oracles() -> Criterion {
    let mut c = Criterion::new("phonon-bath oracles");
    let p = ModelParams::baseline();
    let settings = BathSettings::default();
    let units = UnitSystem::STANDARD;
    let cold = BathSpectrum::new(p.alpha, p.omega_b, 0.0, &units).unwrap();
    let phi0 = cold.phi0(&settings).unwrap();
    let phi0_exact = phonon::phi0_zero_temperature(p.alpha, p.omega_b);
    let rel = (phi0 - phi0_exact).abs() / phi0_exact;
    c.check(rel < 1e-8, format!("phi(0) at T = 0: {phi0:.12e} vs alpha*omega_b^2 = {phi0_exact:.12e} (rel {rel:.1e})"));
    let shift = cold.polaron_shift(&settings).unwrap();
    let shift_exact = phonon::polaron_shift_closed_form(p.alpha, p.omega_b);
    let rel = (shift - shift_exact).abs() / shift_exact;
    c.check(
        rel < 1e-8,
        format!("delta_P: {shift:.12e} vs alpha*sqrt(pi/2)*omega_b^3 = {shift_exact:.12e} ns^-1 (rel {rel:.1e})"),
    );
    let warm = BathSpectrum::new(p.alpha, p.omega_b, 5.0, &units).unwrap();
    let b = warm.mean_displacement(&settings).unwrap();
    c.check(within(b, 0.96, 0.01), format!("<B>(5 K) = {b:.4} (target 0.96 ± 0.01)"));
    c
}

/// Largest sample of `values` on `axis` and its parabolic refinement.
fn refined_peak(axis: &[f64], values: &[f64]) -> Option<(f64, f64)> {
    let (k, _) = values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    if k == 0 || k + 1 == values.len() {
        return None;
    }
    let (y0, y1, y2) = (values[k - 1], values[k], values[k + 1]);
    let h = axis[k + 1] - axis[k];
    let curvature = y0 - 2.0 * y1 + y2;
    let shift = if curvature < 0.0 { 0.5 * (y0 - y2) / curvature } else { 0.0 };
    Some((axis[k] + shift * h, y1))
}

fn detuning_structure(bath: &PhononBath) -> Criterion {
    let mut c = Criterion::new("detuning structure");
    let units = UnitSystem::STANDARD;
    let grid = GridSettings::default();
    let target = units.rate_to_microev(ModelParams::baseline().omega_l_prime);
    let scan: Vec<f64> = (0..=28).map(|j| 130.0 + 2.5 * j as f64).collect();
    for sign in [1.0, -1.0] {
        let values: Vec<f64> = scan
            .iter()
            .map(|&d| {
                let p = ModelParams { delta: units.microev_to_rate(sign * d), ..baseline(false) };
                photon_number(&model_with(p, bath), &grid).unwrap()
            })
            .collect();
        match refined_peak(&scan, &values) {
            Some((at, ne)) => {
                let at = sign * at;
                c.check(
                    within(at, sign * target, 10.0),
                    format!("no phonons: N_e maximum at Delta = {at:+.1} ueV (target {:+.1} ± 10)", sign * target),
                );
                c.check(ne >= 0.97, format!("no phonons: N_e = {ne:.4} at that maximum (needs >= 0.97)"));
            }
            None => c.fail(format!("no phonons: no interior N_e maximum on sign {sign:+} of [130, 200] ueV")),
        }
    }
    let figures: Vec<_> = [158.0, -158.0]
        .iter()
        .map(|&d| {
            let p = ModelParams { delta: units.microev_to_rate(d), ..baseline(true) };
            pipeline::run_model(&model_with(p, bath), &grid, &Parallel).unwrap().figures
        })
        .collect();
    for (d, f) in [158.0, -158.0].iter().zip(&figures) {
        c.check(true, format!("phonons: Delta = {d:+} ueV gives N_e = {:.4}, I = {:.4}", f.photon_number, f.indistinguishability));
    }
    let (up, down) = (figures[0].indistinguishability, figures[1].indistinguishability);
    c.check(up > down, format!("phonons: I(+158 ueV) = {up:.4} > I(-158 ueV) = {down:.4}"));
    c
}

struct Peaks {
    center: (f64, f64),
    low: (f64, f64),
    high: (f64, f64),
}

fn spectrum_peaks(out: &RunOutput) -> qdsource_core::Result<Peaks> {
    let omegas: Vec<f64> = (0..=1600).map(|j| -400.0 + 0.5 * j as f64).collect();
    let s = correlators::emission_spectrum(&out.correlations, &omegas, 0.0)?;
    let maxima: Vec<(f64, f64)> = (1..s.len() - 1)
        .filter(|&j| s[j] > s[j - 1] && s[j] > s[j + 1])
        .map(|j| (omegas[j], s[j]))
        .collect();
    let best = |f: &dyn Fn(f64) -> bool| {
        maxima.iter().copied().filter(|(w, _)| f(*w)).max_by(|a, b| a.1.total_cmp(&b.1)).unwrap_or((f64::NAN, 0.0))
    };
    Ok(Peaks {
        center: best(&|w: f64| w.abs() < 100.0),
        low: best(&|w: f64| w <= -100.0),
        high: best(&|w: f64| w >= 100.0),
    })
}

fn spectrum_structure(b: &Baselines) -> Criterion {
    let mut c = Criterion::new("spectrum structure (Delta = 0)");
    let omega_l = ModelParams::baseline().omega_l_prime;
    let mut ratios = Vec::new();
    for (label, out) in [("without phonons", &b.free), ("with phonons", &b.phonon)] {
        let peaks = match spectrum_peaks(out) {
            Ok(p) => p,
            Err(e) => {
                c.fail(format!("{label}: {e}"));
                continue;
            }
        };
        let center = peaks.center.0;
        for (side, sign, peak) in [("low", -1.0, peaks.low), ("high", 1.0, peaks.high)] {
            let offset = peak.0 - center;
            c.check(
                within(offset, sign * omega_l, 0.05 * omega_l),
                format!("{label}: {side} sidepeak at {offset:+.1} ns^-1 from centre (target {:+.0} ± 5%)", sign * omega_l),
            );
        }
        let ratio = (peaks.low.1 / peaks.center.1, peaks.high.1 / peaks.center.1);
        c.check(true, format!("{label}: sidepeak/centre ratios {:.3e} (low), {:.3e} (high)", ratio.0, ratio.1));
        ratios.push(ratio);
    }
    if let [free, phonon] = ratios[..] {
        c.check(phonon.0 > free.0, format!("low sidepeak ratio grows with phonons: {:.3e} > {:.3e}", phonon.0, free.0));
        c.check(phonon.1 > free.1, format!("high sidepeak ratio grows with phonons: {:.3e} > {:.3e}", phonon.1, free.1));
    }
    c
}

fn quiet_params() -> ModelParams {
    ModelParams {
        gamma_x: 0.0,
        gamma_xx: 0.0,
        gamma_prime_0: 0.0,
        kappa: 0.0,
        g_prime: 0.0,
        omega_l_prime: 0.0,
        omega_p_max_prime: 0.0,
        phonons_enabled: false,
        ..ModelParams::baseline()
    }
}

fn synthetic(n: Vec<f64>, g1: impl Fn(usize, usize) -> C64, g2: impl Fn(usize, usize) -> f64) -> CorrelationGrid {
    let rows = n.len();
    CorrelationGrid {
        step: 0.01,
        g1: (0..rows).map(|k| (0..rows - k).map(|s| g1(k, s)).collect()).collect(),
        g2: (0..rows).map(|k| (0..rows - k).map(|s| g2(k, s)).collect()).collect(),
        n,
    }
}

fn kernel_oracle_error(model: &SystemModel, times: &[f64]) -> f64 {
    let bath = model.bath.as_ref().unwrap();
    let (tau_max, n_tau) = (0.004, 2001);
    let h_tau = tau_max / (n_tau - 1) as f64;
    let greens: Vec<(C64, C64)> = (0..n_tau).map(|k| bath.green_functions(k as f64 * h_tau).unwrap()).collect();
    let d = model.dim();
    let mut worst = 0.0f64;
    for &t in times {
        let kernel = solver::phonon_kernel(model, t).unwrap().unwrap();
        let eig = linalg::eigh(&model.hamiltonian(t)).unwrap();
        for m in 0..2 {
            let mut samples: Vec<Vec<C64>> = vec![Vec::with_capacity(n_tau); d * d];
            for (k, g) in greens.iter().enumerate() {
                let tau = k as f64 * h_tau;
                let phase = CMatrix::from_fn(d, |i, j| {
                    if i == j { C64::from_polar(1.0, -eig.values[i] * tau) } else { C64::new(0.0, 0.0) }
                });
                let u = eig.vectors.matmul(&phase).matmul(&eig.vectors.adjoint());
                let xt = u.matmul(&kernel.x[m]).matmul(&u.adjoint());
                let gm = if m == 0 { g.0 } else { g.1 };
                for (s, z) in samples.iter_mut().zip(xt.as_slice()) {
                    s.push(z * gm);
                }
            }
            for (s, z) in samples.iter().zip(kernel.x_tilde[m].as_slice()) {
                worst = worst.max((quadrature::simpson(s, h_tau) - z).norm());
            }
        }
    }
    worst
}

fn property_suite(b: &Baselines, bath: &PhononBath) -> Criterion {
    let started = Instant::now();
    let mut c = Criterion::new("property suite");

    for (label, out) in [("without phonons", &b.free), ("with phonons", &b.phonon)] {
        let d = &out.trajectory.diagnostics;
        c.check(d.max_trace_drift < 1e-8, format!("{label}: trace drift {:.1e} (< 1e-8)", d.max_trace_drift));
        c.check(
            d.max_hermiticity_error < 1e-10,
            format!("{label}: Hermiticity error {:.1e} (< 1e-10)", d.max_hermiticity_error),
        );
        let grid = &out.correlations;
        let g1_err = (0..grid.len()).map(|k| (grid.g1[k][0] - C64::new(grid.n[k], 0.0)).norm()).fold(0.0f64, f64::max);
        c.check(g1_err < 1e-8, format!("{label}: max |g1(t,0) - n(t)| = {g1_err:.1e} (< 1e-8)"));
    }

    let probe = {
        let m = SystemModel::without_phonons(quiet_params()).unwrap();
        let (i, j) = (m.ops.index(Level::G, 0), m.ops.index(Level::X, 0));
        CMatrix::from_fn(m.dim(), |r, s| {
            if (r == i || r == j) && (s == i || s == j) { C64::new(0.5, 0.0) } else { C64::new(0.0, 0.0) }
        })
    };
    let weak = PhononBath::new(0.0, bath.omega_b(), 5.0, &UnitSystem::STANDARD, BathSettings::default()).unwrap();
    let no_alpha = SystemModel::new(ModelParams { alpha: 0.0, ..baseline(true) }, Some(weak)).unwrap();
    let no_drive = model_with(ModelParams { phonons_enabled: true, ..quiet_params() }, bath);
    let mut largest = 0.0f64;
    for model in [&no_alpha, &no_drive] {
        for t in [0.0, 0.05, 0.1, 0.5] {
            largest = largest.max(solver::phonon_dissipator(model, t, &probe).unwrap().max_abs());
        }
    }
    c.check(largest == 0.0, format!("phonon dissipator with alpha = 0 or drives off: max |D| = {largest:e}"));

    let n: Vec<f64> = (0..800).map(|k| (-0.25 * k as f64).exp()).collect();
    let (n1, n2) = (n.clone(), n.clone());
    let perfect = correlators::indistinguishability(&synthetic(
        n.clone(),
        |k, s| C64::new((n1[k] * n1[k + s]).sqrt(), 0.0),
        |_, _| 0.0,
    ))
    .unwrap();
    let dephased =
        correlators::indistinguishability(&synthetic(n, |_, _| C64::new(0.0, 0.0), |k, s| n2[k] * n2[k + s])).unwrap();
    c.check(
        (perfect - 1.0).abs() < 1e-12 && dephased.abs() < 1e-12,
        format!("endpoint fixtures: I = {perfect:.15} (pure), {dephased:.1e} (fully dephased)"),
    );

    let kappa = 25.0;
    let cavity = SystemModel::without_phonons(ModelParams { kappa, ..quiet_params() }).unwrap();
    let settings = GridSettings { t_end: Some(1.0), ..GridSettings::default() };
    let prop = Propagator::new(&cavity, &settings).unwrap();
    let traj = prop.propagate_from(cavity.ops.pure_state(Level::G, 1)).unwrap();
    let decay_err = traj
        .times()
        .iter()
        .zip(traj.cavity_number(&cavity))
        .map(|(t, v)| (v - (-kappa * t).exp()).abs())
        .fold(0.0f64, f64::max);
    c.check(decay_err < 1e-10, format!("kappa-only decay: max |n(t) - exp(-kappa t)| = {decay_err:.1e}"));
    let grid = correlators::correlation_grid(&prop, &traj).unwrap();
    let omegas: Vec<f64> = (0..=4000).map(|j| j as f64 * 0.01).collect();
    let s = correlators::emission_spectrum(&grid, &omegas, 0.0).unwrap();
    let half = omegas.iter().zip(&s).find(|(_, v)| **v < 0.5 * s[0]).map_or(f64::NAN, |(w, _)| *w);
    let hwhm_err = (half - 0.5 * kappa).abs() / (0.5 * kappa);
    c.check(hwhm_err < 0.02, format!("kappa-only Lorentzian: HWHM {half:.2} ns^-1 vs {:.1} (error {:.2}%)", 0.5 * kappa, 100.0 * hwhm_err));

    let phonon_model = model_with(baseline(true), bath);
    let coarse = photon_number(&phonon_model, &GridSettings::default()).unwrap();
    let fine = photon_number(&phonon_model, &GridSettings { dt: Some(0.5 * solver::DEFAULT_DT), ..GridSettings::default() })
        .unwrap();
    c.check((coarse - fine).abs() < 1e-4, format!("RK4 dt halving: |dN_e| = {:.1e} (< 1e-4)", (coarse - fine).abs()));

    let kernel_err = kernel_oracle_error(&phonon_model, &[0.03, 0.1, 0.18]);
    c.check(kernel_err < 1e-5, format!("eigenbasis kernel vs tau-quadrature oracle: max error {kernel_err:.1e} (< 1e-5)"));

    let seconds = started.elapsed().as_secs_f64() + b.free_seconds + b.phonon_seconds;
    c.check(seconds < 120.0, format!("suite time {seconds:.1} s including the two baseline runs (< 120 s)"));
    c
}

fn sweep_values(spec: SweepSpec, label: &str, c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let outcome = match sweep::run_sweep(&spec, dir.path(), 0) {
        Ok(o) => o,
        Err(e) => return c.fail(format!("{label}: sweep failed: {e}")),
    };
    let results = &outcome.manifest.results;
    if let Some(bad) = results.iter().find(|r| !r.is_ok()) {
        return c.fail(format!("{label}: point {} failed: {}", bad.value, bad.error.as_deref().unwrap_or("")));
    }
    let axis: Vec<f64> = results.iter().map(|r| r.value).collect();
    let ne: Vec<f64> = results.iter().map(|r| r.photon_number.unwrap()).collect();
    let ind: Vec<f64> = results.iter().map(|r| r.indistinguishability.unwrap()).collect();
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ");
    for (name, v) in [("N_e", &ne), ("I", &ind)] {
        let ok = v.windows(2).all(|w| w[1] <= w[0]);
        c.check(ok, format!("{label}: {name} non-increasing over [{}]: [{}]", fmt(&axis), fmt(v)));
    }
}

fn monotonicity() -> Criterion {
    let mut c = Criterion::new("monotonicity sweeps");
    let base = RunConfig::default();
    let spec = |axis, values: Vec<f64>, base: RunConfig, dephasing| SweepSpec {
        axis,
        values,
        base,
        temperature_dependent_dephasing: dephasing,
        extras: Vec::new(),
        compare_renormalization: false,
    };
    sweep_values(
        spec(Axis::Temperature, vec![4.0, 10.0, 20.0, 30.0, 40.0], base.clone(), Some(true)),
        "T in K, phonons + gamma'(T)",
        &mut c,
    );
    sweep_values(spec(Axis::GammaPrime, vec![0.0, 1.0, 2.5, 5.0], base.clone(), None), "gamma' in ns^-1, phonons at 5 K", &mut c);
    let mut free = base;
    free.params.phonons_enabled = false;
    sweep_values(spec(Axis::GammaPrime, vec![0.0, 1.0, 2.5, 5.0], free, None), "gamma' in ns^-1, no phonons", &mut c);
    c
}

fn main() -> ExitCode {
    let started = Instant::now();
    let bath = baseline_bath();
    let baselines = run_baselines(&bath);
    let criteria = [
        reference_values(&baselines),
        bath_oracles(),
        detuning_structure(&bath),
        spectrum_structure(&baselines),
        property_suite(&baselines, &bath),
        monotonicity(),
    ];
    println!();
    let failed = criteria.iter().map(Criterion::report).filter(|ok| !ok).count();
    println!("\n{} of {} criteria passed in {:.0} s", criteria.len() - failed, criteria.len(), started.elapsed().as_secs_f64());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
