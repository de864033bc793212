use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qdsource_core::phonon::{BathSpectrum, PhononBath};
use qdsource_core::UnitSystem;
use qdsource::config::{self, Overrides, RunConfig};
use qdsource::engine;
use qdsource::error::{AppError, Result};
use qdsource::output;
use qdsource::sweep::{self, SweepSpec};

#[derive(Parser, Debug)]
#[command(name = "qdsource", version, about = "Polaron master-equation simulator for a cavity-coupled quantum-dot photon source")]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ConfigArgs {
    /// TOML configuration file.
    #[arg(long, short = 'c', conflicts_with = "seeded_defaults")]
    config: Option<PathBuf>,

    /// Start from the built-in baseline parameters instead of a file.
    #[arg(long)]
    seeded_defaults: bool,

    #[command(flatten)]
    overrides: Overrides,
}

impl ConfigArgs {
    fn load(&self) -> Result<(config::RawConfig, RunConfig)> {
        if self.config.is_none() && !self.seeded_defaults {
            return Err(AppError::Config("pass --config FILE or --seeded-defaults".into()));
        }
        config::load(self.config.as_deref(), &self.overrides)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one parameter point: N_e, I, trajectory and emission curves.
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Output directory.
        #[arg(long, short, default_value = "run")]
        out: PathBuf,
        /// Also export the full two-time correlation tables (large).
        #[arg(long)]
        correlations: bool,
    },
    /// Run the sweep described by the config's [sweep] section, or replay a manifest.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, short, default_value = "sweep")]
        out: PathBuf,
        /// Rerun the plan stored in a manifest.json.
        #[arg(long, conflicts_with_all = ["config", "seeded_defaults"])]
        replay: Option<PathBuf>,
        /// Run every point with fixed primed and with fixed bare couplings.
        #[arg(long)]
        compare_renormalization: bool,
    },
    /// Cavity emission spectrum S_c(ω).
    Spectrum {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, short, default_value = "spectrum.csv")]
        out: PathBuf,
        /// Lowest ω − ω_c, ns⁻¹.
        #[arg(long, default_value_t = -600.0, allow_hyphen_values = true)]
        omega_min: f64,
        /// Highest ω − ω_c, ns⁻¹.
        #[arg(long, default_value_t = 600.0)]
        omega_max: f64,
        #[arg(long, default_value_t = 2401)]
        omega_points: usize,
    },
    /// Instantaneous eigenvalues of the system Hamiltonian (n_max = 1).
    Eigenenergies {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, short, default_value = "eigenenergies.csv")]
        out: PathBuf,
        /// Time axis start, ns (default: pulse window with 10% margins).
        #[arg(long, requires_all = ["t_stop"])]
        t_start: Option<f64>,
        #[arg(long)]
        t_stop: Option<f64>,
        #[arg(long, default_value_t = 401)]
        points: usize,
    },
    /// Phonon bath tables: ⟨B⟩ and δ_P versus T, G_g(τ), Γ_g(ω), Γ_u(ω).
    Bath {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, short, default_value = "bath")]
        out: PathBuf,
        /// Temperatures for the ⟨B⟩ table, K (comma separated).
        #[arg(long, value_delimiter = ',', default_values_t = (0..=50).map(f64::from).collect::<Vec<_>>())]
        temperatures: Vec<f64>,
        /// Keep every n-th Green-function sample.
        #[arg(long, default_value_t = 8)]
        tau_stride: usize,
    },
    /// Parse, validate and print the resolved configuration.
    ValidateConfig {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let json = serde_json::to_vec_pretty(value)
        .map_err(|source| AppError::Manifest { path: path.to_path_buf(), source })?;
    output::write_atomic(path, &json)
}

fn report_warnings(warnings: impl IntoIterator<Item = String>) {
    for w in warnings {
        log::warn!("{w}");
    }
}

#[derive(serde::Serialize)]
struct Summary<'a> {
    engine_version: &'a str,
    config: &'a RunConfig,
    figures: qdsource_core::pipeline::Figures,
    diagnostics: engine::DiagnosticsSummary,
}

fn cmd_run(cfg: &ConfigArgs, out: &Path, correlations: bool) -> Result<()> {
    let (_, run_cfg) = cfg.load()?;
    let (model, run) = engine::run(&run_cfg)?;
    let diagnostics = engine::DiagnosticsSummary::of(&run);
    report_warnings(diagnostics.warnings.clone());
    output::write_trajectory(&out.join("trajectory.csv"), &model, &run.trajectory, &run.emission)?;
    output::write_emission(&out.join("emission.csv"), &run.trajectory, &run.emission)?;
    if correlations {
        output::write_correlations(&out.join("correlations.csv"), &run.correlations)?;
    }
    let summary = Summary { engine_version: qdsource_core::VERSION, config: &run_cfg, figures: run.figures, diagnostics };
    write_json(&out.join("summary.json"), &summary)?;
    println!("N_e = {:.6}", run.figures.photon_number);
    println!("I   = {:.6}", run.figures.indistinguishability);
    println!("<B> = {:.6}", run.figures.mean_displacement);
    Ok(())
}

fn cmd_sweep(cfg: &ConfigArgs, out: &Path, replay: Option<&Path>, compare: bool, jobs: usize) -> Result<()> {
    let outcome = match replay {
        Some(manifest) => sweep::replay(manifest, out, jobs)?,
        None => {
            let (raw, base) = cfg.load()?;
            let raw_sweep = raw
                .sweep
                .ok_or_else(|| AppError::Config("the config has no [sweep] section".into()))?;
            let mut spec = SweepSpec::from_raw(&raw_sweep, base)?;
            spec.compare_renormalization |= compare;
            spec.validate()?;
            sweep::run_sweep(&spec, out, jobs)?
        }
    };
    let failed = outcome.manifest.results.iter().filter(|r| !r.is_ok()).count();
    println!(
        "{} points ({} resumed, {} failed) in {}",
        outcome.manifest.results.len(),
        outcome.resumed,
        failed,
        outcome.dir.display()
    );
    Ok(())
}

fn cmd_spectrum(cfg: &ConfigArgs, out: &Path, lo: f64, hi: f64, points: usize) -> Result<()> {
    let (_, run_cfg) = cfg.load()?;
    let (model, run) = engine::run(&run_cfg)?;
    let omega_c = model.params.omega_c;
    let omegas = engine::linspace(omega_c + lo, omega_c + hi, points);
    let s = engine::spectrum(&model, &run, &omegas)?;
    output::write_spectrum(out, &omegas, &s)
}

fn cmd_eigen(cfg: &ConfigArgs, out: &Path, range: Option<(f64, f64)>, points: usize) -> Result<()> {
    let (_, run_cfg) = cfg.load()?;
    let model = engine::build_model(&run_cfg)?;
    let times = match range {
        Some((a, b)) => engine::linspace(a, b, points),
        None => engine::default_eigen_times(&model, points),
    };
    let rows = engine::eigenenergies(&model, &times)?;
    output::write_eigenenergies(out, &times, &rows)
}

fn cmd_bath(cfg: &ConfigArgs, out: &Path, temperatures: &[f64], stride: usize) -> Result<()> {
    let (_, run_cfg) = cfg.load()?;
    let p = &run_cfg.params;
    let units = UnitSystem::STANDARD;
    let mut rows = Vec::with_capacity(temperatures.len());
    for &t in temperatures {
        let s = BathSpectrum::new(p.alpha, p.omega_b, t, &units)?;
        rows.push((t, s.mean_displacement(&run_cfg.bath)?, s.polaron_shift(&run_cfg.bath)?));
    }
    output::write_bath_temperatures(&out.join("bath_temperature.csv"), &rows)?;
    let bath = PhononBath::new(p.alpha, p.omega_b, p.temperature, &units, run_cfg.bath)?;
    output::write_green_function(&out.join("green_function.csv"), &bath, stride)?;
    output::write_half_fourier(&out.join("half_fourier.csv"), &bath)?;
    println!(
        "<B>({} K) = {:.6}, delta_P = {:.4} ns^-1 ({:.3} ueV)",
        p.temperature,
        bath.mean_displacement,
        bath.polaron_shift,
        units.rate_to_microev(bath.polaron_shift)
    );
    Ok(())
}

fn cmd_validate(cfg: &ConfigArgs) -> Result<()> {
    let (_, run_cfg) = cfg.load()?;
    let model = engine::build_model(&run_cfg)?;
    let json = serde_json::to_string_pretty(&run_cfg)
        .map_err(|source| AppError::Manifest { path: PathBuf::from("<stdout>"), source })?;
    let mut text = json;
    for w in model.warnings.iter() {
        text.push_str(&format!("\nwarning: {w}"));
    }
    let mut stdout = std::io::stdout().lock();
    match writeln!(stdout, "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(AppError::io("<stdout>")(e)),
        _ => Ok(()),
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Run { cfg, out, correlations } => cmd_run(cfg, out, *correlations),
        Command::Sweep { cfg, out, replay, compare_renormalization } => {
            cmd_sweep(cfg, out, replay.as_deref(), *compare_renormalization, cli.jobs)
        }
        Command::Spectrum { cfg, out, omega_min, omega_max, omega_points } => {
            cmd_spectrum(cfg, out, *omega_min, *omega_max, *omega_points)
        }
        Command::Eigenenergies { cfg, out, t_start, t_stop, points } => {
            cmd_eigen(cfg, out, t_start.zip(*t_stop), *points)
        }
        Command::Bath { cfg, out, temperatures, tau_stride } => cmd_bath(cfg, out, temperatures, *tau_stride),
        Command::ValidateConfig { cfg } => cmd_validate(cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
