//! TOML configuration: schema, unit-suffixed quantities, CLI overrides, and
//! resolution into validated engine inputs.
//!
//! Every physical value may be written as a bare number in the section's
//! default unit or as a string with an explicit unit, e.g. `"32.9 ueV"`,
//! `"0.9 meV"`, `"0.03 ps2"`, `"188.5 ps"`. Default units:
//!
//! | kind        | default | accepted suffixes                         |
//! |-------------|---------|-------------------------------------------|
//! | rate/energy | ns^-1   | ns^-1, /ns, ps^-1, ueV, μeV, meV          |
//! | time        | ns      | ns, ps                                    |
//! | alpha       | ps^2    | ps2, ps^2, ns2, ns^2                      |
//! | temperature | K       | K                                         |
//! | slope       | ns^-1/K | ns^-1/K, ueV/K                            |

use std::path::Path;

use clap::Args;
use qdsource_core::phonon::BathSettings;
use qdsource_core::solver::GridSettings;
use qdsource_core::units::{ps2_to_ns2, EMPIRICAL_DEPHASING_SLOPE};
use qdsource_core::{ModelParams, PulseShape, UnitSystem};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

/// A number in the default unit, or a number with a unit suffix.
#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

/// Physical dimension of a configuration value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Rate,
    Time,
    Alpha,
    Temperature,
    Slope,
}

/// Splits `"32.9 ueV"` into (32.9, "ueV") using the longest numeric prefix.
fn split_number(s: &str) -> Option<(f64, &str)> {
    let s = s.trim();
    (1..=s.len())
        .rev()
        .filter(|&i| s.is_char_boundary(i))
        .find_map(|i| s[..i].trim().parse::<f64>().ok().map(|v| (v, s[i..].trim())))
}

fn unit_factor(kind: Kind, unit: &str, units: &UnitSystem) -> Option<f64> {
    let u = unit.replace("⁻¹", "^-1").replace(['μ', 'µ'], "u");
    let u = u.as_str();
    let f = match kind {
        Kind::Rate => match u {
            "" | "ns^-1" | "ns-1" | "/ns" | "1/ns" => 1.0,
            "ps^-1" | "ps-1" | "/ps" | "1/ps" => 1e3,
            "ueV" => units.microev_to_rate(1.0),
            "meV" => units.mev_to_rate(1.0),
            _ => return None,
        },
        Kind::Time => match u {
            "" | "ns" => 1.0,
            "ps" => 1e-3,
            _ => return None,
        },
        Kind::Alpha => match u {
            "" | "ps2" | "ps^2" | "ps²" => ps2_to_ns2(1.0),
            "ns2" | "ns^2" | "ns²" => 1.0,
            _ => return None,
        },
        Kind::Temperature => match u {
            "" | "K" => 1.0,
            _ => return None,
        },
        Kind::Slope => match u {
            "" | "ns^-1/K" | "ns-1/K" | "/ns/K" => 1.0,
            "ueV/K" => units.microev_to_rate(1.0),
            _ => return None,
        },
    };
    Some(f)
}

impl Quantity {
    /// Value in internal units (ns⁻¹, ns, ns², K).
    pub fn resolve(&self, kind: Kind, key: &str, units: &UnitSystem) -> Result<f64> {
        let (value, unit) = match self {
            Quantity::Number(v) => (*v, ""),
            Quantity::Text(s) => split_number(s)
                .ok_or_else(|| AppError::Config(format!("{key}: cannot parse quantity {s:?}")))?,
        };
        let factor = unit_factor(kind, unit, units)
            .ok_or_else(|| AppError::Config(format!("{key}: unit {unit:?} is not valid for a {kind:?} value")))?;
        Ok(value * factor)
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawRates {
    pub gamma_x: Option<Quantity>,
    pub gamma_xx: Option<Quantity>,
    pub gamma_prime_0: Option<Quantity>,
    pub dephasing_slope: Option<Quantity>,
    pub kappa: Option<Quantity>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawCouplings {
    pub g_prime: Option<Quantity>,
    /// Defaults to 5 g'.
    pub omega_l_prime: Option<Quantity>,
    /// Defaults to 2.5 g'.
    pub omega_p_max_prime: Option<Quantity>,
    pub renormalize_inputs: Option<bool>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawDetuning {
    pub delta: Option<Quantity>,
    pub delta_l: Option<Quantity>,
    pub allow_nonzero_delta_l: Option<bool>,
    pub omega_c: Option<Quantity>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawPulse {
    pub shape: Option<String>,
    /// Defaults to 3π/g'.
    pub width: Option<Quantity>,
    pub start: Option<Quantity>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawPhonons {
    pub enabled: Option<bool>,
    pub alpha: Option<Quantity>,
    pub omega_b: Option<Quantity>,
    pub temperature: Option<Quantity>,
    pub explicit_polaron_shift: Option<bool>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawNumerics {
    pub n_max: Option<usize>,
    pub outer_dt: Option<Quantity>,
    pub dt: Option<Quantity>,
    pub t_end: Option<Quantity>,
    pub exact_tail: Option<bool>,
}

/// `[sweep]` section.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawSweep {
    pub axis: Option<String>,
    pub values: Option<Vec<Quantity>>,
    /// Alternative to `values`: `start`, `stop`, `points` (inclusive, linear).
    pub start: Option<Quantity>,
    pub stop: Option<Quantity>,
    pub points: Option<usize>,
    /// true sets the empirical slope, false forces a constant γ'.
    pub temperature_dependent_dephasing: Option<bool>,
    pub outputs: Option<Vec<String>>,
    pub compare_renormalization: Option<bool>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawConfig {
    pub rates: RawRates,
    pub couplings: RawCouplings,
    pub detuning: RawDetuning,
    pub pulse: RawPulse,
    pub phonons: RawPhonons,
    pub numerics: RawNumerics,
    pub sweep: Option<RawSweep>,
}

/// Fully resolved inputs of one simulation.
#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
pub struct RunConfig {
    pub params: ModelParams,
    pub grid: GridSettings,
    pub bath: BathSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { params: ModelParams::baseline(), grid: GridSettings::default(), bath: BathSettings::default() }
    }
}

fn get(q: &Option<Quantity>, kind: Kind, key: &str, default: f64, units: &UnitSystem) -> Result<f64> {
    match q {
        Some(q) => q.resolve(kind, key, units),
        None => Ok(default),
    }
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| AppError::Config(e.to_string()))?;
        Self::from_table(table)
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        RawConfig::deserialize(toml::Value::Table(table)).map_err(|e| AppError::Config(e.to_string()))
    }

    /// Resolves into engine inputs, filling baseline defaults.
    pub fn resolve(&self) -> Result<RunConfig> {
        let u = UnitSystem::STANDARD;
        let base = ModelParams::baseline();
        let r = &self.rates;
        let c = &self.couplings;
        let d = &self.detuning;
        let p = &self.pulse;
        let ph = &self.phonons;
        let n = &self.numerics;

        let g_prime = get(&c.g_prime, Kind::Rate, "couplings.g_prime", base.g_prime, &u)?;
        let shape = match &p.shape {
            Some(s) => PulseShape::parse(s)
                .ok_or_else(|| AppError::Config(format!("pulse.shape: unknown shape {s:?}")))?,
            None => base.pulse_shape,
        };
        let default_width = if g_prime > 0.0 { 3.0 * std::f64::consts::PI / g_prime } else { base.pulse_width };
        let params = ModelParams {
            gamma_x: get(&r.gamma_x, Kind::Rate, "rates.gamma_x", base.gamma_x, &u)?,
            gamma_xx: get(&r.gamma_xx, Kind::Rate, "rates.gamma_xx", base.gamma_xx, &u)?,
            gamma_prime_0: get(&r.gamma_prime_0, Kind::Rate, "rates.gamma_prime_0", base.gamma_prime_0, &u)?,
            dephasing_slope: get(&r.dephasing_slope, Kind::Slope, "rates.dephasing_slope", base.dephasing_slope, &u)?,
            kappa: get(&r.kappa, Kind::Rate, "rates.kappa", base.kappa, &u)?,
            g_prime,
            omega_l_prime: get(&c.omega_l_prime, Kind::Rate, "couplings.omega_l_prime", 5.0 * g_prime, &u)?,
            omega_p_max_prime: get(&c.omega_p_max_prime, Kind::Rate, "couplings.omega_p_max_prime", 2.5 * g_prime, &u)?,
            renormalize_inputs: c.renormalize_inputs.unwrap_or(base.renormalize_inputs),
            delta: get(&d.delta, Kind::Rate, "detuning.delta", base.delta, &u)?,
            delta_l: get(&d.delta_l, Kind::Rate, "detuning.delta_l", base.delta_l, &u)?,
            allow_nonzero_delta_l: d.allow_nonzero_delta_l.unwrap_or(base.allow_nonzero_delta_l),
            omega_c: get(&d.omega_c, Kind::Rate, "detuning.omega_c", base.omega_c, &u)?,
            pulse_width: get(&p.width, Kind::Time, "pulse.width", default_width, &u)?,
            pulse_start: get(&p.start, Kind::Time, "pulse.start", base.pulse_start, &u)?,
            pulse_shape: shape,
            phonons_enabled: ph.enabled.unwrap_or(base.phonons_enabled),
            alpha: get(&ph.alpha, Kind::Alpha, "phonons.alpha", base.alpha, &u)?,
            omega_b: get(&ph.omega_b, Kind::Rate, "phonons.omega_b", base.omega_b, &u)?,
            temperature: get(&ph.temperature, Kind::Temperature, "phonons.temperature", base.temperature, &u)?,
            explicit_polaron_shift: ph.explicit_polaron_shift.unwrap_or(base.explicit_polaron_shift),
            n_max: n.n_max.unwrap_or(base.n_max),
        };
        params.validate()?;

        let defaults = GridSettings::default();
        let grid = GridSettings {
            outer_dt: get(&n.outer_dt, Kind::Time, "numerics.outer_dt", defaults.outer_dt, &u)?,
            dt: n.dt.as_ref().map(|q| q.resolve(Kind::Time, "numerics.dt", &u)).transpose()?,
            t_end: n.t_end.as_ref().map(|q| q.resolve(Kind::Time, "numerics.t_end", &u)).transpose()?,
            exact_tail: n.exact_tail.unwrap_or(defaults.exact_tail),
        };
        if !(grid.outer_dt > 0.0) {
            return Err(AppError::Config("numerics.outer_dt: must be > 0".into()));
        }
        Ok(RunConfig { params, grid, bath: BathSettings::default() })
    }
}

/// Sets the empirical temperature slope of γ' on or off.
pub fn set_temperature_dependent_dephasing(params: &mut ModelParams, on: bool) {
    params.dephasing_slope = if on { EMPIRICAL_DEPHASING_SLOPE } else { 0.0 };
}

/// Interprets a CLI string the way TOML would: bool, integer, float, else string.
fn cli_value(s: &str) -> toml::Value {
    if let Ok(b) = s.parse::<bool>() {
        toml::Value::Boolean(b)
    } else if let Ok(i) = s.parse::<i64>() {
        toml::Value::Integer(i)
    } else if let Ok(f) = s.parse::<f64>() {
        toml::Value::Float(f)
    } else {
        toml::Value::String(s.to_string())
    }
}

macro_rules! overrides {
    ($( $field:ident => $section:literal . $key:literal ),* $(,)?) => {
        /// Command-line overrides; each flag mirrors one configuration key
        /// and accepts the same syntax (numbers, unit strings, booleans).
        #[derive(Clone, Debug, Default, Args)]
        pub struct Overrides {
            $(
                #[arg(long, value_name = "VALUE", help = concat!("Overrides ", $section, ".", $key))]
                pub $field: Option<String>,
            )*
            /// Same as --enabled false.
            #[arg(long)]
            pub no_phonons: bool,
        }

        impl Overrides {
            /// (section, key, value) for every flag given.
            pub fn entries(&self) -> Vec<(&'static str, &'static str, String)> {
                let mut out = Vec::new();
                $(
                    if let Some(v) = &self.$field {
                        out.push(($section, $key, v.clone()));
                    }
                )*
                if self.no_phonons {
                    out.push(("phonons", "enabled", "false".to_string()));
                }
                out
            }
        }
    };
}

overrides! {
    gamma_x => "rates"."gamma_x",
    gamma_xx => "rates"."gamma_xx",
    gamma_prime_0 => "rates"."gamma_prime_0",
    dephasing_slope => "rates"."dephasing_slope",
    kappa => "rates"."kappa",
    g_prime => "couplings"."g_prime",
    omega_l_prime => "couplings"."omega_l_prime",
    omega_p_max_prime => "couplings"."omega_p_max_prime",
    renormalize_inputs => "couplings"."renormalize_inputs",
    delta => "detuning"."delta",
    delta_l => "detuning"."delta_l",
    allow_nonzero_delta_l => "detuning"."allow_nonzero_delta_l",
    omega_c => "detuning"."omega_c",
    shape => "pulse"."shape",
    width => "pulse"."width",
    start => "pulse"."start",
    enabled => "phonons"."enabled",
    alpha => "phonons"."alpha",
    omega_b => "phonons"."omega_b",
    temperature => "phonons"."temperature",
    explicit_polaron_shift => "phonons"."explicit_polaron_shift",
    n_max => "numerics"."n_max",
    outer_dt => "numerics"."outer_dt",
    dt => "numerics"."dt",
    t_end => "numerics"."t_end",
    exact_tail => "numerics"."exact_tail",
}

impl Overrides {
    /// Writes the overrides into a parsed TOML table.
    pub fn apply(&self, table: &mut toml::Table) -> Result<()> {
        for (section, key, value) in self.entries() {
            let entry = table
                .entry(section.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            let toml::Value::Table(t) = entry else {
                return Err(AppError::Config(format!("{section} must be a table")));
            };
            t.insert(key.to_string(), cli_value(&value));
        }
        Ok(())
    }
}

/// Reads a config file into a TOML table (an empty table when `path` is None).
pub fn read_table(path: Option<&Path>) -> Result<toml::Table> {
    match path {
        None => Ok(toml::Table::new()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|source| AppError::ReadConfig { path: p.to_path_buf(), source })?;
            text.parse().map_err(|e: toml::de::Error| AppError::Config(format!("{}: {e}", p.display())))
        }
    }
}

/// File (or baseline) plus overrides, parsed and resolved.
pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<(RawConfig, RunConfig)> {
    let mut table = read_table(path)?;
    overrides.apply(&mut table)?;
    let raw = RawConfig::from_table(table)?;
    let resolved = raw.resolve()?;
    Ok((raw, resolved))
}

/// `load_config`: a config file resolved without overrides.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    Ok(load(Some(path), &Overrides::default())?.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_units() {
        assert_eq!(split_number("32.9 ueV"), Some((32.9, "ueV")));
        assert_eq!(split_number("1e-3ns"), Some((1e-3, "ns")));
        assert_eq!(split_number("0.03 ps2"), Some((0.03, "ps2")));
        assert_eq!(split_number("-158 μeV"), Some((-158.0, "μeV")));
        assert_eq!(split_number("ueV"), None);
    }

    #[test]
    fn coupling_in_microvolts() {
        let raw = RawConfig::parse("[couplings]\ng_prime = \"32.9 ueV\"\n").unwrap();
        let cfg = raw.resolve().unwrap();
        assert!((cfg.params.g_prime - 50.0).abs() < 0.05, "{}", cfg.params.g_prime);
        assert!((cfg.params.omega_l_prime - 5.0 * cfg.params.g_prime).abs() < 1e-12);
        let width = 3.0 * std::f64::consts::PI / cfg.params.g_prime;
        assert!((cfg.params.pulse_width - width).abs() < 1e-15);
    }

    #[test]
    fn empty_config_is_baseline() {
        let cfg = RawConfig::parse("").unwrap().resolve().unwrap();
        assert_eq!(cfg.params, ModelParams::baseline());
        assert_eq!(cfg.grid, GridSettings::default());
    }

    #[test]
    fn unit_strings() {
        let text = r#"
            [phonons]
            alpha = "0.03 ps^2"
            omega_b = "0.9 meV"
            temperature = "10 K"
            [pulse]
            width = "188.5 ps"
            [rates]
            kappa = "16.455 ueV"
            dephasing_slope = 2.127
        "#;
        let cfg = RawConfig::parse(text).unwrap().resolve().unwrap();
        let p = &cfg.params;
        assert!((p.alpha - 3e-8).abs() < 1e-20);
        assert!((p.omega_b - 1367.34).abs() < 0.01);
        assert_eq!(p.temperature, 10.0);
        assert!((p.pulse_width - 0.1885).abs() < 1e-12);
        assert!((p.kappa - 25.0).abs() < 0.01);
        assert!((p.gamma_prime() - 22.27).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RawConfig::parse("[rates]\ngamma_x = -1\n").unwrap().resolve().is_err());
        assert!(RawConfig::parse("[rates]\ngamma_z = 1\n").is_err());
        assert!(RawConfig::parse("[nonsense]\n").is_err());
        assert!(RawConfig::parse("[rates]\nkappa = \"25 K\"\n").unwrap().resolve().is_err());
        assert!(RawConfig::parse("[numerics]\nn_max = 0\n").unwrap().resolve().is_err());
        assert!(RawConfig::parse("[detuning]\ndelta_l = 5\n").unwrap().resolve().is_err());
        assert!(RawConfig::parse("[pulse]\nshape = \"square\"\n").unwrap().resolve().is_err());
        assert!(RawConfig::parse("rates = ").is_err());
    }

    #[test]
    fn overrides_take_precedence() {
        let mut table: toml::Table = "[phonons]\ntemperature = 5\n".parse().unwrap();
        let o = Overrides {
            temperature: Some("20".into()),
            delta: Some("158 ueV".into()),
            n_max: Some("3".into()),
            no_phonons: true,
            ..Overrides::default()
        };
        o.apply(&mut table).unwrap();
        let cfg = RawConfig::from_table(table).unwrap().resolve().unwrap();
        assert_eq!(cfg.params.temperature, 20.0);
        assert_eq!(cfg.params.n_max, 3);
        assert!(!cfg.params.phonons_enabled);
        assert!((cfg.params.delta - 240.04).abs() < 0.01, "{}", cfg.params.delta);
    }
}
