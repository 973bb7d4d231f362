//! Run configuration: one TOML file plus dotted `key=value` overrides.

use std::path::{Path, PathBuf};

use pilot_brownian::bath::CutoffShape;
use pilot_brownian::langevin::MemoryMethod;
use pilot_brownian::relax::{Boundary, Variant};
use pilot_brownian::thermal::Occupation;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    pub output_dir: PathBuf,
    pub bath: BathParams,
    pub bath_check: BathCheckParams,
    pub thermal: ThermalParams,
    pub correlator: CorrelatorParams,
    pub dynamics: DynamicsParams,
    pub relax: RelaxParams,
    pub kostin: KostinParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            workers: 0,
            output_dir: PathBuf::from("pbm-out"),
            bath: BathParams::default(),
            bath_check: BathCheckParams::default(),
            thermal: ThermalParams::default(),
            correlator: CorrelatorParams::default(),
            dynamics: DynamicsParams::default(),
            relax: RelaxParams::default(),
            kostin: KostinParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BathParams {
    pub mass: f64,
    pub gamma0: f64,
    pub cutoff: f64,
    pub n_modes: usize,
    pub cutoff_shape: CutoffShape,
    /// Upper edge of the Lorentzian frequency grid in units of `cutoff`.
    pub freq_max_ratio: f64,
}

impl Default for BathParams {
    fn default() -> Self {
        BathParams {
            mass: 1.0,
            gamma0: 1.0,
            cutoff: 20.0,
            n_modes: 400,
            cutoff_shape: CutoffShape::Sharp,
            freq_max_ratio: pilot_brownian::bath::DEFAULT_FREQ_MAX_RATIO,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BathCheckParams {
    /// Largest lag in units of `1 / cutoff`.
    pub tau_max: f64,
    pub n_tau: usize,
}

impl Default for BathCheckParams {
    fn default() -> Self {
        BathCheckParams {
            tau_max: 5.0,
            n_tau: 201,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThermalParams {
    pub temperature: f64,
    pub occupation: Occupation,
}

impl Default for ThermalParams {
    fn default() -> Self {
        ThermalParams {
            temperature: 200.0,
            occupation: Occupation::HighTemperature,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorrelatorParams {
    pub n_samples: usize,
    pub tau_max: f64,
    pub n_tau: usize,
    pub t_ref: f64,
}

impl Default for CorrelatorParams {
    fn default() -> Self {
        CorrelatorParams {
            n_samples: 10_000,
            tau_max: 1.0,
            n_tau: 10,
            t_ref: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    White,
    SampledBath,
}

/// Shared by the `gle` and `markovian` experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsParams {
    pub x0: f64,
    pub v0: f64,
    /// Spring constant of `V = k x^2 / 2`; 0 is a free particle.
    pub spring: f64,
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    pub n_realizations: usize,
    pub burn_in: f64,
    pub fit_lo: f64,
    pub fit_hi: f64,
    /// Lags of the MSD table, in units of the record spacing.
    pub lag_stride: usize,
    pub slip_term: bool,
    pub memory: MemoryMethod,
    pub noise: NoiseKind,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        DynamicsParams {
            x0: 0.0,
            v0: 0.0,
            spring: 0.0,
            dt: 5e-3,
            t_end: 30.0,
            record_every: 2,
            n_realizations: 64,
            burn_in: 5.0,
            fit_lo: 5.0,
            fit_hi: 20.0,
            lag_stride: 10,
            slip_term: true,
            memory: MemoryMethod::Auto,
            noise: NoiseKind::SampledBath,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RelaxParams {
    pub variant: Variant,
    pub boundary: Boundary,
    pub x_min: f64,
    pub x_max: f64,
    pub n_nodes: usize,
    pub diffusion: f64,
    pub velocity: f64,
    /// `rho(0)` is a Gaussian with this center and width.
    pub rho_center: f64,
    pub rho_width: f64,
    /// `|psi|^2` is a centered Gaussian with this width.
    pub psi_width: f64,
    /// Time step; 0 picks the stability limit.
    pub dt: f64,
    pub t_end: f64,
    pub monitor_every: usize,
}

impl Default for RelaxParams {
    fn default() -> Self {
        RelaxParams {
            variant: Variant::Paired,
            boundary: Boundary::Reflecting,
            x_min: -5.0,
            x_max: 5.0,
            n_nodes: 512,
            diffusion: 1.0,
            velocity: 0.0,
            rho_center: 1.0,
            rho_width: 0.5,
            psi_width: 1.0,
            dt: 0.0,
            t_end: 5.0,
            monitor_every: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KostinParams {
    pub x_min: f64,
    pub x_max: f64,
    pub n_nodes: usize,
    pub mass: f64,
    pub omega: f64,
    pub x0: f64,
    pub v0: f64,
    pub gamma0: f64,
    /// Constant external force.
    pub force: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub store_every: usize,
    pub mean_phase_subtraction: bool,
    pub n_trajectories: usize,
}

impl Default for KostinParams {
    fn default() -> Self {
        KostinParams {
            x_min: -10.0,
            x_max: 10.0,
            n_nodes: 256,
            mass: 1.0,
            omega: 1.0,
            x0: 2.0,
            v0: 0.0,
            gamma0: 0.2,
            force: 0.0,
            dt: 2e-3,
            n_steps: 5000,
            store_every: 5,
            mean_phase_subtraction: false,
            n_trajectories: 9,
        }
    }
}

impl RunConfig {
    /// Load `path` (if any), apply `overrides` (`a.b=value`) and resolve.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let (mut table, text) = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                let table: Table =
                    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                (table, Some(text))
            }
            None => (Table::new(), None),
        };
        let schema = Self::schema();
        check_keys(&table, &schema, "", text.as_deref())?;
        for item in overrides {
            apply_override(&mut table, &schema, item)?;
        }
        Self::deserialize(Value::Table(table)).map_err(|e| CliError::Config(e.to_string()))
    }

    fn schema() -> Table {
        match Value::try_from(RunConfig::default()) {
            Ok(Value::Table(t)) => t,
            _ => unreachable!("default config serializes to a table"),
        }
    }

    /// All dotted parameter paths.
    pub fn keys() -> Vec<String> {
        let mut out = Vec::new();
        collect_keys(&Self::schema(), "", &mut out);
        out
    }

    /// Numeric value at a dotted path, for sweep axes.
    pub fn numeric(&self, key: &str) -> Option<f64> {
        let mut v = Value::try_from(self).ok()?;
        for part in key.split('.') {
            v = v.as_table()?.get(part)?.clone();
        }
        v.as_float().or_else(|| v.as_integer().map(|i| i as f64))
    }
}

fn collect_keys(table: &Table, prefix: &str, out: &mut Vec<String>) {
    for (k, v) in table {
        let path = join(prefix, k);
        match v {
            Value::Table(t) => collect_keys(t, &path, out),
            _ => out.push(path),
        }
    }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

/// Closest known key to `key` by edit distance.
pub fn nearest_key(key: &str) -> Option<String> {
    let last = key.rsplit('.').next().unwrap_or(key);
    RunConfig::keys()
        .into_iter()
        .map(|k| {
            let d_full = strsim::levenshtein(key, &k);
            let d_last = strsim::levenshtein(last, k.rsplit('.').next().unwrap_or(&k));
            (d_full.min(d_last + 1), k)
        })
        .min()
        .map(|(_, k)| k)
}

fn unknown(path: &str, line: Option<usize>) -> CliError {
    let hint = nearest_key(path)
        .map(|k| format!("; did you mean `{k}`?"))
        .unwrap_or_default();
    let at = line.map(|l| format!(" (line {l})")).unwrap_or_default();
    CliError::Config(format!("unknown parameter `{path}`{at}{hint}"))
}

fn line_of(text: Option<&str>, key: &str) -> Option<usize> {
    text?
        .lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| i + 1)
}

fn check_keys(table: &Table, schema: &Table, prefix: &str, text: Option<&str>) -> Result<(), CliError> {
    for (k, v) in table {
        let path = join(prefix, k);
        match (schema.get(k), v) {
            (None, _) => return Err(unknown(&path, line_of(text, k))),
            (Some(Value::Table(s)), Value::Table(t)) => check_keys(t, s, &path, text)?,
            (Some(Value::Table(_)), _) => {
                return Err(CliError::Config(format!("`{path}` must be a table")));
            }
            (Some(_), _) => {}
        }
    }
    Ok(())
}

fn parse_value(raw: &str) -> Value {
    toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Apply one `a.b.c=value` override.
pub fn apply_override(table: &mut Table, schema: &Table, item: &str) -> Result<(), CliError> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{item}` is not of the form key=value")))?;
    let key = key.trim();
    let parts: Vec<&str> = key.split('.').collect();
    let mut node = table;
    let mut s = schema;
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        match s.get(*part) {
            None => return Err(unknown(key, None)),
            Some(Value::Table(sub)) if !last => {
                s = sub;
                let entry = node
                    .entry(part.to_string())
                    .or_insert_with(|| Value::Table(Table::new()));
                node = entry
                    .as_table_mut()
                    .ok_or_else(|| CliError::Config(format!("`{part}` must be a table")))?;
            }
            Some(Value::Table(_)) => {
                return Err(CliError::Config(format!("`{key}` is a section, not a parameter")));
            }
            Some(_) if last => {
                node.insert(part.to_string(), parse_value(raw.trim()));
            }
            Some(_) => return Err(unknown(key, None)),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::load(None, &[]).unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn overrides_are_typed() {
        let c = RunConfig::load(
            None,
            &[
                "bath.gamma0=0.5".into(),
                "bath.cutoff_shape=lorentzian".into(),
                "dynamics.n_realizations=7".into(),
                "kostin.mean_phase_subtraction=true".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.bath.gamma0, 0.5);
        assert_eq!(c.bath.cutoff_shape, CutoffShape::Lorentzian);
        assert_eq!(c.dynamics.n_realizations, 7);
        assert!(c.kostin.mean_phase_subtraction);
    }

    #[test]
    fn unknown_keys_suggest_nearest() {
        let err = RunConfig::load(None, &["bath.gama0=1".into()]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unknown parameter"), "{msg}");
        assert!(msg.contains("bath.gamma0"), "{msg}");
        assert_eq!(nearest_key("gama0").as_deref(), Some("bath.gamma0"));
    }

    #[test]
    fn numeric_lookup() {
        let c = RunConfig::default();
        assert_eq!(c.numeric("bath.n_modes"), Some(400.0));
        assert_eq!(c.numeric("bath.cutoff_shape"), None);
        assert_eq!(c.numeric("nope"), None);
    }
}
