use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Every tunable of every command. Fields left unset fall back to the
/// figure-specific value of the command being run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_spins: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    pub w: f64,
    pub u: f64,
    pub v_z: f64,
    pub w_z: f64,
    pub v0: f64,
    pub vf: f64,
    pub gamma: f64,
    pub hold: f64,
    /// Dephasing rate D; unset means the crossover rate D_c.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dephasing: Option<f64>,
    pub n_mode: usize,
    pub epsilon: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub v_points: usize,
    pub step: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_every: Option<usize>,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub sweep_command: String,
    /// Entries of the form "key=a,b,c"; the sweep runs their cross product.
    pub sweep: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: "bellcat".into(),
            n_spins: None,
            v: None,
            w: 1.0,
            u: 0.0,
            v_z: 0.0,
            w_z: 0.0,
            v0: 1.3,
            vf: 0.7,
            gamma: 1.2e-3,
            hold: 0.0,
            dephasing: None,
            n_mode: 201,
            epsilon: 0.0,
            v_min: 0.0,
            v_max: 2.0,
            v_points: 101,
            step: 0.01,
            sample_every: None,
            out_dir: PathBuf::from("out"),
            workers: 1,
            sweep_command: "drive".into(),
            sweep: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Returns a copy with `key` set to the literal `value`, validated through
    /// the same deserializer as config files.
    pub fn with_assignment(&self, key: &str, value: &str) -> CliResult<Self> {
        let mut table: toml::Table = toml::Table::try_from(self).map_err(|e| CliError::Config(e.to_string()))?;
        let parsed: toml::Value = format!("x = {value}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("x"))
            .unwrap_or_else(|| toml::Value::String(value.to_string()));
        let as_float = match &parsed {
            toml::Value::Integer(i) => Some(toml::Value::Float(*i as f64)),
            _ => None,
        };
        table.insert(key.to_string(), parsed);
        let first: Result<Self, toml::de::Error> = table.clone().try_into();
        match (first, as_float) {
            (Ok(c), _) => Ok(c),
            (Err(_), Some(f)) => {
                table.insert(key.to_string(), f);
                table.try_into().map_err(|e: toml::de::Error| CliError::Config(format!("{key} = {value}: {e}")))
            }
            (Err(e), None) => Err(CliError::Config(format!("{key} = {value}: {e}"))),
        }
    }

    pub fn n_spins_or(&self, default: u32) -> u32 {
        self.n_spins.unwrap_or(default)
    }

    pub fn v_or(&self, default: f64) -> f64 {
        self.v.unwrap_or(default)
    }

    pub fn sample_every_or(&self, default: usize) -> usize {
        self.sample_every.unwrap_or(default)
    }
}

/// Command-line overrides; any flag given wins over the config file.
#[derive(Args, Clone, Debug, Default)]
pub struct Overrides {
    #[arg(long, global = true)]
    pub experiment: Option<String>,
    #[arg(long, global = true)]
    pub n_spins: Option<u32>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub v: Option<f64>,
    #[arg(long, global = true)]
    pub w: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub u: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub v_z: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub w_z: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub v0: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub vf: Option<f64>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true)]
    pub hold: Option<f64>,
    #[arg(long, global = true)]
    pub dephasing: Option<f64>,
    #[arg(long, global = true)]
    pub n_mode: Option<usize>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub v_min: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub v_max: Option<f64>,
    #[arg(long, global = true)]
    pub v_points: Option<usize>,
    #[arg(long, global = true)]
    pub step: Option<f64>,
    #[arg(long, global = true)]
    pub sample_every: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Concurrent workers for sweeps and spectrum grids.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub sweep_command: Option<String>,
    /// Sweep axis "key=a,b,c"; repeat for a cross product.
    #[arg(long = "set", global = true)]
    pub sweep: Vec<String>,
}

impl Overrides {
    pub fn apply(&self, mut c: RunConfig) -> RunConfig {
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(x) = &self.$field {
                    c.$field = x.clone();
                }
            )*};
        }
        macro_rules! take_opt {
            ($($field:ident),*) => {$(
                if self.$field.is_some() {
                    c.$field = self.$field;
                }
            )*};
        }
        take!(
            experiment,
            w,
            u,
            v_z,
            w_z,
            v0,
            vf,
            gamma,
            hold,
            n_mode,
            epsilon,
            v_min,
            v_max,
            v_points,
            step,
            workers,
            sweep_command
        );
        take_opt!(n_spins, v, dephasing, sample_every);
        if let Some(out) = &self.out {
            c.out_dir = out.clone();
        }
        if !self.sweep.is_empty() {
            c.sweep = self.sweep.clone();
        }
        c
    }
}
