//! Flat TOML experiment configuration with `key=value` overrides.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::initspec::InitSpec;
use crate::lorenz::CouplingVariant;
use crate::{NudgingError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum System {
    Lorenz,
    Kdv,
    KdvDamped,
    Euler2d,
}

impl System {
    pub fn name(&self) -> &'static str {
        match self {
            System::Lorenz => "lorenz",
            System::Kdv => "kdv",
            System::KdvDamped => "kdv_damped",
            System::Euler2d => "euler2d",
        }
    }
}

/// What to do when the reference spectrum is not resolved down to round-off
/// at the dealias cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolutionPolicy {
    Error,
    Warn,
}

fn default_stride() -> usize {
    100
}

fn default_fit_window() -> usize {
    500
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: System,
    #[serde(rename = "T")]
    pub final_time: f64,
    pub dt: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default = "default_stride")]
    pub output_stride: usize,

    // lorenz
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<CouplingVariant>,
    /// Lorenz only: one run per offset added to the assimilated `z`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep_z_offsets: Vec<f64>,

    // kdv
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forcing: Option<String>,

    // kdv and euler2d
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub observed_modes: Option<usize>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshot_times: Vec<f64>,
    #[serde(default = "yes")]
    pub lattice_reduction: bool,

    // euler2d
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tg_k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tg_c: Option<f64>,
    #[serde(default)]
    pub allow_long_horizon: bool,
    /// Also dump `(k1, k2, abs_coeff)` for every 2D snapshot.
    #[serde(default)]
    pub full_spectrum_dump: bool,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_init: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assim_init: Option<String>,

    #[serde(default = "default_fit_window")]
    pub fit_window: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<ResolutionPolicy>,
    /// Only consumed by randomized property tests; the solvers are deterministic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

impl ExperimentConfig {
    /// Minimal config for `system`; every other key takes its default.
    pub fn new(system: System, final_time: f64, dt: f64) -> Self {
        ExperimentConfig {
            system,
            final_time,
            dt,
            mu: 0.0,
            output_stride: default_stride(),
            sigma: None,
            r: None,
            b: None,
            variant: None,
            sweep_z_offsets: Vec::new(),
            delta: None,
            gamma: None,
            forcing: None,
            observed_modes: None,
            n: None,
            snapshot_times: Vec::new(),
            lattice_reduction: true,
            tg_k: None,
            tg_c: None,
            allow_long_horizon: false,
            full_spectrum_dump: false,
            ref_init: None,
            assim_init: None,
            fit_window: default_fit_window(),
            resolution: None,
            seed: None,
            output_dir: None,
        }
    }

    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e| NudgingError::Config(format!("{e}")))?;
        Self::from_table(table, overrides)
    }

    pub fn from_file(path: &Path, overrides: &[String]) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?, overrides)
    }

    /// Applies `key=value` overrides (values in TOML syntax; bare words are strings).
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        Self::from_table(self.to_table()?, overrides)
    }

    fn from_table(mut table: toml::Table, overrides: &[String]) -> Result<Self> {
        for item in overrides {
            let (key, value) = parse_override(item)?;
            table.insert(key, value);
        }
        let cfg: ExperimentConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| NudgingError::Config(e.message().to_string()))?;
        cfg.check_keys()?;
        Ok(cfg)
    }

    pub fn to_table(&self) -> Result<toml::Table> {
        toml::Table::try_from(self).map_err(|e| NudgingError::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| NudgingError::Config(e.to_string()))
    }

    /// Values that only make sense for some systems, plus basic ranges.
    fn check_keys(&self) -> Result<()> {
        let need = |present: bool, key: &str| {
            if present {
                Ok(())
            } else {
                Err(NudgingError::validation(key, format!("required for system `{}`", self.system.name())))
            }
        };
        match self.system {
            System::Lorenz => {
                need(self.sigma.is_some(), "sigma")?;
                need(self.r.is_some(), "r")?;
                need(self.b.is_some(), "b")?;
                need(self.variant.is_some(), "variant")?;
                need(self.ref_init.is_some(), "ref_init")?;
                need(self.assim_init.is_some(), "assim_init")?;
            }
            System::Kdv | System::KdvDamped => {
                need(self.delta.is_some(), "delta")?;
                need(self.observed_modes.is_some(), "M")?;
                need(self.n.is_some(), "N")?;
                need(self.ref_init.is_some(), "ref_init")?;
                if self.system == System::KdvDamped {
                    need(self.gamma.is_some(), "gamma")?;
                }
            }
            System::Euler2d => {
                need(self.observed_modes.is_some(), "M")?;
                need(self.ref_init.is_some() || (self.tg_k.is_some() && self.tg_c.is_some()), "tg_k")?;
            }
        }
        if self.system != System::Lorenz && !self.sweep_z_offsets.is_empty() {
            return Err(NudgingError::validation("sweep_z_offsets", "only applies to lorenz"));
        }
        if self.fit_window < 2 {
            return Err(NudgingError::validation("fit_window", "must be at least 2"));
        }
        for key in ["ref_init", "assim_init", "forcing"] {
            if let Some(spec) = self.init_text(key) {
                spec.parse::<InitSpec>().map_err(|e| NudgingError::validation(key, e.to_string()))?;
            }
        }
        Ok(())
    }

    fn init_text(&self, key: &str) -> Option<&str> {
        match key {
            "ref_init" => self.ref_init.as_deref(),
            "assim_init" => self.assim_init.as_deref(),
            "forcing" => self.forcing.as_deref(),
            _ => None,
        }
    }

    /// Parsed init spec for `ref_init`, `assim_init` or `forcing`.
    pub fn init(&self, key: &str) -> Result<Option<InitSpec>> {
        self.init_text(key)
            .map(|s| s.parse::<InitSpec>().map_err(|e| NudgingError::validation(key, e.to_string())))
            .transpose()
    }
}

fn parse_override(item: &str) -> Result<(String, toml::Value)> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| NudgingError::Config(format!("override `{item}` is not of the form key=value")))?;
    let key = key.trim().to_string();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    Ok((key, value))
}
