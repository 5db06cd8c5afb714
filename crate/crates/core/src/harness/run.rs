//! Dispatches a config to the matching twin experiment and persists the results.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ResolutionPolicy, System};
use super::verify;
use crate::diagnostics::{fit_decay_rate, DecayFit, ErrorSeries};
use crate::euler2d::{run_twin_euler, taylor_green, EulerParams, EulerTwinConfig, TaylorGreenSpec};
use crate::kdv::{run_twin_kdv, KdvParams, KdvSolver, KdvTwinConfig};
use crate::lorenz::{run_twin, LorenzParams, LorenzTwinConfig};
use crate::spectral::{write_spectrum_1d, write_spectrum_2d_full, write_spectrum_2d_shells, Field1D, VectorField2D};
use crate::{NudgingError, Result};

/// Largest tolerated reference coefficient in the top tenth of the retained
/// band, relative to the peak coefficient.
pub const RESOLUTION_LIMIT: f64 = 10.0 * f64::EPSILON;

pub const RECORD_FILE: &str = "run.toml";
pub const ERRORS_FILE: &str = "errors.csv";
pub const NORMS_FILE: &str = "norms.csv";
pub const SPECTRUM_META_FILE: &str = "spectrum_meta.toml";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Catalog entry name; absent for ad-hoc configs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry: Option<String>,
    pub system: System,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub wall_seconds: f64,
    pub passed: bool,
    /// Paths relative to the run directory.
    pub files: Vec<String>,
    #[serde(default)]
    pub warnings: Vec<String>,
    /// Scalar diagnostics not recoverable from the CSVs (e.g. per-step maxima).
    #[serde(default)]
    pub extras: BTreeMap<String, f64>,
    #[serde(default)]
    pub flags: BTreeMap<String, bool>,
    pub config: ExperimentConfig,
    #[serde(default)]
    pub decay_fits: Vec<DecayFit>,
    #[serde(default)]
    pub assertions: Vec<Assertion>,
}

impl RunRecord {
    pub fn load(dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(dir.join(RECORD_FILE))?;
        toml::from_str(&text).map_err(|e| NudgingError::Config(format!("{}: {}", RECORD_FILE, e.message())))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let text = toml::to_string(self).map_err(|e| NudgingError::Config(e.to_string()))?;
        std::fs::write(dir.join(RECORD_FILE), text)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotFile {
    pub t: f64,
    pub file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_file: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub columns: Vec<String>,
    #[serde(default)]
    pub snapshot: Vec<SnapshotFile>,
}

impl SpectrumMeta {
    pub fn load(dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(dir.join(SPECTRUM_META_FILE))?;
        toml::from_str(&text).map_err(|e| NudgingError::Config(format!("{}: {}", SPECTRUM_META_FILE, e.message())))
    }
}

/// Everything a system-specific run hands back before persistence.
struct Outcome {
    errors: ErrorSeries,
    norms: Option<ErrorSeries>,
    fit_channels: Vec<String>,
    extras: BTreeMap<String, f64>,
    flags: BTreeMap<String, bool>,
    resolution_margin: Option<f64>,
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

fn required<T: Copy>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| NudgingError::validation(key, "missing"))
}

fn write_csv(dir: &Path, name: &str, series: &ErrorSeries, files: &mut Vec<String>) -> Result<()> {
    series.write_csv(BufWriter::new(File::create(dir.join(name))?), &[])?;
    files.push(name.to_string());
    Ok(())
}

fn split_norms(series: ErrorSeries) -> (ErrorSeries, ErrorSeries) {
    let mut errors = ErrorSeries::new(&["err_low", "err_high", "err_total"]);
    let mut norms = ErrorSeries::new(&["norm_u", "norm_v"]);
    let col = |name| series.channel(name).expect("twin series carries all channels");
    let (lo, hi, tot, nu, nv) = (col("err_low"), col("err_high"), col("err_total"), col("norm_u"), col("norm_v"));
    for (i, &t) in series.times.iter().enumerate() {
        errors.push(t, &[lo[i], hi[i], tot[i]]);
        norms.push(t, &[nu[i], nv[i]]);
    }
    errors.metadata = series.metadata.clone();
    norms.metadata = series.metadata;
    (errors, norms)
}

fn lorenz_twin(cfg: &ExperimentConfig) -> Result<LorenzTwinConfig<f64>> {
    let params =
        LorenzParams::new(required(cfg.sigma, "sigma")?, required(cfg.r, "r")?, required(cfg.b, "b")?, cfg.mu)?;
    let init = |key: &str| -> Result<_> {
        cfg.init(key)?.ok_or_else(|| NudgingError::validation(key, "missing"))?.lorenz(key)
    };
    let twin = LorenzTwinConfig {
        params,
        variant: required(cfg.variant, "variant")?,
        ref_init: init("ref_init")?,
        assim_init: init("assim_init")?,
        dt: cfg.dt,
        final_time: cfg.final_time,
        output_stride: cfg.output_stride,
    };
    twin.validate()?;
    Ok(twin)
}

fn run_lorenz(cfg: &ExperimentConfig) -> Result<Outcome> {
    let base = lorenz_twin(cfg)?;
    let mut extras = BTreeMap::new();
    if cfg.sweep_z_offsets.is_empty() {
        let out = run_twin(&base)?;
        return Ok(Outcome {
            errors: out.series,
            norms: None,
            fit_channels: vec!["err_l2".into()],
            extras,
            flags: BTreeMap::new(),
            resolution_margin: None,
        });
    }
    let names: Vec<String> = (0..cfg.sweep_z_offsets.len()).map(|i| format!("err_l2_{i}")).collect();
    let mut columns = Vec::with_capacity(names.len());
    let mut times = Vec::new();
    for (i, &dz) in cfg.sweep_z_offsets.iter().enumerate() {
        let mut member = base.clone();
        member.assim_init.z += dz;
        let out = run_twin(&member)?;
        extras.insert(format!("sweep_offset_{i}"), dz);
        times = out.series.times.clone();
        columns.push(out.series.channel("err_l2").expect("lorenz series has err_l2").to_vec());
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut errors = ErrorSeries::new(&refs);
    for (row, &t) in times.iter().enumerate() {
        errors.push(t, &columns.iter().map(|c| c[row]).collect::<Vec<_>>());
    }
    errors.set_meta("output_stride", cfg.output_stride.to_string());
    Ok(Outcome {
        errors,
        norms: None,
        fit_channels: Vec::new(),
        extras,
        flags: BTreeMap::new(),
        resolution_margin: None,
    })
}

fn kdv_twin(cfg: &ExperimentConfig) -> Result<KdvTwinConfig<f64>> {
    let n = required(cfg.n, "N")?;
    let gamma = if cfg.system == System::KdvDamped { required(cfg.gamma, "gamma")? } else { cfg.gamma.unwrap_or(0.0) };
    let params =
        KdvParams::new(required(cfg.delta, "delta")?, gamma, cfg.mu, required(cfg.observed_modes, "M")?, n, cfg.dt);
    params.validate()?;
    let period = params.period;
    let field = |key: &str| -> Result<_> { cfg.init(key)?.map(|s| s.field_1d(key, n, period)).transpose() };
    let ref_init = field("ref_init")?.ok_or_else(|| NudgingError::validation("ref_init", "missing"))?;
    let assim_init = match field("assim_init")? {
        Some(f) => f,
        None => Field1D::zeros(n, period)?,
    };
    let twin = KdvTwinConfig {
        params,
        forcing: field("forcing")?,
        ref_init,
        assim_init,
        final_time: cfg.final_time,
        output_stride: cfg.output_stride,
        snapshot_times: cfg.snapshot_times.clone(),
        lattice_reduction: cfg.lattice_reduction,
    };
    twin.validate()?;
    if let Some(f) = &twin.forcing {
        // forcing constraints live on the solver
        KdvSolver::new(twin.params)?.with_forcing(f.clone())?;
    }
    Ok(twin)
}

fn run_kdv(cfg: &ExperimentConfig, dir: &Path, files: &mut Vec<String>) -> Result<Outcome> {
    let twin = kdv_twin(cfg)?;
    let out = run_twin_kdv(&twin)?;

    let mut meta =
        SpectrumMeta { columns: vec!["k".into(), "abs_uhat".into(), "abs_vhat".into()], snapshot: Vec::new() };
    for (i, s) in out.snapshots.iter().enumerate() {
        let name = format!("spectrum_{i:03}.csv");
        write_spectrum_1d(&s.reference, &s.assimilated, BufWriter::new(File::create(dir.join(&name))?))?;
        files.push(name.clone());
        meta.snapshot.push(SnapshotFile { t: s.t, file: name, full_file: None });
    }
    write_meta(dir, &meta, files)?;

    let (errors, norms) = split_norms(out.series);
    let mut flags = BTreeMap::new();
    flags.insert("assim_stayed_zero".into(), out.assim_stayed_zero);
    flags.insert("ref_stayed_zero".into(), out.ref_stayed_zero);
    let mut extras = BTreeMap::new();
    extras.insert("resolution_margin".into(), out.resolution_margin);
    Ok(Outcome {
        errors,
        norms: Some(norms),
        fit_channels: vec!["err_high".into(), "err_low".into(), "err_total".into()],
        extras,
        flags,
        resolution_margin: Some(out.resolution_margin),
    })
}

fn euler_twin(cfg: &ExperimentConfig) -> Result<EulerTwinConfig<f64>> {
    let n = cfg.n.unwrap_or(256);
    let params = EulerParams { n, dt: cfg.dt, mu: cfg.mu, observed_modes: required(cfg.observed_modes, "M")? };
    params.validate()?;
    let ref_init = match cfg.init("ref_init")? {
        Some(spec) => spec.field_2d("ref_init", n)?,
        None => {
            let spec = TaylorGreenSpec::new(required(cfg.tg_k, "tg_k")?, required(cfg.tg_c, "tg_c")?);
            spec.validate(n)?;
            taylor_green(n, &spec)?
        }
    };
    let assim_init = match cfg.init("assim_init")? {
        Some(spec) => spec.field_2d("assim_init", n)?,
        None => VectorField2D::zeros(n)?,
    };
    let twin = EulerTwinConfig {
        params,
        ref_init,
        assim_init,
        final_time: cfg.final_time,
        output_stride: cfg.output_stride,
        snapshot_times: cfg.snapshot_times.clone(),
        lattice_reduction: cfg.lattice_reduction,
        allow_long_horizon: cfg.allow_long_horizon,
    };
    twin.validate()?;
    Ok(twin)
}

fn run_euler(cfg: &ExperimentConfig, dir: &Path, files: &mut Vec<String>) -> Result<Outcome> {
    let twin = euler_twin(cfg)?;
    let out = run_twin_euler(&twin)?;

    let mut meta = SpectrumMeta {
        columns: vec!["shell_index".into(), "energy_u".into(), "energy_v".into()],
        snapshot: Vec::new(),
    };
    for (i, s) in out.snapshots.iter().enumerate() {
        let name = format!("spectrum_{i:03}.csv");
        write_spectrum_2d_shells(&s.reference, &s.assimilated, BufWriter::new(File::create(dir.join(&name))?))?;
        files.push(name.clone());
        let full_file = if cfg.full_spectrum_dump {
            let full = format!("spectrum_full_{i:03}.csv");
            write_spectrum_2d_full(&s.reference, &s.assimilated, BufWriter::new(File::create(dir.join(&full))?))?;
            files.push(full.clone());
            Some(full)
        } else {
            None
        };
        meta.snapshot.push(SnapshotFile { t: s.t, file: name, full_file });
    }
    write_meta(dir, &meta, files)?;

    let (errors, norms) = split_norms(out.series);
    let mut flags = BTreeMap::new();
    flags.insert("assim_stayed_zero".into(), out.assim_stayed_zero);
    let mut extras = BTreeMap::new();
    extras.insert("resolution_margin".into(), out.resolution_margin);
    extras.insert("max_divergence_ratio".into(), out.max_divergence_ratio);
    extras.insert("ref_relative_change".into(), out.ref_relative_change);
    Ok(Outcome {
        errors,
        norms: Some(norms),
        fit_channels: vec!["err_high".into(), "err_total".into()],
        extras,
        flags,
        resolution_margin: Some(out.resolution_margin),
    })
}

fn write_meta(dir: &Path, meta: &SpectrumMeta, files: &mut Vec<String>) -> Result<()> {
    let text = toml::to_string(meta).map_err(|e| NudgingError::Config(e.to_string()))?;
    std::fs::write(dir.join(SPECTRUM_META_FILE), text)?;
    files.push(SPECTRUM_META_FILE.to_string());
    Ok(())
}

/// Checks every guard of `cfg` (CFL, grid, init data) without running it.
pub fn validate(cfg: &ExperimentConfig) -> Result<()> {
    match cfg.system {
        System::Lorenz => lorenz_twin(cfg).map(drop),
        System::Kdv | System::KdvDamped => kdv_twin(cfg).map(drop),
        System::Euler2d => euler_twin(cfg).map(drop),
    }
}

/// Runs `cfg` into `dir`, writes every artifact plus `run.toml`, and
/// evaluates the built-in assertions for `entry` (if any).
///
/// A failing assertion does not make this return `Err`; check
/// [`RunRecord::passed`].
pub fn run(cfg: &ExperimentConfig, entry: Option<&str>, dir: &Path) -> Result<RunRecord> {
    std::fs::create_dir_all(dir)?;
    let policy =
        cfg.resolution.unwrap_or(if entry.is_some() { ResolutionPolicy::Error } else { ResolutionPolicy::Warn });
    let started_unix = unix_now();
    let clock = Instant::now();
    let mut files = Vec::new();
    log::info!("running {} ({}) into {}", entry.unwrap_or("ad-hoc config"), cfg.system.name(), dir.display());

    let outcome = match cfg.system {
        System::Lorenz => run_lorenz(cfg)?,
        System::Kdv | System::KdvDamped => run_kdv(cfg, dir, &mut files)?,
        System::Euler2d => run_euler(cfg, dir, &mut files)?,
    };

    let mut warnings = Vec::new();
    if let Some(margin) = outcome.resolution_margin {
        if margin > RESOLUTION_LIMIT {
            match policy {
                ResolutionPolicy::Error => return Err(NudgingError::Resolution { margin, limit: RESOLUTION_LIMIT }),
                ResolutionPolicy::Warn => {
                    let msg = NudgingError::Resolution { margin, limit: RESOLUTION_LIMIT }.to_string();
                    log::warn!("{msg}");
                    warnings.push(msg);
                }
            }
        }
    }

    write_csv(dir, ERRORS_FILE, &outcome.errors, &mut files)?;
    if let Some(norms) = &outcome.norms {
        write_csv(dir, NORMS_FILE, norms, &mut files)?;
    }

    let mut decay_fits = Vec::new();
    for ch in &outcome.fit_channels {
        match fit_decay_rate(&outcome.errors, ch, cfg.fit_window) {
            Ok(fit) => decay_fits.push(fit),
            Err(e) => warnings.push(format!("{ch}: {e}")),
        }
    }

    let mut record = RunRecord {
        entry: entry.map(str::to_string),
        system: cfg.system,
        started_unix,
        finished_unix: unix_now(),
        wall_seconds: clock.elapsed().as_secs_f64(),
        passed: false,
        files,
        warnings,
        extras: outcome.extras,
        flags: outcome.flags,
        config: cfg.clone(),
        decay_fits,
        assertions: Vec::new(),
    };
    record.files.push(RECORD_FILE.to_string());
    record.save(dir)?;
    record.assertions = verify::evaluate(&record, dir)?;
    record.passed = record.assertions.iter().all(|a| a.passed);
    record.save(dir)?;
    Ok(record)
}

/// `<root>/<name>`, where the root comes from `NUDGING_OUTPUT_ROOT` (default `runs`).
pub fn output_dir_for(name: &str) -> PathBuf {
    let root = std::env::var_os("NUDGING_OUTPUT_ROOT").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"));
    root.join(name)
}
