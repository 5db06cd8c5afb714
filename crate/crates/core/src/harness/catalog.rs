//! Built-in experiments, one per figure.

use super::config::{ExperimentConfig, ResolutionPolicy, System};
use crate::lorenz::CouplingVariant;
use crate::{NudgingError, Result};

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub config: ExperimentConfig,
    /// Whether `--long` changes this entry.
    pub has_long_variant: bool,
}

pub const ENTRY_NAMES: [&str; 12] =
    ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12"];

/// `Δx²` for the KdV grid on `[0, 2)`; exact for powers of two.
fn kdv_dt(n: usize) -> f64 {
    let dx = 2.0 / n as f64;
    dx * dx
}

fn lorenz(b: f64, ref_init: &str, assim_init: &str) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(System::Lorenz, 20.0, 1e-4);
    c.mu = 10.0;
    c.output_stride = 100;
    c.sigma = Some(10.0);
    c.r = Some(28.0);
    c.b = Some(b);
    c.variant = Some(CouplingVariant::NudgeXY);
    c.ref_init = Some(ref_init.into());
    c.assim_init = Some(assim_init.into());
    c
}

#[allow(clippy::too_many_arguments)]
fn kdv(
    n: usize,
    delta: f64,
    m: usize,
    final_time: f64,
    stride: usize,
    ref_init: &str,
    assim_init: &str,
    snapshots: &[f64],
) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(System::Kdv, final_time, kdv_dt(n));
    c.mu = 100.0;
    c.output_stride = stride;
    c.delta = Some(delta);
    c.gamma = Some(0.0);
    c.observed_modes = Some(m);
    c.n = Some(n);
    c.ref_init = Some(ref_init.into());
    c.assim_init = Some(assim_init.into());
    c.snapshot_times = snapshots.to_vec();
    c.resolution = Some(ResolutionPolicy::Error);
    c
}

fn euler(m: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(System::Euler2d, 1.0, 0.001);
    c.mu = 100.0;
    c.output_stride = 10;
    c.observed_modes = Some(m);
    c.n = Some(256);
    c.tg_k = Some(15);
    c.tg_c = Some(1e-4);
    c.assim_init = Some("zero".into());
    c.snapshot_times = vec![0.0, 1.0];
    c.resolution = Some(ResolutionPolicy::Error);
    c
}

fn build(name: &str, long: bool) -> Option<CatalogEntry> {
    let (summary, config, has_long_variant) = match name {
        "fig1" => {
            ("Lorenz, b = 8/3: all components synchronize", lorenz(8.0 / 3.0, "(30, 40, 50)", "(20, 30, 40)"), false)
        }
        "fig2" => {
            ("Lorenz, b = 0: x, y synchronize, z error plateaus", lorenz(0.0, "(30, 40, 50)", "(20, 30, 40)"), false)
        }
        "fig3" => {
            let mut c = lorenz(0.0, "(20, 30, 50)", "(20, 30, 50)");
            c.sweep_z_offsets = (1..=12).map(|e| 10f64.powi(-e)).collect();
            ("Lorenz, b = 0: z perturbation sweep δ = 1e-1 .. 1e-12", c, false)
        }
        "fig4" => (
            "KdV, k0 = 6 reference, M = 5: nudged solution stays zero",
            kdv(256, 0.075, 5, 10.0, 100, "single_mode(1, 6)", "zero", &[0.0, 10.0]),
            false,
        ),
        "fig5" => (
            "KdV, zero reference, k0 = 6 nudged start: high modes never damped",
            kdv(256, 0.075, 5, 10.0, 100, "zero", "single_mode(1, 6)", &[0.0, 10.0]),
            false,
        ),
        "fig6" => (
            "KdV, M = 50 with a spike at k = 100: spike never develops",
            kdv(512, 0.075, 50, 10.0, 640, "shifted_profile(single_mode(1, 1), 50, 0)", "zero", &[0.0, 10.0]),
            false,
        ),
        "fig7" => {
            let (t, stride) = if long { (1000.0, 64000) } else { (100.0, 6400) };
            let init = "sum(single_mode(1, 1), single_mode(0.001, 12))";
            let mut c = kdv(128, 1.0, 10, t, stride, init, "zero", &[0.0, t]);
            // at dt = Δx² the δ = 1 run grows a spurious mode at the cutoff
            c.dt = kdv_dt(128) / 16.0;
            ("KdV, δ = 1, M = 10 with a k = 12 spike", c, true)
        }
        "fig8" => {
            let (t, stride) = if long { (1000.0, 64000) } else { (100.0, 6400) };
            let mut c = kdv(128, 1.0, 5, t, stride, "single_mode(1, 3)", "zero", &[0.0, t]);
            c.dt = kdv_dt(128) / 16.0;
            ("KdV, δ = 1, k0 = 3, M = 5: slow convergence", c, true)
        }
        "fig9" => {
            let mut c = kdv(256, 1.0, 10, 300.0, 1600, "single_mode(1, 12)", "zero", &[0.0, 10.0, 300.0]);
            c.system = System::KdvDamped;
            c.gamma = Some(0.1);
            c.forcing = Some("single_mode(1, 4)".into());
            ("damped/driven KdV, γ = 0.1, f = cos(8πx): high modes decay at rate γ", c, false)
        }
        "fig10" => ("Euler, Taylor-Green k = 15 reference stays steady", euler(21), false),
        "fig11" => ("Euler, M = 21 misses the |k| = 15√2 shell: nudged solution stays zero", euler(21), false),
        "fig12" => ("Euler, M = 22 observes the |k| = 15√2 shell: error decreases", euler(22), false),
        _ => return None,
    };
    Some(CatalogEntry { name: ENTRY_NAMES.iter().find(|n| **n == name)?, summary, config, has_long_variant })
}

pub fn catalog(long: bool) -> Vec<CatalogEntry> {
    ENTRY_NAMES.iter().filter_map(|n| build(n, long)).collect()
}

pub fn lookup(name: &str, long: bool) -> Result<CatalogEntry> {
    build(name, long).ok_or_else(|| NudgingError::UnknownEntry {
        name: name.to_string(),
        valid: ENTRY_NAMES.iter().map(|s| s.to_string()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_round_trips_and_validates_its_keys() {
        for long in [false, true] {
            let all = catalog(long);
            assert_eq!(all.len(), 12);
            for e in all {
                let text = e.config.to_toml_string().unwrap();
                let back = ExperimentConfig::from_toml_str(&text, &[]).unwrap();
                assert_eq!(back, e.config, "{}", e.name);
            }
        }
    }

    #[test]
    fn named_examples() {
        let fig9 = lookup("fig9", false).unwrap();
        assert_eq!(fig9.config.gamma, Some(0.1));
        assert_eq!(fig9.config.system, System::KdvDamped);
        let fig3 = lookup("fig3", false).unwrap();
        assert_eq!(fig3.config.sweep_z_offsets.len(), 12);
        assert_eq!(fig3.config.sweep_z_offsets[0], 1e-1);
        assert_eq!(fig3.config.sweep_z_offsets[11], 1e-12);
        assert_eq!(lookup("fig7", true).unwrap().config.final_time, 1000.0);
        assert_eq!(lookup("fig7", false).unwrap().config.final_time, 100.0);
    }

    #[test]
    fn unknown_name_lists_valid_names() {
        let err = lookup("fig13", false).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("fig13") && msg.contains("fig1, fig2"), "{msg}");
    }
}
