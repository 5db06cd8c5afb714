//! Reproduction checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use nudging::harness::{self, RunRecord};
use nudging::kdv::{init_single_mode, KdvParams, KdvSolver};
use nudging::lorenz::{step_coupled, CouplingVariant, LorenzParams, LorenzState};
use nudging::spectral::{Field1D, SpectralField};

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

/// Runs a catalog entry into `root/<name>`; a run error counts as a failure.
fn catalog_run(root: &Path, name: &str) -> Result<RunRecord, String> {
    let entry = harness::lookup(name, false).map_err(|e| e.to_string())?;
    harness::run(&entry.config, Some(name), &root.join(name)).map_err(|e| format!("{name}: {e}"))
}

/// Passes when every assertion of every record passed; the detail lists failures or a summary.
fn records_pass(records: &[&RunRecord]) -> Verdict {
    let failed: Vec<String> = records
        .iter()
        .flat_map(|r| {
            let name = r.entry.clone().unwrap_or_default();
            r.assertions.iter().filter(|a| !a.passed).map(move |a| format!("{name}: {} ({})", a.name, a.detail))
        })
        .collect();
    if failed.is_empty() {
        let summary: Vec<String> = records
            .iter()
            .map(|r| {
                format!(
                    "{} {} checks in {:.1} s",
                    r.entry.as_deref().unwrap_or("?"),
                    r.assertions.len(),
                    r.wall_seconds
                )
            })
            .collect();
        verdict(true, summary.join("; "))
    } else {
        verdict(false, failed.join("; "))
    }
}

fn from_runs(root: &Path, names: &[&str]) -> Verdict {
    let mut records = Vec::new();
    for n in names {
        match catalog_run(root, n) {
            Ok(r) => records.push(r),
            Err(e) => return verdict(false, e),
        }
    }
    records_pass(&records.iter().collect::<Vec<_>>())
}

fn observe_xy_invariant() -> Verdict {
    let p = LorenzParams::new(10.0, 28.0, 0.0, 10.0).unwrap();
    let dt = 1e-4;
    let mut u = LorenzState::new(30.0, 40.0, 50.0);
    let mut v = LorenzState::new(20.0, 30.0, 40.0);
    CouplingVariant::ObserveXY.insert_observed(&u, &mut v);
    let d0: f64 = v.z - u.z;
    let mut worst = 0.0f64;
    for _ in 0..200_000 {
        match step_coupled(&u, &v, CouplingVariant::ObserveXY, &p, dt) {
            Ok((a, b)) => {
                u = a;
                v = b;
            }
            Err(e) => return verdict(false, e.to_string()),
        }
        worst = worst.max(((v.z - u.z) - d0).abs());
    }
    verdict(worst <= 1e-10 * d0.abs(), format!("max |Δz(t) - Δz(0)| = {worst:e} over t in [0, 20]"))
}

fn kdv_dt(n: usize) -> f64 {
    (2.0 / n as f64).powi(2)
}

fn kdv_conservation() -> Verdict {
    let n = 256;
    let dt = kdv_dt(n);
    let s = KdvSolver::new(KdvParams::new(0.075, 0.0, 0.0, 5, n, dt)).unwrap();
    let mut u = init_single_mode(n, 2.0, 1.0, 1).unwrap();
    let n0 = u.l2_norm();
    let mut worst = 0.0f64;
    for _ in 0..(10.0 / dt).round() as usize {
        u = match s.ifrk4_step(&u) {
            Ok(next) => next,
            Err(e) => return verdict(false, e.to_string()),
        };
        worst = worst.max((u.l2_norm() / n0 - 1.0).abs());
    }
    verdict(worst < 1e-8, format!("max relative L² drift {worst:e} over t in [0, 10]"))
}

/// Full-grid products (no lattice reduction), so the invariance is a genuine
/// numerical property rather than a structural one.
fn lattice_invariance() -> Verdict {
    let n = 256;
    let dt = kdv_dt(n);
    let mut s = KdvSolver::new(KdvParams::new(0.075, 0.0, 0.0, 5, n, dt)).unwrap();
    s.set_lattice_reduction(false);
    let mut u = init_single_mode(n, 2.0, 1.0, 6).unwrap();
    let off =
        |u: &Field1D<f64>| (1..=n / 2).filter(|k| k % 6 != 0).map(|k| u.coeff(k as i64).norm()).fold(0.0, f64::max);
    let low = |u: &Field1D<f64>| (1..=5).map(|k| u.coeff(k).norm()).fold(0.0, f64::max);
    let (mut worst_off, mut worst_low) = (off(&u), low(&u));
    for step in 1..=(10.0 / dt).round() as usize {
        u = match s.ifrk4_step(&u) {
            Ok(next) => next,
            Err(e) => return verdict(false, e.to_string()),
        };
        if step % 64 == 0 {
            worst_off = worst_off.max(off(&u));
            worst_low = worst_low.max(low(&u));
        }
    }
    worst_off = worst_off.max(off(&u));
    worst_low = worst_low.max(low(&u));
    verdict(
        worst_off < 1e-12 && worst_low < 1e-12,
        format!("max off-lattice |û_k| {worst_off:e}, max |P₅û| {worst_low:e} (full-grid products)"),
    )
}

fn ifrk4_order() -> Verdict {
    let n = 128;
    let u0 = init_single_mode(n, 2.0, 3.0, 1).unwrap();
    let solve = |dt: f64| -> Result<Field1D<f64>, String> {
        let s = KdvSolver::new(KdvParams::new(0.022, 0.0, 0.0, 5, n, dt)).map_err(|e| e.to_string())?;
        let mut u = u0.clone();
        for _ in 0..(1.0 / dt).round() as usize {
            u = s.ifrk4_step(&u).map_err(|e| e.to_string())?;
        }
        Ok(u)
    };
    let sols: Result<Vec<_>, _> = [1e-4, 5e-5, 2.5e-5, 1.25e-5].iter().map(|&dt| solve(dt)).collect();
    let sols = match sols {
        Ok(s) => s,
        Err(e) => return verdict(false, e),
    };
    let e: Vec<f64> = sols.windows(2).map(|w| w[0].sub(&w[1]).l2_norm()).collect();
    let slopes = [(e[0] / e[1]).log2(), (e[1] / e[2]).log2()];
    verdict(
        slopes.iter().all(|s| (s - 4.0).abs() <= 0.3),
        format!("successive-halving errors {:e} {:e} {:e}, slopes {:.3} {:.3}", e[0], e[1], e[2], slopes[0], slopes[1]),
    )
}

fn main() -> ExitCode {
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => {
            eprintln!("cannot create a scratch directory: {e}");
            return ExitCode::FAILURE;
        }
    };
    let root = dir.path();

    let criteria: Vec<Criterion> = vec![
        ("Lorenz dissipative (fig1)", Box::new(|| from_runs(root, &["fig1"]))),
        ("Lorenz partially dissipative (fig2)", Box::new(|| from_runs(root, &["fig2"]))),
        ("sensitivity sweep (fig3)", Box::new(|| from_runs(root, &["fig3"]))),
        ("ObserveXY, b = 0 z-offset invariant", Box::new(observe_xy_invariant)),
        ("KdV conservation", Box::new(kdv_conservation)),
        ("KdV periodic-lattice invariance", Box::new(lattice_invariance)),
        ("fig4/fig5 failure reproduction", Box::new(|| from_runs(root, &["fig4", "fig5"]))),
        ("fig6 failure reproduction", Box::new(|| from_runs(root, &["fig6"]))),
        ("fig9 success reproduction", Box::new(|| from_runs(root, &["fig9"]))),
        ("IFRK4 order check", Box::new(ifrk4_order)),
        ("Euler Taylor-Green steady state (fig10)", Box::new(|| from_runs(root, &["fig10"]))),
        ("fig11 vs fig12 threshold", Box::new(|| from_runs(root, &["fig11", "fig12"]))),
        ("divergence-free preservation", Box::new(|| divergence(root))),
        ("fig7/fig8 shortened runs (t = 100)", Box::new(|| from_runs(root, &["fig7", "fig8"]))),
    ];

    let mut failures = 0;
    for (name, check) in &criteria {
        let clock = Instant::now();
        let v = check();
        if !v.passed {
            failures += 1;
        }
        println!(
            "{} {name}: {} [{:.1} s]",
            if v.passed { "PASS" } else { "FAIL" },
            v.detail,
            clock.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

/// Reads the divergence check from the Euler records already written by earlier criteria.
fn divergence(root: &Path) -> Verdict {
    let mut lines = Vec::new();
    let mut ok = true;
    for name in ["fig10", "fig11", "fig12"] {
        let record = match RunRecord::load(&root.join(name)) {
            Ok(r) => r,
            Err(e) => return verdict(false, format!("{name}: {e}")),
        };
        let ratio = record.extras.get("max_divergence_ratio").copied().unwrap_or(f64::NAN);
        ok &= ratio <= nudging::euler2d::DIVERGENCE_TOLERANCE;
        lines.push(format!("{name} max |k·v̂|/‖v‖ = {ratio:e}"));
    }
    verdict(ok, lines.join(", "))
}
