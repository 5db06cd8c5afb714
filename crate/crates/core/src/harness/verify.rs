//! Per-entry checks, evaluated from the files a run left on disk.

use std::fs::File;
use std::path::Path;

use super::config::System;
use super::run::{Assertion, RunRecord, SpectrumMeta, ERRORS_FILE, NORMS_FILE, RECORD_FILE};
use crate::diagnostics::{fit_decay_rate, lower_bound_check, ErrorSeries};
use crate::euler2d::DIVERGENCE_TOLERANCE;
use crate::{NudgingError, Result};

const PARSEVAL_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub entry: Option<String>,
    pub assertions: Vec<Assertion>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }
}

struct RunFiles<'a> {
    dir: &'a Path,
    record: &'a RunRecord,
    errors: ErrorSeries,
    norms: Option<ErrorSeries>,
}

impl RunFiles<'_> {
    fn channel(&self, name: &str) -> Result<&[f64]> {
        self.errors
            .channel(name)
            .or_else(|| self.norms.as_ref().and_then(|n| n.channel(name)))
            .ok_or_else(|| NudgingError::Config(format!("run output has no channel `{name}`")))
    }

    fn extra(&self, key: &str) -> Result<f64> {
        self.record
            .extras
            .get(key)
            .copied()
            .ok_or_else(|| NudgingError::Config(format!("{RECORD_FILE} has no extra `{key}`")))
    }

    fn flag(&self, key: &str) -> bool {
        self.record.flags.get(key).copied().unwrap_or(false)
    }

    /// Rows `(index, abs_uhat, abs_vhat)` of the 1D spectrum closest to time `t`.
    fn spectrum_1d(&self, t: f64) -> Result<Vec<(usize, f64, f64)>> {
        let meta = SpectrumMeta::load(self.dir)?;
        let snap = meta
            .snapshot
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .ok_or_else(|| NudgingError::Config("no spectrum snapshots recorded".into()))?;
        let mut rdr = csv::Reader::from_reader(File::open(self.dir.join(&snap.file))?);
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec[i].parse::<f64>().map_err(|e| NudgingError::Config(format!("{}: {e}", snap.file)))
            };
            rows.push((num(0)? as usize, num(1)?, num(2)?));
        }
        Ok(rows)
    }
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Assertion {
    Assertion { name: name.into(), passed, detail: detail.into() }
}

fn failed_to_evaluate(name: &str, e: NudgingError) -> Assertion {
    check(name, false, format!("could not evaluate: {e}"))
}

fn last(xs: &[f64]) -> f64 {
    xs.last().copied().unwrap_or(f64::NAN)
}

/// Re-evaluates the checks of a finished run directory.
pub fn verify_dir(dir: &Path) -> Result<VerifyReport> {
    let record = RunRecord::load(dir)?;
    let assertions = evaluate(&record, dir)?;
    Ok(VerifyReport { entry: record.entry.clone(), assertions })
}

/// Checks for `record`, reading the CSVs it points to in `dir`.
pub fn evaluate(record: &RunRecord, dir: &Path) -> Result<Vec<Assertion>> {
    let errors = ErrorSeries::read_csv(File::open(dir.join(ERRORS_FILE))?)?;
    let norms = match dir.join(NORMS_FILE) {
        p if p.exists() => Some(ErrorSeries::read_csv(File::open(p)?)?),
        _ => None,
    };
    let run = RunFiles { dir, record, errors, norms };
    let mut out = Vec::new();

    let missing: Vec<&str> = record
        .files
        .iter()
        .filter(|f| std::fs::metadata(dir.join(f)).map(|m| m.len() == 0).unwrap_or(true))
        .map(String::as_str)
        .collect();
    out.push(check(
        "output files exist and are non-empty",
        missing.is_empty(),
        format!("missing or empty: {missing:?}"),
    ));

    if record.system != System::Lorenz {
        generic_pde(&run, &mut out);
    }
    if let Some(entry) = record.entry.as_deref() {
        entry_checks(entry, &run, &mut out);
    }
    Ok(out)
}

fn generic_pde(run: &RunFiles, out: &mut Vec<Assertion>) {
    out.push(match run.errors.parseval_defect("err_low", "err_high", "err_total") {
        Ok(d) => check("Parseval split", d <= PARSEVAL_TOLERANCE, format!("max relative defect {d:e}")),
        Err(e) => failed_to_evaluate("Parseval split", e),
    });
    let lb = (|| -> Result<_> {
        let (nu, nv) = (run.channel("norm_u")?, run.channel("norm_v")?);
        lower_bound_check(&run.errors, "err_total", nu, nv)
    })();
    out.push(match lb {
        Ok(r) => check(
            "reverse-triangle lower bound",
            r.holds,
            match r.first_violation {
                Some((i, t, e, b)) => format!("sample {i} (t = {t}): err {e:e} < bound {b:e}"),
                None => format!("holds at all {} samples", r.samples),
            },
        ),
        Err(e) => failed_to_evaluate("reverse-triangle lower bound", e),
    });
    if run.record.system == System::Euler2d {
        out.push(match run.extra("max_divergence_ratio") {
            Ok(r) => check(
                "divergence free at every step",
                r <= DIVERGENCE_TOLERANCE,
                format!("max |k·v̂| / ‖v‖ = {r:e} (limit {DIVERGENCE_TOLERANCE:e})"),
            ),
            Err(e) => failed_to_evaluate("divergence free at every step", e),
        });
    }
}

fn runtime(run: &RunFiles, limit_s: f64, out: &mut Vec<Assertion>) {
    let w = run.record.wall_seconds;
    out.push(check(format!("runtime < {limit_s} s"), w < limit_s, format!("{w:.1} s")));
}

fn entry_checks(entry: &str, run: &RunFiles, out: &mut Vec<Assertion>) {
    let result = match entry {
        "fig1" => lorenz_final(run, &["err_x", "err_y", "err_z"], out).map(|_| runtime(run, 60.0, out)),
        "fig2" => lorenz_final(run, &["err_x", "err_y"], out).and_then(|_| {
            let m = run.errors.tail_mean("err_z", 0.1)?;
            out.push(check("mean z error over final 10% in [3, 30]", (3.0..=30.0).contains(&m), format!("{m:e}")));
            runtime(run, 60.0, out);
            Ok(())
        }),
        "fig3" => sweep(run, out).map(|_| runtime(run, 300.0, out)),
        "fig4" => fig4(run, out).map(|_| runtime(run, 600.0, out)),
        "fig5" => fig5(run, out).map(|_| runtime(run, 600.0, out)),
        "fig6" => fig6(run, out).map(|_| runtime(run, 600.0, out)),
        "fig7" => fig7(run, out),
        "fig8" => Ok(()),
        "fig9" => fig9(run, out).map(|_| runtime(run, 600.0, out)),
        "fig10" => steady(run, out).map(|_| runtime(run, 600.0, out)),
        "fig11" => fig11(run, out).map(|_| runtime(run, 600.0, out)),
        "fig12" => fig12(run, out).map(|_| runtime(run, 600.0, out)),
        other => Err(NudgingError::Config(format!("no checks defined for `{other}`"))),
    };
    if let Err(e) = result {
        out.push(failed_to_evaluate(entry, e));
    }
}

fn lorenz_final(run: &RunFiles, channels: &[&str], out: &mut Vec<Assertion>) -> Result<()> {
    for ch in channels {
        let v = last(run.channel(ch)?);
        out.push(check(format!("final {ch} <= 1e-9"), v <= 1e-9, format!("{v:e}")));
    }
    Ok(())
}

fn sweep(run: &RunFiles, out: &mut Vec<Assertion>) -> Result<()> {
    let offsets = &run.record.config.sweep_z_offsets;
    for (i, &dz) in offsets.iter().enumerate() {
        let late = run.errors.tail_mean(&format!("err_l2_{i}"), 0.1)?;
        let ratio = late / dz;
        out.push(check(
            format!("δ = {dz:e}: late error within a factor 10 of δ"),
            (0.1..=10.0).contains(&ratio),
            format!("late error {late:e}, ratio {ratio:.3}"),
        ));
    }
    Ok(())
}

fn all_zero(xs: &[f64]) -> bool {
    xs.iter().all(|&x| x == 0.0)
}

fn fig4(run: &RunFiles, out: &mut Vec<Assertion>) -> Result<()> {
    let nv = run.channel("norm_v")?;
    out.push(check(
        "nudged solution stays bitwise zero",
        run.flag("assim_stayed_zero") && all_zero(nv),
        format!("flag {}, max ‖v‖ {:e}", run.flag("assim_stayed_zero"), nv.iter().cloned().fold(0.0, f64::max)),
    ));
    equals_norm(run, "norm_u", out)
}

fn fig5(run: &RunFiles, out: &mut Vec<Assertion>) -> Result<()> {
    let nu = run.channel("norm_u")?;
    out.push(check(
        "reference stays bitwise zero",
        run.flag("ref_stayed_zero") && all_zero(nu),
        format!("flag {}", run.flag("ref_stayed_zero")),
    ));
    let lo = run.channel("err_low")?;
    out.push(check(
        "observed-mode error is zero throughout",
        all_zero(lo),
        format!("max {:e}", lo.iter().cloned().fold(0.0, f64::max)),
    ));
    equals_norm(run, "norm_v", out)
}

fn equals_norm(run: &RunFiles, norm: &str, out: &mut Vec<Assertion>) -> Result<()> {
    let (e, n) = (run.channel("err_total")?, run.channel(norm)?);
    let worst = e.iter().zip(n).map(|(a, b)| if *b == 0.0 { a.abs() } else { (a - b).abs() / b }).fold(0.0, f64::max);
    out.push(check(
        format!("total error equals {norm} at every sample"),
        worst <= 1e-14,
        format!("max relative gap {worst:e}"),
    ));
    Ok(())
}

fn fig6(run: &RunFiles, out: &mut Vec<Assertion>) -> Result<()> {
    let m = run.record.config.observed_modes.unwrap_or(50);
    let spike_k = 2 * m;
    let initial = run.spectrum_1d(0.0)?;
    // L² content of a single cosine mode on [0, 2): sqrt(2 L) |c_k| with L = 2
    let spike = initial.iter().find(|r| r.0 == spike_k).map(|r| 2.0 * r.1).unwrap_or(0.0);
    let total = last(run.channel("err_total")?);
    out.push(check(
        "final total error >= 0.5 x spike content",
        spike > 0.0 && total >= 0.5 * spike,
        format!("final {total:e}, spike {spike:e}"),
    ));
    let lo = run.channel("err_low")?;
    let min = lo.iter().cloned().fold(f64::INFINITY, f64::min);
    out.push(check(
        "observed-mode error drops",
        min < 1e-2 * lo[0],
        format!("first {:e}, min {min:e}, final {:e}", lo[0], last(lo)),
    ));
    let t_end = run.record.config.final_time;
    let fin = run.spectrum_1d(t_end)?;
    let band = spike_k.saturating_sub(10)..=spike_k + 10;
    let peak = fin.iter().filter(|r| band.contains(&r.0)).map(|r| r.2).fold(0.0, f64::max);
    out.push(check(
        format!("no nudged energy above 1e-14 for k in [{}, {}]", band.start(), band.end()),
        peak <= 1e-14,
        format!("max |v̂_k| = {peak:e}"),
    ));
    Ok(())
}

fn fig7(run: &RunFiles, out: &mut Vec<Assertion>) -> Result<()> {
    let initial = run.spectrum_1d(0.0)?;
    let m = run.record.config.observed_modes.unwrap_or(10);
    let spike = 2.0 * initial.iter().filter(|r| r.0 > m).map(|r| r.1 * r.1).sum::<f64>().sqrt();
    let hi = run.channel("err_high")?;
    let min = hi.iter().cloned().fold(f64::INFINITY, f64::min);
    out.push(check(
        "high-mode error >= 0.5 x spike content",
        spike > 0.0 && min >= 0.5 * spike,
        format!("min err_high {min:e}, spike {spike:e}"),
    ));
    Ok(())
}

fn fig9(run: &RunFiles, out: &mut Vec<Assertion>) -> Result<()> {
    let fit = fit_decay_rate(&run.errors, "err_high", run.record.config.fit_window)?;
    out.push(check(
        "high-mode decay rate in [-0.13, -0.07]",
        (-0.13..=-0.07).contains(&fit.rate),
        format!("rate {:.6} over t in [{}, {}]", fit.rate, fit.window_t0, fit.window_t1),
    ));
    Ok(())
}

fn steady(run: &RunFiles, out: &mut Vec<Assertion>) -> Result<()> {
    let c = run.extra("ref_relative_change")?;
    out.push(check("Taylor-Green reference changes < 1e-12 relative", c < 1e-12, format!("{c:e}")));
    Ok(())
}

/// `2k² > M²` for fig11, `2k² <= M²` for fig12: whether the |k| = k√2 shell is observed.
fn annulus(run: &RunFiles, expect_observed: bool, out: &mut Vec<Assertion>) -> Result<()> {
    let k = run.record.config.tg_k.ok_or_else(|| NudgingError::validation("tg_k", "missing"))? as u64;
    let m = run.record.config.observed_modes.ok_or_else(|| NudgingError::validation("M", "missing"))? as u64;
    let observed = 2 * k * k <= m * m;
    out.push(check(
        if expect_observed {
            "Taylor-Green shell inside the observed annulus"
        } else {
            "Taylor-Green shell outside the observed annulus"
        },
        observed == expect_observed,
        format!("2k² = {}, M² = {}", 2 * k * k, m * m),
    ));
    Ok(())
}

fn fig11(run: &RunFiles, out: &mut Vec<Assertion>) -> Result<()> {
    annulus(run, false, out)?;
    steady(run, out)?;
    let nv = run.channel("norm_v")?;
    out.push(check(
        "nudged solution stays bitwise zero",
        run.flag("assim_stayed_zero") && all_zero(nv),
        format!("flag {}", run.flag("assim_stayed_zero")),
    ));
    let e = run.channel("err_total")?;
    let e0 = e[0];
    let spread = e.iter().map(|x| (x - e0).abs()).fold(0.0, f64::max) / e0;
    out.push(check("error is constant", spread < 1e-12, format!("max relative change {spread:e}")));
    Ok(())
}

fn fig12(run: &RunFiles, out: &mut Vec<Assertion>) -> Result<()> {
    annulus(run, true, out)?;
    steady(run, out)?;
    let e = run.channel("err_total")?;
    let nu = run.channel("norm_u")?;
    let floor = 10.0 * f64::EPSILON * nu[0];
    let bad = e.windows(2).position(|w| w[0] > floor && w[1] >= w[0]);
    out.push(check(
        "error strictly decreasing until the round-off floor",
        bad.is_none(),
        match bad {
            Some(i) => format!("sample {i}: {:e} -> {:e}", e[i], e[i + 1]),
            None => format!("first {:e}, final {:e}", e[0], last(e)),
        },
    ));
    Ok(())
}
