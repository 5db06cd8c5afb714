//! 2D incompressible Euler on `[0, 2π)²` in Leray-projected form,
//! `u_t + B(u, u) = 0` with `B(a, b) = P_σ(a·∇b)`, stepped with explicit
//! Euler, and the nudged system `v_t + B(v, v) = μ P_σ P_M (u - v)`.

use num_traits::Zero;

use crate::diagnostics::{split_error, ErrorSeries};
use crate::spectral::lattice::{reduced_grid_len, Lattice2D};
use crate::spectral::{
    check_grid_size, cutoff_margin_2d, ComplexGrid2D, ModeProjection, SpectralField, Transform2D, VectorField2D,
};
use crate::{Complex, NudgingError, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerParams<T> {
    pub n: usize,
    pub dt: T,
    pub mu: T,
    /// Radius of the observed annulus, `0 < |k| <= M`.
    pub observed_modes: usize,
}

impl<T: Scalar> EulerParams<T> {
    /// `N = 256`, `Δt = 0.001`.
    pub fn new(mu: T, observed_modes: usize) -> Self {
        EulerParams { n: 256, dt: T::lit(0.001), mu, observed_modes }
    }

    pub fn validate(&self) -> Result<()> {
        check_grid_size(self.n)?;
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(NudgingError::validation("dt", "must be positive"));
        }
        if !(self.mu >= T::zero()) || !self.mu.is_finite() {
            return Err(NudgingError::validation("mu", "must be nonnegative"));
        }
        if self.mu * self.dt >= T::lit(2.0) {
            return Err(NudgingError::validation(
                "mu",
                format!("μΔt = {:e} violates the nudging CFL constraint μ ≲ 2/Δt", self.mu * self.dt),
            ));
        }
        if self.observed_modes == 0 {
            return Err(NudgingError::validation("M", "must be at least 1"));
        }
        Ok(())
    }

    pub fn projection(&self) -> ModeProjection {
        ModeProjection::annulus(self.observed_modes)
    }
}

/// `u₁ = c sin(k x₁) cos(k x₂)`, `u₂ = -c cos(k x₁) sin(k x₂)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TaylorGreenSpec<T> {
    pub k: usize,
    pub c: T,
}

impl<T: Scalar> TaylorGreenSpec<T> {
    pub fn new(k: usize, c: T) -> Self {
        TaylorGreenSpec { k, c }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 || self.k > n / 3 {
            return Err(NudgingError::validation(
                "tg_k",
                format!("frequency {} must lie in 1..={} for N = {n}", self.k, n / 3),
            ));
        }
        if !self.c.is_finite() {
            return Err(NudgingError::validation("tg_c", "must be finite"));
        }
        Ok(())
    }
}

/// Exact spectral Taylor–Green field: four modes per component at `(±k, ±k)`.
pub fn taylor_green<T: Scalar>(n: usize, spec: &TaylorGreenSpec<T>) -> Result<VectorField2D<T>> {
    check_grid_size(n)?;
    spec.validate(n)?;
    let mut f = VectorField2D::zeros(n)?;
    let k = spec.k as i64;
    let q = spec.c / T::lit(4.0);
    for k1 in [k, -k] {
        let s1 = T::of_i64(k1.signum());
        // û₁ = -i c/4 sgn(k₁), û₂ = i c/4 sgn(k₂), with k₂ = +k on the stored half
        f.set_mode((k1, k), (Complex::new(T::zero(), -q * s1), Complex::new(T::zero(), q)));
    }
    Ok(f)
}

#[derive(Clone, Debug)]
pub struct EulerSolver<T: Scalar> {
    params: EulerParams<T>,
    transform: Transform2D<T>,
    /// Complex plans for reduced grids, indexed by `log2(len)`.
    reduced: Vec<ComplexGrid2D<T>>,
    lattice_reduction: bool,
}

impl<T: Scalar> EulerSolver<T> {
    pub fn new(params: EulerParams<T>) -> Result<Self> {
        params.validate()?;
        let n = params.n;
        Ok(EulerSolver {
            params,
            transform: Transform2D::new(n),
            reduced: (0..=n.trailing_zeros()).map(|p| ComplexGrid2D::new(1usize << p)).collect(),
            lattice_reduction: true,
        })
    }

    /// Evaluate products on the coarsest grid carrying the field's wavevector
    /// lattice (on by default), so modes off that lattice stay exactly zero.
    pub fn set_lattice_reduction(&mut self, on: bool) {
        self.lattice_reduction = on;
    }

    pub fn params(&self) -> &EulerParams<T> {
        &self.params
    }

    pub fn transform(&self) -> &Transform2D<T> {
        &self.transform
    }

    pub fn zeros(&self) -> VectorField2D<T> {
        VectorField2D::zeros(self.params.n).expect("grid validated at construction")
    }

    /// `B(u, u) = P_σ(-ω u₂, ω u₁)` with `ω = ∂₁u₂ - ∂₂u₁`, dealiased.
    pub fn nonlinear(&self, u: &VectorField2D<T>) -> VectorField2D<T> {
        if u.is_zero() {
            return self.zeros();
        }
        let omega = u.vorticity();
        if self.lattice_reduction {
            if let Some(out) = self.rotational_reduced(u, &omega) {
                return out.leray_project();
            }
        }
        let tr = &self.transform;
        let (a, b) = u.to_physical(tr);
        let w = tr.inverse(&omega);
        let p1: Vec<T> = w.iter().zip(&b).map(|(w, b)| -*w * *b).collect();
        let p2: Vec<T> = w.iter().zip(&a).map(|(w, a)| *w * *a).collect();
        VectorField2D::from_components(self.params.n, tr.forward(&p1), tr.forward(&p2))
            .expect("transform output has the field layout")
            .dealias_23()
            .leray_project()
    }

    fn rotational_reduced(&self, u: &VectorField2D<T>, omega: &[Complex<T>]) -> Option<VectorField2D<T>> {
        let lat = Lattice2D::from_support(u.support())?;
        if lat.is_trivial() {
            return None;
        }
        let m_max = u
            .support()
            .filter_map(|k| lat.to_reduced(k))
            .map(|m| m.0.unsigned_abs().max(m.1.unsigned_abs()) as usize)
            .max()?;
        let nr = reduced_grid_len(m_max);
        if nr >= self.params.n {
            return None;
        }
        let plan = &self.reduced[nr.trailing_zeros() as usize];
        let nri = nr as i64;
        let at = |m: (i64, i64)| (m.0.rem_euclid(nri) * nri + m.1.rem_euclid(nri)) as usize;
        let (u1, u2) = u.components();
        let mut g = [vec![Complex::zero(); nr * nr], vec![Complex::zero(); nr * nr], vec![Complex::zero(); nr * nr]];
        for idx in 0..u1.len() {
            if u1[idx].is_zero() && u2[idx].is_zero() {
                continue;
            }
            let m = lat.to_reduced(u.wavevector(idx))?;
            for (grid, c) in g.iter_mut().zip([u1[idx], u2[idx], omega[idx]]) {
                grid[at(m)] = c;
                grid[at((-m.0, -m.1))] = c.conj();
            }
        }
        for grid in g.iter_mut() {
            plan.inverse(grid);
        }
        let [a, b, w] = g;
        let mut p1: Vec<Complex<T>> = w.iter().zip(&b).map(|(w, b)| Complex::from(-w.re * b.re)).collect();
        let mut p2: Vec<Complex<T>> = w.iter().zip(&a).map(|(w, a)| Complex::from(w.re * a.re)).collect();
        plan.forward(&mut p1);
        plan.forward(&mut p2);

        let mut out = self.zeros();
        let cutoff = out.dealias_cutoff() as i64;
        let (o1, o2) = out.components_mut();
        let half = nri / 2;
        for m0 in -half..half {
            for m1 in -half..half {
                let k = lat.to_wavevector((m0, m1));
                if k.0.abs() > cutoff || k.1.abs() > cutoff || k.1 < 0 {
                    continue;
                }
                let row = if k.0 >= 0 { k.0 } else { k.0 + self.params.n as i64 } as usize;
                let idx = row * (self.params.n / 2 + 1) + k.1 as usize;
                o1[idx] = p1[at((m0, m1))];
                o2[idx] = p2[at((m0, m1))];
            }
        }
        Some(out)
    }

    /// `P_σ((u·∇)u)` from the advective form on the full grid (six inverse
    /// and two forward transforms); reference for [`Self::nonlinear`].
    pub fn advective_nonlinear(&self, u: &VectorField2D<T>) -> VectorField2D<T> {
        let tr = &self.transform;
        let i = Complex::new(T::zero(), T::one());
        let d1 = u.map_modes(|k, a, b| (i * T::of_i64(k.0) * a, i * T::of_i64(k.0) * b));
        let d2 = u.map_modes(|k, a, b| (i * T::of_i64(k.1) * a, i * T::of_i64(k.1) * b));
        let (a, b) = u.to_physical(tr);
        let (a1, b1) = d1.to_physical(tr);
        let (a2, b2) = d2.to_physical(tr);
        let p1: Vec<T> = (0..a.len()).map(|j| a[j] * a1[j] + b[j] * a2[j]).collect();
        let p2: Vec<T> = (0..a.len()).map(|j| a[j] * b1[j] + b[j] * b2[j]).collect();
        VectorField2D::from_components(self.params.n, tr.forward(&p1), tr.forward(&p2))
            .expect("transform output has the field layout")
            .dealias_23()
            .leray_project()
    }

    /// `û⁺ = û - Δt B(u, u)`.
    pub fn step(&self, u: &VectorField2D<T>) -> Result<VectorField2D<T>> {
        let next = u.axpy(-self.params.dt, &self.nonlinear(u));
        if next.is_finite() {
            Ok(next)
        } else {
            Err(NudgingError::NonFinite)
        }
    }

    /// `v̂⁺ = v̂ - Δt B(v, v) + Δt μ P_σ P_M(û - v̂)`, observation at the step start.
    pub fn nudge_step(&self, v: &VectorField2D<T>, u_obs: &VectorField2D<T>) -> Result<VectorField2D<T>> {
        let p = self.params;
        let mut next = v.axpy(-p.dt, &self.nonlinear(v));
        let feedback = u_obs.sub(v).project(&p.projection()).leray_project();
        if !feedback.is_zero() {
            next = next.axpy(p.dt * p.mu, &feedback).dealias_23();
        }
        if next.is_finite() {
            Ok(next)
        } else {
            Err(NudgingError::NonFinite)
        }
    }
}

/// `max_k |k·û(k)| / ‖u‖`, zero for the zero field.
pub fn divergence_ratio<T: Scalar>(u: &VectorField2D<T>) -> f64 {
    let norm = u.l2_norm().as_f64();
    let div = u.max_divergence().as_f64();
    if norm == 0.0 {
        div
    } else {
        div / norm
    }
}

pub const DIVERGENCE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct EulerTwinConfig<T> {
    pub params: EulerParams<T>,
    pub ref_init: VectorField2D<T>,
    pub assim_init: VectorField2D<T>,
    pub final_time: T,
    pub output_stride: usize,
    pub snapshot_times: Vec<T>,
    pub lattice_reduction: bool,
    /// Runs past `t = 1` are refused unless set.
    pub allow_long_horizon: bool,
}

impl<T: Scalar> EulerTwinConfig<T> {
    pub fn steps(&self) -> usize {
        (self.final_time / self.params.dt).round().to_usize().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.final_time > T::zero()) || !self.final_time.is_finite() {
            return Err(NudgingError::validation("T", "must be positive"));
        }
        if self.final_time > T::one() && !self.allow_long_horizon {
            return Err(NudgingError::validation(
                "T",
                "Euler runs beyond t = 1 are refused: a fixed grid cannot follow the cascade faithfully",
            ));
        }
        if self.output_stride == 0 {
            return Err(NudgingError::validation("output_stride", "must be at least 1"));
        }
        for (f, key) in [(&self.ref_init, "ref_init"), (&self.assim_init, "assim_init")] {
            if f.n() != self.params.n {
                return Err(NudgingError::validation(key, "grid size does not match N"));
            }
            if f.dealias_23() != *f {
                return Err(NudgingError::validation(key, "has modes above the dealias cutoff N/3"));
            }
            if divergence_ratio(f) > DIVERGENCE_TOLERANCE {
                return Err(NudgingError::validation(key, "is not divergence free"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct EulerSnapshot<T> {
    pub t: f64,
    pub reference: VectorField2D<T>,
    pub assimilated: VectorField2D<T>,
}

#[derive(Clone, Debug)]
pub struct EulerTwinOutput<T> {
    /// Channels `err_low, err_high, err_total, norm_u, norm_v`.
    pub series: ErrorSeries,
    pub snapshots: Vec<EulerSnapshot<T>>,
    pub assim_stayed_zero: bool,
    /// Largest [`divergence_ratio`] of either system over all steps.
    pub max_divergence_ratio: f64,
    /// `‖u(T) - u(0)‖ / ‖u(0)‖` for the reference.
    pub ref_relative_change: f64,
    pub resolution_margin: f64,
}

pub const EULER_CHANNELS: [&str; 5] = ["err_low", "err_high", "err_total", "norm_u", "norm_v"];

pub fn run_twin_euler<T: Scalar>(cfg: &EulerTwinConfig<T>) -> Result<EulerTwinOutput<T>> {
    cfg.validate()?;
    let mut solver = EulerSolver::new(cfg.params)?;
    solver.set_lattice_reduction(cfg.lattice_reduction);
    let p = cfg.params.projection();
    let dt = cfg.params.dt.as_f64();
    let steps = cfg.steps();
    let mut snap_steps: Vec<usize> = cfg
        .snapshot_times
        .iter()
        .filter_map(|t| (*t / cfg.params.dt).round().to_usize())
        .filter(|&s| s <= steps)
        .collect();
    snap_steps.push(steps);
    snap_steps.sort_unstable();
    snap_steps.dedup();

    let mut out = EulerTwinOutput {
        series: ErrorSeries::new(&EULER_CHANNELS),
        snapshots: Vec::new(),
        assim_stayed_zero: cfg.assim_init.is_zero(),
        max_divergence_ratio: divergence_ratio(&cfg.ref_init).max(divergence_ratio(&cfg.assim_init)),
        ref_relative_change: 0.0,
        resolution_margin: 0.0,
    };
    let mut u = cfg.ref_init.clone();
    let mut v = cfg.assim_init.clone();
    let record = |out: &mut EulerTwinOutput<T>, step: usize, u: &VectorField2D<T>, v: &VectorField2D<T>| {
        let (low, high, total) = split_error(u, v, &p);
        out.series.push(
            dt * step as f64,
            &[low.as_f64(), high.as_f64(), total.as_f64(), u.l2_norm().as_f64(), v.l2_norm().as_f64()],
        );
        out.resolution_margin = out.resolution_margin.max(cutoff_margin_2d(u));
        if snap_steps.binary_search(&step).is_ok() {
            out.snapshots.push(EulerSnapshot { t: dt * step as f64, reference: u.clone(), assimilated: v.clone() });
        }
    };

    record(&mut out, 0, &u, &v);
    for step in 1..=steps {
        let u_next = solver.step(&u).map_err(|e| e.at_step("euler2d", step))?;
        let v_next = solver.nudge_step(&v, &u).map_err(|e| e.at_step("euler2d", step))?;
        u = u_next;
        v = v_next;
        out.assim_stayed_zero &= v.is_zero();
        out.max_divergence_ratio = out.max_divergence_ratio.max(divergence_ratio(&u)).max(divergence_ratio(&v));
        if step % cfg.output_stride == 0 || step == steps || snap_steps.binary_search(&step).is_ok() {
            record(&mut out, step, &u, &v);
        }
    }
    let n0 = cfg.ref_init.l2_norm().as_f64();
    let change = u.sub(&cfg.ref_init).l2_norm().as_f64();
    out.ref_relative_change = if n0 > 0.0 { change / n0 } else { change };
    out.series.set_meta("output_stride", cfg.output_stride.to_string());
    out.series.set_meta("dt", format!("{dt:e}"));
    out.series.set_meta("M", cfg.params.observed_modes.to_string());
    out.series.set_meta("dealias_cutoff", (cfg.params.n / 3).to_string());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn small(mu: f64, m: usize) -> EulerParams<f64> {
        EulerParams { n: 32, dt: 1e-3, mu, observed_modes: m }
    }

    #[test]
    fn taylor_green_matches_physical_formula() {
        let n = 32;
        let spec = TaylorGreenSpec::new(3, 0.7);
        let f = taylor_green(n, &spec).unwrap();
        let (a, b) = f.to_physical(&Transform2D::new(n));
        let h = TAU / n as f64;
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (i as f64 * h, j as f64 * h);
                assert!((a[i * n + j] - 0.7 * (3.0 * x).sin() * (3.0 * y).cos()).abs() < 1e-14);
                assert!((b[i * n + j] + 0.7 * (3.0 * x).cos() * (3.0 * y).sin()).abs() < 1e-14);
            }
        }
        assert!(f.max_divergence() < 1e-14);
        assert!((f.l2_norm_sq() - 0.49 * TAU * TAU / 2.0).abs() < 1e-13);
        assert_eq!(f.support().count(), 2);
    }

    #[test]
    fn taylor_green_rejects_unresolved_frequency() {
        assert!(taylor_green(32, &TaylorGreenSpec::new(11, 1.0)).is_err());
        assert!(taylor_green(32, &TaylorGreenSpec::new(0, 1.0)).is_err());
    }

    #[test]
    fn taylor_green_is_a_steady_state() {
        for reduce in [true, false] {
            let mut s = EulerSolver::new(small(0.0, 1)).unwrap();
            s.set_lattice_reduction(reduce);
            let u = taylor_green(32, &TaylorGreenSpec::new(2, 1.0)).unwrap();
            assert!(s.nonlinear(&u).max_abs_coeff() < 1e-14);
        }
    }

    #[test]
    fn zero_field_has_zero_nonlinearity() {
        let s = EulerSolver::new(small(0.0, 1)).unwrap();
        assert!(s.nonlinear(&s.zeros()).is_zero());
    }

    #[test]
    fn reduced_and_full_rotational_forms_agree() {
        let mut u = VectorField2D::<f64>::zeros(64).unwrap();
        u.set_mode((4, 2), (Complex::new(0.1, 0.2), Complex::new(0.0, -0.3)));
        u.set_mode((-2, 6), (Complex::new(0.05, 0.0), Complex::new(0.2, 0.1)));
        u.set_mode((2, 0), (Complex::new(0.0, 0.0), Complex::new(0.3, 0.1)));
        let u = u.leray_project();
        let mut s = EulerSolver::new(EulerParams { n: 64, dt: 1e-3, mu: 0.0, observed_modes: 1 }).unwrap();
        let reduced = s.nonlinear(&u);
        s.set_lattice_reduction(false);
        let full = s.nonlinear(&u);
        assert!(reduced.sub(&full).max_abs_coeff() < 1e-15);
        let lat = Lattice2D::from_support(u.support()).unwrap();
        assert!(!lat.is_trivial());
        assert!(reduced.support().all(|k| lat.contains(k)));
    }

    #[test]
    fn nudging_below_the_threshold_leaves_zero_untouched() {
        let u = taylor_green(64, &TaylorGreenSpec::new(7, 1e-4)).unwrap();
        // 7² + 7² = 98 > 81
        let s = EulerSolver::new(EulerParams { n: 64, dt: 1e-3, mu: 100.0, observed_modes: 9 }).unwrap();
        assert!(s.nudge_step(&s.zeros(), &u).unwrap().is_zero());
        // 98 <= 100
        let s = EulerSolver::new(EulerParams { n: 64, dt: 1e-3, mu: 100.0, observed_modes: 10 }).unwrap();
        let v = s.nudge_step(&s.zeros(), &u).unwrap();
        assert!(v.sub(&u.scale(0.1)).max_abs_coeff() < 1e-20);
    }

    #[test]
    fn long_runs_are_refused() {
        let n = 32;
        let tg = taylor_green(n, &TaylorGreenSpec::new(2, 1.0)).unwrap();
        let mut cfg = EulerTwinConfig {
            params: small(10.0, 3),
            ref_init: tg.clone(),
            assim_init: VectorField2D::zeros(n).unwrap(),
            final_time: 2.0,
            output_stride: 10,
            snapshot_times: vec![],
            lattice_reduction: true,
            allow_long_horizon: false,
        };
        assert!(cfg.validate().is_err());
        cfg.final_time = 0.01;
        let out = run_twin_euler(&cfg).unwrap();
        let err = out.series.channel("err_total").unwrap();
        assert!(err.windows(2).all(|w| w[1] < w[0]));
        assert!(out.max_divergence_ratio <= DIVERGENCE_TOLERANCE);
    }

    #[test]
    fn cfl_guard() {
        let e = EulerParams::<f64> { n: 32, dt: 1e-3, mu: 3000.0, observed_modes: 3 }.validate().unwrap_err();
        assert!(e.to_string().contains("μ ≲ 2/Δt"));
    }
}
