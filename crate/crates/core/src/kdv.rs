//! Periodic KdV, `u_t + u u_x + δ² u_xxx + γ u = f`, integrated with an
//! integrating-factor RK4 scheme, and its nudged companion
//! `v_t + ... = f + μ P_M(u - v)`.

use num_traits::Zero;

use crate::diagnostics::{split_error, ErrorSeries};
use crate::spectral::lattice::{reduced_grid_len, support_spacing};
use crate::spectral::{check_grid_size, cutoff_margin_1d, Field1D, ModeProjection, SpectralField, Transform1D};
use crate::{Complex, NudgingError, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KdvParams<T> {
    /// Dispersion coefficient δ (the equation carries δ²).
    pub delta: T,
    /// Linear damping γ ≥ 0.
    pub gamma: T,
    /// Nudging strength μ ≥ 0.
    pub mu: T,
    /// Observed modes `0 < |k| <= M`.
    pub observed_modes: usize,
    pub n: usize,
    pub dt: T,
    pub period: T,
}

impl<T: Scalar> KdvParams<T> {
    /// Parameters on the default period `L = 2`.
    pub fn new(delta: T, gamma: T, mu: T, observed_modes: usize, n: usize, dt: T) -> Self {
        KdvParams { delta, gamma, mu, observed_modes, n, dt, period: T::lit(2.0) }
    }

    pub fn dx(&self) -> T {
        self.period / T::of_usize(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        check_grid_size(self.n)?;
        if !self.delta.is_finite() {
            return Err(NudgingError::validation("delta", "must be finite"));
        }
        if !(self.gamma >= T::zero()) || !self.gamma.is_finite() {
            return Err(NudgingError::validation("gamma", "must be nonnegative"));
        }
        if !(self.mu >= T::zero()) || !self.mu.is_finite() {
            return Err(NudgingError::validation("mu", "must be nonnegative"));
        }
        if !(self.period > T::zero()) || !self.period.is_finite() {
            return Err(NudgingError::validation("L", "period must be positive"));
        }
        if !(self.dt > T::zero()) {
            return Err(NudgingError::validation("dt", "must be positive"));
        }
        let dx = self.dx();
        if self.dt > dx * dx {
            return Err(NudgingError::validation(
                "dt",
                format!("Δt = {:e} exceeds Δx² = {:e} (require Δt ≲ Δx²)", self.dt, dx * dx),
            ));
        }
        if self.mu * self.dt >= T::lit(2.0) {
            return Err(NudgingError::validation(
                "mu",
                format!("μΔt = {:e} violates the nudging CFL constraint μ ≲ 2/Δt", self.mu * self.dt),
            ));
        }
        if self.observed_modes == 0 || self.observed_modes > self.n / 2 {
            return Err(NudgingError::validation("M", format!("must lie in 1..={}", self.n / 2)));
        }
        Ok(())
    }

    pub fn projection(&self) -> ModeProjection {
        ModeProjection::band(self.observed_modes)
    }

    /// `L(k) = -i δ² q_k³ + γ`, so the linear flow over `Δt` is `exp(-L Δt)`.
    pub fn linear_symbol(&self, k: i64) -> Complex<T> {
        let q = T::TAU() * T::of_i64(k) / self.period;
        Complex::new(self.gamma, -self.delta * self.delta * q * q * q)
    }
}

/// One-step integrator for a fixed grid and parameter set.
#[derive(Clone, Debug)]
pub struct KdvSolver<T: Scalar> {
    params: KdvParams<T>,
    forcing: Option<Field1D<T>>,
    transform: Transform1D<T>,
    /// Plans for the reduced grids, indexed by `log2(len)`.
    reduced: Vec<Transform1D<T>>,
    exp_full: Vec<Complex<T>>,
    exp_half: Vec<Complex<T>>,
    lattice_reduction: bool,
}

impl<T: Scalar> KdvSolver<T> {
    pub fn new(params: KdvParams<T>) -> Result<Self> {
        params.validate()?;
        let n = params.n;
        let exp_of = |k: usize, h: T| {
            let z = -params.linear_symbol(k as i64) * h;
            Complex::from_polar(z.re.exp(), z.im)
        };
        let half = params.dt / T::lit(2.0);
        let reduced = (0..=n.trailing_zeros()).map(|p| Transform1D::new(1usize << p)).collect();
        Ok(KdvSolver {
            params,
            forcing: None,
            transform: Transform1D::new(n),
            reduced,
            exp_full: (0..=n / 2).map(|k| exp_of(k, params.dt)).collect(),
            exp_half: (0..=n / 2).map(|k| exp_of(k, half)).collect(),
            lattice_reduction: true,
        })
    }

    /// Adds a time-independent, mean-free body force.
    pub fn with_forcing(mut self, forcing: Field1D<T>) -> Result<Self> {
        self.check_grid(&forcing, "forcing")?;
        if !forcing.coeff(0).is_zero() {
            return Err(NudgingError::validation("forcing", "must have zero spatial mean"));
        }
        if forcing.support().any(|k| k > forcing.dealias_cutoff()) {
            return Err(NudgingError::validation("forcing", "has modes above the dealias cutoff N/3"));
        }
        self.forcing = Some(forcing);
        Ok(self)
    }

    /// Evaluate products on the coarsest grid that carries the field's mode
    /// lattice (on by default). Off-lattice modes then stay exactly zero.
    pub fn set_lattice_reduction(&mut self, on: bool) {
        self.lattice_reduction = on;
    }

    pub fn params(&self) -> &KdvParams<T> {
        &self.params
    }

    pub fn forcing(&self) -> Option<&Field1D<T>> {
        self.forcing.as_ref()
    }

    pub fn zeros(&self) -> Field1D<T> {
        Field1D::zeros(self.params.n, self.params.period).expect("grid validated at construction")
    }

    fn check_grid(&self, f: &Field1D<T>, what: &str) -> Result<()> {
        if f.n() != self.params.n || f.period() != self.params.period {
            return Err(NudgingError::validation(
                what,
                format!("field grid (N = {}) does not match the solver grid (N = {})", f.n(), self.params.n),
            ));
        }
        Ok(())
    }

    /// Half spectrum of `u²`, truncated to `|k| <= N/3`.
    fn square(&self, u: &Field1D<T>) -> Vec<Complex<T>> {
        let n = self.params.n;
        let cutoff = u.dealias_cutoff();
        let mut out = vec![Complex::zero(); n / 2 + 1];
        let support: Vec<usize> = u.support().collect();
        let Some(&top) = support.last() else {
            return out;
        };
        if self.lattice_reduction {
            let g = support_spacing(support.iter().map(|&k| k as i64)).unwrap_or(1) as usize;
            let m_max = top / g;
            let nr = reduced_grid_len(m_max);
            if g > 1 && nr < n {
                let plan = &self.reduced[nr.trailing_zeros() as usize];
                let mut w = vec![Complex::zero(); nr / 2 + 1];
                for (m, wm) in w.iter_mut().enumerate().take(m_max + 1) {
                    *wm = u.coeffs()[g * m];
                }
                let mut phys = plan.inverse(&w);
                phys.iter_mut().for_each(|x| *x = *x * *x);
                let w2 = plan.forward(phys);
                for (j, c) in w2.iter().enumerate().take((cutoff / g).min(nr / 2) + 1) {
                    out[g * j] = *c;
                }
                return out;
            }
        }
        let mut phys = u.to_physical_with(&self.transform);
        phys.iter_mut().for_each(|x| *x = *x * *x);
        let sq = self.transform.forward(phys);
        out[..=cutoff].copy_from_slice(&sq[..=cutoff]);
        out
    }

    /// Spectral coefficients of `-(1/2) ∂ₓ(u²)`, dealiased.
    pub fn nonlinear_term(&self, u: &Field1D<T>) -> Field1D<T> {
        let sq = self.square(u);
        let half = T::lit(0.5);
        let mut out = self.zeros();
        let i = Complex::new(T::zero(), T::one());
        for (k, c) in out.coeffs_mut().iter_mut().enumerate() {
            let s = sq[k];
            if !s.is_zero() {
                *c = -(i * (u.wavenumber(k) * half)) * s;
            }
        }
        out
    }

    /// Nonlinear term plus forcing: the explicitly stepped part of the equation.
    pub fn rhs(&self, u: &Field1D<T>) -> Field1D<T> {
        let nl = self.nonlinear_term(u);
        match &self.forcing {
            Some(f) => nl.add(f),
            None => nl,
        }
    }

    fn apply(&self, e: &[Complex<T>], f: &Field1D<T>) -> Field1D<T> {
        f.map_modes(|k, c| if c.is_zero() { c } else { c * e[k] })
    }

    /// One integrating-factor RK4 step with an arbitrary explicit part `rhs`.
    pub fn ifrk4_step_with<F>(&self, u: &Field1D<T>, rhs: F) -> Field1D<T>
    where
        F: Fn(&Field1D<T>) -> Field1D<T>,
    {
        let dt = self.params.dt;
        let h = dt / T::lit(2.0);
        let (e, e2) = (&self.exp_full, &self.exp_half);
        let k1 = rhs(u);
        let k2 = rhs(&self.apply(e2, &u.axpy(h, &k1)));
        let k3 = rhs(&self.apply(e2, u).axpy(h, &k2));
        let eu = self.apply(e, u);
        let k4 = rhs(&eu.axpy(dt, &self.apply(e2, &k3)));
        let incr = self.apply(e, &k1).axpy(T::lit(2.0), &self.apply(e2, &k2.add(&k3))).add(&k4);
        eu.axpy(dt / T::lit(6.0), &incr)
    }

    /// Advances the (possibly damped and driven) KdV state by one step.
    pub fn ifrk4_step(&self, u: &Field1D<T>) -> Result<Field1D<T>> {
        let next = self.ifrk4_step_with(u, |w| self.rhs(w));
        if next.is_finite() {
            Ok(next)
        } else {
            Err(NudgingError::NonFinite)
        }
    }

    /// `v⁺ = IFRK4(v) + exp(-LΔt) μ Δt P_M(u - v)` with `u` observed at the step start.
    pub fn nudge_step(&self, v: &Field1D<T>, u_obs: &Field1D<T>) -> Result<Field1D<T>> {
        let next = self.ifrk4_step(v)?;
        let feedback = u_obs.sub(v).project(&self.params.projection());
        if feedback.is_zero() {
            return Ok(next);
        }
        let out = next.axpy(self.params.mu * self.params.dt, &self.apply(&self.exp_full, &feedback));
        if out.is_finite() {
            Ok(out)
        } else {
            Err(NudgingError::NonFinite)
        }
    }
}

/// `c cos(k₀ π x)` on `[0, 2)` (more generally `c cos(q_{k₀} x)`).
pub fn init_single_mode<T: Scalar>(n: usize, period: T, c: T, k0: i64) -> Result<Field1D<T>> {
    let mut f = Field1D::zeros(n, period)?;
    if k0 == 0 || c == T::zero() {
        return Err(NudgingError::validation("single_mode", "needs c ≠ 0 and k0 ≠ 0"));
    }
    if k0.unsigned_abs() as usize > f.dealias_cutoff() {
        return Err(NudgingError::validation(
            "single_mode",
            format!("k0 = {k0} lies above the dealias cutoff N/3 = {}", f.dealias_cutoff()),
        ));
    }
    f.set_coeff(k0.abs(), Complex::new(c / T::lit(2.0), T::zero()));
    Ok(f)
}

/// Smallest `M` with `‖(I - P_M) u‖² <= eps` for every field of the series,
/// i.e. the supremum over time. A zero series gives 1.
pub fn choose_m<T: Scalar>(series: &[Field1D<T>], eps: T) -> usize {
    series
        .iter()
        .map(|u| {
            let half = u.n() / 2;
            let two = T::lit(2.0);
            // accumulate the tail from the top so the smallest admissible M falls out
            let mut tail = T::zero();
            let mut m = half;
            for k in (1..=half).rev() {
                let w = if k == half { T::one() } else { two };
                tail = tail + u.period() * w * u.coeffs()[k].norm_sqr();
                if tail > eps {
                    break;
                }
                m = k - 1;
            }
            m.max(1)
        })
        .max()
        .unwrap_or(1)
}

/// `c (u_in + cos((2M + k) π x))` with `c` chosen so that the result has the
/// same L² norm as `u_in`.
pub fn init_shifted_profile<T: Scalar>(u_in: &Field1D<T>, m: usize, k_offset: usize) -> Result<Field1D<T>> {
    let target = u_in.l2_norm();
    if target == T::zero() {
        return Err(NudgingError::validation("shifted_profile", "base profile must be nonzero"));
    }
    let mode = 2 * m + k_offset;
    if mode > u_in.dealias_cutoff() {
        return Err(NudgingError::validation(
            "shifted_profile",
            format!("added mode {mode} lies above the dealias cutoff N/3 = {}", u_in.dealias_cutoff()),
        ));
    }
    let mut spike = Field1D::zeros(u_in.n(), u_in.period())?;
    spike.set_coeff(mode as i64, Complex::new(T::lit(0.5), T::zero()));
    let sum = u_in.add(&spike);
    Ok(sum.scale(target / sum.l2_norm()))
}

#[derive(Clone, Debug)]
pub struct KdvTwinConfig<T: Scalar> {
    pub params: KdvParams<T>,
    pub forcing: Option<Field1D<T>>,
    pub ref_init: Field1D<T>,
    pub assim_init: Field1D<T>,
    pub final_time: T,
    pub output_stride: usize,
    /// Times at which both spectra are captured; the final state is always captured.
    pub snapshot_times: Vec<T>,
    pub lattice_reduction: bool,
}

impl<T: Scalar> KdvTwinConfig<T> {
    pub fn steps(&self) -> usize {
        (self.final_time / self.params.dt).round().to_usize().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.final_time > T::zero()) || !self.final_time.is_finite() {
            return Err(NudgingError::validation("T", "must be positive"));
        }
        if self.output_stride == 0 {
            return Err(NudgingError::validation("output_stride", "must be at least 1"));
        }
        for (f, key) in [(&self.ref_init, "ref_init"), (&self.assim_init, "assim_init")] {
            if f.n() != self.params.n {
                return Err(NudgingError::validation(key, "grid size does not match N"));
            }
            if !f.coeff(0).is_zero() {
                return Err(NudgingError::validation(key, "must have zero spatial mean"));
            }
            if f.support().any(|k| k > f.dealias_cutoff()) {
                return Err(NudgingError::validation(key, "has modes above the dealias cutoff N/3"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct KdvSnapshot<T> {
    pub t: f64,
    pub reference: Field1D<T>,
    pub assimilated: Field1D<T>,
}

#[derive(Clone, Debug)]
pub struct KdvTwinOutput<T> {
    /// Channels `err_low, err_high, err_total, norm_u, norm_v`.
    pub series: ErrorSeries,
    pub snapshots: Vec<KdvSnapshot<T>>,
    /// True when the assimilated state was bitwise zero after every step.
    pub assim_stayed_zero: bool,
    /// True when the reference state was bitwise zero after every step.
    pub ref_stayed_zero: bool,
    /// Largest [`cutoff_margin_1d`] of the reference over the recorded samples.
    pub resolution_margin: f64,
}

pub const KDV_CHANNELS: [&str; 5] = ["err_low", "err_high", "err_total", "norm_u", "norm_v"];

/// Co-integrates the reference and the nudged solution.
pub fn run_twin_kdv<T: Scalar>(cfg: &KdvTwinConfig<T>) -> Result<KdvTwinOutput<T>> {
    cfg.validate()?;
    let mut solver = KdvSolver::new(cfg.params)?;
    if let Some(f) = &cfg.forcing {
        solver = solver.with_forcing(f.clone())?;
    }
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

    let mut out = KdvTwinOutput {
        series: ErrorSeries::new(&KDV_CHANNELS),
        snapshots: Vec::new(),
        assim_stayed_zero: cfg.assim_init.is_zero(),
        ref_stayed_zero: cfg.ref_init.is_zero(),
        resolution_margin: 0.0,
    };
    let mut u = cfg.ref_init.clone();
    let mut v = cfg.assim_init.clone();

    let record = |out: &mut KdvTwinOutput<T>, step: usize, u: &Field1D<T>, v: &Field1D<T>| {
        let (low, high, total) = split_error(u, v, &p);
        out.series.push(
            dt * step as f64,
            &[low.as_f64(), high.as_f64(), total.as_f64(), u.l2_norm().as_f64(), v.l2_norm().as_f64()],
        );
        out.resolution_margin = out.resolution_margin.max(cutoff_margin_1d(u));
        if snap_steps.binary_search(&step).is_ok() {
            out.snapshots.push(KdvSnapshot { t: dt * step as f64, reference: u.clone(), assimilated: v.clone() });
        }
    };

    record(&mut out, 0, &u, &v);
    for step in 1..=steps {
        let u_next = solver.ifrk4_step(&u).map_err(|e| e.at_step("kdv", step))?;
        let v_next = solver.nudge_step(&v, &u).map_err(|e| e.at_step("kdv", step))?;
        u = u_next;
        v = v_next;
        out.assim_stayed_zero &= v.is_zero();
        out.ref_stayed_zero &= u.is_zero();
        if step % cfg.output_stride == 0 || step == steps || snap_steps.binary_search(&step).is_ok() {
            record(&mut out, step, &u, &v);
        }
    }
    out.series.set_meta("output_stride", cfg.output_stride.to_string());
    out.series.set_meta("dt", format!("{dt:e}"));
    out.series.set_meta("M", cfg.params.observed_modes.to_string());
    out.series.set_meta("dealias_cutoff", (cfg.params.n / 3).to_string());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(n: usize, dt: f64) -> KdvParams<f64> {
        KdvParams::new(0.075, 0.0, 100.0, 5, n, dt)
    }

    #[test]
    fn symbol_examples() {
        let p = KdvParams::new(0.5, 0.3, 0.0, 5, 64, 1e-4);
        assert_eq!(p.linear_symbol(0), Complex::new(0.3, 0.0));
        let l = p.linear_symbol(2);
        assert!((l.im + 0.25 * (2.0 * PI).powi(3)).abs() < 1e-12);
        let e = (-l * 0.01).exp();
        assert!((e.norm() - (-0.003f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn nonlinear_term_of_cosine() {
        // -(1/2) d/dx cos²(πx) = (π/2) sin(2πx), whose k = 2 coefficient is π/(4i)
        let s = KdvSolver::new(params(64, 1e-4)).unwrap();
        let u = init_single_mode(64, 2.0, 1.0, 1).unwrap();
        for reduce in [true, false] {
            let mut s = s.clone();
            s.set_lattice_reduction(reduce);
            let nl = s.nonlinear_term(&u);
            assert!((nl.coeff(2) - Complex::new(0.0, -PI / 4.0)).norm() < 1e-12);
            let others: f64 = (0..=32).filter(|&k| k != 2).map(|k| nl.coeff(k).norm()).sum();
            assert!(others < 1e-14);
        }
    }

    #[test]
    fn reduced_and_full_products_agree() {
        let mut u = Field1D::zeros(128, 2.0).unwrap();
        for (k, c) in [(6, (0.3, -0.1)), (12, (0.05, 0.2)), (30, (-0.01, 0.0))] {
            u.set_coeff(k, Complex::new(c.0, c.1));
        }
        let mut s = KdvSolver::new(params(128, 1e-4)).unwrap();
        let reduced = s.nonlinear_term(&u);
        s.set_lattice_reduction(false);
        let full = s.nonlinear_term(&u);
        let d = reduced.sub(&full).max_abs_coeff();
        assert!(d < 1e-13, "{d}");
        assert!(reduced.support().all(|k| k % 6 == 0));
    }

    #[test]
    fn nonlinear_term_conserves_energy() {
        let mut u = Field1D::zeros(128, 2.0).unwrap();
        for k in 1..20 {
            u.set_coeff(k, Complex::new((k as f64).sin() / k as f64, (k as f64).cos() / (k * k) as f64));
        }
        let nl = KdvSolver::new(params(128, 1e-4)).unwrap().nonlinear_term(&u);
        let flux: f64 = (1..=64).map(|k| (u.coeff(k).conj() * nl.coeff(k)).re).sum();
        assert!(flux.abs() < 1e-12);
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let s = KdvSolver::new(params(64, 1e-4)).unwrap();
        let z = s.zeros();
        assert!(s.ifrk4_step(&z).unwrap().is_zero());
        assert!(s.nudge_step(&z, &z).unwrap().is_zero());
    }

    #[test]
    fn linear_step_is_exact() {
        let p = KdvParams::new(0.4, 0.2, 0.0, 5, 64, 2e-4);
        let s = KdvSolver::new(p).unwrap();
        let mut u = s.zeros();
        for k in 1..10 {
            u.set_coeff(k, Complex::new(1.0 / k as f64, 0.5));
        }
        let next = s.ifrk4_step_with(&u, |_| s.zeros());
        for k in 0..=32i64 {
            let expect = u.coeff(k) * (-p.linear_symbol(k) * p.dt).exp();
            assert!((next.coeff(k) - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn first_nudge_step_from_zero() {
        let p = KdvParams::new(0.075, 0.0, 100.0, 3, 64, 1e-4);
        let s = KdvSolver::new(p).unwrap();
        let u = init_single_mode(64, 2.0, 1.0, 1).unwrap();
        let v1 = s.nudge_step(&s.zeros(), &u).unwrap();
        let expect = (-p.linear_symbol(1) * p.dt).exp() * p.mu * p.dt * u.coeff(1);
        assert!((v1.coeff(1) - expect).norm() < 1e-16);
        assert!(v1.support().all(|k| k == 1));
    }

    #[test]
    fn nudge_without_feedback_matches_plain_step() {
        let s = KdvSolver::new(params(128, 1e-4)).unwrap();
        let u = init_single_mode(128, 2.0, 1.0, 6).unwrap();
        let v = init_single_mode(128, 2.0, 0.5, 1).unwrap();
        assert_eq!(s.nudge_step(&v, &v).unwrap(), s.ifrk4_step(&v).unwrap());
        assert_eq!(s.nudge_step(&s.zeros(), &u).unwrap(), s.zeros());
    }

    #[test]
    fn guards_name_the_constraint() {
        let err = KdvParams::new(0.075, 0.0, 3.0 / 1e-5, 5, 128, 1e-5).validate().unwrap_err();
        assert!(err.to_string().contains("μ ≲ 2/Δt"), "{err}");
        let err = KdvParams::new(0.075, 0.0, 1.0, 5, 128, 1e-3).validate().unwrap_err();
        assert!(matches!(err, NudgingError::Validation { ref key, .. } if key == "dt"));
        assert!(KdvParams::new(0.075, 0.0, 1.0, 5, 100, 1e-6).validate().is_err());
    }

    #[test]
    fn single_mode_profile() {
        let u = init_single_mode::<f64>(64, 2.0, -3.0, 6).unwrap();
        assert!((u.l2_norm() - 3.0).abs() < 1e-14);
        assert!(u.project(&ModeProjection::band(5)).is_zero());
        assert!(init_single_mode(64, 2.0, 1.0, 0).is_err());
        assert!(init_single_mode(64, 2.0, 1.0, 22).is_err());
    }

    #[test]
    fn choose_m_examples() {
        let z = Field1D::<f64>::zeros(64, 2.0).unwrap();
        assert_eq!(choose_m(&[z], 1e-16), 1);
        let u = init_single_mode(64, 2.0, 1.0, 1).unwrap();
        assert_eq!(choose_m(std::slice::from_ref(&u), 1e-16), 1);
        let w = init_single_mode(64, 2.0, 1.0, 7).unwrap();
        assert_eq!(choose_m(&[u, w], 1e-16), 7);
    }

    #[test]
    fn shifted_profile_keeps_norm_and_low_shape() {
        let u = init_single_mode::<f64>(512, 2.0, 1.0, 1).unwrap();
        let s = init_shifted_profile(&u, 50, 0).unwrap();
        assert!((s.l2_norm() - u.l2_norm()).abs() < 1e-13);
        assert!((s.coeff(1).re - s.coeff(100).re).abs() < 1e-16);
        let c1 = s.coeff(1).re / u.coeff(1).re;
        assert!((c1 - 0.5f64.sqrt()).abs() < 1e-15);
        let p = ModeProjection::band(50);
        assert!(s.project(&p).sub(&u.project(&p).scale(c1)).is_zero());
        assert!(init_shifted_profile(&u, 100, 0).is_err());
    }

    #[test]
    fn identical_twins_stay_identical() {
        let p = KdvParams::new(0.075, 0.0, 100.0, 5, 64, 2e-4);
        let u = init_single_mode(64, 2.0, 1.0, 1).unwrap();
        let cfg = KdvTwinConfig {
            params: p,
            forcing: None,
            ref_init: u.clone(),
            assim_init: u,
            final_time: 0.1,
            output_stride: 50,
            snapshot_times: vec![0.05],
            lattice_reduction: true,
        };
        let out = run_twin_kdv(&cfg).unwrap();
        assert_eq!(out.series.len(), 11);
        assert!(out.series.channel("err_total").unwrap().iter().all(|&e| e == 0.0));
        assert_eq!(out.snapshots.len(), 2);
    }
}
