//! Lorenz 1963 reference system in the shifted form
//! `Ẋ = -σX + σY`, `Ẏ = -σX - Y - XZ`, `Ż = -bZ + XY - b(r + σ)`,
//! the direct-insertion synchronization schemes and the XY-nudged system.
//!
//! Time stepping is explicit Euler with the observation available at every step.

use serde::{Deserialize, Serialize};

use crate::diagnostics::ErrorSeries;
use crate::{NudgingError, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorenzParams<T> {
    pub sigma: T,
    pub r: T,
    /// Geometric factor; `b = 0` removes the dissipation on `Z`.
    pub b: T,
    /// Nudging strength for [`CouplingVariant::NudgeXY`].
    pub mu: T,
}

impl<T: Scalar> LorenzParams<T> {
    pub fn new(sigma: T, r: T, b: T, mu: T) -> Result<Self> {
        let p = LorenzParams { sigma, r, b, mu };
        p.validate()?;
        Ok(p)
    }

    /// `σ = 10, r = 28, b = 8/3, μ = 10`.
    pub fn classic() -> Self {
        LorenzParams { sigma: T::lit(10.0), r: T::lit(28.0), b: T::lit(8.0 / 3.0), mu: T::lit(10.0) }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: T| v.is_finite();
        if !(ok(self.sigma) && self.sigma > T::zero()) {
            return Err(NudgingError::validation("sigma", "must be positive"));
        }
        if !(ok(self.r) && self.r > T::zero()) {
            return Err(NudgingError::validation("r", "must be positive"));
        }
        if !(ok(self.b) && self.b >= T::zero()) {
            return Err(NudgingError::validation("b", "must be nonnegative"));
        }
        if !(ok(self.mu) && self.mu >= T::zero()) {
            return Err(NudgingError::validation("mu", "must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct LorenzState<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> LorenzState<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        LorenzState { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// `self + h * d`.
    pub fn advance(&self, d: &Self, h: T) -> Self {
        LorenzState { x: self.x + h * d.x, y: self.y + h * d.y, z: self.z + h * d.z }
    }

    pub fn distance(&self, other: &Self) -> T {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// How the assimilated copy is coupled to the reference trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingVariant {
    /// `X` inserted directly; `y, z` evolved.
    ObserveX,
    ObserveY,
    ObserveZ,
    /// `X, Y` inserted directly; only `z` evolved.
    #[serde(rename = "observe_xy")]
    ObserveXY,
    /// Full copy evolved with `μ(X - x)`, `μ(Y - y)` feedback on the first two equations.
    #[serde(rename = "nudge_xy")]
    NudgeXY,
}

impl CouplingVariant {
    pub const ALL: [CouplingVariant; 5] = [
        CouplingVariant::ObserveX,
        CouplingVariant::ObserveY,
        CouplingVariant::ObserveZ,
        CouplingVariant::ObserveXY,
        CouplingVariant::NudgeXY,
    ];

    /// Copies the directly observed components of `reference` into `assim`.
    pub fn insert_observed<T: Copy>(&self, reference: &LorenzState<T>, assim: &mut LorenzState<T>) {
        match self {
            CouplingVariant::ObserveX => assim.x = reference.x,
            CouplingVariant::ObserveY => assim.y = reference.y,
            CouplingVariant::ObserveZ => assim.z = reference.z,
            CouplingVariant::ObserveXY => {
                assim.x = reference.x;
                assim.y = reference.y;
            }
            CouplingVariant::NudgeXY => {}
        }
    }
}

pub fn lorenz_rhs<T: Scalar>(s: &LorenzState<T>, p: &LorenzParams<T>) -> LorenzState<T> {
    LorenzState {
        x: -p.sigma * s.x + p.sigma * s.y,
        y: -p.sigma * s.x - s.y - s.x * s.z,
        z: -p.b * s.z + s.x * s.y - p.b * (p.r + p.sigma),
    }
}

/// Time derivative of the assimilated state.
///
/// Observed components are read from `reference` inside the remaining
/// equations and their own derivative is the reference derivative.
pub fn coupled_rhs<T: Scalar>(
    reference: &LorenzState<T>,
    assim: &LorenzState<T>,
    variant: CouplingVariant,
    p: &LorenzParams<T>,
) -> LorenzState<T> {
    match variant {
        CouplingVariant::NudgeXY => {
            let mut d = lorenz_rhs(assim, p);
            d.x = d.x + p.mu * (reference.x - assim.x);
            d.y = d.y + p.mu * (reference.y - assim.y);
            d
        }
        _ => {
            let mut merged = *assim;
            variant.insert_observed(reference, &mut merged);
            lorenz_rhs(&merged, p)
        }
    }
}

/// One explicit Euler step of the reference system.
pub fn step_euler<T: Scalar>(s: &LorenzState<T>, p: &LorenzParams<T>, dt: T) -> Result<LorenzState<T>> {
    let next = s.advance(&lorenz_rhs(s, p), dt);
    if next.is_finite() {
        Ok(next)
    } else {
        Err(NudgingError::NonFinite)
    }
}

/// One explicit Euler step of reference and assimilated copy with a shared `dt`.
pub fn step_coupled<T: Scalar>(
    reference: &LorenzState<T>,
    assim: &LorenzState<T>,
    variant: CouplingVariant,
    p: &LorenzParams<T>,
    dt: T,
) -> Result<(LorenzState<T>, LorenzState<T>)> {
    let next_ref = step_euler(reference, p, dt)?;
    let mut next = assim.advance(&coupled_rhs(reference, assim, variant, p), dt);
    variant.insert_observed(&next_ref, &mut next);
    if !next.is_finite() {
        return Err(NudgingError::NonFinite);
    }
    Ok((next_ref, next))
}

/// Uniform-in-time bound `J` on `limsup Y²` used in the observe-`Y` estimate:
/// `r²` for `b <= 2`, `b²r² / (4(b - 1))` for `b >= 2`.
pub fn hayden_j<T: Scalar>(p: &LorenzParams<T>) -> T {
    let two = T::lit(2.0);
    if p.b <= two {
        p.r * p.r
    } else {
        p.b * p.b * p.r * p.r / (T::lit(4.0) * (p.b - T::one()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LorenzTwinConfig<T> {
    pub params: LorenzParams<T>,
    pub variant: CouplingVariant,
    pub ref_init: LorenzState<T>,
    pub assim_init: LorenzState<T>,
    pub dt: T,
    pub final_time: T,
    /// Record every `output_stride` steps (1 = full resolution).
    pub output_stride: usize,
}

impl<T: Scalar> LorenzTwinConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.dt > T::zero()) {
            return Err(NudgingError::validation("dt", "must be positive"));
        }
        if !(self.final_time > T::zero()) {
            return Err(NudgingError::validation("T", "must be positive"));
        }
        if self.output_stride == 0 {
            return Err(NudgingError::validation("output_stride", "must be at least 1"));
        }
        if self.variant == CouplingVariant::NudgeXY && self.params.mu * self.dt >= T::lit(2.0) {
            return Err(NudgingError::validation("mu", "explicit nudging requires μ ≲ 2/Δt"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.final_time / self.dt).round().to_usize().unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub struct LorenzTwinOutput<T> {
    /// Channels `err_x, err_y, err_z, err_l2`.
    pub series: ErrorSeries,
    pub final_ref: LorenzState<T>,
    pub final_assim: LorenzState<T>,
}

pub const LORENZ_CHANNELS: [&str; 4] = ["err_x", "err_y", "err_z", "err_l2"];

/// Integrates the reference and assimilated systems side by side and records
/// the componentwise and Euclidean errors.
pub fn run_twin<T: Scalar>(cfg: &LorenzTwinConfig<T>) -> Result<LorenzTwinOutput<T>> {
    cfg.validate()?;
    let steps = cfg.steps();
    let mut series = ErrorSeries::new(&LORENZ_CHANNELS);
    let mut reference = cfg.ref_init;
    let mut assim = cfg.assim_init;
    cfg.variant.insert_observed(&reference, &mut assim);

    let record = |series: &mut ErrorSeries, step: usize, u: &LorenzState<T>, v: &LorenzState<T>| {
        let t = cfg.dt.as_f64() * step as f64;
        series.push(
            t,
            &[
                (u.x - v.x).magnitude().as_f64(),
                (u.y - v.y).magnitude().as_f64(),
                (u.z - v.z).magnitude().as_f64(),
                u.distance(v).as_f64(),
            ],
        );
    };

    record(&mut series, 0, &reference, &assim);
    for step in 1..=steps {
        let (r, a) = step_coupled(&reference, &assim, cfg.variant, &cfg.params, cfg.dt)
            .map_err(|e| e.at_step("lorenz", step))?;
        reference = r;
        assim = a;
        if step % cfg.output_stride == 0 || step == steps {
            record(&mut series, step, &reference, &assim);
        }
    }
    series.set_meta("output_stride", cfg.output_stride.to_string());
    series.set_meta("dt", format!("{:e}", cfg.dt.as_f64()));
    Ok(LorenzTwinOutput { series, final_ref: reference, final_assim: assim })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classic() -> LorenzParams<f64> {
        LorenzParams::classic()
    }

    #[test]
    fn rhs_at_origin() {
        let d = lorenz_rhs(&LorenzState::new(0.0, 0.0, 0.0), &classic());
        assert_eq!((d.x, d.y), (0.0, 0.0));
        assert!((d.z + 8.0 / 3.0 * 38.0).abs() < 1e-12);
        assert!((d.z + 101.333_333_333_333_33).abs() < 1e-10);
    }

    #[test]
    fn rhs_at_fig1_reference_init() {
        let d = lorenz_rhs(&LorenzState::new(30.0, 40.0, 50.0), &classic());
        assert!((d.x - 100.0).abs() < 1e-12);
        assert!((d.y + 1840.0).abs() < 1e-12);
        assert!((d.z - (1200.0 - 400.0 / 3.0 - 304.0 / 3.0)).abs() < 1e-10);
        assert!((d.z - 965.333_333_333_333_3).abs() < 1e-9);
    }

    #[test]
    fn z_is_frozen_without_dissipation_at_xy_zero() {
        let p = LorenzParams { b: 0.0, ..classic() };
        for z in [-7.0, 0.0, 123.0] {
            assert_eq!(lorenz_rhs(&LorenzState::new(0.0, 0.0, z), &p).z, 0.0);
        }
    }

    #[test]
    fn one_euler_step() {
        let s = step_euler(&LorenzState::new(30.0, 40.0, 50.0), &classic(), 1e-4).unwrap();
        assert!((s.x - 30.01).abs() < 1e-12);
        assert!((s.y - 39.816).abs() < 1e-12);
        assert!((s.z - 50.096_533_333_333_33).abs() < 1e-12);
        let s0 = LorenzState::new(1.0, 2.0, 3.0);
        assert_eq!(step_euler(&s0, &classic(), 0.0).unwrap(), s0);
    }

    #[test]
    fn nonfinite_step_is_reported() {
        let s = LorenzState::new(f64::MAX, f64::MAX, 0.0);
        assert!(matches!(step_euler(&s, &classic(), 1.0), Err(NudgingError::NonFinite)));
    }

    #[test]
    fn feedback_vanishes_on_identical_states() {
        let s = LorenzState::new(3.0, -1.0, 20.0);
        assert_eq!(coupled_rhs(&s, &s, CouplingVariant::NudgeXY, &classic()), lorenz_rhs(&s, &classic()));
    }

    #[test]
    fn observe_xy_error_obeys_linear_law() {
        let u = LorenzState::new(3.0, -1.0, 20.0);
        let v = LorenzState::new(-5.0, 7.0, 12.0);
        for b in [0.0, 8.0 / 3.0] {
            let p = LorenzParams { b, ..classic() };
            let dw = coupled_rhs(&u, &v, CouplingVariant::ObserveXY, &p).z - lorenz_rhs(&u, &p).z;
            let w = v.z - u.z;
            assert!((dw + b * w).abs() < 1e-12, "b = {b}");
        }
    }

    #[test]
    fn observed_components_are_inserted_verbatim() {
        let u = LorenzState::new(3.0, -1.0, 20.0);
        let v = LorenzState::new(-5.0, 7.0, 12.0);
        let d = coupled_rhs(&u, &v, CouplingVariant::ObserveX, &classic());
        // y-equation uses X and z
        assert_eq!(d.y, -10.0 * 3.0 - 7.0 - 3.0 * 12.0);
        let d = coupled_rhs(&u, &v, CouplingVariant::ObserveZ, &classic());
        assert_eq!(d.y, -10.0 * -5.0 - 7.0 - -5.0 * 20.0);
    }

    #[test]
    fn hayden_j_branches() {
        let at = |b: f64| hayden_j(&LorenzParams { b, ..classic() });
        assert_eq!(at(1.0), 784.0);
        assert_eq!(at(2.0), 784.0);
        let upper = 2.0 * 2.0 * 784.0 / (4.0 * (2.0 - 1.0));
        assert_eq!(upper, 784.0);
        assert!((at(8.0 / 3.0) - 50176.0 / 60.0).abs() < 1e-9);
        assert!((at(2.0 + 1e-9) - 784.0).abs() < 1e-5);
    }

    #[test]
    fn identical_inits_stay_identical() {
        for variant in CouplingVariant::ALL {
            let cfg = LorenzTwinConfig {
                params: classic(),
                variant,
                ref_init: LorenzState::new(30.0, 40.0, 50.0),
                assim_init: LorenzState::new(30.0, 40.0, 50.0),
                dt: 1e-4,
                final_time: 1.0,
                output_stride: 100,
            };
            let out = run_twin(&cfg).unwrap();
            let l2 = out.series.channel("err_l2").unwrap();
            assert_eq!(l2.len(), 101);
            assert!(l2.iter().all(|&e| e <= 1e-12), "{variant:?}");
        }
    }

    #[test]
    fn cfl_violation_is_rejected() {
        let cfg = LorenzTwinConfig {
            params: LorenzParams { mu: 3.0e4, ..classic() },
            variant: CouplingVariant::NudgeXY,
            ref_init: LorenzState::default(),
            assim_init: LorenzState::default(),
            dt: 1e-4,
            final_time: 1.0,
            output_stride: 1,
        };
        assert!(matches!(run_twin(&cfg), Err(NudgingError::Validation { .. })));
    }
}
