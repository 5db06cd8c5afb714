//! Nudging (AOT feedback-control) data assimilation on three model systems:
//! the Lorenz 1963 ODE, the periodic Korteweg–de Vries equation and the 2D
//! incompressible Euler equations on the torus.
//!
//! The numerical core is generic over the floating point type through
//! [`Scalar`]; the aliases at the crate root fix it to `f64`, which is what
//! the experiment harness and the CLI use.

// `!(x > 0)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod euler2d;
pub mod harness;
pub mod kdv;
pub mod lorenz;
pub mod spectral;

use std::fmt;

pub use error::{NudgingError, Result};

/// Floating point type the solvers are generic over (`f32` or `f64`).
pub trait Scalar:
    num_traits::Float + num_traits::FloatConst + rustfft::FftNum + Default + fmt::Display + fmt::LowerExp
{
    /// Converts an `f64` literal; every `f64` is representable (possibly rounded).
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as num_traits::NumCast>::from(v).expect("f64 literal fits the scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    #[inline]
    fn of_usize(v: usize) -> Self {
        Self::lit(v as f64)
    }

    #[inline]
    fn of_i64(v: i64) -> Self {
        Self::lit(v as f64)
    }

    /// Absolute value; `Float` and `Signed` both define `abs`, so call sites use this.
    #[inline]
    fn magnitude(self) -> Self {
        num_traits::Float::abs(self)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub type Complex<T> = num_complex::Complex<T>;

pub type SpectralField1D = spectral::Field1D<f64>;
pub type SpectralVectorField2D = spectral::VectorField2D<f64>;
pub type LorenzParams = lorenz::LorenzParams<f64>;
pub type LorenzState = lorenz::LorenzState<f64>;
pub type KdvParams = kdv::KdvParams<f64>;
pub type KdvSolver = kdv::KdvSolver<f64>;
pub type EulerParams = euler2d::EulerParams<f64>;
pub type EulerSolver = euler2d::EulerSolver<f64>;
pub type TaylorGreenSpec = euler2d::TaylorGreenSpec<f64>;

pub use diagnostics::{DecayFit, ErrorSeries};
pub use lorenz::CouplingVariant;
pub use spectral::ModeProjection;
