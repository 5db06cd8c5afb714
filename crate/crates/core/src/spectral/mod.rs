//! Periodic field algebra shared by the KdV and Euler solvers: transforms,
//! derivatives, 2/3 dealiasing, Fourier-mode observation operators and
//! Parseval norms.

mod field1d;
mod field2d;
pub mod lattice;
pub mod transform;

use std::io::Write;

pub use field1d::Field1D;
pub use field2d::VectorField2D;
pub use transform::{ComplexGrid2D, Transform1D, Transform2D};

use crate::{NudgingError, Result, Scalar};

/// Shape of the observed mode set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionKind {
    /// `0 < |k| <= M` in 1D (`max(|k₁|, |k₂|) <= M` on a 2D field).
    Band1D,
    /// `0 < k₁² + k₂² <= M²`.
    Annulus2D,
}

/// Orthogonal projection onto the lowest Fourier modes, `P_M`. The zero mode
/// is never kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ModeProjection {
    pub cutoff: usize,
    pub kind: ProjectionKind,
}

impl ModeProjection {
    pub fn band(cutoff: usize) -> Self {
        ModeProjection { cutoff, kind: ProjectionKind::Band1D }
    }

    pub fn annulus(cutoff: usize) -> Self {
        ModeProjection { cutoff, kind: ProjectionKind::Annulus2D }
    }

    pub fn keeps_1d(&self, k: i64) -> bool {
        k != 0 && k.unsigned_abs() as usize <= self.cutoff
    }

    pub fn keeps_2d(&self, k: (i64, i64)) -> bool {
        if k == (0, 0) {
            return false;
        }
        let m = self.cutoff as i64;
        match self.kind {
            ProjectionKind::Band1D => k.0.abs() <= m && k.1.abs() <= m,
            // exact integer membership, no sqrt
            ProjectionKind::Annulus2D => k.0 * k.0 + k.1 * k.1 <= m * m,
        }
    }
}

/// Operations common to the 1D scalar and 2D vector spectral fields.
pub trait SpectralField<T: Scalar>: Clone {
    /// Zeroes every mode above `floor(N/3)` (max-norm in 2D).
    fn dealias_23(&self) -> Self;
    fn project(&self, p: &ModeProjection) -> Self;
    /// `(I - P) f`.
    fn project_complement(&self, p: &ModeProjection) -> Self;
    /// `‖f‖²` over one period cell, via Parseval.
    fn l2_norm_sq(&self) -> T;
    /// `(‖P f‖, ‖(I - P) f‖)`.
    fn l2_norm_split(&self, p: &ModeProjection) -> (T, T);
    fn difference(&self, other: &Self) -> Self;

    fn l2_norm(&self) -> T {
        self.l2_norm_sq().sqrt()
    }
}

pub(crate) fn check_grid_size(n: usize) -> Result<()> {
    if n < 4 || !n.is_power_of_two() {
        return Err(NudgingError::validation("N", format!("grid size {n} must be a power of two >= 4")));
    }
    Ok(())
}

/// Samples of `f`, rejecting a mean or Nyquist coefficient with an imaginary
/// part above `1e-12` relative.
pub fn to_physical<T: Scalar>(f: &Field1D<T>) -> Result<Vec<T>> {
    let checked = Field1D::from_half_spectrum(f.n(), f.period(), f.coeffs().to_vec())?;
    Ok(checked.to_physical())
}

pub fn to_spectral<T: Scalar>(samples: &[T], period: T) -> Result<Field1D<T>> {
    Field1D::from_physical(samples, period)
}

pub fn ddx<T: Scalar>(f: &Field1D<T>, order: u32) -> Field1D<T> {
    f.ddx(order)
}

pub fn dealias_23<T: Scalar, F: SpectralField<T>>(f: &F) -> F {
    f.dealias_23()
}

pub fn project<T: Scalar, F: SpectralField<T>>(p: &ModeProjection, f: &F) -> F {
    f.project(p)
}

pub fn l2_norm<T: Scalar, F: SpectralField<T>>(f: &F) -> T {
    f.l2_norm()
}

pub fn l2_norm_split<T: Scalar, F: SpectralField<T>>(f: &F, p: &ModeProjection) -> (T, T) {
    f.l2_norm_split(p)
}

/// Largest coefficient magnitude in the top tenth of the retained band
/// (`[0.9 K, K]`, `K = floor(N/3)`), relative to the largest coefficient overall.
/// Zero for a zero field.
pub fn cutoff_margin_1d<T: Scalar>(f: &Field1D<T>) -> f64 {
    let k_cut = f.dealias_cutoff();
    let lo = (k_cut * 9) / 10;
    let peak = f.max_abs_coeff().as_f64();
    if peak == 0.0 {
        return 0.0;
    }
    let edge = (lo..=k_cut).map(|k| f.coeff(k as i64).norm().as_f64()).fold(0.0, f64::max);
    edge / peak
}

/// 2D analogue of [`cutoff_margin_1d`] over the max-norm band `[0.9 K, K]`.
pub fn cutoff_margin_2d<T: Scalar>(f: &VectorField2D<T>) -> f64 {
    let k_cut = f.dealias_cutoff() as i64;
    let lo = (k_cut * 9) / 10;
    let peak = f.max_abs_coeff().as_f64();
    if peak == 0.0 {
        return 0.0;
    }
    let (u1, u2) = f.components();
    let mut edge = 0.0f64;
    for i in 0..u1.len() {
        let (k1, k2) = f.wavevector(i);
        let m = k1.abs().max(k2.abs());
        if m >= lo && m <= k_cut {
            edge = edge.max(u1[i].norm().as_f64()).max(u2[i].norm().as_f64());
        }
    }
    edge / peak
}

fn check_pair(same: bool) -> Result<()> {
    if same {
        Ok(())
    } else {
        Err(NudgingError::MalformedField("spectrum pair lives on different grids".into()))
    }
}

/// Writes `(k, abs_uhat, abs_vhat)` rows for `k = 0..=N/2`.
pub fn write_spectrum_1d<T: Scalar, W: Write>(u: &Field1D<T>, v: &Field1D<T>, out: W) -> Result<()> {
    check_pair(u.n() == v.n())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "abs_uhat", "abs_vhat"])?;
    for (k, (a, b)) in u.coeffs().iter().zip(v.coeffs()).enumerate() {
        w.write_record([k.to_string(), format!("{:e}", a.norm().as_f64()), format!("{:e}", b.norm().as_f64())])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `(k1, k2, abs_uhat, abs_vhat)` rows over the stored half plane, where
/// `abs_uhat = sqrt(|û₁|² + |û₂|²)`.
pub fn write_spectrum_2d_full<T: Scalar, W: Write>(u: &VectorField2D<T>, v: &VectorField2D<T>, out: W) -> Result<()> {
    check_pair(u.n() == v.n())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k1", "k2", "abs_uhat", "abs_vhat"])?;
    let mag = |f: &VectorField2D<T>, i: usize| {
        let (a, b) = f.components();
        (a[i].norm_sqr() + b[i].norm_sqr()).sqrt().as_f64()
    };
    for i in 0..u.components().0.len() {
        let (k1, k2) = u.wavevector(i);
        w.write_record([k1.to_string(), k2.to_string(), format!("{:e}", mag(u, i)), format!("{:e}", mag(v, i))])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes radially binned `(shell_index, energy_u, energy_v)` rows.
pub fn write_spectrum_2d_shells<T: Scalar, W: Write>(u: &VectorField2D<T>, v: &VectorField2D<T>, out: W) -> Result<()> {
    check_pair(u.n() == v.n())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["shell_index", "energy_u", "energy_v"])?;
    for (s, (a, b)) in u.shell_spectrum().iter().zip(v.shell_spectrum()).enumerate() {
        w.write_record([s.to_string(), format!("{:e}", a.as_f64()), format!("{:e}", b.as_f64())])?;
    }
    w.flush()?;
    Ok(())
}
