use num_traits::Zero;

use super::transform::Transform1D;
use super::{check_grid_size, ModeProjection, SpectralField};
use crate::{Complex, NudgingError, Result, Scalar};

/// Real periodic field on `[0, L)` stored as the non-negative half of its
/// conjugate-symmetric spectrum, `coeffs[k]` for `k = 0..=N/2`.
///
/// The field is `f(x) = Σ_k c_k exp(i q_k x)` with `q_k = 2πk/L` and
/// `c_{-k} = conj(c_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field1D<T> {
    coeffs: Vec<Complex<T>>,
    n: usize,
    period: T,
}

impl<T: Scalar> Field1D<T> {
    pub fn zeros(n: usize, period: T) -> Result<Self> {
        check_grid_size(n)?;
        if !(period > T::zero()) || !period.is_finite() {
            return Err(NudgingError::validation("L", "period must be positive and finite"));
        }
        Ok(Field1D { coeffs: vec![Complex::zero(); n / 2 + 1], n, period })
    }

    /// Builds a field from `N/2 + 1` coefficients.
    ///
    /// The mean and Nyquist coefficients must be real up to `1e-12` relative
    /// to the largest coefficient.
    pub fn from_half_spectrum(n: usize, period: T, coeffs: Vec<Complex<T>>) -> Result<Self> {
        let mut field = Self::zeros(n, period)?;
        if coeffs.len() != n / 2 + 1 {
            return Err(NudgingError::MalformedField(format!(
                "expected {} coefficients, got {}",
                n / 2 + 1,
                coeffs.len()
            )));
        }
        let tol = symmetry_tolerance(coeffs.iter());
        for &k in &[0, n / 2] {
            if coeffs[k].im.magnitude() > tol {
                return Err(NudgingError::MalformedField(format!(
                    "coefficient {k} must be real for a real field (imaginary part {:e})",
                    coeffs[k].im
                )));
            }
        }
        field.coeffs = coeffs;
        field.coeffs[0].im = T::zero();
        field.coeffs[n / 2].im = T::zero();
        Ok(field)
    }

    /// Builds a field from the two-sided spectrum ordered `k = -N/2+1, ..., N/2`,
    /// rejecting spectra that are not conjugate symmetric to `1e-12` relative.
    pub fn from_full_spectrum(n: usize, period: T, coeffs: &[Complex<T>]) -> Result<Self> {
        check_grid_size(n)?;
        if coeffs.len() != n {
            return Err(NudgingError::MalformedField(format!("expected {n} coefficients, got {}", coeffs.len())));
        }
        let half = n / 2;
        let at = |k: i64| coeffs[(k + half as i64 - 1) as usize];
        let tol = symmetry_tolerance(coeffs.iter());
        for k in 1..half as i64 {
            let defect = (at(-k) - at(k).conj()).norm();
            if defect > tol {
                return Err(NudgingError::MalformedField(format!(
                    "conjugate symmetry violated at k = {k} (defect {defect:e})"
                )));
            }
        }
        let half_coeffs = (0..=half as i64).map(at).collect();
        Self::from_half_spectrum(n, period, half_coeffs)
    }

    pub fn from_physical(samples: &[T], period: T) -> Result<Self> {
        let n = samples.len();
        check_grid_size(n)?;
        let coeffs = Transform1D::new(n).forward(samples.to_vec());
        Self::from_half_spectrum(n, period, coeffs)
    }

    /// Same as [`Self::from_physical`] with a prebuilt plan.
    pub fn from_physical_with(transform: &Transform1D<T>, samples: &[T], period: T) -> Result<Self> {
        if transform.len() != samples.len() {
            return Err(NudgingError::MalformedField("plan length mismatch".into()));
        }
        Self::from_half_spectrum(samples.len(), period, transform.forward(samples.to_vec()))
    }

    pub fn to_physical(&self) -> Vec<T> {
        Transform1D::new(self.n).inverse(&self.coeffs)
    }

    pub fn to_physical_with(&self, transform: &Transform1D<T>) -> Vec<T> {
        transform.inverse(&self.coeffs)
    }

    /// Grid points `x_j = jL/N`.
    pub fn grid(&self) -> Vec<T> {
        let dx = self.period / T::of_usize(self.n);
        (0..self.n).map(|j| T::of_usize(j) * dx).collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> T {
        self.period
    }

    /// Largest wavenumber kept by the 2/3 rule, `floor(N/3)`.
    pub fn dealias_cutoff(&self) -> usize {
        self.n / 3
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex<T>> {
        self.coeffs
    }

    /// Coefficient of wavenumber `k` (either sign); zero outside the grid.
    pub fn coeff(&self, k: i64) -> Complex<T> {
        let idx = k.unsigned_abs() as usize;
        if idx > self.n / 2 || (k == -(self.n as i64 / 2)) {
            return Complex::zero();
        }
        if k >= 0 {
            self.coeffs[idx]
        } else {
            self.coeffs[idx].conj()
        }
    }

    /// Sets `c_k` (and implicitly `c_{-k} = conj(c_k)`).
    pub fn set_coeff(&mut self, k: i64, c: Complex<T>) {
        let idx = k.unsigned_abs() as usize;
        assert!(idx <= self.n / 2, "wavenumber {k} outside the grid");
        self.coeffs[idx] = if k >= 0 { c } else { c.conj() };
        if idx == 0 || idx == self.n / 2 {
            self.coeffs[idx].im = T::zero();
        }
    }

    /// Scaled wavenumber `q_k = 2πk/L`.
    pub fn wavenumber(&self, k: usize) -> T {
        T::TAU() * T::of_usize(k) / self.period
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == T::zero() && c.im == T::zero())
    }

    pub fn max_abs_coeff(&self) -> T {
        self.coeffs.iter().map(|c| c.norm()).fold(T::zero(), T::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Nonnegative wavenumbers carrying a nonzero coefficient (bitwise).
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, _)| k)
    }

    /// `d^order f / dx^order`: multiplies `c_k` by `(i q_k)^order`.
    pub fn ddx(&self, order: u32) -> Self {
        let mut out = self.clone();
        let i = Complex::new(T::zero(), T::one());
        for (k, c) in out.coeffs.iter_mut().enumerate() {
            *c = *c * (i * self.wavenumber(k)).powu(order);
        }
        // the Nyquist mode of a real field has no odd derivative
        if order % 2 == 1 {
            out.coeffs[self.n / 2] = Complex::zero();
        }
        out
    }

    pub fn scale(&self, a: T) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c = *c * a);
        out
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: T, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "grid size mismatch");
        let mut out = self.clone();
        for (c, o) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *c = *c + *o * a;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(T::one(), other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-T::one(), other)
    }

    /// Pointwise product of the spectrum with a symbol `s(k)`, `k >= 0`.
    pub fn map_modes<F: FnMut(usize, Complex<T>) -> Complex<T>>(&self, mut f: F) -> Self {
        let mut out = self.clone();
        for (k, c) in out.coeffs.iter_mut().enumerate() {
            *c = f(k, *c);
        }
        out
    }
}

fn symmetry_tolerance<'a, T: Scalar + 'a>(coeffs: impl Iterator<Item = &'a Complex<T>>) -> T {
    let scale = coeffs.map(|c| c.norm()).fold(T::zero(), T::max);
    T::lit(1e-12) * if scale > T::zero() { scale } else { T::one() }
}

impl<T: Scalar> SpectralField<T> for Field1D<T> {
    fn dealias_23(&self) -> Self {
        let cutoff = self.dealias_cutoff();
        let mut out = self.clone();
        out.coeffs.iter_mut().skip(cutoff + 1).for_each(|c| *c = Complex::zero());
        out
    }

    fn project(&self, p: &ModeProjection) -> Self {
        self.map_modes(|k, c| if p.keeps_1d(k as i64) { c } else { Complex::zero() })
    }

    fn project_complement(&self, p: &ModeProjection) -> Self {
        self.map_modes(|k, c| if p.keeps_1d(k as i64) { Complex::zero() } else { c })
    }

    fn l2_norm_sq(&self) -> T {
        let half = self.n / 2;
        let two = T::lit(2.0);
        let sum = self.coeffs.iter().enumerate().fold(T::zero(), |acc, (k, c)| {
            let w = if k == 0 || k == half { T::one() } else { two };
            acc + w * c.norm_sqr()
        });
        self.period * sum
    }

    fn l2_norm_split(&self, p: &ModeProjection) -> (T, T) {
        let half = self.n / 2;
        let two = T::lit(2.0);
        let (mut low, mut high) = (T::zero(), T::zero());
        for (k, c) in self.coeffs.iter().enumerate() {
            let w = if k == 0 || k == half { T::one() } else { two };
            if p.keeps_1d(k as i64) {
                low = low + w * c.norm_sqr();
            } else {
                high = high + w * c.norm_sqr();
            }
        }
        ((self.period * low).sqrt(), (self.period * high).sqrt())
    }

    fn difference(&self, other: &Self) -> Self {
        self.sub(other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cos_pi(n: usize) -> Field1D<f64> {
        let mut f = Field1D::zeros(n, 2.0).unwrap();
        f.set_coeff(1, Complex::new(0.5, 0.0));
        f
    }

    #[test]
    fn zero_field_maps_to_zero_samples() {
        let f = Field1D::<f64>::zeros(32, 2.0).unwrap();
        assert!(f.to_physical().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_mode_is_a_cosine() {
        let f = cos_pi(64);
        for (x, v) in f.grid().iter().zip(f.to_physical()) {
            assert!((v - (PI * x).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn derivatives_of_cosine() {
        let f = cos_pi(64);
        let xs = f.grid();
        let d1 = f.ddx(1).to_physical();
        let d3 = f.ddx(3).to_physical();
        for (j, x) in xs.iter().enumerate() {
            assert!((d1[j] + PI * (PI * x).sin()).abs() < 1e-13);
            assert!((d3[j] - PI.powi(3) * (PI * x).sin()).abs() < 1e-12);
        }
        assert!(Field1D::<f64>::zeros(16, 2.0).unwrap().ddx(3).is_zero());
    }

    #[test]
    fn dealias_boundary_for_n128() {
        let mut f = Field1D::<f64>::zeros(128, 2.0).unwrap();
        f.set_coeff(50, Complex::new(1.0, 0.0));
        f.set_coeff(42, Complex::new(0.25, -0.5));
        let g = f.dealias_23();
        assert_eq!(g.coeff(50), Complex::zero());
        assert_eq!(g.coeff(42), Complex::new(0.25, -0.5));
    }

    #[test]
    fn norm_of_cosine_is_one() {
        let f = cos_pi(16);
        assert!((f.l2_norm() - 1.0).abs() < 1e-15);
        let (low, high) = f.l2_norm_split(&ModeProjection::band(1));
        assert!((low - 1.0).abs() < 1e-15 && high == 0.0);
        let (low, high) = f.l2_norm_split(&ModeProjection::band(0));
        assert!(low == 0.0 && (high - 1.0).abs() < 1e-15);
    }

    #[test]
    fn malformed_spectra_are_rejected() {
        let mut full = vec![Complex::<f64>::zero(); 8];
        // k = 1 lives at index 1 + 4 - 1 = 4, k = -1 at index 2
        full[4] = Complex::new(1.0, 1.0);
        full[2] = Complex::new(1.0, 1.0);
        assert!(matches!(Field1D::from_full_spectrum(8, 2.0, &full), Err(NudgingError::MalformedField(_))));
        full[2] = Complex::new(1.0, -1.0);
        let f = Field1D::from_full_spectrum(8, 2.0, &full).unwrap();
        assert_eq!(f.coeff(1), Complex::new(1.0, 1.0));
        assert_eq!(f.coeff(-1), Complex::new(1.0, -1.0));

        let mut half = vec![Complex::<f64>::zero(); 5];
        half[0] = Complex::new(0.0, 1.0);
        assert!(Field1D::from_half_spectrum(8, 2.0, half).is_err());
        assert!(Field1D::<f64>::zeros(12, 2.0).is_err());
    }

    #[test]
    fn f32_round_trip() {
        let samples: Vec<f32> = (0..32).map(|j| (j as f32 * 0.7).sin() * 0.3).collect();
        let f = Field1D::from_physical(&samples, 2.0f32).unwrap();
        let mean = samples.iter().sum::<f32>() / 32.0;
        assert!((f.coeff(0).re - mean).abs() < 1e-6);
        for (a, b) in f.to_physical().iter().zip(&samples) {
            assert!((a - b).abs() < 1e-5);
        }
    }
}
