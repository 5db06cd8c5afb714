use num_traits::Zero;

use super::transform::Transform2D;
use super::{check_grid_size, ModeProjection, SpectralField};
use crate::{Complex, NudgingError, Result, Scalar};

/// Real 2-component periodic vector field on `[0, 2π)²`.
///
/// Each component is stored as a half-plane spectrum: `n` rows indexed by the
/// first wavenumber in FFT order and `n/2 + 1` columns for the non-negative
/// second wavenumber.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField2D<T> {
    u1: Vec<Complex<T>>,
    u2: Vec<Complex<T>>,
    n: usize,
}

impl<T: Scalar> VectorField2D<T> {
    pub fn zeros(n: usize) -> Result<Self> {
        check_grid_size(n)?;
        let len = n * (n / 2 + 1);
        Ok(VectorField2D { u1: vec![Complex::zero(); len], u2: vec![Complex::zero(); len], n })
    }

    pub fn from_components(n: usize, u1: Vec<Complex<T>>, u2: Vec<Complex<T>>) -> Result<Self> {
        check_grid_size(n)?;
        let len = n * (n / 2 + 1);
        if u1.len() != len || u2.len() != len {
            return Err(NudgingError::MalformedField(format!("expected {len} coefficients per component")));
        }
        Ok(VectorField2D { u1, u2, n })
    }

    pub fn from_physical(transform: &Transform2D<T>, u1: &[T], u2: &[T]) -> Result<Self> {
        let n = transform.n();
        if u1.len() != n * n || u2.len() != n * n {
            return Err(NudgingError::MalformedField("grid size mismatch".into()));
        }
        Self::from_components(n, transform.forward(u1), transform.forward(u2))
    }

    pub fn to_physical(&self, transform: &Transform2D<T>) -> (Vec<T>, Vec<T>) {
        (transform.inverse(&self.u1), transform.inverse(&self.u2))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dealias_cutoff(&self) -> usize {
        self.n / 3
    }

    pub fn half_width(&self) -> usize {
        self.n / 2 + 1
    }

    pub fn components(&self) -> (&[Complex<T>], &[Complex<T>]) {
        (&self.u1, &self.u2)
    }

    pub fn components_mut(&mut self) -> (&mut [Complex<T>], &mut [Complex<T>]) {
        (&mut self.u1, &mut self.u2)
    }

    /// Signed wavevector of storage slot `idx`.
    pub fn wavevector(&self, idx: usize) -> (i64, i64) {
        let h = self.half_width();
        let (row, k2) = (idx / h, idx % h);
        let k1 = if row <= self.n / 2 { row as i64 } else { row as i64 - self.n as i64 };
        (k1, k2 as i64)
    }

    /// Storage slot of `k` and whether the stored value must be conjugated.
    pub fn slot(&self, k: (i64, i64)) -> Option<(usize, bool)> {
        let half = (self.n / 2) as i64;
        let (k1, k2, conj) = if k.1 < 0 { (-k.0, -k.1, true) } else { (k.0, k.1, false) };
        if k1.abs() > half || k2 > half {
            return None;
        }
        let row = if k1 >= 0 { k1 } else { k1 + self.n as i64 } as usize;
        Some((row * self.half_width() + k2 as usize, conj))
    }

    /// `(û₁(k), û₂(k))`, zero outside the grid.
    pub fn coeff(&self, k: (i64, i64)) -> (Complex<T>, Complex<T>) {
        match self.slot(k) {
            Some((idx, false)) => (self.u1[idx], self.u2[idx]),
            Some((idx, true)) => (self.u1[idx].conj(), self.u2[idx].conj()),
            None => (Complex::zero(), Complex::zero()),
        }
    }

    /// Sets the coefficient pair at `k`; the conjugate mode is implied
    /// (written explicitly when it lives on the stored `k₂ = 0` row).
    pub fn set_mode(&mut self, k: (i64, i64), c: (Complex<T>, Complex<T>)) {
        let (idx, conj) = self.slot(k).expect("wavevector outside the grid");
        let (c1, c2) = if conj { (c.0.conj(), c.1.conj()) } else { c };
        self.u1[idx] = c1;
        self.u2[idx] = c2;
        let (k1, k2) = self.wavevector(idx);
        if k2 == 0 || k2 == (self.n / 2) as i64 {
            if let Some((mirror, _)) = self.slot((-k1, k2)) {
                self.u1[mirror] = c1.conj();
                self.u2[mirror] = c2.conj();
            }
        }
    }

    /// Multiplicity of a stored slot in the full plane (1 on the self-conjugate rows).
    pub fn weight(&self, idx: usize) -> usize {
        let k2 = idx % self.half_width();
        if k2 == 0 || k2 == self.n / 2 {
            1
        } else {
            2
        }
    }

    pub fn is_zero(&self) -> bool {
        self.u1.iter().chain(&self.u2).all(|c| c.is_zero())
    }

    pub fn is_finite(&self) -> bool {
        self.u1.iter().chain(&self.u2).all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_abs_coeff(&self) -> T {
        self.u1.iter().chain(&self.u2).map(|c| c.norm()).fold(T::zero(), T::max)
    }

    /// Wavevectors with a nonzero coefficient in either component.
    pub fn support(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        (0..self.u1.len()).filter(|&i| !self.u1[i].is_zero() || !self.u2[i].is_zero()).map(|i| self.wavevector(i))
    }

    /// `max_k |k · û(k)|`, the discrete divergence in spectral space.
    pub fn max_divergence(&self) -> T {
        (0..self.u1.len())
            .map(|i| {
                let (k1, k2) = self.wavevector(i);
                (self.u1[i] * T::of_i64(k1) + self.u2[i] * T::of_i64(k2)).norm()
            })
            .fold(T::zero(), T::max)
    }

    /// Leray–Helmholtz projection: `û - k (k·û)/|k|²`, zero mean.
    pub fn leray_project(&self) -> Self {
        let mut out = self.clone();
        for i in 0..out.u1.len() {
            let (k1, k2) = self.wavevector(i);
            let kk = k1 * k1 + k2 * k2;
            if kk == 0 {
                out.u1[i] = Complex::zero();
                out.u2[i] = Complex::zero();
                continue;
            }
            let (k1, k2) = (T::of_i64(k1), T::of_i64(k2));
            let div = (out.u1[i] * k1 + out.u2[i] * k2) / T::of_i64(kk);
            out.u1[i] = out.u1[i] - div * k1;
            out.u2[i] = out.u2[i] - div * k2;
        }
        out
    }

    /// Scalar vorticity `ω̂ = i(k₁ û₂ - k₂ û₁)` on the half plane.
    pub fn vorticity(&self) -> Vec<Complex<T>> {
        let i = Complex::new(T::zero(), T::one());
        (0..self.u1.len())
            .map(|idx| {
                let (k1, k2) = self.wavevector(idx);
                i * (self.u2[idx] * T::of_i64(k1) - self.u1[idx] * T::of_i64(k2))
            })
            .collect()
    }

    /// Applies `f(k, û₁, û₂)` to every stored mode.
    pub fn map_modes<F>(&self, mut f: F) -> Self
    where
        F: FnMut((i64, i64), Complex<T>, Complex<T>) -> (Complex<T>, Complex<T>),
    {
        let mut out = self.clone();
        for i in 0..out.u1.len() {
            let (a, b) = f(self.wavevector(i), out.u1[i], out.u2[i]);
            out.u1[i] = a;
            out.u2[i] = b;
        }
        out
    }

    pub fn scale(&self, a: T) -> Self {
        self.map_modes(|_, x, y| (x * a, y * a))
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: T, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "grid size mismatch");
        let mut out = self.clone();
        for i in 0..out.u1.len() {
            out.u1[i] = out.u1[i] + other.u1[i] * a;
            out.u2[i] = out.u2[i] + other.u2[i] * a;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-T::one(), other)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(T::one(), other)
    }

    /// L² energy per integer shell `round(|k|)`, index = shell.
    pub fn shell_spectrum(&self) -> Vec<T> {
        let n = self.n;
        let max_shell = ((2.0f64).sqrt() * (n / 2) as f64).ceil() as usize + 1;
        let mut shells = vec![T::zero(); max_shell + 1];
        let area = T::TAU() * T::TAU();
        for i in 0..self.u1.len() {
            let (k1, k2) = self.wavevector(i);
            let shell = (((k1 * k1 + k2 * k2) as f64).sqrt().round()) as usize;
            let w = T::of_usize(self.weight(i));
            shells[shell] = shells[shell] + area * w * (self.u1[i].norm_sqr() + self.u2[i].norm_sqr());
        }
        shells
    }
}

impl<T: Scalar> SpectralField<T> for VectorField2D<T> {
    fn dealias_23(&self) -> Self {
        let cutoff = self.dealias_cutoff() as i64;
        self.map_modes(
            |(k1, k2), a, b| {
                if k1.abs() > cutoff || k2.abs() > cutoff {
                    (Complex::zero(), Complex::zero())
                } else {
                    (a, b)
                }
            },
        )
    }

    fn project(&self, p: &ModeProjection) -> Self {
        self.map_modes(|k, a, b| if p.keeps_2d(k) { (a, b) } else { (Complex::zero(), Complex::zero()) })
    }

    fn project_complement(&self, p: &ModeProjection) -> Self {
        self.map_modes(|k, a, b| if p.keeps_2d(k) { (Complex::zero(), Complex::zero()) } else { (a, b) })
    }

    fn l2_norm_sq(&self) -> T {
        let sum = (0..self.u1.len()).fold(T::zero(), |acc, i| {
            acc + T::of_usize(self.weight(i)) * (self.u1[i].norm_sqr() + self.u2[i].norm_sqr())
        });
        T::TAU() * T::TAU() * sum
    }

    fn l2_norm_split(&self, p: &ModeProjection) -> (T, T) {
        let (mut low, mut high) = (T::zero(), T::zero());
        for i in 0..self.u1.len() {
            let e = T::of_usize(self.weight(i)) * (self.u1[i].norm_sqr() + self.u2[i].norm_sqr());
            if p.keeps_2d(self.wavevector(i)) {
                low = low + e;
            } else {
                high = high + e;
            }
        }
        let area = T::TAU() * T::TAU();
        ((area * low).sqrt(), (area * high).sqrt())
    }

    fn difference(&self, other: &Self) -> Self {
        self.sub(other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_mode_keeps_the_zero_row_conjugate_symmetric() {
        let mut f = VectorField2D::<f64>::zeros(16).unwrap();
        let c = (Complex::new(1.0, 2.0), Complex::new(-0.5, 0.25));
        f.set_mode((3, 0), c);
        assert_eq!(f.coeff((3, 0)), c);
        assert_eq!(f.coeff((-3, 0)), (c.0.conj(), c.1.conj()));
        f.set_mode((2, -5), c);
        assert_eq!(f.coeff((2, -5)), c);
        assert_eq!(f.coeff((-2, 5)), (c.0.conj(), c.1.conj()));
    }

    #[test]
    fn physical_round_trip() {
        let n = 16;
        let tr = Transform2D::<f64>::new(n);
        let h = std::f64::consts::TAU / n as f64;
        let mut a = vec![0.0; n * n];
        let mut b = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (i as f64 * h, j as f64 * h);
                a[i * n + j] = (2.0 * x).sin() * (3.0 * y).cos() + 0.1;
                b[i * n + j] = (x - y).cos();
            }
        }
        let f = VectorField2D::from_physical(&tr, &a, &b).unwrap();
        assert!((f.coeff((0, 0)).0.re - 0.1).abs() < 1e-15);
        assert!((f.coeff((1, -1)).1.re - 0.5).abs() < 1e-15);
        let (ra, rb) = f.to_physical(&tr);
        for k in 0..n * n {
            assert!((ra[k] - a[k]).abs() < 1e-14);
            assert!((rb[k] - b[k]).abs() < 1e-14);
        }
    }
}
