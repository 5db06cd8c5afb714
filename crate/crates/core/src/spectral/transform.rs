//! FFT plans for the periodic grids.
//!
//! All forward transforms are normalized by the number of grid points so that
//! the stored coefficients are the expansion coefficients of
//! `f(x) = Σ_k c_k exp(i q_k x)`; inverse transforms are unnormalized.

use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::{Complex, Scalar};

/// Real <-> half-spectrum transform of length `n`.
#[derive(Clone)]
pub struct Transform1D<T: Scalar> {
    n: usize,
    r2c: Arc<dyn RealToComplex<T>>,
    c2r: Arc<dyn ComplexToReal<T>>,
}

impl<T: Scalar> fmt::Debug for Transform1D<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Transform1D").field("n", &self.n).finish()
    }
}

impl<T: Scalar> Transform1D<T> {
    pub fn new(n: usize) -> Self {
        let mut planner = RealFftPlanner::<T>::new();
        Transform1D { n, r2c: planner.plan_fft_forward(n), c2r: planner.plan_fft_inverse(n) }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Physical samples to the `n/2 + 1` normalized coefficients.
    pub fn forward(&self, mut samples: Vec<T>) -> Vec<Complex<T>> {
        assert_eq!(samples.len(), self.n, "sample count does not match the transform length");
        let mut out = self.r2c.make_output_vec();
        self.r2c.process(&mut samples, &mut out).expect("buffer lengths are fixed by the plan");
        let scale = T::one() / T::of_usize(self.n);
        for c in &mut out {
            *c = *c * scale;
        }
        out
    }

    /// Normalized half spectrum back to `n` physical samples.
    ///
    /// The imaginary parts of the mean and Nyquist coefficients are ignored.
    pub fn inverse(&self, coeffs: &[Complex<T>]) -> Vec<T> {
        assert_eq!(coeffs.len(), self.n / 2 + 1, "half spectrum length mismatch");
        let mut input = coeffs.to_vec();
        input[0].im = T::zero();
        if let Some(last) = input.last_mut() {
            last.im = T::zero();
        }
        let mut out = self.c2r.make_output_vec();
        self.c2r.process(&mut input, &mut out).expect("buffer lengths are fixed by the plan");
        out
    }
}

/// Real <-> half-plane spectrum transform on an `n x n` grid.
///
/// Physical grids are row-major with the second coordinate fastest:
/// `grid[i1 * n + i2] = f(2π i1 / n, 2π i2 / n)`. Spectra are stored as
/// `n` rows (first wavenumber, FFT order) of `n/2 + 1` non-negative second
/// wavenumbers.
#[derive(Clone)]
pub struct Transform2D<T: Scalar> {
    n: usize,
    rows: Transform1D<T>,
    col_fwd: Arc<dyn Fft<T>>,
    col_inv: Arc<dyn Fft<T>>,
}

impl<T: Scalar> fmt::Debug for Transform2D<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Transform2D").field("n", &self.n).finish()
    }
}

impl<T: Scalar> Transform2D<T> {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::<T>::new();
        Transform2D {
            n,
            rows: Transform1D::new(n),
            col_fwd: planner.plan_fft_forward(n),
            col_inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spectrum_len(&self) -> usize {
        self.n * (self.n / 2 + 1)
    }

    pub fn forward(&self, grid: &[T]) -> Vec<Complex<T>> {
        let n = self.n;
        let h = n / 2 + 1;
        assert_eq!(grid.len(), n * n);
        let mut spec = vec![Complex::zero(); n * h];
        let mut out = self.rows.r2c.make_output_vec();
        let mut row = vec![T::zero(); n];
        for i1 in 0..n {
            row.copy_from_slice(&grid[i1 * n..(i1 + 1) * n]);
            self.rows.r2c.process(&mut row, &mut out).expect("fixed plan lengths");
            spec[i1 * h..(i1 + 1) * h].copy_from_slice(&out);
        }
        let mut col = vec![Complex::zero(); n];
        let scale = T::one() / T::of_usize(n * n);
        for k2 in 0..h {
            for i1 in 0..n {
                col[i1] = spec[i1 * h + k2];
            }
            self.col_fwd.process(&mut col);
            for k1 in 0..n {
                spec[k1 * h + k2] = col[k1] * scale;
            }
        }
        spec
    }

    pub fn inverse(&self, spec: &[Complex<T>]) -> Vec<T> {
        let n = self.n;
        let h = n / 2 + 1;
        assert_eq!(spec.len(), n * h);
        let mut work = vec![Complex::zero(); n * h];
        let mut col = vec![Complex::zero(); n];
        for k2 in 0..h {
            for k1 in 0..n {
                col[k1] = spec[k1 * h + k2];
            }
            self.col_inv.process(&mut col);
            for i1 in 0..n {
                work[i1 * h + k2] = col[i1];
            }
        }
        let mut grid = vec![T::zero(); n * n];
        let mut out = self.rows.c2r.make_output_vec();
        for i1 in 0..n {
            let row = &mut work[i1 * h..(i1 + 1) * h];
            row[0].im = T::zero();
            row[h - 1].im = T::zero();
            self.rows.c2r.process(row, &mut out).expect("fixed plan lengths");
            grid[i1 * n..(i1 + 1) * n].copy_from_slice(&out);
        }
        grid
    }
}

/// Full complex transform on an `n x n` grid, used for the small reduced
/// grids of lattice-supported fields where half-plane bookkeeping does not pay.
#[derive(Clone)]
pub struct ComplexGrid2D<T: Scalar> {
    n: usize,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Scalar> fmt::Debug for ComplexGrid2D<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ComplexGrid2D").field("n", &self.n).finish()
    }
}

impl<T: Scalar> ComplexGrid2D<T> {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::<T>::new();
        ComplexGrid2D { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn process_2d(&self, data: &mut [Complex<T>], plan: &Arc<dyn Fft<T>>) {
        let n = self.n;
        for row in data.chunks_exact_mut(n) {
            plan.process(row);
        }
        let mut col = vec![Complex::zero(); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = data[i * n + j];
            }
            plan.process(&mut col);
            for i in 0..n {
                data[i * n + j] = col[i];
            }
        }
    }

    /// Normalized forward transform in place.
    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.process_2d(data, &self.fwd);
        let scale = T::one() / T::of_usize(self.n * self.n);
        for c in data.iter_mut() {
            *c = *c * scale;
        }
    }

    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.process_2d(data, &self.inv);
    }
}
