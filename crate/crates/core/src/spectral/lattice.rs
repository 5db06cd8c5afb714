//! Integer lattices spanned by the Fourier support of a field.
//!
//! Quadratic products of fields supported on a lattice stay on that lattice.
//! Evaluating them on the lattice's own reduced grid gives the same dealiased
//! coefficients as the full grid in exact arithmetic, and keeps every
//! off-lattice coefficient exactly zero in floating point.

/// `gcd(|a|, |b|)`, with `gcd(0, 0) = 0`.
pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Returns `(g, s, t)` with `s*a + t*b = g = gcd(a, b) >= 0`.
pub fn extended_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i64, 0i64);
    let (mut old_t, mut t) = (0i64, 1i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Spacing of the 1D lattice generated by the nonzero wavenumbers, `None` for
/// an empty support.
pub fn support_spacing<I: IntoIterator<Item = i64>>(support: I) -> Option<i64> {
    let g = support.into_iter().fold(0, gcd);
    (g > 0).then_some(g)
}

/// Rank-2 lattice in Hermite normal form with basis columns `(a, y)` and `(0, d)`.
///
/// Degenerate directions are completed with unit vectors, so the basis always
/// spans a (super)lattice of the generating set and is nonsingular.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lattice2D {
    a: i64,
    y: i64,
    d: i64,
}

impl Lattice2D {
    /// Lattice generated by `support`; `None` if the support is empty or only
    /// contains the zero vector.
    pub fn from_support<I: IntoIterator<Item = (i64, i64)>>(support: I) -> Option<Self> {
        let (mut a, mut y, mut d) = (0i64, 0i64, 0i64);
        let mut any = false;
        for (p, q) in support {
            if p == 0 && q == 0 {
                continue;
            }
            any = true;
            if p == 0 {
                d = gcd(d, q);
                continue;
            }
            if a == 0 {
                // first vector with a nonzero first component becomes the pivot
                a = p;
                y = q;
                if a < 0 {
                    a = -a;
                    y = -y;
                }
                continue;
            }
            let (g, s, t) = extended_gcd(a, p);
            let w2 = (p / g) * y - (a / g) * q;
            y = s * y + t * q;
            a = g;
            d = gcd(d, w2);
        }
        if !any {
            return None;
        }
        if d > 0 {
            y = y.rem_euclid(d);
        }
        let (a, y) = if a == 0 { (1, 0) } else { (a, y) };
        let d = if d == 0 { 1 } else { d };
        Some(Lattice2D { a, y, d })
    }

    pub fn is_trivial(&self) -> bool {
        self.a == 1 && self.d == 1
    }

    /// Wavevector of reduced coordinates `m`.
    pub fn to_wavevector(&self, m: (i64, i64)) -> (i64, i64) {
        (m.0 * self.a, m.0 * self.y + m.1 * self.d)
    }

    /// Reduced coordinates of `k`, or `None` if `k` is not a lattice point.
    pub fn to_reduced(&self, k: (i64, i64)) -> Option<(i64, i64)> {
        if k.0 % self.a != 0 {
            return None;
        }
        let m0 = k.0 / self.a;
        let rest = k.1 - m0 * self.y;
        if rest % self.d != 0 {
            return None;
        }
        Some((m0, rest / self.d))
    }

    pub fn contains(&self, k: (i64, i64)) -> bool {
        self.to_reduced(k).is_some()
    }
}

/// Smallest power of two that resolves all pairwise sums of reduced modes
/// with `|m| <= max_mode` without aliasing.
pub fn reduced_grid_len(max_mode: usize) -> usize {
    (4 * max_mode + 1).next_power_of_two().max(4)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gcd_basics() {
        assert_eq!(gcd(0, 0), 0);
        assert_eq!(gcd(12, -18), 6);
        assert_eq!(support_spacing([6, 12, 18]), Some(6));
        assert_eq!(support_spacing([1, 100]), Some(1));
        assert_eq!(support_spacing(std::iter::empty()), None);
        let (g, s, t) = extended_gcd(-15, 35);
        assert_eq!(g, 5);
        assert_eq!(s * -15 + t * 35, 5);
    }

    #[test]
    fn taylor_green_support_is_a_checkerboard() {
        let lat = Lattice2D::from_support([(15, 15), (-15, 15), (15, -15), (-15, -15)]).unwrap();
        assert!(lat.contains((30, 0)));
        assert!(lat.contains((0, 30)));
        assert!(lat.contains((30, 30)));
        assert!(!lat.contains((15, 0)));
        assert!(!lat.contains((0, 15)));
        for m in [(1, 0), (0, 1), (-2, 3)] {
            assert_eq!(lat.to_reduced(lat.to_wavevector(m)), Some(m));
        }
    }

    #[test]
    fn degenerate_supports_are_completed() {
        let lat = Lattice2D::from_support([(0, 6), (0, -12)]).unwrap();
        assert!(lat.contains((1, 0)));
        assert!(lat.contains((0, 6)));
        assert!(!lat.contains((0, 3)));
        let lat = Lattice2D::from_support([(4, 0)]).unwrap();
        assert!(lat.contains((0, 1)));
        assert!(!lat.contains((2, 0)));
        assert!(Lattice2D::from_support([(0, 0)]).is_none());
        assert!(Lattice2D::from_support([(1, 0), (0, 1)]).unwrap().is_trivial());
    }

    #[test]
    fn generated_lattice_contains_every_generator_and_integer_combination() {
        let gens = [(6, 4), (9, -2), (3, 8)];
        let lat = Lattice2D::from_support(gens).unwrap();
        for &g in &gens {
            assert!(lat.contains(g), "{g:?}");
        }
        assert!(lat.contains((6 + 9 - 3, 4 - 2 - 8)));
        // lattice index = gcd of the 2x2 minors (-48, 36, 78)
        assert_eq!(lat.a * lat.d, 6);
    }
}
