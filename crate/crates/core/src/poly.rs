//! Bivariate polynomials of total degree at most four in scaled,
//! centroid-shifted local coordinates `xi = (x - c) / s`.

use crate::geometry::{Point, Sym2};
use crate::scalar::{from_usize, Real};

pub const MAX_DEGREE: usize = 4;
pub const N_COEFFS: usize = 15;

/// Position of the monomial `xi^a eta^b` in the coefficient vector.
#[inline]
pub const fn index(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

/// Exponents of the monomial at position `k`.
pub const fn exponents(k: usize) -> (usize, usize) {
    let mut d = 0;
    while (d + 1) * (d + 2) / 2 <= k {
        d += 1;
    }
    let b = k - d * (d + 1) / 2;
    (d - b, b)
}

/// Number of monomials of total degree at most `d`.
pub const fn dim(d: usize) -> usize {
    (d + 1) * (d + 2) / 2
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalPoly<T> {
    pub center: Point<T>,
    pub scale: T,
    pub coeffs: [T; N_COEFFS],
}

impl<T: Real> LocalPoly<T> {
    pub fn zero(center: Point<T>, scale: T) -> Self {
        LocalPoly {
            center,
            scale,
            coeffs: [T::zero(); N_COEFFS],
        }
    }

    pub fn constant(center: Point<T>, scale: T, c: T) -> Self {
        let mut p = Self::zero(center, scale);
        p.coeffs[0] = c;
        p
    }

    /// The scaled monomial `xi^a eta^b`.
    pub fn local_monomial(center: Point<T>, scale: T, a: usize, b: usize) -> Self {
        let mut p = Self::zero(center, scale);
        p.coeffs[index(a, b)] = T::one();
        p
    }

    /// The physical monomial `(x - c_x)^a (y - c_y)^b`.
    pub fn shifted_monomial(center: Point<T>, scale: T, a: usize, b: usize) -> Self {
        let mut p = Self::zero(center, scale);
        p.coeffs[index(a, b)] = scale.powi((a + b) as i32);
        p
    }

    /// Affine polynomial `c0 + g . (x - center)`.
    pub fn affine(center: Point<T>, scale: T, c0: T, g: Point<T>) -> Self {
        let mut p = Self::zero(center, scale);
        p.coeffs[0] = c0;
        p.coeffs[1] = g[0] * scale;
        p.coeffs[2] = g[1] * scale;
        p
    }

    pub fn same_frame(&self, o: &Self) -> bool {
        self.center == o.center && self.scale == o.scale
    }

    pub fn local_coords(&self, p: Point<T>) -> Point<T> {
        [
            (p[0] - self.center[0]) / self.scale,
            (p[1] - self.center[1]) / self.scale,
        ]
    }

    pub fn eval(&self, p: Point<T>) -> T {
        let [x, y] = self.local_coords(p);
        let mut xp = [T::one(); MAX_DEGREE + 1];
        let mut yp = [T::one(); MAX_DEGREE + 1];
        for k in 1..=MAX_DEGREE {
            xp[k] = xp[k - 1] * x;
            yp[k] = yp[k - 1] * y;
        }
        let mut s = T::zero();
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c != T::zero() {
                let (a, b) = exponents(k);
                s += c * xp[a] * yp[b];
            }
        }
        s
    }

    /// Physical partial derivative `d^(dx+dy) / dx^dx dy^dy`.
    pub fn derivative(&self, dx: usize, dy: usize) -> Self {
        let mut out = Self::zero(self.center, self.scale);
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == T::zero() {
                continue;
            }
            let (a, b) = exponents(k);
            if a < dx || b < dy {
                continue;
            }
            let mut f = c;
            for i in 0..dx {
                f *= from_usize::<T>(a - i);
            }
            for j in 0..dy {
                f *= from_usize::<T>(b - j);
            }
            out.coeffs[index(a - dx, b - dy)] += f;
        }
        let s = self.scale.powi((dx + dy) as i32);
        for c in out.coeffs.iter_mut() {
            *c /= s;
        }
        out
    }

    pub fn derivative_at(&self, p: Point<T>, dx: usize, dy: usize) -> T {
        self.derivative(dx, dy).eval(p)
    }

    pub fn gradient_at(&self, p: Point<T>) -> Point<T> {
        [self.derivative_at(p, 1, 0), self.derivative_at(p, 0, 1)]
    }

    pub fn hessian_at(&self, p: Point<T>) -> Sym2<T> {
        Sym2::new(
            self.derivative_at(p, 2, 0),
            self.derivative_at(p, 1, 1),
            self.derivative_at(p, 0, 2),
        )
    }

    /// Highest total degree carrying a nonzero coefficient.
    pub fn degree(&self) -> Option<usize> {
        (0..N_COEFFS)
            .rev()
            .find(|&k| self.coeffs[k] != T::zero())
            .map(|k| {
                let (a, b) = exponents(k);
                a + b
            })
    }

    /// Largest coefficient magnitude among monomials of total degree `d`.
    pub fn max_coeff_of_degree(&self, d: usize) -> T {
        (dim(d) - d - 1..dim(d)).fold(T::zero(), |m, k| m.max(self.coeffs[k].abs()))
    }

    pub fn scaled(&self, a: T) -> Self {
        let mut out = *self;
        out.coeffs.iter_mut().for_each(|c| *c *= a);
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        debug_assert!(self.same_frame(o));
        let mut out = *self;
        for (c, &d) in out.coeffs.iter_mut().zip(&o.coeffs) {
            *c += d;
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scaled(-T::one()))
    }

    /// `self + a * o`.
    pub fn axpy(&self, a: T, o: &Self) -> Self {
        self.add(&o.scaled(a))
    }

    /// Product; panics if the result would exceed degree four.
    pub fn mul(&self, o: &Self) -> Self {
        debug_assert!(self.same_frame(o));
        let mut out = Self::zero(self.center, self.scale);
        for (i, &ci) in self.coeffs.iter().enumerate() {
            if ci == T::zero() {
                continue;
            }
            let (a1, b1) = exponents(i);
            for (j, &cj) in o.coeffs.iter().enumerate() {
                if cj == T::zero() {
                    continue;
                }
                let (a2, b2) = exponents(j);
                assert!(
                    a1 + a2 + b1 + b2 <= MAX_DEGREE,
                    "polynomial product exceeds degree {MAX_DEGREE}"
                );
                out.coeffs[index(a1 + a2, b1 + b2)] += ci * cj;
            }
        }
        out
    }
}
