//! Closed-form scalar fields with partial derivatives.

use crate::geometry::{Point, Sym2};
use crate::poly::LocalPoly;
use crate::scalar::{from_usize, Real};

/// A smooth scalar function with partial derivatives of any order needed.
pub trait AnalyticField<T: Real> {
    /// `d^(dx+dy) u / dx^dx dy^dy` at `p`.
    fn derivative(&self, p: Point<T>, dx: usize, dy: usize) -> T;

    fn value(&self, p: Point<T>) -> T {
        self.derivative(p, 0, 0)
    }

    fn gradient(&self, p: Point<T>) -> Point<T> {
        [self.derivative(p, 1, 0), self.derivative(p, 0, 1)]
    }

    fn hessian(&self, p: Point<T>) -> Sym2<T> {
        Sym2::new(
            self.derivative(p, 2, 0),
            self.derivative(p, 1, 1),
            self.derivative(p, 0, 2),
        )
    }

    /// `(u_xxx, u_xxy, u_xyy, u_yyy)`.
    fn third(&self, p: Point<T>) -> [T; 4] {
        [
            self.derivative(p, 3, 0),
            self.derivative(p, 2, 1),
            self.derivative(p, 1, 2),
            self.derivative(p, 0, 3),
        ]
    }
}

impl<T: Real, F: AnalyticField<T> + ?Sized> AnalyticField<T> for &F {
    fn derivative(&self, p: Point<T>, dx: usize, dy: usize) -> T {
        (**self).derivative(p, dx, dy)
    }
}

impl<T: Real> AnalyticField<T> for LocalPoly<T> {
    fn derivative(&self, p: Point<T>, dx: usize, dy: usize) -> T {
        self.derivative_at(p, dx, dy)
    }
}

/// `amplitude * sin(m pi x) * sin(n pi y)`.
#[derive(Clone, Copy, Debug)]
pub struct SinProduct<T> {
    pub amplitude: T,
    pub m: usize,
    pub n: usize,
}

impl<T: Real> SinProduct<T> {
    pub fn new(amplitude: T, m: usize, n: usize) -> Self {
        SinProduct { amplitude, m, n }
    }

    /// Eigenvalue `((m^2 + n^2) pi^2)^2` of the simply supported unit square.
    pub fn biharmonic_eigenvalue(&self) -> T {
        let k = from_usize::<T>(self.m * self.m + self.n * self.n) * T::PI() * T::PI();
        k * k
    }

    pub fn scaled(&self, a: T) -> Self {
        SinProduct::new(self.amplitude * a, self.m, self.n)
    }
}

fn sin_derivative<T: Real>(k: T, x: T, order: usize) -> T {
    // d^j/dx^j sin(kx) = k^j sin(kx + j pi/2)
    let s = match order % 4 {
        0 => (k * x).sin(),
        1 => (k * x).cos(),
        2 => -(k * x).sin(),
        _ => -(k * x).cos(),
    };
    k.powi(order as i32) * s
}

impl<T: Real> AnalyticField<T> for SinProduct<T> {
    fn derivative(&self, p: Point<T>, dx: usize, dy: usize) -> T {
        let kx = from_usize::<T>(self.m) * T::PI();
        let ky = from_usize::<T>(self.n) * T::PI();
        self.amplitude * sin_derivative(kx, p[0], dx) * sin_derivative(ky, p[1], dy)
    }
}

/// Polynomial in global coordinates as a sparse list of `(coefficient, a, b)`
/// for the terms `coefficient * x^a * y^b`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial<T> {
    pub terms: Vec<(T, usize, usize)>,
}

impl<T: Real> Polynomial<T> {
    pub fn new(terms: Vec<(T, usize, usize)>) -> Self {
        Polynomial { terms }.simplified()
    }

    /// `p(x) q(y)` from ascending coefficient lists.
    pub fn separable(px: &[T], qy: &[T]) -> Self {
        let mut terms = Vec::new();
        for (a, &c) in px.iter().enumerate() {
            for (b, &d) in qy.iter().enumerate() {
                if c * d != T::zero() {
                    terms.push((c * d, a, b));
                }
            }
        }
        Polynomial::new(terms)
    }

    fn simplified(mut self) -> Self {
        self.terms.sort_by_key(|&(_, a, b)| (a + b, b));
        let mut out: Vec<(T, usize, usize)> = Vec::with_capacity(self.terms.len());
        for (c, a, b) in self.terms {
            match out.last_mut() {
                Some(last) if last.1 == a && last.2 == b => last.0 += c,
                _ => out.push((c, a, b)),
            }
        }
        out.retain(|t| t.0 != T::zero());
        Polynomial { terms: out }
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|&(_, a, b)| a + b).max().unwrap_or(0)
    }

    pub fn differentiate(&self, dx: usize, dy: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|&&(_, a, b)| a >= dx && b >= dy)
            .map(|&(c, a, b)| {
                let mut f = c;
                for i in 0..dx {
                    f *= from_usize::<T>(a - i);
                }
                for j in 0..dy {
                    f *= from_usize::<T>(b - j);
                }
                (f, a - dx, b - dy)
            })
            .collect();
        Polynomial::new(terms)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&o.terms);
        Polynomial::new(terms)
    }

    pub fn scaled(&self, s: T) -> Self {
        Polynomial::new(self.terms.iter().map(|&(c, a, b)| (s * c, a, b)).collect())
    }

    /// `u_xxxx + 2 u_xxyy + u_yyyy`.
    pub fn bilaplacian(&self) -> Self {
        self.differentiate(4, 0)
            .add(&self.differentiate(2, 2).scaled(T::one() + T::one()))
            .add(&self.differentiate(0, 4))
    }
}

impl<T: Real> AnalyticField<T> for Polynomial<T> {
    fn derivative(&self, p: Point<T>, dx: usize, dy: usize) -> T {
        let mut s = T::zero();
        for &(c, a, b) in &self.terms {
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
            s += f * p[0].powi((a - dx) as i32) * p[1].powi((b - dy) as i32);
        }
        s
    }
}

/// Adapts a closure `(p, dx, dy) -> value` to an [`AnalyticField`].
pub struct FnField<F>(pub F);

impl<T: Real, F: Fn(Point<T>, usize, usize) -> T> AnalyticField<T> for FnField<F> {
    fn derivative(&self, p: Point<T>, dx: usize, dy: usize) -> T {
        (self.0)(p, dx, dy)
    }
}
