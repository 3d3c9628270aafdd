//! Quadrature on triangles (barycentric points, weights summing to one) and
//! on edges (Gauss-Legendre on `[0, 1]`).

use crate::geometry::{Point, TriangleGeometry};
use crate::scalar::{from_usize, lit, Real};

#[derive(Clone, Debug)]
pub struct TriangleRule<T> {
    pub points: Vec<[T; 3]>,
    pub weights: Vec<T>,
    pub degree: usize,
}

impl<T: Real> TriangleRule<T> {
    pub fn centroid() -> Self {
        let t = lit::<T>(1.0 / 3.0);
        TriangleRule {
            points: vec![[t, t, t]],
            weights: vec![T::one()],
            degree: 1,
        }
    }

    /// Edge-midpoint rule, exact for quadratics.
    pub fn edge_midpoints() -> Self {
        let h = lit::<T>(0.5);
        let z = T::zero();
        let w = lit::<T>(1.0 / 3.0);
        TriangleRule {
            points: vec![[z, h, h], [h, z, h], [h, h, z]],
            weights: vec![w, w, w],
            degree: 2,
        }
    }

    /// Six-point symmetric rule exact for quartics.
    pub fn dunavant4() -> Self {
        let s10 = lit::<T>(10.0).sqrt();
        let r = (lit::<T>(38.0) - lit::<T>(44.0) * lit::<T>(0.4).sqrt()).sqrt();
        let a1 = (lit::<T>(8.0) - s10 + r) / lit(18.0);
        let a2 = (lit::<T>(8.0) - s10 - r) / lit(18.0);
        let q = (lit::<T>(213125.0) - lit::<T>(53320.0) * s10).sqrt();
        let w1 = (lit::<T>(620.0) + q) / lit(3720.0);
        let w2 = (lit::<T>(620.0) - q) / lit(3720.0);
        let mut points = Vec::with_capacity(6);
        let mut weights = Vec::with_capacity(6);
        for (a, w) in [(a1, w1), (a2, w2)] {
            let b = T::one() - a - a;
            points.extend([[a, a, b], [a, b, a], [b, a, a]]);
            weights.extend([w, w, w]);
        }
        TriangleRule {
            points,
            weights,
            degree: 4,
        }
    }

    /// Conical-product Gauss rule exact for polynomials of total degree `degree`.
    pub fn collapsed(degree: usize) -> Self {
        let nv = degree / 2 + 1;
        let nu = nv + 1;
        let (xu, wu) = gauss_legendre::<T>(nu);
        let (xv, wv) = gauss_legendre::<T>(nv);
        let mut points = Vec::with_capacity(nu * nv);
        let mut weights = Vec::with_capacity(nu * nv);
        let two = lit::<T>(2.0);
        for (&u, &a) in xu.iter().zip(&wu) {
            for (&v, &b) in xv.iter().zip(&wv) {
                let x = u;
                let y = v * (T::one() - u);
                points.push([T::one() - x - y, x, y]);
                weights.push(two * a * b * (T::one() - u));
            }
        }
        TriangleRule {
            points,
            weights,
            degree,
        }
    }

    /// Cheapest available rule exact for `degree`.
    pub fn of_degree(degree: usize) -> Self {
        match degree {
            0 | 1 => Self::centroid(),
            2 => Self::edge_midpoints(),
            3 | 4 => Self::dunavant4(),
            d => Self::collapsed(d),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Integral of `f` over the triangle.
    pub fn integrate(&self, geom: &TriangleGeometry<T>, mut f: impl FnMut(Point<T>) -> T) -> T {
        let mut s = T::zero();
        for (b, &w) in self.points.iter().zip(&self.weights) {
            s += w * f(geom.point(*b));
        }
        s * geom.area
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1);
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let nf = from_usize::<T>(n);
    let half = lit::<T>(0.5);
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n
        let mut z = (T::PI() * (from_usize::<T>(i) + lit(0.75)) / (nf + half)).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= T::epsilon() * lit(4.0) {
                let (_, d) = legendre(n, z);
                dp = d;
                break;
            }
        }
        let wt = lit::<T>(2.0) / ((T::one() - z * z) * dp * dp);
        // map [-1, 1] to [0, 1]
        x[i] = half * (T::one() - z);
        x[n - 1 - i] = half * (T::one() + z);
        w[i] = half * wt;
        w[n - 1 - i] = half * wt;
    }
    (x, w)
}

fn legendre<T: Real>(n: usize, z: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = z;
    for k in 2..=n {
        let kf = from_usize::<T>(k);
        let p2 = ((lit::<T>(2.0) * kf - T::one()) * z * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (T::one(), T::zero());
    }
    let nf = from_usize::<T>(n);
    let d = nf * (z * p1 - p0) / (z * z - T::one());
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    // int over reference triangle of x^a y^b = a! b! / (a + b + 2)!
    fn exact(a: u32, b: u32) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    fn check(rule: &TriangleRule<f64>) {
        let g = TriangleGeometry::new([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        for d in 0..=rule.degree as u32 {
            for a in 0..=d {
                let b = d - a;
                let q = rule.integrate(&g, |p| p[0].powi(a as i32) * p[1].powi(b as i32));
                let e = exact(a, b);
                assert!(
                    ((q - e) / e).abs() < 1e-14,
                    "degree {} monomial ({a},{b}): {q} vs {e}",
                    rule.degree
                );
            }
        }
    }

    #[test]
    fn rules_are_exact_to_stated_degree() {
        check(&TriangleRule::centroid());
        check(&TriangleRule::edge_midpoints());
        check(&TriangleRule::dunavant4());
        for d in 5..=14 {
            check(&TriangleRule::collapsed(d));
        }
    }

    #[test]
    fn dunavant_is_not_exact_for_degree_five() {
        let g = TriangleGeometry::new([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let q = TriangleRule::<f64>::dunavant4().integrate(&g, |p| p[0].powi(5));
        assert!((q - exact(5, 0)).abs() > 1e-8);
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in 1..=8 {
            let (x, w) = gauss_legendre::<f64>(n);
            for k in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w): (&f64, &f64)| w * x.powi(k as i32)).sum();
                assert!((q - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "n={n} k={k}");
            }
        }
    }
}
