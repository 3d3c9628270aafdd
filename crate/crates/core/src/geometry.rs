use std::ops::{Add, Sub};

use crate::scalar::{lit, Real};

pub type Point<T> = [T; 2];

#[inline]
pub fn sub<T: Real>(a: Point<T>, b: Point<T>) -> Point<T> {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn add<T: Real>(a: Point<T>, b: Point<T>) -> Point<T> {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn scale<T: Real>(s: T, a: Point<T>) -> Point<T> {
    [s * a[0], s * a[1]]
}

#[inline]
pub fn dot<T: Real>(a: Point<T>, b: Point<T>) -> T {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross<T: Real>(a: Point<T>, b: Point<T>) -> T {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm<T: Real>(a: Point<T>) -> T {
    a[0].hypot(a[1])
}

/// Counterclockwise rotation by 90 degrees.
#[inline]
pub fn rot_ccw<T: Real>(a: Point<T>) -> Point<T> {
    [-a[1], a[0]]
}

/// Clockwise rotation by 90 degrees.
#[inline]
pub fn rot_cw<T: Real>(a: Point<T>) -> Point<T> {
    [a[1], -a[0]]
}

/// Symmetric 2x2 matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Sym2<T> {
    pub xx: T,
    pub xy: T,
    pub yy: T,
}

impl<T: Real> Sym2<T> {
    pub fn new(xx: T, xy: T, yy: T) -> Self {
        Sym2 { xx, xy, yy }
    }

    pub fn zero() -> Self {
        Sym2::new(T::zero(), T::zero(), T::zero())
    }

    pub fn identity() -> Self {
        Sym2::new(T::one(), T::zero(), T::one())
    }

    /// Symmetric outer product `(a b^T + b a^T) / 2`.
    pub fn sym_outer(a: Point<T>, b: Point<T>) -> Self {
        let half = lit::<T>(0.5);
        Sym2::new(a[0] * b[0], half * (a[0] * b[1] + a[1] * b[0]), a[1] * b[1])
    }

    /// Frobenius inner product.
    pub fn ddot(&self, o: &Self) -> T {
        self.xx * o.xx + lit::<T>(2.0) * self.xy * o.xy + self.yy * o.yy
    }

    pub fn norm_sq(&self) -> T {
        self.ddot(self)
    }

    /// `a^T S b`.
    pub fn bilinear(&self, a: Point<T>, b: Point<T>) -> T {
        a[0] * (self.xx * b[0] + self.xy * b[1]) + a[1] * (self.xy * b[0] + self.yy * b[1])
    }

    pub fn apply(&self, a: Point<T>) -> Point<T> {
        [self.xx * a[0] + self.xy * a[1], self.xy * a[0] + self.yy * a[1]]
    }

    pub fn max_abs(&self) -> T {
        self.xx.abs().max(self.xy.abs()).max(self.yy.abs())
    }

    pub fn as_array(&self) -> [T; 3] {
        [self.xx, self.xy, self.yy]
    }

    /// Entry `(i, j)` with `i, j` in `{0, 1}`.
    pub fn get(&self, i: usize, j: usize) -> T {
        match (i, j) {
            (0, 0) => self.xx,
            (1, 1) => self.yy,
            _ => self.xy,
        }
    }
}

impl<T: Real> Add for Sym2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Sym2::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }
}

impl<T: Real> Sub for Sym2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Sym2::new(self.xx - o.xx, self.xy - o.xy, self.yy - o.yy)
    }
}

impl<T: Real> Sym2<T> {
    pub fn scaled(&self, a: T) -> Self {
        Sym2::new(a * self.xx, a * self.xy, a * self.yy)
    }
}

/// Derived quantities of a counterclockwise triangle.
///
/// Local edge `i` is opposite local vertex `i` and runs from vertex `i+1`
/// to vertex `i+2` (indices modulo 3).
#[derive(Clone, Debug)]
pub struct TriangleGeometry<T> {
    pub vertices: [Point<T>; 3],
    pub area: T,
    pub centroid: Point<T>,
    pub edge_len: [T; 3],
    pub tangent: [Point<T>; 3],
    pub normal: [Point<T>; 3],
    pub grad_bary: [Point<T>; 3],
}

impl<T: Real> TriangleGeometry<T> {
    pub fn new(vertices: [Point<T>; 3]) -> Self {
        let [a, b, c] = vertices;
        let area = lit::<T>(0.5) * cross(sub(b, a), sub(c, a));
        let third = lit::<T>(1.0 / 3.0);
        let centroid = [
            third * (a[0] + b[0] + c[0]),
            third * (a[1] + b[1] + c[1]),
        ];
        let mut edge_len = [T::zero(); 3];
        let mut tangent = [[T::zero(); 2]; 3];
        let mut normal = [[T::zero(); 2]; 3];
        let mut grad_bary = [[T::zero(); 2]; 3];
        for i in 0..3 {
            let d = sub(vertices[(i + 2) % 3], vertices[(i + 1) % 3]);
            let l = norm(d);
            edge_len[i] = l;
            tangent[i] = scale(T::one() / l, d);
            normal[i] = rot_cw(tangent[i]);
            // grad psi_i = -n_i / d_i with d_i = 2|K| / |e_i|
            grad_bary[i] = scale(-l / (lit::<T>(2.0) * area), normal[i]);
        }
        TriangleGeometry {
            vertices,
            area,
            centroid,
            edge_len,
            tangent,
            normal,
            grad_bary,
        }
    }

    pub fn diameter(&self) -> T {
        self.edge_len[0].max(self.edge_len[1]).max(self.edge_len[2])
    }

    /// Distance from vertex `i` to the line through edge `i`.
    pub fn height(&self, i: usize) -> T {
        lit::<T>(2.0) * self.area / self.edge_len[i]
    }

    /// Sine of the interior angle at vertex `i`.
    pub fn sin_angle(&self, i: usize) -> T {
        lit::<T>(2.0) * self.area / (self.edge_len[(i + 1) % 3] * self.edge_len[(i + 2) % 3])
    }

    pub fn barycentric(&self, p: Point<T>) -> [T; 3] {
        let third = lit::<T>(1.0 / 3.0);
        let d = sub(p, self.centroid);
        [
            third + dot(self.grad_bary[0], d),
            third + dot(self.grad_bary[1], d),
            third + dot(self.grad_bary[2], d),
        ]
    }

    pub fn point(&self, bary: [T; 3]) -> Point<T> {
        let mut p = [T::zero(); 2];
        for i in 0..3 {
            p[0] += bary[i] * self.vertices[i][0];
            p[1] += bary[i] * self.vertices[i][1];
        }
        p
    }

    /// Point at parameter `s` in `[0, 1]` along local edge `i`.
    pub fn edge_point(&self, i: usize, s: T) -> Point<T> {
        let a = self.vertices[(i + 1) % 3];
        let b = self.vertices[(i + 2) % 3];
        add(a, scale(s, sub(b, a)))
    }

    pub fn edge_midpoint(&self, i: usize) -> Point<T> {
        self.edge_point(i, lit(0.5))
    }
}
