//! Local Morley and HHJ bases.

use crate::analytic::AnalyticField;
use crate::dense::{DenseMatrix, Lu};
use crate::error::{Error, Result};
use crate::geometry::{dot, scale, Point, Sym2, TriangleGeometry};
use crate::poly::{index, LocalPoly};
use crate::quadrature::{gauss_legendre, TriangleRule};
use crate::scalar::{lit, Real};

/// Morley shape functions of one triangle.
///
/// Local DOFs 0..3 are vertex values, 3..6 are edge means of the normal
/// derivative along the global edge normal (`sign * outward normal`).
#[derive(Clone, Debug)]
pub struct MorleyLocalBasis<T> {
    pub geom: TriangleGeometry<T>,
    pub signs: [i8; 3],
    pub functions: [LocalPoly<T>; 6],
    pub hessians: [Sym2<T>; 6],
}

/// Applies the six Morley DOF functionals to `f`, averaging normal
/// derivatives with an `n_gauss`-point rule on each edge.
pub fn morley_dofs<T: Real, F: AnalyticField<T> + ?Sized>(
    f: &F,
    geom: &TriangleGeometry<T>,
    signs: [i8; 3],
    n_gauss: usize,
) -> [T; 6] {
    let (s, w) = gauss_legendre::<T>(n_gauss);
    let mut out = [T::zero(); 6];
    for i in 0..3 {
        out[i] = f.value(geom.vertices[i]);
    }
    for i in 0..3 {
        let n = global_normal(geom, signs, i);
        let mut m = T::zero();
        for (&si, &wi) in s.iter().zip(&w) {
            m += wi * dot(f.gradient(geom.edge_point(i, si)), n);
        }
        out[3 + i] = m;
    }
    out
}

fn global_normal<T: Real>(geom: &TriangleGeometry<T>, signs: [i8; 3], i: usize) -> Point<T> {
    let s = if signs[i] > 0 { T::one() } else { -T::one() };
    scale(s, geom.normal[i])
}

impl<T: Real> MorleyLocalBasis<T> {
    pub fn new(geom: TriangleGeometry<T>, signs: [i8; 3]) -> Result<Self> {
        if !(geom.area > T::zero()) {
            return Err(Error::Singular("degenerate triangle".into()));
        }
        let center = geom.centroid;
        let h = geom.diameter();
        let monomials: Vec<LocalPoly<T>> = (0..6)
            .map(|k| {
                let (a, b) = crate::poly::exponents(k);
                LocalPoly::local_monomial(center, h, a, b)
            })
            .collect();
        let mut d = DenseMatrix::zeros(6, 6);
        for (k, m) in monomials.iter().enumerate() {
            let dofs = morley_dofs(m, &geom, signs, 2);
            for j in 0..6 {
                d[(j, k)] = dofs[j];
            }
        }
        let c = Lu::new(&d)
            .map_err(|_| Error::Singular("Morley DOF matrix is singular".into()))?
            .inverse();
        let mut functions = [LocalPoly::zero(center, h); 6];
        for (k, f) in functions.iter_mut().enumerate() {
            for m in 0..6 {
                f.coeffs[m] = c[(m, k)];
            }
        }
        let hessians = functions.map(|f| {
            let h2 = h * h;
            let two = lit::<T>(2.0);
            Sym2::new(
                two * f.coeffs[index(2, 0)] / h2,
                f.coeffs[index(1, 1)] / h2,
                two * f.coeffs[index(0, 2)] / h2,
            )
        });
        Ok(MorleyLocalBasis {
            geom,
            signs,
            functions,
            hessians,
        })
    }

    /// `sum_k c_k phi_k`.
    pub fn combine(&self, c: &[T; 6]) -> LocalPoly<T> {
        let mut p = LocalPoly::zero(self.geom.centroid, self.functions[0].scale);
        for k in 0..6 {
            p = p.axpy(c[k], &self.functions[k]);
        }
        p
    }

    /// Constant Hessian of `sum_k c_k phi_k`.
    pub fn combine_hessian(&self, c: &[T; 6]) -> Sym2<T> {
        let mut h = Sym2::zero();
        for k in 0..6 {
            h = h + self.hessians[k].scaled(c[k]);
        }
        h
    }

    /// Local Morley interpolant of `f` (edge means with 4-point Gauss).
    pub fn interpolate<F: AnalyticField<T> + ?Sized>(&self, f: &F) -> LocalPoly<T> {
        self.combine(&morley_dofs(f, &self.geom, self.signs, 4))
    }

    /// `A_jk = int_K H_j : H_k`, exact since Hessians are constant.
    pub fn stiffness(&self) -> [[T; 6]; 6] {
        let mut a = [[T::zero(); 6]; 6];
        for j in 0..6 {
            for k in j..6 {
                let v = self.geom.area * self.hessians[j].ddot(&self.hessians[k]);
                a[j][k] = v;
                a[k][j] = v;
            }
        }
        a
    }

    /// `B_jk = int_K phi_j phi_k` with the degree-4 rule.
    pub fn mass(&self) -> [[T; 6]; 6] {
        let rule = TriangleRule::<T>::dunavant4();
        let mut b = [[T::zero(); 6]; 6];
        for (bary, &w) in rule.points.iter().zip(&rule.weights) {
            let p = self.geom.point(*bary);
            let v = self.functions.map(|f| f.eval(p));
            for j in 0..6 {
                for k in j..6 {
                    b[j][k] += w * v[j] * v[k];
                }
            }
        }
        for j in 0..6 {
            for k in j..6 {
                b[j][k] *= self.geom.area;
                b[k][j] = b[j][k];
            }
        }
        b
    }
}

pub fn morley_local_basis<T: Real>(geom: TriangleGeometry<T>, signs: [i8; 3]) -> Result<MorleyLocalBasis<T>> {
    MorleyLocalBasis::new(geom, signs)
}

pub fn local_stiffness<T: Real>(basis: &MorleyLocalBasis<T>) -> [[T; 6]; 6] {
    basis.stiffness()
}

pub fn local_mass<T: Real>(basis: &MorleyLocalBasis<T>) -> [[T; 6]; 6] {
    basis.mass()
}

/// Constant symmetric basis of the lowest-order HHJ space on a triangle,
/// dual to the normal-normal moments: `n_j^T phi_i n_j = delta_ij`.
#[derive(Clone, Debug)]
pub struct HhjLocalBasis<T> {
    pub functions: [Sym2<T>; 3],
}

impl<T: Real> HhjLocalBasis<T> {
    pub fn new(geom: &TriangleGeometry<T>) -> Self {
        let functions = [0, 1, 2].map(|i| {
            let (p, q) = ((i + 2) % 3, (i + 1) % 3);
            let s = geom.sin_angle(p) * geom.sin_angle(q);
            Sym2::sym_outer(geom.tangent[p], geom.tangent[q]).scaled(-T::one() / s)
        });
        HhjLocalBasis { functions }
    }

    /// `sum_i a_i phi_i`.
    pub fn combine(&self, a: [T; 3]) -> Sym2<T> {
        self.functions[0].scaled(a[0]) + self.functions[1].scaled(a[1]) + self.functions[2].scaled(a[2])
    }
}

pub fn hhj_basis<T: Real>(geom: &TriangleGeometry<T>) -> HhjLocalBasis<T> {
    HhjLocalBasis::new(geom)
}
