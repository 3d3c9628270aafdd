//! Interpolation operators: Morley, continuous P1, HHJ, the mean-derivative
//! Taylor projection with its `phi_alpha` basis, the HHJ interpolation
//! constants `gamma` and the functional `F(u, G)`.

use crate::analytic::AnalyticField;
use crate::assembly::{MorleyField, MorleySpace};
use crate::dense::{DenseMatrix, Lu};
use crate::elements::HhjLocalBasis;
use crate::error::{Error, Result};
use crate::geometry::{dot, Point, Sym2, TriangleGeometry};
use crate::mesh::TriangleMesh;
use crate::poly::{dim, exponents, index, LocalPoly, N_COEFFS};
use crate::quadrature::{gauss_legendre, TriangleRule};
use crate::scalar::{from_usize, lit, Real};

/// One constant symmetric matrix per triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseConstSymField<T> {
    pub values: Vec<Sym2<T>>,
}

impl<T: Real> PiecewiseConstSymField<T> {
    pub fn zeros(n: usize) -> Self {
        PiecewiseConstSymField {
            values: vec![Sym2::zero(); n],
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        PiecewiseConstSymField {
            values: self.values.iter().zip(&o.values).map(|(&a, &b)| a - b).collect(),
        }
    }

    /// `(self, o)` in `L^2(Omega)`.
    pub fn inner(&self, mesh: &TriangleMesh<T>, o: &Self) -> T {
        (0..mesh.n_triangles())
            .map(|k| mesh.geometry(k).area * self.values[k].ddot(&o.values[k]))
            .sum()
    }

    pub fn norm_sq(&self, mesh: &TriangleMesh<T>) -> T {
        self.inner(mesh, self)
    }
}

/// Continuous piecewise linear field by vertex values.
#[derive(Clone, Debug, PartialEq)]
pub struct P1Field<T> {
    pub values: Vec<T>,
}

impl<T: Real> P1Field<T> {
    pub fn eval(&self, mesh: &TriangleMesh<T>, k: usize, p: Point<T>) -> T {
        let b = mesh.geometry(k).barycentric(p);
        let t = mesh.triangle(k);
        (0..3).map(|i| b[i] * self.values[t[i]]).sum()
    }

    /// The field on triangle `k` as a polynomial in the given frame.
    pub fn local_poly(&self, mesh: &TriangleMesh<T>, k: usize, center: Point<T>, scale: T) -> LocalPoly<T> {
        let g = mesh.geometry(k);
        let t = mesh.triangle(k);
        let mut grad = [T::zero(); 2];
        for i in 0..3 {
            grad[0] += self.values[t[i]] * g.grad_bary[i][0];
            grad[1] += self.values[t[i]] * g.grad_bary[i][1];
        }
        LocalPoly::affine(center, scale, self.eval(mesh, k, center), grad)
    }
}

/// Edge mean of `f` along local edge `i` with an `n`-point Gauss rule.
fn edge_mean<T: Real>(geom: &TriangleGeometry<T>, i: usize, n: usize, mut f: impl FnMut(Point<T>) -> T) -> T {
    let (s, w) = gauss_legendre::<T>(n);
    s.iter().zip(&w).map(|(&si, &wi)| wi * f(geom.edge_point(i, si))).sum()
}

/// Morley interpolant on all global DOFs: vertex values and edge means of
/// the derivative along the global edge normal (4-point Gauss).
pub fn interp_morley<T: Real, F: AnalyticField<T> + ?Sized>(space: &MorleySpace<'_, T>, u: &F) -> MorleyField<T> {
    let mesh = space.mesh;
    let mut coeffs = vec![T::zero(); space.dofs.n_total()];
    for v in 0..mesh.n_vertices() {
        coeffs[space.dofs.vertex_dof(v)] = u.value(mesh.vertex(v));
    }
    let (s, w) = gauss_legendre::<T>(4);
    for e in 0..mesh.n_edges() {
        let [a, b] = mesh.edge(e);
        let (pa, pb) = (mesh.vertex(a), mesh.vertex(b));
        let n = mesh.edge_normal(e);
        let mut m = T::zero();
        for (&si, &wi) in s.iter().zip(&w) {
            let p = [pa[0] + si * (pb[0] - pa[0]), pa[1] + si * (pb[1] - pa[1])];
            m += wi * dot(u.gradient(p), n);
        }
        coeffs[space.dofs.edge_dof(e)] = m;
    }
    MorleyField { coeffs }
}

/// Vertex interpolant of a function.
pub fn interp_p1<T: Real>(mesh: &TriangleMesh<T>, f: impl Fn(Point<T>) -> T) -> P1Field<T> {
    P1Field {
        values: mesh.vertices().iter().map(|&p| f(p)).collect(),
    }
}

/// Vertex interpolant of a Morley field (its vertex DOFs).
pub fn interp_p1_morley<T: Real>(space: &MorleySpace<'_, T>, u: &MorleyField<T>) -> P1Field<T> {
    P1Field {
        values: (0..space.mesh.n_vertices()).map(|v| u.coeffs[space.dofs.vertex_dof(v)]).collect(),
    }
}

/// HHJ interpolant of a single triangle: `sum_i a_i phi^i` with `a_i` the edge
/// mean of `n_i^T sigma n_i` (4-point Gauss).
pub fn interp_hhj_local<T: Real>(geom: &TriangleGeometry<T>, sigma: impl Fn(Point<T>) -> Sym2<T>) -> Sym2<T> {
    let basis = HhjLocalBasis::new(geom);
    let a = [0, 1, 2].map(|i| {
        let n = geom.normal[i];
        edge_mean(geom, i, 4, |p| sigma(p).bilinear(n, n))
    });
    basis.combine(a)
}

pub fn interp_hhj<T: Real>(mesh: &TriangleMesh<T>, sigma: impl Fn(Point<T>) -> Sym2<T>) -> PiecewiseConstSymField<T> {
    PiecewiseConstSymField {
        values: (0..mesh.n_triangles())
            .map(|k| interp_hhj_local(&mesh.geometry(k), &sigma))
            .collect(),
    }
}

/// `sum_K ||nabla^2 u - nabla_h^2 u_h||^2_K` with a rule of `degree`.
pub fn broken_hessian_error_sq<T: Real, F: AnalyticField<T> + ?Sized>(
    space: &MorleySpace<'_, T>,
    uh: &MorleyField<T>,
    u: &F,
    degree: usize,
) -> T {
    let rule = TriangleRule::<T>::of_degree(degree);
    (0..space.mesh.n_triangles())
        .map(|k| {
            let h = space.hessian(uh, k);
            rule.integrate(&space.basis(k).geom, |p| (u.hessian(p) - h).norm_sq())
        })
        .sum()
}

/// `||u - u_h||^2` with a rule of `degree`.
pub fn l2_error_sq<T: Real, F: AnalyticField<T> + ?Sized>(
    space: &MorleySpace<'_, T>,
    uh: &MorleyField<T>,
    u: &F,
    degree: usize,
) -> T {
    let rule = TriangleRule::<T>::of_degree(degree);
    (0..space.mesh.n_triangles())
        .map(|k| {
            let p = space.local_poly(uh, k);
            rule.integrate(&space.basis(k).geom, |x| {
                let d = u.value(x) - p.eval(x);
                d * d
            })
        })
        .sum()
}

fn factorial<T: Real>(n: usize) -> T {
    (1..=n).fold(T::one(), |f, k| f * from_usize::<T>(k))
}

/// The basis `phi_alpha`, `|alpha| <= 4`, of a triangle with
/// `(1/|K|) int_K D^gamma phi_alpha = delta_{alpha gamma}`.
///
/// Multi-indices are ordered as in [`crate::poly::index`].
#[derive(Clone, Debug)]
pub struct PhiAlphaBasis<T> {
    pub geom: TriangleGeometry<T>,
    pub phi: Vec<LocalPoly<T>>,
    /// `c[alpha][beta] = (1 / (alpha! |K|)) int_K D^beta (x - M)^alpha`.
    pub c: Vec<[T; N_COEFFS]>,
}

impl<T: Real> PhiAlphaBasis<T> {
    pub fn new(geom: &TriangleGeometry<T>) -> Self {
        let center = geom.centroid;
        let s = geom.diameter();
        let rule = TriangleRule::<T>::collapsed(4);
        let mean = |p: &LocalPoly<T>| rule.integrate(geom, |x| p.eval(x)) / geom.area;
        let mut phi: Vec<LocalPoly<T>> = Vec::with_capacity(N_COEFFS);
        let mut c = vec![[T::zero(); N_COEFFS]; N_COEFFS];
        for al in 0..N_COEFFS {
            let (a, b) = exponents(al);
            let fact = factorial::<T>(a) * factorial::<T>(b);
            let mono = LocalPoly::shifted_monomial(center, s, a, b).scaled(T::one() / fact);
            let mut p = mono;
            if a + b > 1 {
                for be in 0..dim(a + b - 1) {
                    let (da, db) = exponents(be);
                    c[al][be] = mean(&mono.derivative(da, db));
                    p = p.axpy(-c[al][be], &phi[be]);
                }
            }
            phi.push(p);
        }
        PhiAlphaBasis {
            geom: geom.clone(),
            phi,
            c,
        }
    }

    /// `(1/|K|) int_K D^alpha u` for `|alpha| <= l` (degree-10 rule).
    pub fn mean_derivatives<F: AnalyticField<T> + ?Sized>(&self, u: &F, l: usize) -> Vec<T> {
        let rule = TriangleRule::<T>::collapsed(10);
        (0..dim(l))
            .map(|al| {
                let (a, b) = exponents(al);
                rule.integrate(&self.geom, |x| u.derivative(x, a, b)) / self.geom.area
            })
            .collect()
    }

    /// `Pi^l_K u = sum_{|alpha| <= l} a^alpha phi_alpha`.
    pub fn taylor_interp<F: AnalyticField<T> + ?Sized>(&self, l: usize, u: &F) -> LocalPoly<T> {
        assert!(l <= crate::poly::MAX_DEGREE);
        let a = self.mean_derivatives(u, l);
        let mut p = LocalPoly::zero(self.geom.centroid, self.geom.diameter());
        for (al, &coef) in a.iter().enumerate() {
            p = p.axpy(coef, &self.phi[al]);
        }
        p
    }
}

pub fn phi_alpha<T: Real>(geom: &TriangleGeometry<T>, alpha: (usize, usize)) -> LocalPoly<T> {
    PhiAlphaBasis::new(geom).phi[index(alpha.0, alpha.1)]
}

pub fn taylor_interp<T: Real, F: AnalyticField<T> + ?Sized>(l: usize, u: &F, geom: &TriangleGeometry<T>) -> LocalPoly<T> {
    PhiAlphaBasis::new(geom).taylor_interp(l, u)
}

/// The cubics `phi_1..phi_4` scaled by `|K|^{-1/2}` whose third derivatives
/// are unit in the order `(xxx, xxy, xyy, yyy)`.
pub fn hhj_cubics<T: Real>(geom: &TriangleGeometry<T>) -> [LocalPoly<T>; 4] {
    let c = geom.centroid;
    let s = geom.diameter();
    let r = T::one() / geom.area.sqrt();
    let six = lit::<T>(6.0);
    let two = lit::<T>(2.0);
    [
        LocalPoly::shifted_monomial(c, s, 3, 0).scaled(r / six),
        LocalPoly::shifted_monomial(c, s, 2, 1).scaled(r / two),
        LocalPoly::shifted_monomial(c, s, 1, 2).scaled(r / two),
        LocalPoly::shifted_monomial(c, s, 0, 3).scaled(r / six),
    ]
}

/// Symmetric 4x4 matrix `gamma^{ij}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaConstants<T> {
    pub g: [[T; 4]; 4],
}

impl<T: Real> GammaConstants<T> {
    pub fn max_diff(&self, o: &Self) -> T {
        let mut m = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                m = m.max((self.g[i][j] - o.g[i][j]).abs());
            }
        }
        m
    }

    /// `sum_ij gamma^{ij} d_i d_j`.
    pub fn quadratic_form(&self, d: &[T; 4]) -> T {
        let mut s = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                s += self.g[i][j] * d[i] * d[j];
            }
        }
        s
    }
}

/// `(I - Pi_HHJ) nabla^2 p` on one triangle as a function of position.
pub fn hhj_defect<'a, T: Real>(geom: &'a TriangleGeometry<T>, p: &'a LocalPoly<T>) -> impl Fn(Point<T>) -> Sym2<T> + 'a {
    let proj = interp_hhj_local(geom, |x| p.hessian_at(x));
    move |x| p.hessian_at(x) - proj
}

pub fn gamma_constants<T: Real>(geom: &TriangleGeometry<T>) -> GammaConstants<T> {
    let phis = hhj_cubics(geom);
    let rule = TriangleRule::<T>::edge_midpoints();
    let defects: Vec<_> = phis.iter().map(|p| hhj_defect(geom, p)).collect();
    let mut g = [[T::zero(); 4]; 4];
    for i in 0..4 {
        for j in i..4 {
            let v = rule.integrate(geom, |x| defects[i](x).ddot(&defects[j](x))) / geom.area;
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    GammaConstants { g }
}

/// `F(u, K)` for one triangle with the given constants (degree-10 rule).
pub fn f_local<T: Real, F: AnalyticField<T> + ?Sized>(u: &F, geom: &TriangleGeometry<T>, gamma: &GammaConstants<T>) -> T {
    TriangleRule::<T>::collapsed(10).integrate(geom, |x| gamma.quadratic_form(&u.third(x)))
}

/// `F(u, Omega)` together with whether a single reference `gamma` was used.
#[derive(Clone, Debug)]
pub struct FFunctional<T> {
    pub value: T,
    /// `sum_K |K| F(u, K)` with element-local constants; equals
    /// `F(u, Omega) |Omega| / N` on uniform meshes.
    pub weighted: T,
    pub reference_gamma: GammaConstants<T>,
    pub uniform: bool,
}

/// `F(u, Omega)`. Uses the constants of triangle 0 when every element agrees
/// with them to `1e-10`, otherwise element-local constants.
pub fn f_functional<T: Real, F: AnalyticField<T> + ?Sized>(u: &F, mesh: &TriangleMesh<T>) -> FFunctional<T> {
    let gammas: Vec<_> = (0..mesh.n_triangles()).map(|k| gamma_constants(&mesh.geometry(k))).collect();
    let reference = gammas[0];
    let uniform = gammas.iter().all(|g| g.max_diff(&reference) <= lit(1e-10));
    let mut value = T::zero();
    let mut weighted = T::zero();
    for (k, g) in gammas.iter().enumerate() {
        let geom = mesh.geometry(k);
        let fk = f_local(u, &geom, if uniform { &reference } else { g });
        value += fk;
        weighted += geom.area * fk;
    }
    FFunctional {
        value,
        weighted,
        reference_gamma: reference,
        uniform,
    }
}

/// The cubics `psi_{i-1}^2 psi_{i+1}` (`i = 0, 1, 2`) and `psi_0 psi_1 psi_2`.
pub fn morley_cubics<T: Real>(geom: &TriangleGeometry<T>) -> [LocalPoly<T>; 4] {
    let c = geom.centroid;
    let s = geom.diameter();
    let third = lit::<T>(1.0 / 3.0);
    let psi = [0, 1, 2].map(|i| LocalPoly::affine(c, s, third, geom.grad_bary[i]));
    [
        psi[2].mul(&psi[2]).mul(&psi[1]),
        psi[0].mul(&psi[0]).mul(&psi[2]),
        psi[1].mul(&psi[1]).mul(&psi[0]),
        psi[0].mul(&psi[1]).mul(&psi[2]),
    ]
}

fn third_derivatives_of<T: Real>(p: &LocalPoly<T>) -> [T; 4] {
    let c = p.center;
    [(3, 0), (2, 1), (1, 2), (0, 3)].map(|(a, b)| p.derivative_at(c, a, b))
}

/// Directional third derivative `D_a D_b D_c` from `(xxx, xxy, xyy, yyy)`.
pub fn directional_third<T: Real>(d: &[T; 4], a: Point<T>, b: Point<T>, c: Point<T>) -> T {
    let mut s = T::zero();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                s += a[i] * b[j] * c[k] * d[i + j + k];
            }
        }
    }
    s
}

/// Coefficients `c_1..c_4` with `Pi^3 w = sum c_i phi_M^i + P_2` for the
/// cubics of [`morley_cubics`], from the mean third derivatives of `w`.
pub fn morley_cubic_coeffs<T: Real>(mean_third: &[T; 4], geom: &TriangleGeometry<T>) -> Result<[T; 4]> {
    let cubics = morley_cubics(geom);
    let mut m = DenseMatrix::zeros(4, 4);
    for (j, p) in cubics.iter().enumerate() {
        let d = third_derivatives_of(p);
        for i in 0..4 {
            m[(i, j)] = d[i];
        }
    }
    let lu = Lu::new(&m).map_err(|_| Error::Singular("degenerate triangle".into()))?;
    let x = lu.solve(mean_third);
    Ok([x[0], x[1], x[2], x[3]])
}

/// The same coefficients from the closed form in tangential derivatives;
/// `j` selects which of the three equivalent formulas gives `c_4`.
pub fn morley_cubic_coeffs_closed_form<T: Real>(mean_third: &[T; 4], geom: &TriangleGeometry<T>, j: usize) -> [T; 4] {
    let t = geom.tangent;
    let l = geom.edge_len;
    let six = lit::<T>(6.0);
    let two = lit::<T>(2.0);
    let pure = |i: usize| directional_third(mean_third, t[i], t[i], t[i]);
    let mut c = [T::zero(); 4];
    for i in 0..3 {
        c[i] = -l[i].powi(3) / six * pure(i);
    }
    let (jm, jp) = ((j + 2) % 3, (j + 1) % 3);
    let mixed = directional_third(mean_third, t[jm], t[jm], t[jp]);
    c[3] = l[jp] * l[jm] * l[jm] / two * mixed - l[jp].powi(3) / six * pure(jp) + l[jm].powi(3) / six * pure(jm);
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{Polynomial, SinProduct};
    use crate::assembly::BoundaryCondition;
    use crate::mesh::{build_uniform_square, Domain};
    use proptest::prelude::*;

    fn triangle_strategy() -> impl Strategy<Value = TriangleGeometry<f64>> {
        (-2.0..2.0f64, -2.0..2.0f64, 0.2..3.0f64, 0.0..std::f64::consts::TAU, 0.2..2.5f64, 0.3..2.8f64)
            .prop_map(|(x, y, l1, rot, ang, l2)| {
                let a = [x, y];
                let b = [x + l1 * rot.cos(), y + l1 * rot.sin()];
                let c = [x + l2 * (rot + ang).cos(), y + l2 * (rot + ang).sin()];
                TriangleGeometry::new([a, b, c])
            })
            .prop_filter("shape regular", |g| (0..3).all(|i| g.sin_angle(i) >= 0.2))
    }

    fn cubic(c: &[f64]) -> Polynomial<f64> {
        let mut terms = Vec::new();
        for (k, &ck) in c.iter().enumerate().take(10) {
            let (a, b) = exponents(k);
            terms.push((ck, a, b));
        }
        Polynomial::new(terms)
    }

    #[test]
    fn morley_interpolant_reproduces_quadratics() {
        let mesh = Domain::Pentagon.mesh::<f64>(2);
        let space = MorleySpace::new(&mesh, BoundaryCondition::SimplySupported).unwrap();
        let p = Polynomial::new(vec![(0.3, 0, 0), (-1.0, 1, 0), (0.7, 0, 1), (2.0, 2, 0), (-0.4, 1, 1), (1.1, 0, 2)]);
        let ip = interp_morley(&space, &p);
        for k in 0..mesh.n_triangles() {
            let q = space.local_poly(&ip, k);
            let g = mesh.geometry(k);
            for b in [[0.2, 0.3, 0.5], [1.0, 0.0, 0.0], [0.1, 0.8, 0.1]] {
                let x = g.point(b);
                assert!((q.eval(x) - p.value(x)).abs() < 1e-11);
            }
        }
        let p1 = interp_p1_morley(&space, &ip);
        for v in 0..mesh.n_vertices() {
            assert_eq!(p1.values[v], ip.coeffs[v]);
        }
    }

    #[test]
    fn commuting_property_for_cubics() {
        let mesh = build_uniform_square::<f64>(3);
        let space = MorleySpace::new(&mesh, BoundaryCondition::Clamped).unwrap();
        let w = cubic(&[0.1, 0.2, -0.3, 0.5, 1.0, -0.7, 1.3, -0.4, 0.9, 0.6]);
        let iw = interp_morley(&space, &w);
        let rule = TriangleRule::<f64>::edge_midpoints();
        for a in 0..space.dofs.n_active() {
            let mut e = vec![0.0; space.dofs.n_active()];
            e[a] = 1.0;
            let v = space.field_from_active(&e);
            let s: f64 = (0..mesh.n_triangles())
                .map(|k| {
                    let hv = space.hessian(&v, k);
                    let hi = space.hessian(&iw, k);
                    rule.integrate(&mesh.geometry(k), |x| (w.hessian(x) - hi).ddot(&hv))
                })
                .sum();
            assert!(s.abs() < 1e-10, "dof {a}: {s}");
        }
    }

    #[test]
    fn morley_and_p1_interpolation_rates() {
        let u = SinProduct::new(2.0, 1, 1);
        let mut errs = Vec::new();
        let mut p1errs = Vec::new();
        let x2 = Polynomial::new(vec![(1.0, 2, 0)]);
        for level in 3..=6 {
            let mesh = build_uniform_square::<f64>(level);
            let space = MorleySpace::new(&mesh, BoundaryCondition::SimplySupported).unwrap();
            let iu = interp_morley(&space, &u);
            errs.push(broken_hessian_error_sq(&space, &iu, &u, 8).sqrt());
            let p1 = interp_p1(&mesh, |p| x2.value(p));
            let rule = TriangleRule::<f64>::collapsed(6);
            let e: f64 = (0..mesh.n_triangles())
                .map(|k| {
                    rule.integrate(&mesh.geometry(k), |p| {
                        let d = x2.value(p) - p1.eval(&mesh, k, p);
                        d * d
                    })
                })
                .sum();
            p1errs.push(e.sqrt());
        }
        for w in errs.windows(2) {
            let r = (w[0] / w[1]).log2();
            assert!((r - 1.0).abs() < 0.1, "rate {r}");
        }
        let r = (p1errs[2] / p1errs[3]).log2();
        assert!((r - 2.0).abs() < 0.05);
        let mesh = Domain::Pentagon.mesh::<f64>(1);
        let aff = interp_p1(&mesh, |p| 1.0 + 2.0 * p[0] - p[1]);
        let g = mesh.geometry(3);
        let x = g.point([0.2, 0.5, 0.3]);
        assert!((aff.eval(&mesh, 3, x) - (1.0 + 2.0 * x[0] - x[1])).abs() < 1e-13);
    }

    #[test]
    fn hhj_interpolation_reproduction_and_rate() {
        let mesh = build_uniform_square::<f64>(3);
        let c = Sym2::new(1.0, -2.0, 0.5);
        for v in interp_hhj(&mesh, |_| c).values {
            assert!((v - c).max_abs() < 1e-13);
        }
        let q = Polynomial::new(vec![(2.0, 2, 0), (-1.0, 1, 1), (0.3, 0, 2)]);
        for v in interp_hhj(&mesh, |p| q.hessian(p)).values {
            assert!((v - q.hessian([0.0, 0.0])).max_abs() < 1e-12);
        }
        let u = SinProduct::new(2.0, 1, 1);
        let mut errs = Vec::new();
        for level in [4, 5] {
            let mesh = build_uniform_square::<f64>(level);
            let ih = interp_hhj(&mesh, |p| u.hessian(p));
            let rule = TriangleRule::<f64>::collapsed(8);
            let e: f64 = (0..mesh.n_triangles())
                .map(|k| rule.integrate(&mesh.geometry(k), |p| (u.hessian(p) - ih.values[k]).norm_sq()))
                .sum();
            errs.push(e.sqrt());
        }
        let r = (errs[0] / errs[1]).log2();
        assert!((r - 1.0).abs() < 0.1, "rate {r}");
    }

    #[test]
    fn gamma_is_uniform_on_square_meshes() {
        let g3 = build_uniform_square::<f64>(3);
        let g4 = build_uniform_square::<f64>(4);
        let r = gamma_constants(&g3.geometry(0));
        for mesh in [&g3, &g4] {
            for k in 0..mesh.n_triangles() {
                let g = gamma_constants(&mesh.geometry(k));
                assert!(g.max_diff(&r) < 1e-12);
                for i in 0..4 {
                    for j in 0..4 {
                        assert!((g.g[i][j] - g.g[j][i]).abs() < 1e-13);
                    }
                }
            }
        }
        assert!(f_functional(&SinProduct::new(2.0, 1, 1), &g3).uniform);
    }

    // Independent oracle: project with an explicit 3x3 solve of the edge
    // moment conditions instead of the closed-form HHJ basis.
    fn gamma_oracle(g: &TriangleGeometry<f64>) -> [[f64; 4]; 4] {
        let phis = hhj_cubics(g);
        let rule = TriangleRule::<f64>::collapsed(6);
        let proj = |p: &LocalPoly<f64>| {
            let mut m = DenseMatrix::zeros(3, 3);
            let mut rhs = vec![0.0; 3];
            for i in 0..3 {
                let n = g.normal[i];
                m[(i, 0)] = n[0] * n[0];
                m[(i, 1)] = 2.0 * n[0] * n[1];
                m[(i, 2)] = n[1] * n[1];
                // midpoint value is the edge mean of a linear function
                rhs[i] = p.hessian_at(g.edge_midpoint(i)).bilinear(n, n);
            }
            let s = Lu::new(&m).unwrap().solve(&rhs);
            Sym2::new(s[0], s[1], s[2])
        };
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let (pi, pj) = (proj(&phis[i]), proj(&phis[j]));
                out[i][j] = rule.integrate(g, |x| (phis[i].hessian_at(x) - pi).ddot(&(phis[j].hessian_at(x) - pj))) / g.area;
            }
        }
        out
    }

    #[test]
    fn gamma_matches_oracle_on_reference_triangle() {
        let g = TriangleGeometry::new([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let gm = gamma_constants(&g);
        let o = gamma_oracle(&g);
        for i in 0..4 {
            for j in 0..4 {
                assert!((gm.g[i][j] - o[i][j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn f_functional_of_quadratic_vanishes_and_sin_oracle() {
        let mesh = build_uniform_square::<f64>(2);
        let q = Polynomial::new(vec![(1.0, 2, 0), (3.0, 0, 1)]);
        assert_eq!(f_functional(&q, &mesh).value, 0.0);
        let u = SinProduct::new(2.0, 1, 1);
        let f = f_functional(&u, &mesh).value;
        // finer rule as oracle
        let gamma = gamma_constants(&mesh.geometry(0));
        let rule = TriangleRule::<f64>::collapsed(20);
        let o: f64 = (0..mesh.n_triangles())
            .map(|k| rule.integrate(&mesh.geometry(k), |x| gamma.quadratic_form(&u.third(x))))
            .sum();
        assert!(((f - o) / o).abs() < 1e-8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn phi_alpha_kronecker(g in triangle_strategy()) {
            let b = PhiAlphaBasis::new(&g);
            let rule = TriangleRule::<f64>::collapsed(4);
            for al in 0..dim(3) {
                for ga in 0..dim(3) {
                    let (a, bb) = exponents(ga);
                    let d = b.phi[al].derivative(a, bb);
                    let m = rule.integrate(&g, |x| d.eval(x)) / g.area;
                    let want = if al == ga { 1.0 } else { 0.0 };
                    prop_assert!((m - want).abs() < 1e-11, "alpha {al} gamma {ga}: {m}");
                }
            }
            for al in dim(1)..N_COEFFS {
                let (a, bb) = exponents(al);
                for be in dim(a + bb - 2)..dim(a + bb - 1) {
                    prop_assert!(b.c[al][be].abs() < 1e-12 * (1.0 + g.diameter()).powi(4));
                }
            }
        }

        #[test]
        fn taylor_interp_matches_mean_derivatives(g in triangle_strategy(), c in prop::collection::vec(-2.0..2.0f64, 15)) {
            let mut terms = Vec::new();
            for (k, &ck) in c.iter().enumerate() {
                let (a, b) = exponents(k);
                terms.push((ck, a, b));
            }
            let p4 = Polynomial::new(terms);
            let b = PhiAlphaBasis::new(&g);
            let i4 = b.taylor_interp(4, &p4);
            for x in [g.centroid, g.vertices[0], g.edge_midpoint(1)] {
                prop_assert!((i4.eval(x) - p4.value(x)).abs() < 1e-9 * (1.0 + p4.value(x).abs()));
            }
            let i2 = b.taylor_interp(2, &p4);
            let rule = TriangleRule::<f64>::collapsed(6);
            for be in 0..dim(2) {
                let (a, bb) = exponents(be);
                let lhs = rule.integrate(&g, |x| i2.derivative_at(x, a, bb));
                let rhs = rule.integrate(&g, |x| p4.derivative(x, a, bb));
                prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
            }
        }

        #[test]
        fn hhj_identity_for_cubics(g in triangle_strategy(), c in prop::collection::vec(-2.0..2.0f64, 10)) {
            let w = cubic(&c);
            let gamma = gamma_constants(&g);
            let rule = TriangleRule::<f64>::collapsed(4);
            let proj = interp_hhj_local(&g, |x| w.hessian(x));
            let lhs = rule.integrate(&g, |x| (w.hessian(x) - proj).norm_sq());
            let rhs = f_local(&w, &g, &gamma) * g.area;
            prop_assert!((lhs - rhs).abs() < 1e-11 * (1.0 + lhs.abs()));
        }

        #[test]
        fn morley_cubic_expansion(g in triangle_strategy(), c in prop::collection::vec(-2.0..2.0f64, 10)) {
            let w = cubic(&c);
            let d = w.third(g.centroid);
            let coeffs: [f64; 4] = morley_cubic_coeffs(&d, &g).unwrap();
            for j in 0..3 {
                let cf: [f64; 4] = morley_cubic_coeffs_closed_form(&d, &g, j);
                for i in 0..4 {
                    prop_assert!((cf[i] - coeffs[i]).abs() < 1e-10 * (1.0 + coeffs[i].abs()));
                }
            }
            // (I - Pi_M) w = sum c_i (I - Pi_M) phi_M^i pointwise
            let basis = crate::elements::MorleyLocalBasis::new(g.clone(), [1, 1, 1]).unwrap();
            let cubics = morley_cubics(&g);
            let rw = |x: Point<f64>| w.value(x) - basis.interpolate(&w).eval(x);
            for x in [g.centroid, g.point([0.1, 0.2, 0.7]), g.point([0.6, 0.3, 0.1])] {
                let s: f64 = (0..4).map(|i| coeffs[i] * (cubics[i].eval(x) - basis.interpolate(&cubics[i]).eval(x))).sum();
                prop_assert!((s - rw(x)).abs() < 1e-11 * (1.0 + rw(x).abs()));
            }
        }
    }

    #[test]
    fn morley_cubic_coeffs_of_quadratic_and_basis() {
        let g = TriangleGeometry::<f64>::new([[0.0, 0.0], [2.0, 0.5], [0.3, 1.2]]);
        let c = morley_cubic_coeffs(&[0.0; 4], &g).unwrap();
        assert_eq!(c, [0.0; 4]);
        let cubics = morley_cubics(&g);
        for i in 0..4 {
            let c = morley_cubic_coeffs(&third_derivatives_of(&cubics[i]), &g).unwrap();
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((c[j] - want).abs() < 1e-11);
            }
        }
        // pure tangential third derivative of psi_{i-1}^2 psi_{i+1} is -6/|e_i|^3
        for i in 0..3 {
            let d = third_derivatives_of(&cubics[i]);
            let t = g.tangent[i];
            let v = directional_third(&d, t, t, t);
            assert!((v + 6.0 / g.edge_len[i].powi(3)).abs() < 1e-11);
        }
    }
}
