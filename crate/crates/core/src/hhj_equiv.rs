//! Morley source problems, the lowest-order HHJ solution obtained from a
//! modified Morley solve, residual verification of the HHJ system, and the
//! terms of the eigenvalue error decomposition.

use crate::analytic::AnalyticField;
use crate::assembly::{BoundaryCondition, MorleyField, MorleySpace};
use crate::cholesky::SparseCholesky;
use crate::elements::HhjLocalBasis;
use crate::error::Result;
use crate::geometry::{dot, Point, Sym2};
use crate::interpolation::{interp_hhj, interp_morley, interp_p1_morley, P1Field, PiecewiseConstSymField};
use crate::poly::LocalPoly;
use crate::quadrature::TriangleRule;
use crate::scalar::Real;

/// Quadrature degree for integrals involving analytic fields.
pub const QUAD_DEGREE: usize = 12;

/// Right-hand side `f` of a source problem.
#[derive(Clone, Copy)]
pub enum SourceTerm<'a, T> {
    /// `scale * field`.
    Analytic { field: &'a dyn AnalyticField<T>, scale: T },
    Function(&'a dyn Fn(Point<T>) -> T),
    /// `scale * field` for a Morley field on the same space.
    Morley { field: &'a MorleyField<T>, scale: T },
    /// `scale * field` for a continuous P1 field on the same mesh.
    P1 { field: &'a P1Field<T>, scale: T },
}

/// Test-side operator `P` in `(f, P v_h)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projector {
    Identity,
    /// Continuous P1 interpolation at the vertices.
    VertexInterpolant,
}

/// Pointwise evaluation `(k, x) -> f(x)` of a source term.
fn source_evaluator<'a, T: Real>(
    space: &'a MorleySpace<'_, T>,
    f: SourceTerm<'a, T>,
) -> impl Fn(usize, Point<T>) -> T + 'a {
    let mesh = space.mesh;
    let polys: Vec<LocalPoly<T>> = match f {
        SourceTerm::Morley { field, .. } => (0..mesh.n_triangles()).map(|k| space.local_poly(field, k)).collect(),
        _ => Vec::new(),
    };
    move |k, p| match f {
        SourceTerm::Analytic { field, scale } => scale * field.value(p),
        SourceTerm::Function(g) => g(p),
        SourceTerm::Morley { scale, .. } => scale * polys[k].eval(p),
        SourceTerm::P1 { field, scale } => scale * field.eval(mesh, k, p),
    }
}

/// `(f, phi_v)` for the hat function of every vertex.
pub fn vertex_load<T: Real>(space: &MorleySpace<'_, T>, f: SourceTerm<'_, T>, degree: usize) -> Vec<T> {
    let mesh = space.mesh;
    let eval = source_evaluator(space, f);
    let rule = TriangleRule::<T>::of_degree(degree);
    let mut b = vec![T::zero(); mesh.n_vertices()];
    for k in 0..mesh.n_triangles() {
        let geom = &space.basis(k).geom;
        let tri = mesh.triangle(k);
        for (bary, &w) in rule.points.iter().zip(&rule.weights) {
            let fv = w * eval(k, geom.point(*bary)) * geom.area;
            for i in 0..3 {
                b[tri[i]] += fv * bary[i];
            }
        }
    }
    b
}

/// Solves `(nabla_h^2 u, nabla_h^2 v) = (f, P v)` repeatedly on one space.
pub struct SourceSolver<'s, 'm, T> {
    pub space: &'s MorleySpace<'m, T>,
    factor: SparseCholesky<T>,
    degree: usize,
}

impl<'s, 'm, T: Real> SourceSolver<'s, 'm, T> {
    pub fn new(space: &'s MorleySpace<'m, T>) -> Result<Self> {
        let (k, _) = space.assemble();
        Ok(SourceSolver {
            space,
            factor: SparseCholesky::new(&k)?,
            degree: QUAD_DEGREE,
        })
    }

    /// Quadrature degree for analytic right-hand sides.
    pub fn with_degree(mut self, degree: usize) -> Self {
        self.degree = degree.max(4);
        self
    }

    /// `b_j = (f, P v_j)` on the active DOFs.
    pub fn load(&self, f: SourceTerm<'_, T>, projector: Projector) -> Vec<T> {
        let space = self.space;
        match projector {
            Projector::Identity => {
                let eval = source_evaluator(space, f);
                space.load_vector(self.degree, eval)
            }
            Projector::VertexInterpolant => {
                let full = vertex_load(space, f, self.degree);
                let mut b = vec![T::zero(); space.dofs.n_active()];
                for (v, &x) in full.iter().enumerate() {
                    if let Some(g) = space.dofs.active_index(space.dofs.vertex_dof(v)) {
                        b[g] = x;
                    }
                }
                b
            }
        }
    }

    pub fn solve(&self, f: SourceTerm<'_, T>, projector: Projector) -> MorleyField<T> {
        let x = self.factor.solve(&self.load(f, projector));
        self.space.field_from_active(&x)
    }
}

/// One-shot source solve; see [`SourceSolver`].
pub fn solve_morley_source<T: Real>(
    space: &MorleySpace<'_, T>,
    f: SourceTerm<'_, T>,
    projector: Projector,
) -> Result<MorleyField<T>> {
    Ok(SourceSolver::new(space)?.solve(f, projector))
}

/// Lowest-order HHJ pair: piecewise constant moments and continuous P1
/// displacement.
#[derive(Clone, Debug, PartialEq)]
pub struct HhjSolution<T> {
    pub sigma: PiecewiseConstSymField<T>,
    pub u: P1Field<T>,
}

/// `sigma = nabla_h^2 u_tilde`, `u = Pi_D u_tilde`.
pub fn hhj_from_morley<T: Real>(space: &MorleySpace<'_, T>, u_tilde: &MorleyField<T>) -> HhjSolution<T> {
    HhjSolution {
        sigma: space.hessians(u_tilde),
        u: interp_p1_morley(space, u_tilde),
    }
}

/// Residuals of the discrete HHJ system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HhjResidual<T> {
    /// Max over the edge basis of `Sigma_h` of the first-equation residual.
    pub r1: T,
    /// Max over the vertex basis of `U_h` of the second-equation residual.
    pub r2: T,
    /// Max jump of `n^T sigma n` across interior edges (and its boundary value
    /// where `Sigma_h` requires it to vanish).
    pub conformity: T,
    /// Magnitudes of the largest individual terms in each family, used to
    /// normalize.
    pub scale1: T,
    pub scale2: T,
    pub scale_nn: T,
}

impl<T: Real> HhjResidual<T> {
    pub fn relative(&self) -> T {
        let rel = |r: T, s: T| if s > T::zero() { r / s } else { r };
        rel(self.r1, self.scale1).max(rel(self.r2, self.scale2)).max(rel(self.conformity, self.scale_nn))
    }
}

/// Checks `(sigma, tau) + sum_K int_dK M_nn(tau) d_n u = 0` for all `tau` in
/// `Sigma_h` and `sum_K int_dK M_nn(sigma) d_n v + (f, v) = 0` for all `v` in
/// `U_h`, with `Sigma_h` requiring `M_nn = 0` on the boundary in the simply
/// supported case.
pub fn hhj_residual<T: Real>(space: &MorleySpace<'_, T>, sol: &HhjSolution<T>, f: SourceTerm<'_, T>) -> HhjResidual<T> {
    let mesh = space.mesh;
    let ss = space.bc() == BoundaryCondition::SimplySupported;
    let mut eq1 = vec![T::zero(); mesh.n_edges()];
    let mut mag1 = vec![T::zero(); mesh.n_edges()];
    let mut eq2 = vec![T::zero(); mesh.n_vertices()];
    let mut mag2 = vec![T::zero(); mesh.n_vertices()];
    let mut nn = vec![[T::zero(); 2]; mesh.n_edges()];
    for k in 0..mesh.n_triangles() {
        let geom = &space.basis(k).geom;
        let hhj = HhjLocalBasis::new(geom);
        let tri = mesh.triangle(k);
        let edges = mesh.tri_edges(k);
        let s = sol.sigma.values[k];
        let grad_u = (0..3).fold([T::zero(); 2], |g, j| {
            let c = sol.u.values[tri[j]];
            [g[0] + c * geom.grad_bary[j][0], g[1] + c * geom.grad_bary[j][1]]
        });
        for i in 0..3 {
            let e = edges[i];
            let n = geom.normal[i];
            let a = geom.area * s.ddot(&hhj.functions[i]);
            let b = geom.edge_len[i] * dot(grad_u, n);
            eq1[e] += a + b;
            mag1[e] = mag1[e].max(a.abs()).max(b.abs());
            let m = s.bilinear(n, n);
            let slot = if mesh.edge_triangles(e)[0] == k { 0 } else { 1 };
            nn[e][slot] = m;
            for (j, &v) in tri.iter().enumerate() {
                let c = geom.edge_len[i] * m * dot(geom.grad_bary[j], n);
                eq2[v] += c;
                mag2[v] = mag2[v].max(c.abs());
            }
        }
    }
    let solver_load = vertex_load(space, f, QUAD_DEGREE);
    let mut out = HhjResidual {
        r1: T::zero(),
        r2: T::zero(),
        conformity: T::zero(),
        scale1: T::zero(),
        scale2: T::zero(),
        scale_nn: T::zero(),
    };
    for e in 0..mesh.n_edges() {
        let boundary = mesh.is_boundary_edge(e);
        out.scale_nn = out.scale_nn.max(nn[e][0].abs()).max(nn[e][1].abs());
        if boundary {
            if ss {
                out.conformity = out.conformity.max(nn[e][0].abs());
                continue;
            }
        } else {
            out.conformity = out.conformity.max((nn[e][0] - nn[e][1]).abs());
        }
        out.r1 = out.r1.max(eq1[e].abs());
        out.scale1 = out.scale1.max(mag1[e]);
    }
    for v in 0..mesh.n_vertices() {
        if mesh.is_boundary_vertex(v) {
            continue;
        }
        out.r2 = out.r2.max((eq2[v] + solver_load[v]).abs());
        out.scale2 = out.scale2.max(mag2[v]).max(solver_load[v].abs());
    }
    out
}

/// `int_K g` for every triangle with a rule of `degree`.
fn cell_integrals<T: Real>(
    space: &MorleySpace<'_, T>,
    degree: usize,
    mut g: impl FnMut(usize, Point<T>) -> Sym2<T>,
) -> Vec<Sym2<T>> {
    let rule = TriangleRule::<T>::of_degree(degree);
    (0..space.mesh.n_triangles())
        .map(|k| {
            let geom = &space.basis(k).geom;
            let mut s = Sym2::zero();
            for (b, &w) in rule.points.iter().zip(&rule.weights) {
                s = s + g(k, geom.point(*b)).scaled(w * geom.area);
            }
            s
        })
        .collect()
}

/// `(sigma - a, b)` for analytic `sigma` given its cell integrals.
fn analytic_minus_inner<T: Real>(
    space: &MorleySpace<'_, T>,
    sigma_int: &[Sym2<T>],
    a: &PiecewiseConstSymField<T>,
    b: &PiecewiseConstSymField<T>,
) -> T {
    (0..space.mesh.n_triangles())
        .map(|k| (sigma_int[k] - a.values[k].scaled(space.basis(k).geom.area)).ddot(&b.values[k]))
        .sum()
}

/// Discrete objects shared by the decomposition diagnostics for an exact
/// eigenpair `(lambda, u)` and its Morley approximation.
pub struct Diagnostics<'s, 'm, T> {
    pub space: &'s MorleySpace<'m, T>,
    pub lambda: T,
    pub lambda_m: T,
    /// `u_M`, sign-aligned with `u`.
    pub u_m: MorleyField<T>,
    /// `Pi_HHJ nabla^2 u`.
    pub pi_sigma: PiecewiseConstSymField<T>,
    /// `sigma_HHJ^{lambda u}`.
    pub sigma_lu: PiecewiseConstSymField<T>,
    /// `sigma_HHJ = nabla_h^2 u~_M`.
    pub sigma_hhj: PiecewiseConstSymField<T>,
    pub u_tilde: MorleyField<T>,
    /// `int_K nabla^2 u`.
    sigma_int: Vec<Sym2<T>>,
    /// `||(I - Pi_HHJ) nabla^2 u||^2`.
    pub t0: T,
    /// `(u - Pi_M u, u)`.
    interp_defect: T,
    /// `||sigma - sigma_HHJ^{lambda u}||^2`.
    sigma_lu_err_sq: T,
}

/// Decomposition terms of `lambda - lambda_M`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpansionTerms<T> {
    pub t0: T,
    pub i1: T,
    pub i2: T,
    pub i3: T,
    /// `lambda - lambda_M - (t0 + 2 i1 + 2 i2 - 2 i3)`.
    pub remainder: T,
}

impl<'s, 'm, T: Real> Diagnostics<'s, 'm, T> {
    /// `u` must be the `L^2`-normalized exact eigenfunction for `lambda`;
    /// `u_m` the `M`-normalized discrete one.
    pub fn new<F: AnalyticField<T> + ?Sized>(
        space: &'s MorleySpace<'m, T>,
        lambda: T,
        u: &F,
        lambda_m: T,
        u_m: &MorleyField<T>,
    ) -> Result<Self> {
        let mesh = space.mesh;
        let rule = TriangleRule::<T>::of_degree(QUAD_DEGREE);
        let mut align = T::zero();
        let mut interp_defect = T::zero();
        let pi_m = interp_morley(space, u);
        for k in 0..mesh.n_triangles() {
            let geom = &space.basis(k).geom;
            let (pm, pi) = (space.local_poly(u_m, k), space.local_poly(&pi_m, k));
            align += rule.integrate(geom, |p| u.value(p) * pm.eval(p));
            interp_defect += rule.integrate(geom, |p| {
                let v = u.value(p);
                (v - pi.eval(p)) * v
            });
        }
        let u_m = if align < T::zero() {
            MorleyField {
                coeffs: u_m.coeffs.iter().map(|&c| -c).collect(),
            }
        } else {
            u_m.clone()
        };
        let solver = SourceSolver::new(space)?;
        let u_lu = solver.solve(SourceTerm::Analytic { field: &u, scale: lambda }, Projector::VertexInterpolant);
        let u_tilde = solver.solve(SourceTerm::Morley { field: &u_m, scale: lambda_m }, Projector::VertexInterpolant);
        let pi_sigma = interp_hhj(mesh, |p| u.hessian(p));
        let sigma_int = cell_integrals(space, QUAD_DEGREE, |_, p| u.hessian(p));
        let t0 = (0..mesh.n_triangles())
            .map(|k| {
                let geom = &space.basis(k).geom;
                let c = pi_sigma.values[k];
                rule.integrate(geom, |p| (u.hessian(p) - c).norm_sq())
            })
            .sum();
        let sigma_lu = space.hessians(&u_lu);
        let sigma_lu_err_sq = (0..mesh.n_triangles())
            .map(|k| {
                let c = sigma_lu.values[k];
                rule.integrate(&space.basis(k).geom, |p| (u.hessian(p) - c).norm_sq())
            })
            .sum();
        Ok(Diagnostics {
            space,
            lambda,
            lambda_m,
            sigma_lu,
            sigma_lu_err_sq,
            sigma_hhj: space.hessians(&u_tilde),
            u_m,
            pi_sigma,
            u_tilde,
            sigma_int,
            t0,
            interp_defect,
        })
    }

    /// `(sigma_HHJ^{lambda u} - Pi_HHJ sigma, sigma_HHJ^{lambda u} - sigma)`
    /// and the product of the two norms for normalization.
    pub fn orthogonality(&self) -> (T, T) {
        let d = self.sigma_lu.sub(&self.pi_sigma);
        // (d, sigma_lu - sigma) = -(sigma - sigma_lu, d)
        let value = -analytic_minus_inner(self.space, &self.sigma_int, &self.sigma_lu, &d);
        (value, d.norm_sq(self.space.mesh).sqrt() * self.sigma_lu_err_sq.sqrt())
    }

    /// `||sigma_HHJ^{lambda u} - Pi_HHJ sigma||`.
    pub fn superconvergence_error(&self) -> T {
        self.sigma_lu.sub(&self.pi_sigma).norm_sq(self.space.mesh).sqrt()
    }

    pub fn terms(&self) -> ExpansionTerms<T> {
        let space = self.space;
        let i1 = analytic_minus_inner(space, &self.sigma_int, &self.sigma_lu, &self.sigma_lu.sub(&self.sigma_hhj));
        let diff = space.hessians(&MorleyField {
            coeffs: self.u_tilde.coeffs.iter().zip(&self.u_m.coeffs).map(|(&a, &b)| a - b).collect(),
        });
        let i2 = analytic_minus_inner(space, &self.sigma_int, &self.sigma_hhj, &diff);
        let i3 = self.lambda * self.interp_defect;
        let two = T::one() + T::one();
        ExpansionTerms {
            t0: self.t0,
            i1,
            i2,
            i3,
            remainder: self.lambda - self.lambda_m - (self.t0 + two * i1 + two * i2 - two * i3),
        }
    }
}

/// `(T0, I1, I2, I3)` and the remainder of the decomposition of
/// `lambda - lambda_M`.
pub fn expansion_terms<T: Real, F: AnalyticField<T> + ?Sized>(
    space: &MorleySpace<'_, T>,
    lambda: T,
    u: &F,
    lambda_m: T,
    u_m: &MorleyField<T>,
) -> Result<ExpansionTerms<T>> {
    Ok(Diagnostics::new(space, lambda, u, lambda_m, u_m)?.terms())
}
