//! Hessian recovery, the recovery-based eigenvalue correction
//! `lambda_R = lambda_M + F_M`, Richardson extrapolation and rate fitting.

use crate::assembly::{MorleyField, MorleySpace};
use crate::geometry::{norm, sub, Point, Sym2};
use crate::interpolation::PiecewiseConstSymField;
use crate::mesh::{TriangleMesh, NONE};
use crate::scalar::{lit, Real};

/// Piecewise linear symmetric matrix field determined by one value per edge
/// midpoint; on each triangle `sum_i v_{e_i} (1 - 2 psi_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CrSymField<T> {
    pub values: Vec<Sym2<T>>,
}

impl<T: Real> CrSymField<T> {
    pub fn local_values(&self, mesh: &TriangleMesh<T>, k: usize) -> [Sym2<T>; 3] {
        mesh.tri_edges(k).map(|e| self.values[e])
    }

    pub fn eval(&self, mesh: &TriangleMesh<T>, k: usize, p: Point<T>) -> Sym2<T> {
        let b = mesh.geometry(k).barycentric(p);
        let v = self.local_values(mesh, k);
        let two = lit::<T>(2.0);
        let mut s = Sym2::zero();
        for i in 0..3 {
            s = s + v[i].scaled(T::one() - two * b[i]);
        }
        s
    }

    /// Constant gradient on triangle `k`: `(d/dx, d/dy)` of the matrix field.
    pub fn gradient(&self, mesh: &TriangleMesh<T>, k: usize) -> [Sym2<T>; 2] {
        let g = mesh.geometry(k);
        let v = self.local_values(mesh, k);
        let m2 = lit::<T>(-2.0);
        let mut d = [Sym2::zero(); 2];
        for i in 0..3 {
            for (c, dc) in d.iter_mut().enumerate() {
                *dc = *dc + v[i].scaled(m2 * g.grad_bary[i][c]);
            }
        }
        d
    }
}

/// Boundary edge `e` of triangle `k`: candidate `(e', e'')` pairs, best first.
fn boundary_stencils<T: Real>(mesh: &TriangleMesh<T>, k: usize, e: usize) -> Vec<(usize, usize)> {
    let m = mesh.edge_midpoint(e);
    let [ea, eb] = mesh.edge(e);
    let mut cands: Vec<(T, usize, usize)> = Vec::new();
    for &ep in mesh.tri_edges(k).iter() {
        if ep == e || mesh.is_boundary_edge(ep) {
            continue;
        }
        let kp = mesh.neighbor_across(k, ep);
        let [pa, pb] = mesh.edge(ep);
        let shared = if pa == ea || pa == eb { pa } else { pb };
        let t = mesh.triangle(kp);
        let i = t.iter().position(|&v| v == shared).expect("shared vertex lies in the neighbour");
        let epp = mesh.tri_edges(kp)[i];
        cands.push((norm(sub(mesh.edge_midpoint(ep), m)), ep, epp));
    }
    cands.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    cands.into_iter().map(|(_, ep, epp)| (ep, epp)).collect()
}

/// `K_h q`: interior edge midpoints average the two neighbouring constants;
/// a boundary midpoint extrapolates linearly, `2 K_h q(m') - K_h q(m'')`,
/// through an interior edge `e'` of its triangle and the edge `e''` of the
/// neighbour across `e'` opposite their shared vertex with `e`.
///
/// When every `e''` is itself a boundary edge the value at `m'` is used.
pub fn recover_hessian<T: Real>(q: &PiecewiseConstSymField<T>, mesh: &TriangleMesh<T>) -> CrSymField<T> {
    let half = lit::<T>(0.5);
    let two = lit::<T>(2.0);
    let mut values = vec![Sym2::zero(); mesh.n_edges()];
    for e in 0..mesh.n_edges() {
        if !mesh.is_boundary_edge(e) {
            let [a, b] = mesh.edge_triangles(e);
            values[e] = (q.values[a] + q.values[b]).scaled(half);
        }
    }
    for e in 0..mesh.n_edges() {
        if !mesh.is_boundary_edge(e) {
            continue;
        }
        let [k, other] = mesh.edge_triangles(e);
        let k = if k == NONE { other } else { k };
        let stencils = boundary_stencils(mesh, k, e);
        values[e] = match stencils.iter().find(|(_, epp)| !mesh.is_boundary_edge(*epp)) {
            Some(&(ep, epp)) => values[ep].scaled(two) - values[epp],
            None => match stencils.first() {
                Some(&(ep, _)) => values[ep],
                // isolated triangle: nothing to recover from
                None => q.values[k],
            },
        };
    }
    CrSymField { values }
}

/// `||K_h q - q||^2` with the edge-midpoint rule, exact for this integrand.
pub fn recovery_defect_sq<T: Real>(q: &PiecewiseConstSymField<T>, r: &CrSymField<T>, mesh: &TriangleMesh<T>) -> T {
    let third = lit::<T>(1.0 / 3.0);
    (0..mesh.n_triangles())
        .map(|k| {
            let area = mesh.geometry(k).area;
            let v = r.local_values(mesh, k);
            let s: T = v.iter().map(|&vi| (vi - q.values[k]).norm_sq()).sum();
            area * third * s
        })
        .sum()
}

/// `F_M = ||K_h nabla_h^2 u_M - nabla_h^2 u_M||^2`.
pub fn estimate_f_m<T: Real>(space: &MorleySpace<'_, T>, u: &MorleyField<T>) -> T {
    let q = space.hessians(u);
    let r = recover_hessian(&q, space.mesh);
    recovery_defect_sq(&q, &r, space.mesh)
}

pub fn corrected_eigenvalue<T: Real>(lambda_m: T, f_m: T) -> T {
    lambda_m + f_m
}

/// Richardson extrapolation `(2^alpha l_h - l_2h) / (2^alpha - 1)`.
pub fn extrapolate<T: Real>(lambda_h: T, lambda_2h: T, alpha: T) -> T {
    let p = lit::<T>(2.0).powf(alpha);
    (p * lambda_h - lambda_2h) / (p - T::one())
}

/// `nabla_h K_h q` per triangle as `(xxx, xxy, xyy, yyy)`; the mixed entries
/// average the available orderings.
pub fn recovered_third_derivatives<T: Real>(r: &CrSymField<T>, mesh: &TriangleMesh<T>) -> Vec<[T; 4]> {
    let three = lit::<T>(3.0);
    let two = lit::<T>(2.0);
    (0..mesh.n_triangles())
        .map(|k| {
            let [dx, dy] = r.gradient(mesh, k);
            [
                dx.xx,
                (dy.xx + two * dx.xy) / three,
                (dx.yy + two * dy.xy) / three,
                dy.yy,
            ]
        })
        .collect()
}

/// Observed orders of convergence.
#[derive(Clone, Debug, PartialEq)]
pub struct RateFit<T> {
    /// `pairwise[k]` relates rows `k - 1` and `k`; `None` for the first row or
    /// when either error is unusable.
    pub pairwise: Vec<Option<T>>,
    /// Least-squares slope of `log e` against `log h` over the usable rows.
    pub least_squares: Option<T>,
    /// Rate between the last two usable rows.
    pub last: Option<T>,
    /// Rows dropped because the error was zero or not finite.
    pub excluded: Vec<usize>,
}

/// Fits `|e| ~ h^r` using error magnitudes.
pub fn fit_rates<T: Real>(h: &[T], err: &[T]) -> RateFit<T> {
    assert_eq!(h.len(), err.len());
    let usable = |i: usize| err[i].abs() > T::zero() && err[i].is_finite() && h[i] > T::zero();
    let excluded: Vec<usize> = (0..h.len()).filter(|&i| !usable(i)).collect();
    let mut pairwise = vec![None; h.len()];
    for i in 1..h.len() {
        if usable(i) && usable(i - 1) {
            pairwise[i] = Some((err[i - 1].abs() / err[i].abs()).ln() / (h[i - 1] / h[i]).ln());
        }
    }
    let pts: Vec<(T, T)> = (0..h.len())
        .filter(|&i| usable(i))
        .map(|i| (h[i].ln(), err[i].abs().ln()))
        .collect();
    let least_squares = if pts.len() >= 2 {
        let n = lit::<T>(pts.len() as f64);
        let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
        let my = pts.iter().map(|p| p.1).sum::<T>() / n;
        let sxy: T = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: T = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        Some(sxy / sxx)
    } else {
        None
    };
    let last = {
        let idx: Vec<usize> = (0..h.len()).filter(|&i| usable(i)).collect();
        if idx.len() >= 2 {
            let (a, b) = (idx[idx.len() - 2], idx[idx.len() - 1]);
            Some((err[a].abs() / err[b].abs()).ln() / (h[a] / h[b]).ln())
        } else {
            None
        }
    };
    RateFit {
        pairwise,
        least_squares,
        last,
        excluded,
    }
}

/// One refinement level of a convergence study.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow<T> {
    pub level: usize,
    pub h: T,
    pub dofs: usize,
    pub lambda_m: T,
    pub lambda_r: Option<T>,
    pub lambda_exp: Option<T>,
}

/// Rows with relative errors against `reference` and pairwise rates.
#[derive(Clone, Debug)]
pub struct ConvergenceTable<T> {
    pub reference: T,
    pub rows: Vec<ConvergenceRow<T>>,
}

/// Relative errors and rates of one eigenvalue variant.
#[derive(Clone, Debug)]
pub struct ErrorColumn<T> {
    pub errors: Vec<Option<T>>,
    pub rates: RateFit<T>,
}

impl<T: Real> ConvergenceTable<T> {
    /// Builds rows from per-level values, extrapolating consecutive levels
    /// with exponent `alpha`.
    pub fn new(
        reference: T,
        alpha: T,
        levels: &[(usize, T, usize, T, Option<T>)],
    ) -> Self {
        let mut rows: Vec<ConvergenceRow<T>> = Vec::with_capacity(levels.len());
        for (i, &(level, h, dofs, lambda_m, lambda_r)) in levels.iter().enumerate() {
            let lambda_exp = if i > 0 {
                Some(extrapolate(lambda_m, levels[i - 1].3, alpha))
            } else {
                None
            };
            rows.push(ConvergenceRow {
                level,
                h,
                dofs,
                lambda_m,
                lambda_r,
                lambda_exp,
            });
        }
        ConvergenceTable { reference, rows }
    }

    pub fn relative_error(&self, value: T) -> T {
        (self.reference - value) / self.reference
    }

    fn column(&self, pick: impl Fn(&ConvergenceRow<T>) -> Option<T>) -> ErrorColumn<T> {
        let errors: Vec<Option<T>> = self.rows.iter().map(|r| pick(r).map(|v| self.relative_error(v))).collect();
        let (h, e): (Vec<T>, Vec<T>) = self
            .rows
            .iter()
            .zip(&errors)
            .filter_map(|(r, e)| e.map(|e| (r.h, e)))
            .unzip();
        let fit = fit_rates(&h, &e);
        // re-align pairwise rates with the full row list
        let offset = self.rows.len() - h.len();
        let mut pairwise = vec![None; self.rows.len()];
        for (i, r) in fit.pairwise.iter().enumerate() {
            pairwise[i + offset] = *r;
        }
        ErrorColumn {
            errors,
            rates: RateFit { pairwise, ..fit },
        }
    }

    pub fn lambda_m(&self) -> ErrorColumn<T> {
        self.column(|r| Some(r.lambda_m))
    }

    pub fn lambda_r(&self) -> ErrorColumn<T> {
        self.column(|r| r.lambda_r)
    }

    pub fn lambda_exp(&self) -> ErrorColumn<T> {
        self.column(|r| r.lambda_exp)
    }
}
