//! Global Morley DOF numbering, sparse assembly of stiffness and mass, and
//! elimination of constrained boundary DOFs.

use std::fmt;
use std::str::FromStr;

use crate::elements::MorleyLocalBasis;
use crate::error::{Error, Result};
use crate::geometry::{Point, Sym2};
use crate::interpolation::PiecewiseConstSymField;
use crate::mesh::{TriangleMesh, NONE};
use crate::poly::LocalPoly;
use crate::scalar::Real;
use crate::sparse::{SparseSymMatrix, TripletBuilder};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    Clamped,
    SimplySupported,
}

impl BoundaryCondition {
    pub fn name(&self) -> &'static str {
        match self {
            BoundaryCondition::Clamped => "clamped",
            BoundaryCondition::SimplySupported => "simply_supported",
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "clamped" => Ok(BoundaryCondition::Clamped),
            "simply_supported" | "simply-supported" => Ok(BoundaryCondition::SimplySupported),
            other => Err(Error::InvalidInput(format!("unknown boundary condition `{other}`"))),
        }
    }
}

/// Vertex `v` owns global DOF `v`; edge `e` owns global DOF `n_vertices + e`.
///
/// Clamped plates keep interior vertices and interior edges; simply
/// supported plates keep interior vertices and every edge.
#[derive(Clone, Debug)]
pub struct DofMap {
    pub bc: BoundaryCondition,
    n_vertices: usize,
    n_edges: usize,
    active_of: Vec<usize>,
    active: Vec<usize>,
}

impl DofMap {
    pub fn new<T: Real>(mesh: &TriangleMesh<T>, bc: BoundaryCondition) -> Self {
        let nv = mesh.n_vertices();
        let ne = mesh.n_edges();
        let mut active_of = vec![NONE; nv + ne];
        let mut active = Vec::new();
        for v in 0..nv {
            if !mesh.is_boundary_vertex(v) {
                active_of[v] = active.len();
                active.push(v);
            }
        }
        for e in 0..ne {
            let keep = match bc {
                BoundaryCondition::Clamped => !mesh.is_boundary_edge(e),
                BoundaryCondition::SimplySupported => true,
            };
            if keep {
                active_of[nv + e] = active.len();
                active.push(nv + e);
            }
        }
        DofMap {
            bc,
            n_vertices: nv,
            n_edges: ne,
            active_of,
            active,
        }
    }

    pub fn n_total(&self) -> usize {
        self.n_vertices + self.n_edges
    }

    pub fn n_active(&self) -> usize {
        self.active.len()
    }

    pub fn vertex_dof(&self, v: usize) -> usize {
        v
    }

    pub fn edge_dof(&self, e: usize) -> usize {
        self.n_vertices + e
    }

    /// Global DOFs of triangle `k` in local order (vertices, then edges).
    pub fn element_dofs<T: Real>(&self, mesh: &TriangleMesh<T>, k: usize) -> [usize; 6] {
        let t = mesh.triangle(k);
        let e = mesh.tri_edges(k);
        [t[0], t[1], t[2], self.edge_dof(e[0]), self.edge_dof(e[1]), self.edge_dof(e[2])]
    }

    pub fn active_index(&self, global: usize) -> Option<usize> {
        match self.active_of[global] {
            NONE => None,
            a => Some(a),
        }
    }

    pub fn active_dofs(&self) -> &[usize] {
        &self.active
    }

    /// Full coefficient vector from active values (constrained DOFs zero).
    pub fn expand<T: Real>(&self, x: &[T]) -> Vec<T> {
        let mut full = vec![T::zero(); self.n_total()];
        for (a, &g) in self.active.iter().enumerate() {
            full[g] = x[a];
        }
        full
    }

    pub fn restrict<T: Real>(&self, full: &[T]) -> Vec<T> {
        self.active.iter().map(|&g| full[g]).collect()
    }
}

/// Morley field by its full (unconstrained) global coefficient vector.
#[derive(Clone, Debug, PartialEq)]
pub struct MorleyField<T> {
    pub coeffs: Vec<T>,
}

/// Morley space over a mesh with cached local bases.
#[derive(Clone, Debug)]
pub struct MorleySpace<'m, T> {
    pub mesh: &'m TriangleMesh<T>,
    pub dofs: DofMap,
    bases: Vec<MorleyLocalBasis<T>>,
}

impl<'m, T: Real> MorleySpace<'m, T> {
    pub fn new(mesh: &'m TriangleMesh<T>, bc: BoundaryCondition) -> Result<Self> {
        let bases = (0..mesh.n_triangles())
            .map(|k| MorleyLocalBasis::new(mesh.geometry(k), mesh.tri_edge_signs(k)))
            .collect::<Result<Vec<_>>>()?;
        Ok(MorleySpace {
            mesh,
            dofs: DofMap::new(mesh, bc),
            bases,
        })
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.dofs.bc
    }

    pub fn basis(&self, k: usize) -> &MorleyLocalBasis<T> {
        &self.bases[k]
    }

    /// Stiffness and mass on the active DOFs.
    pub fn assemble(&self) -> (SparseSymMatrix<T>, SparseSymMatrix<T>) {
        let n = self.dofs.n_active();
        let cap = 36 * self.mesh.n_triangles();
        let mut kb = TripletBuilder::with_capacity(n, cap);
        let mut mb = TripletBuilder::with_capacity(n, cap);
        for (k, basis) in self.bases.iter().enumerate() {
            let a = basis.stiffness();
            let m = basis.mass();
            let idx = self.dofs.element_dofs(self.mesh, k).map(|g| self.dofs.active_index(g));
            for i in 0..6 {
                let Some(gi) = idx[i] else { continue };
                for j in 0..6 {
                    let Some(gj) = idx[j] else { continue };
                    kb.add(gi, gj, a[i][j]);
                    mb.add(gi, gj, m[i][j]);
                }
            }
        }
        (kb.build(), mb.build())
    }

    /// Load vector `b_j = (f, v_j)` on active DOFs for a per-element integrand
    /// `f(k, x)`, using a rule of the given degree.
    pub fn load_vector(&self, degree: usize, mut f: impl FnMut(usize, Point<T>) -> T) -> Vec<T> {
        let rule = crate::quadrature::TriangleRule::<T>::of_degree(degree);
        let mut b = vec![T::zero(); self.dofs.n_active()];
        for (k, basis) in self.bases.iter().enumerate() {
            let idx = self.dofs.element_dofs(self.mesh, k).map(|g| self.dofs.active_index(g));
            let mut local = [T::zero(); 6];
            for (bary, &w) in rule.points.iter().zip(&rule.weights) {
                let p = basis.geom.point(*bary);
                let fv = f(k, p) * w;
                for i in 0..6 {
                    local[i] += fv * basis.functions[i].eval(p);
                }
            }
            for i in 0..6 {
                if let Some(g) = idx[i] {
                    b[g] += local[i] * basis.geom.area;
                }
            }
        }
        b
    }

    pub fn field_from_active(&self, x: &[T]) -> MorleyField<T> {
        MorleyField {
            coeffs: self.dofs.expand(x),
        }
    }

    pub fn local_coeffs(&self, u: &MorleyField<T>, k: usize) -> [T; 6] {
        self.dofs.element_dofs(self.mesh, k).map(|g| u.coeffs[g])
    }

    pub fn local_poly(&self, u: &MorleyField<T>, k: usize) -> LocalPoly<T> {
        self.bases[k].combine(&self.local_coeffs(u, k))
    }

    pub fn hessian(&self, u: &MorleyField<T>, k: usize) -> Sym2<T> {
        self.bases[k].combine_hessian(&self.local_coeffs(u, k))
    }

    /// Piecewise constant Hessian `nabla_h^2 u`.
    pub fn hessians(&self, u: &MorleyField<T>) -> PiecewiseConstSymField<T> {
        PiecewiseConstSymField {
            values: (0..self.mesh.n_triangles()).map(|k| self.hessian(u, k)).collect(),
        }
    }

    /// `(nabla_h^2 u, nabla_h^2 v)`.
    pub fn energy_product(&self, u: &MorleyField<T>, v: &MorleyField<T>) -> T {
        (0..self.mesh.n_triangles())
            .map(|k| self.bases[k].geom.area * self.hessian(u, k).ddot(&self.hessian(v, k)))
            .sum()
    }

    /// `(u, v)` with the degree-4 rule.
    pub fn l2_product(&self, u: &MorleyField<T>, v: &MorleyField<T>) -> T {
        let rule = crate::quadrature::TriangleRule::<T>::dunavant4();
        (0..self.mesh.n_triangles())
            .map(|k| {
                let (pu, pv) = (self.local_poly(u, k), self.local_poly(v, k));
                rule.integrate(&self.bases[k].geom, |x| pu.eval(x) * pv.eval(x))
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_uniform_square, Domain};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn active_counts() {
        let m = build_uniform_square::<f64>(1);
        assert_eq!(m.n_triangles(), 2);
        let d = DofMap::new(&m, BoundaryCondition::Clamped);
        assert_eq!(d.n_active(), 1);
        let d = DofMap::new(&m, BoundaryCondition::SimplySupported);
        assert_eq!(d.n_active(), 5);

        let m = build_uniform_square::<f64>(3);
        assert_eq!(m.n_triangles(), 32);
        let iv = (0..m.n_vertices()).filter(|&v| !m.is_boundary_vertex(v)).count();
        let ie = (0..m.n_edges()).filter(|&e| !m.is_boundary_edge(e)).count();
        assert_eq!(DofMap::new(&m, BoundaryCondition::Clamped).n_active(), iv + ie);
        assert_eq!(DofMap::new(&m, BoundaryCondition::SimplySupported).n_active(), iv + m.n_edges());
    }

    #[test]
    fn galerkin_consistency_and_spd_probe() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for domain in [Domain::Square, Domain::Pentagon, Domain::CrackedSquare] {
            let mesh = domain.mesh::<f64>(3);
            for bc in [BoundaryCondition::Clamped, BoundaryCondition::SimplySupported] {
                let space = MorleySpace::new(&mesh, bc).unwrap();
                let (k, m) = space.assemble();
                assert_eq!(k.asymmetry(), 0.0);
                assert_eq!(m.asymmetry(), 0.0);
                for _ in 0..50 {
                    let x: Vec<f64> = (0..k.n()).map(|_| rng.random_range(-1.0..1.0)).collect();
                    assert!(k.bilinear(&x, &x) > 0.0);
                    assert!(m.bilinear(&x, &x) > 0.0);
                }
                for _ in 0..5 {
                    let x: Vec<f64> = (0..k.n()).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let y: Vec<f64> = (0..k.n()).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let (u, v) = (space.field_from_active(&x), space.field_from_active(&y));
                    let a = k.bilinear(&x, &y);
                    let e = space.energy_product(&u, &v);
                    assert!((a - e).abs() <= 1e-12 * k.bilinear(&x, &x).abs().max(1.0));
                    // mass against an independent high-degree quadrature
                    let rule = crate::quadrature::TriangleRule::<f64>::collapsed(8);
                    let oracle: f64 = (0..mesh.n_triangles())
                        .map(|t| {
                            let (pu, pv) = (space.local_poly(&u, t), space.local_poly(&v, t));
                            rule.integrate(&mesh.geometry(t), |p| pu.eval(p) * pv.eval(p))
                        })
                        .sum();
                    let mm = m.bilinear(&x, &y);
                    assert!((mm - oracle).abs() <= 1e-12 * m.bilinear(&x, &x).max(1.0));
                }
            }
        }
    }

    #[test]
    fn crack_faces_carry_independent_dofs() {
        let mesh = Domain::CrackedSquare.mesh::<f64>(2);
        let d = DofMap::new(&mesh, BoundaryCondition::SimplySupported);
        let slit: Vec<usize> = (0..mesh.n_edges())
            .filter(|&e| {
                let [a, b] = mesh.edge(e);
                let (pa, pb) = (mesh.vertex(a), mesh.vertex(b));
                pa[1] == 0.0 && pb[1] == 0.0 && pa[0] >= 0.0 && pb[0] >= 0.0
            })
            .collect();
        // both faces of each slit segment are separate boundary edges
        assert_eq!(slit.len(), 4);
        for &e in &slit {
            assert!(mesh.is_boundary_edge(e));
            assert!(d.active_index(d.edge_dof(e)).is_some());
        }
    }
}
