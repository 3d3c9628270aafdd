use std::collections::HashMap;

use super::{TriangleMesh, NONE};
use crate::scalar::{lit, Real};

impl<T: Real> TriangleMesh<T> {
    /// Uniform refinement: every triangle is split into four congruent
    /// children through its edge midpoints.
    pub fn refine_red(&self) -> TriangleMesh<T> {
        let nv = self.n_vertices();
        let half = lit::<T>(0.5);
        let mut vertices = self.vertices().to_vec();
        for &[a, b] in self.edges() {
            let (pa, pb) = (self.vertex(a), self.vertex(b));
            vertices.push([half * (pa[0] + pb[0]), half * (pa[1] + pb[1])]);
        }
        let mut triangles = Vec::with_capacity(4 * self.n_triangles());
        let mut parents = Vec::with_capacity(4 * self.n_triangles());
        for k in 0..self.n_triangles() {
            let [v0, v1, v2] = self.triangle(k);
            let [m0, m1, m2] = self.tri_edges(k).map(|e| nv + e);
            triangles.extend([[v0, m2, m1], [m2, v1, m0], [m1, m0, v2], [m0, m1, m2]]);
            parents.extend([k; 4]);
        }
        TriangleMesh::with_parents(vertices, triangles, parents).expect("red refinement preserves validity")
    }

    /// Rotates each triangle so that its longest edge (first on ties) lies
    /// opposite local vertex 0, the convention used by [`Self::refine_bisect`].
    pub fn prepare_for_bisection(&self) -> TriangleMesh<T> {
        let triangles = (0..self.n_triangles())
            .map(|k| {
                let g = self.geometry(k);
                let mut best = 0;
                for i in 1..3 {
                    if g.edge_len[i] > g.edge_len[best] {
                        best = i;
                    }
                }
                let t = self.triangle(k);
                [t[best], t[(best + 1) % 3], t[(best + 2) % 3]]
            })
            .collect();
        TriangleMesh::with_parents(self.vertices().to_vec(), triangles, self.parents().to_vec())
            .expect("rotation preserves validity")
    }

    /// Newest-vertex bisection of the marked triangles plus the closure
    /// needed to keep the mesh conforming.
    ///
    /// The refinement edge of a triangle is the edge opposite its local
    /// vertex 0; children put the new midpoint in position 0. Children record
    /// the index of the triangle they came from in this mesh.
    pub fn refine_bisect(&self, marked: &[usize]) -> TriangleMesh<T> {
        let ne = self.n_edges();
        let mut edge_marked = vec![false; ne];
        let mut queue: Vec<usize> = Vec::new();
        let mark = |e: usize, edge_marked: &mut Vec<bool>, queue: &mut Vec<usize>| {
            if !edge_marked[e] {
                edge_marked[e] = true;
                for t in self.edge_triangles(e) {
                    if t != NONE {
                        queue.push(t);
                    }
                }
            }
        };
        for &k in marked {
            mark(self.tri_edges(k)[0], &mut edge_marked, &mut queue);
        }
        while let Some(k) = queue.pop() {
            let re = self.tri_edges(k)[0];
            if !edge_marked[re] {
                mark(re, &mut edge_marked, &mut queue);
            }
        }
        if !edge_marked.iter().any(|&m| m) {
            return self.clone();
        }

        let lookup: HashMap<(usize, usize), usize> = self
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &[a, b])| ((a, b), e))
            .collect();
        let edge_of = |a: usize, b: usize| lookup.get(&(a.min(b), a.max(b))).copied();

        let half = lit::<T>(0.5);
        let mut vertices = self.vertices().to_vec();
        let mut midpoint = vec![NONE; ne];
        for e in 0..ne {
            if edge_marked[e] {
                let [a, b] = self.edge(e);
                let (pa, pb) = (self.vertex(a), self.vertex(b));
                midpoint[e] = vertices.len();
                vertices.push([half * (pa[0] + pb[0]), half * (pa[1] + pb[1])]);
            }
        }

        let mut triangles = Vec::with_capacity(self.n_triangles() + 2 * marked.len());
        let mut parents = Vec::with_capacity(triangles.capacity());
        let mut stack: Vec<[usize; 3]> = Vec::new();
        for k in 0..self.n_triangles() {
            stack.push(self.triangle(k));
            while let Some(t) = stack.pop() {
                let [v0, v1, v2] = t;
                match edge_of(v1, v2) {
                    Some(e) if edge_marked[e] => {
                        let m = midpoint[e];
                        // pushed in reverse so the first child is emitted first
                        stack.push([m, v2, v0]);
                        stack.push([m, v0, v1]);
                    }
                    _ => {
                        triangles.push(t);
                        parents.push(k);
                    }
                }
            }
        }
        TriangleMesh::with_parents(vertices, triangles, parents).expect("bisection preserves validity")
    }
}

#[cfg(test)]
mod tests {
    use crate::mesh::{build_uniform_square, Domain};

    #[test]
    fn red_refinement_preserves_area_and_parallelograms() {
        let m = build_uniform_square::<f64>(3);
        let r = m.refine_red();
        assert!((r.area() - 1.0).abs() < 1e-14);
        for e in 0..r.n_edges() {
            if !r.is_boundary_edge(e) {
                assert!(r.is_parallelogram_edge(e));
            }
        }
        for k in 0..r.n_triangles() {
            assert_eq!(r.parent(k), k / 4);
        }
        let p = Domain::Pentagon.mesh::<f64>(3);
        assert!((p.area() - 10.0).abs() < 1e-13);
    }

    #[test]
    fn bisection_empty_and_full() {
        let m = build_uniform_square::<f64>(3).prepare_for_bisection();
        let same = m.refine_bisect(&[]);
        assert_eq!(same.n_triangles(), m.n_triangles());
        let all: Vec<usize> = (0..m.n_triangles()).collect();
        let r = m.refine_bisect(&all);
        r.validate().unwrap();
        assert!(r.n_triangles() >= 2 * m.n_triangles());
        for k in 0..m.n_triangles() {
            assert!((0..r.n_triangles()).filter(|&c| r.parent(c) == k).count() >= 2);
        }
        assert!((r.area() - 1.0).abs() < 1e-14);
        assert!((r.boundary_length() - 4.0).abs() < 1e-13);
    }

    #[test]
    fn single_marked_triangle_closure_is_conforming() {
        let mut m = Domain::CrackedSquare.mesh::<f64>(2).prepare_for_bisection();
        let perimeter = m.boundary_length();
        for step in 0..6 {
            let k = (step * 7) % m.n_triangles();
            let r = m.refine_bisect(&[k]);
            r.validate().unwrap();
            assert!((r.area() - 4.0).abs() < 1e-13);
            assert!((r.boundary_length() - perimeter).abs() < 1e-12);
            assert!((0..r.n_triangles()).filter(|&c| r.parent(c) == k).count() >= 2);
            m = r;
        }
    }
}
