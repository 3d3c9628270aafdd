//! Conforming triangulations with globally oriented edges.

mod domains;
pub mod io;
mod refine;

use std::collections::HashMap;

pub use domains::{build_polygon_domain, build_uniform_square, Domain};
pub use io::{read_mesh, write_mesh};

use crate::error::{Error, Result};
use crate::geometry::{cross, sub, Point, TriangleGeometry};
use crate::scalar::{lit, Real};

/// Marker for a missing neighbour or parent.
pub const NONE: usize = usize::MAX;

#[derive(Clone, Debug)]
pub struct TriangleMesh<T> {
    vertices: Vec<Point<T>>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    tri_edges: Vec<[usize; 3]>,
    tri_edge_signs: Vec<[i8; 3]>,
    edge_tris: Vec<[usize; 2]>,
    edge_boundary: Vec<bool>,
    vertex_boundary: Vec<bool>,
    parents: Vec<usize>,
}

impl<T: Real> TriangleMesh<T> {
    /// Builds the edge topology of a triangle soup.
    ///
    /// Triangles must be counterclockwise; local edge `i` is opposite local
    /// vertex `i`. Edges are numbered in order of first appearance.
    pub fn new(vertices: Vec<Point<T>>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let parents = vec![NONE; triangles.len()];
        Self::with_parents(vertices, triangles, parents)
    }

    pub fn with_parents(
        vertices: Vec<Point<T>>,
        triangles: Vec<[usize; 3]>,
        parents: Vec<usize>,
    ) -> Result<Self> {
        if parents.len() != triangles.len() {
            return Err(Error::InvalidMesh("parent list length mismatch".into()));
        }
        let nv = vertices.len();
        for (k, t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("triangle {k} references a missing vertex")));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::InvalidMesh(format!("triangle {k} repeats a vertex")));
            }
            let [a, b, c] = t.map(|v| vertices[v]);
            if cross(sub(b, a), sub(c, a)) <= T::zero() {
                return Err(Error::InvalidMesh(format!("triangle {k} is not counterclockwise")));
            }
        }
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_tris: Vec<[usize; 2]> = Vec::new();
        let mut tri_edges = Vec::with_capacity(triangles.len());
        let mut tri_edge_signs = Vec::with_capacity(triangles.len());
        for (k, t) in triangles.iter().enumerate() {
            let mut te = [0; 3];
            let mut ts = [0i8; 3];
            for i in 0..3 {
                let a = t[(i + 1) % 3];
                let b = t[(i + 2) % 3];
                let key = (a.min(b), a.max(b));
                let e = *lookup.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_tris.push([NONE, NONE]);
                    edges.len() - 1
                });
                let slot = &mut edge_tris[e];
                if slot[0] == NONE {
                    slot[0] = k;
                } else if slot[1] == NONE {
                    // a consistent orientation traverses a shared edge in opposite directions
                    let other = triangles[slot[0]];
                    let j = (0..3)
                        .find(|&j| other[(j + 1) % 3] == a && other[(j + 2) % 3] == b)
                        .map(|_| ());
                    if j.is_some() {
                        return Err(Error::InvalidMesh(format!(
                            "triangles {} and {k} traverse edge ({a},{b}) in the same direction",
                            slot[0]
                        )));
                    }
                    slot[1] = k;
                } else {
                    return Err(Error::InvalidMesh(format!(
                        "edge ({a},{b}) is shared by more than two triangles"
                    )));
                }
                te[i] = e;
                // outward normal agrees with the global normal iff the local
                // traversal runs from the higher to the lower vertex index
                ts[i] = if a > b { 1 } else { -1 };
            }
            tri_edges.push(te);
            tri_edge_signs.push(ts);
        }
        let edge_boundary: Vec<bool> = edge_tris.iter().map(|t| t[1] == NONE).collect();
        let mut vertex_boundary = vec![false; nv];
        for (e, &b) in edges.iter().zip(&edge_boundary) {
            if b {
                vertex_boundary[e[0]] = true;
                vertex_boundary[e[1]] = true;
            }
        }
        Ok(TriangleMesh {
            vertices,
            triangles,
            edges,
            tri_edges,
            tri_edge_signs,
            edge_tris,
            edge_boundary,
            vertex_boundary,
            parents,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Point<T> {
        self.vertices[v]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, k: usize) -> [usize; 3] {
        self.triangles[k]
    }

    /// Edges as `[lo, hi]` vertex pairs.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }

    /// Global edge indices of triangle `k`, local edge `i` opposite vertex `i`.
    pub fn tri_edges(&self, k: usize) -> [usize; 3] {
        self.tri_edges[k]
    }

    /// `+1` where the outward normal of `k` equals the global edge normal.
    pub fn tri_edge_signs(&self, k: usize) -> [i8; 3] {
        self.tri_edge_signs[k]
    }

    /// Triangles adjacent to edge `e`; the second is [`NONE`] on the boundary.
    pub fn edge_triangles(&self, e: usize) -> [usize; 2] {
        self.edge_tris[e]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_boundary[e]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.vertex_boundary[v]
    }

    pub fn edge_boundary_flags(&self) -> &[bool] {
        &self.edge_boundary
    }

    pub fn vertex_boundary_flags(&self) -> &[bool] {
        &self.vertex_boundary
    }

    /// Index of the triangle this one was refined from, or [`NONE`].
    pub fn parent(&self, k: usize) -> usize {
        self.parents[k]
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    /// The triangle across edge `e` from `k`, or [`NONE`].
    pub fn neighbor_across(&self, k: usize, e: usize) -> usize {
        let [a, b] = self.edge_tris[e];
        if a == k {
            b
        } else {
            a
        }
    }

    /// Local position (0..3) of edge `e` in triangle `k`.
    pub fn local_edge(&self, k: usize, e: usize) -> Option<usize> {
        self.tri_edges[k].iter().position(|&x| x == e)
    }

    pub fn geometry(&self, k: usize) -> TriangleGeometry<T> {
        TriangleGeometry::new(self.triangles[k].map(|v| self.vertices[v]))
    }

    /// Global unit normal of edge `e`: the lo-to-hi direction rotated
    /// counterclockwise.
    pub fn edge_normal(&self, e: usize) -> Point<T> {
        let [a, b] = self.edges[e];
        let d = sub(self.vertices[b], self.vertices[a]);
        let l = d[0].hypot(d[1]);
        [-d[1] / l, d[0] / l]
    }

    pub fn edge_length(&self, e: usize) -> T {
        let [a, b] = self.edges[e];
        let d = sub(self.vertices[b], self.vertices[a]);
        d[0].hypot(d[1])
    }

    pub fn edge_midpoint(&self, e: usize) -> Point<T> {
        let [a, b] = self.edges[e];
        let h = lit::<T>(0.5);
        [
            h * (self.vertices[a][0] + self.vertices[b][0]),
            h * (self.vertices[a][1] + self.vertices[b][1]),
        ]
    }

    pub fn area(&self) -> T {
        (0..self.n_triangles()).map(|k| self.geometry(k).area).sum()
    }

    /// Largest triangle diameter.
    pub fn mesh_size(&self) -> T {
        (0..self.n_triangles())
            .map(|k| self.geometry(k).diameter())
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// `V - E + T`.
    pub fn euler_characteristic(&self) -> isize {
        self.n_vertices() as isize - self.n_edges() as isize + self.n_triangles() as isize
    }

    /// Whether the two triangles on interior edge `e` form a parallelogram.
    pub fn is_parallelogram_edge(&self, e: usize) -> bool {
        let [k1, k2] = self.edge_tris[e];
        if k2 == NONE {
            return false;
        }
        let [a, b] = self.edges[e];
        let opp = |k: usize| {
            *self.triangles[k]
                .iter()
                .find(|&&v| v != a && v != b)
                .expect("triangle has a vertex off its edge")
        };
        let (p, q) = (self.vertices[opp(k1)], self.vertices[opp(k2)]);
        let (s, t) = (self.vertices[a], self.vertices[b]);
        let tol = T::epsilon() * lit(64.0) * (s[0].abs() + s[1].abs() + t[0].abs() + t[1].abs() + T::one());
        (p[0] + q[0] - s[0] - t[0]).abs() <= tol && (p[1] + q[1] - s[1] - t[1]).abs() <= tol
    }

    /// Maximum matching of adjacent triangle pairs forming parallelograms.
    ///
    /// Returns the matched pairs and the unmatched triangles.
    pub fn parallelogram_pairs(&self) -> (Vec<(usize, usize)>, Vec<usize>) {
        let nt = self.n_triangles();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nt];
        for e in 0..self.n_edges() {
            if self.is_parallelogram_edge(e) {
                let [a, b] = self.edge_tris[e];
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        // Parallelogram partners are point reflections of each other, so the
        // graph is bipartite; two-colour it and run augmenting paths.
        let mut color = vec![u8::MAX; nt];
        for s in 0..nt {
            if color[s] != u8::MAX {
                continue;
            }
            color[s] = 0;
            let mut stack = vec![s];
            while let Some(k) = stack.pop() {
                for &j in &adj[k] {
                    if color[j] == u8::MAX {
                        color[j] = 1 - color[k];
                        stack.push(j);
                    }
                }
            }
        }
        let mut mate = vec![NONE; nt];
        for k in 0..nt {
            if color[k] == 0 && mate[k] == NONE {
                let mut seen = vec![false; nt];
                augment(k, &adj, &mut mate, &mut seen);
            }
        }
        let mut pairs = Vec::new();
        let mut unmatched = Vec::new();
        for k in 0..nt {
            if mate[k] == NONE {
                unmatched.push(k);
            } else if k < mate[k] {
                pairs.push((k, mate[k]));
            }
        }
        (pairs, unmatched)
    }

    /// Total length of boundary edges. A hanging vertex leaves both sides of
    /// the edge it sits on unmatched, so refinement preserves this length
    /// exactly when it produces no hanging vertices.
    pub fn boundary_length(&self) -> T {
        (0..self.n_edges())
            .filter(|&e| self.edge_boundary[e])
            .map(|e| self.edge_length(e))
            .sum()
    }

    /// Checks the structural invariants; used by tests and after I/O.
    pub fn validate(&self) -> Result<()> {
        for k in 0..self.n_triangles() {
            if self.geometry(k).area <= T::zero() {
                return Err(Error::InvalidMesh(format!("triangle {k} has nonpositive area")));
            }
        }
        for e in 0..self.n_edges() {
            let [a, b] = self.edge_tris[e];
            if a == NONE {
                return Err(Error::InvalidMesh(format!("edge {e} has no triangle")));
            }
            if b != NONE {
                let la = self.local_edge(a, e).unwrap();
                let lb = self.local_edge(b, e).unwrap();
                if self.tri_edge_signs[a][la] + self.tri_edge_signs[b][lb] != 0 {
                    return Err(Error::InvalidMesh(format!("edge {e} signs do not cancel")));
                }
            }
        }
        Ok(())
    }
}

fn augment(k: usize, adj: &[Vec<usize>], mate: &mut [usize], seen: &mut [bool]) -> bool {
    for &j in &adj[k] {
        if seen[j] {
            continue;
        }
        seen[j] = true;
        if mate[j] == NONE || augment(mate[j], adj, mate, seen) {
            mate[j] = k;
            mate[k] = j;
            return true;
        }
    }
    false
}
