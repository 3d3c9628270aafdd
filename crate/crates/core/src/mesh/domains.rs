use std::fmt;
use std::str::FromStr;

use super::{TriangleMesh, NONE};
use crate::error::{Error, Result};
use crate::geometry::{cross, sub, Point};
use crate::scalar::{lit, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    /// Unit square split by its north-east diagonal.
    Square,
    /// Pentagon fanned from the origin.
    Pentagon,
    /// `(-1, 1)^2` with a slit along `[0, 1] x {0}`.
    CrackedSquare,
    /// Two squares joined by a channel, with a slit in the left square.
    Dumbbell,
}

impl Domain {
    pub const ALL: [Domain; 4] = [
        Domain::Square,
        Domain::Pentagon,
        Domain::CrackedSquare,
        Domain::Dumbbell,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Domain::Square => "square",
            Domain::Pentagon => "pentagon",
            Domain::CrackedSquare => "cracked_square",
            Domain::Dumbbell => "dumbbell",
        }
    }

    /// Exact area of the polygon.
    pub fn area(&self) -> f64 {
        match self {
            Domain::Square => 1.0,
            Domain::Pentagon => 10.0,
            Domain::CrackedSquare => 4.0,
            Domain::Dumbbell => 8.5,
        }
    }

    /// Mesh `T_1`.
    pub fn initial_mesh<T: Real>(&self) -> TriangleMesh<T> {
        match self {
            Domain::Square => build_uniform_square(1),
            Domain::Pentagon => pentagon(),
            Domain::CrackedSquare => cracked_square(),
            Domain::Dumbbell => dumbbell(),
        }
    }

    /// Mesh `T_level`, obtained from `T_1` by `level - 1` red refinements.
    pub fn mesh<T: Real>(&self, level: usize) -> TriangleMesh<T> {
        assert!(level >= 1, "levels start at 1");
        let mut m = self.initial_mesh();
        for _ in 1..level {
            m = m.refine_red();
        }
        m
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Domain {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Domain::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown domain '{s}'")))
    }
}

/// Unit square mesh `T_levels` with `2 * 4^(levels - 1)` triangles.
pub fn build_uniform_square<T: Real>(levels: usize) -> TriangleMesh<T> {
    assert!(levels >= 1, "levels start at 1");
    let z = T::zero();
    let o = T::one();
    let mut m = TriangleMesh::new(vec![[z, z], [o, z], [o, o], [z, o]], vec![[0, 1, 2], [0, 2, 3]])
        .expect("unit square mesh is valid");
    for _ in 1..levels {
        m = m.refine_red();
    }
    m
}

/// Initial mesh of a named polygonal domain.
pub fn build_polygon_domain<T: Real>(name: &str) -> Result<TriangleMesh<T>> {
    let d: Domain = name.parse()?;
    if d == Domain::Square {
        return Err(Error::InvalidInput("use build_uniform_square for the square".into()));
    }
    Ok(d.initial_mesh())
}

fn pentagon<T: Real>() -> TriangleMesh<T> {
    let a = [(2.0, 0.0), (1.0, -2.0), (-1.0, -2.0), (-2.0, 0.0), (0.0, 2.0)];
    let tris: Vec<[(f64, f64); 3]> = (0..5).map(|i| [(0.0, 0.0), a[i], a[(i + 1) % 5]]).collect();
    from_coordinate_triangles(&tris).expect("pentagon mesh is valid")
}

fn cracked_square<T: Real>() -> TriangleMesh<T> {
    let t0 = from_coordinate_triangles::<T>(&[
        [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0)],
        [(-1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)],
    ])
    .expect("square mesh is valid");
    cut_slit(&t0.refine_red(), [T::zero(), T::zero()], [T::one(), T::zero()])
        .expect("slit lies on mesh edges")
}

fn dumbbell<T: Real>() -> TriangleMesh<T> {
    let mut tris: Vec<[(f64, f64); 3]> = vec![
        // left square, upper half
        [(-1.0, 0.0), (0.0, 0.0), (0.0, 1.0)],
        [(-1.0, 0.0), (0.0, 1.0), (-1.0, 1.0)],
        [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)],
        [(1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
        // left square, lower left quadrant
        [(-1.0, 0.0), (0.0, -1.0), (0.0, 0.0)],
        [(-1.0, -1.0), (0.0, -1.0), (-1.0, 0.0)],
        // left square, lower right quadrant
        [(0.0, 0.0), (0.0, -1.0), (0.5, -0.5)],
        [(0.0, 0.0), (0.5, -0.5), (1.0, 0.0)],
        [(0.0, -1.0), (0.5, -1.0), (0.5, -0.5)],
        [(0.5, -0.5), (1.0, -0.5), (1.0, 0.0)],
        [(0.5, -0.5), (0.75, -0.75), (1.0, -0.5)],
        [(0.75, -0.75), (1.0, -0.75), (1.0, -0.5)],
        [(0.75, -0.75), (1.0, -1.0), (1.0, -0.75)],
        [(0.75, -1.0), (1.0, -1.0), (0.75, -0.75)],
        [(0.5, -1.0), (0.75, -1.0), (0.75, -0.75)],
        [(0.5, -0.5), (0.5, -1.0), (0.75, -0.75)],
        // right square, upper half
        [(3.0, 0.0), (4.0, 0.0), (4.0, 1.0)],
        [(3.0, 0.0), (4.0, 1.0), (3.0, 1.0)],
        [(4.0, 0.0), (5.0, 0.0), (4.0, 1.0)],
        [(5.0, 0.0), (5.0, 1.0), (4.0, 1.0)],
        // right square, lower right quadrant
        [(4.0, 0.0), (4.0, -1.0), (5.0, 0.0)],
        [(4.0, -1.0), (5.0, -1.0), (5.0, 0.0)],
        // right square, lower left quadrant
        [(3.0, 0.0), (3.5, -0.5), (4.0, 0.0)],
        [(3.5, -0.5), (4.0, -1.0), (4.0, 0.0)],
        [(3.0, 0.0), (3.0, -0.5), (3.5, -0.5)],
        [(3.5, -1.0), (4.0, -1.0), (3.5, -0.5)],
        [(3.0, -0.5), (3.25, -0.75), (3.5, -0.5)],
        [(3.5, -0.5), (3.25, -0.75), (3.5, -1.0)],
        [(3.0, -1.0), (3.25, -1.0), (3.25, -0.75)],
        [(3.25, -1.0), (3.5, -1.0), (3.25, -0.75)],
        [(3.0, -0.5), (3.0, -0.75), (3.25, -0.75)],
        [(3.0, -0.75), (3.0, -1.0), (3.25, -0.75)],
    ];
    // channel [1, 3] x [-1, -0.75]
    for i in 0..8 {
        let x0 = 1.0 + 0.25 * i as f64;
        let x1 = x0 + 0.25;
        let (b, t) = (-1.0, -0.75);
        if i < 4 {
            tris.push([(x0, b), (x1, b), (x1, t)]);
            tris.push([(x0, b), (x1, t), (x0, t)]);
        } else {
            tris.push([(x0, b), (x1, b), (x0, t)]);
            tris.push([(x1, b), (x1, t), (x0, t)]);
        }
    }
    let m = from_coordinate_triangles::<T>(&tris).expect("dumbbell mesh is valid");
    cut_slit(&m, [T::zero(), T::zero()], [-T::one(), T::zero()]).expect("slit lies on mesh edges")
}

/// Builds a mesh from triangles given by coordinates, merging coincident
/// vertices and orienting every triangle counterclockwise.
pub(crate) fn from_coordinate_triangles<T: Real>(tris: &[[(f64, f64); 3]]) -> Result<TriangleMesh<T>> {
    let mut coords: Vec<(f64, f64)> = Vec::new();
    let mut index = |p: (f64, f64)| -> usize {
        match coords.iter().position(|&q| q == p) {
            Some(i) => i,
            None => {
                coords.push(p);
                coords.len() - 1
            }
        }
    };
    let mut triangles = Vec::with_capacity(tris.len());
    for t in tris {
        let mut ids = t.map(&mut index);
        let [a, b, c] = t.map(|p| [p.0, p.1]);
        if cross(sub(b, a), sub(c, a)) < 0.0 {
            ids.swap(1, 2);
        }
        triangles.push(ids);
    }
    let vertices = coords.iter().map(|&(x, y)| [lit(x), lit(y)]).collect();
    TriangleMesh::new(vertices, triangles)
}

/// Cuts the mesh open along the segment from `tip` to `end`.
///
/// Every mesh vertex on the segment except `tip` is duplicated; triangles on
/// the clockwise side of the segment direction take the copies.
pub(crate) fn cut_slit<T: Real>(mesh: &TriangleMesh<T>, tip: Point<T>, end: Point<T>) -> Result<TriangleMesh<T>> {
    let dir = sub(end, tip);
    let len2 = dir[0] * dir[0] + dir[1] * dir[1];
    let on_slit = |p: Point<T>| {
        let w = sub(p, tip);
        let t = dir[0] * w[0] + dir[1] * w[1];
        cross(dir, w) == T::zero() && t >= T::zero() && t <= len2
    };
    let mut vertices = mesh.vertices().to_vec();
    let mut copy = vec![NONE; mesh.n_vertices()];
    for v in 0..mesh.n_vertices() {
        let p = mesh.vertex(v);
        if on_slit(p) && p != tip {
            copy[v] = vertices.len();
            vertices.push(p);
        }
    }
    if copy.iter().all(|&c| c == NONE) {
        return Err(Error::InvalidMesh("slit contains no mesh vertex".into()));
    }
    let third = lit::<T>(1.0 / 3.0);
    let triangles = (0..mesh.n_triangles())
        .map(|k| {
            let t = mesh.triangle(k);
            let c = t.iter().fold([T::zero(); 2], |acc, &v| {
                let p = mesh.vertex(v);
                [acc[0] + third * p[0], acc[1] + third * p[1]]
            });
            if cross(dir, sub(c, tip)) < T::zero() {
                t.map(|v| if copy[v] != NONE { copy[v] } else { v })
            } else {
                t
            }
        })
        .collect();
    TriangleMesh::new(vertices, triangles)
}
