//! Plain text mesh format:
//!
//! ```text
//! V E T
//! x y boundary_flag        (V lines)
//! v0 v1 boundary_flag      (E lines)
//! v0 v1 v2                 (T lines)
//! ```

use std::io::{BufRead, Write};

use super::TriangleMesh;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

pub fn write_mesh<T: Real, W: Write>(mesh: &TriangleMesh<T>, mut w: W) -> Result<()> {
    writeln!(w, "{} {} {}", mesh.n_vertices(), mesh.n_edges(), mesh.n_triangles())?;
    for (v, p) in mesh.vertices().iter().enumerate() {
        writeln!(w, "{} {} {}", p[0], p[1], mesh.is_boundary_vertex(v) as u8)?;
    }
    for (e, [a, b]) in mesh.edges().iter().enumerate() {
        writeln!(w, "{a} {b} {}", mesh.is_boundary_edge(e) as u8)?;
    }
    for t in mesh.triangles() {
        writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

pub fn read_mesh<T: Real, R: BufRead>(r: R) -> Result<TriangleMesh<T>> {
    let mut lines = r
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true));
    let mut next = |what: &str| -> Result<(usize, Vec<String>)> {
        match lines.next() {
            Some((n, l)) => Ok((n, l?.split_whitespace().map(str::to_owned).collect())),
            None => Err(Error::Parse {
                line: 0,
                message: format!("unexpected end of file reading {what}"),
            }),
        }
    };
    let parse_err = |line: usize, message: String| Error::Parse { line, message };

    let (n, head) = next("header")?;
    if head.len() != 3 {
        return Err(parse_err(n, "header must be 'V E T'".into()));
    }
    let counts: Vec<usize> = head
        .iter()
        .map(|s| s.parse().map_err(|_| parse_err(n, format!("bad count '{s}'"))))
        .collect::<Result<_>>()?;
    let (nv, ne, nt) = (counts[0], counts[1], counts[2]);

    let mut vertices = Vec::with_capacity(nv);
    let mut vflags = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, f) = next("vertex")?;
        if f.len() != 3 {
            return Err(parse_err(n, "vertex line must be 'x y boundary_flag'".into()));
        }
        let x: f64 = f[0].parse().map_err(|_| parse_err(n, format!("bad coordinate '{}'", f[0])))?;
        let y: f64 = f[1].parse().map_err(|_| parse_err(n, format!("bad coordinate '{}'", f[1])))?;
        vertices.push([lit::<T>(x), lit::<T>(y)]);
        vflags.push(parse_flag(&f[2], n)?);
    }
    let mut edges = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (n, f) = next("edge")?;
        if f.len() != 3 {
            return Err(parse_err(n, "edge line must be 'v0 v1 boundary_flag'".into()));
        }
        let a = parse_index(&f[0], n)?;
        let b = parse_index(&f[1], n)?;
        edges.push(([a.min(b), a.max(b)], parse_flag(&f[2], n)?));
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (n, f) = next("triangle")?;
        if f.len() != 3 {
            return Err(parse_err(n, "triangle line must be 'v0 v1 v2'".into()));
        }
        triangles.push([parse_index(&f[0], n)?, parse_index(&f[1], n)?, parse_index(&f[2], n)?]);
    }

    let mesh = TriangleMesh::new(vertices, triangles)?;
    if mesh.n_edges() != ne {
        return Err(Error::InvalidMesh(format!(
            "file lists {ne} edges but the triangles define {}",
            mesh.n_edges()
        )));
    }
    for (e, (pair, flag)) in edges.iter().enumerate() {
        if mesh.edge(e) != *pair || mesh.is_boundary_edge(e) != *flag {
            return Err(Error::InvalidMesh(format!("edge {e} disagrees with the triangle list")));
        }
    }
    for (v, &flag) in vflags.iter().enumerate() {
        if mesh.is_boundary_vertex(v) != flag {
            return Err(Error::InvalidMesh(format!("boundary flag of vertex {v} disagrees")));
        }
    }
    Ok(mesh)
}

fn parse_flag(s: &str, line: usize) -> Result<bool> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(Error::Parse {
            line,
            message: format!("boundary flag must be 0 or 1, got '{s}'"),
        }),
    }
}

fn parse_index(s: &str, line: usize) -> Result<usize> {
    s.parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad index '{s}'"),
    })
}
