//! Uniform-refinement studies: per-level Morley eigenvalues with the
//! recovery correction.

use std::ops::RangeInclusive;
use std::time::Instant;

use crate::assembly::{BoundaryCondition, MorleyField, MorleySpace};
use crate::eigensolve::{solve_smallest_with, EigenOptions, EigenResult};
use crate::error::{Error, Result};
use crate::mesh::{Domain, TriangleMesh};
use crate::postprocess::{corrected_eigenvalue, estimate_f_m};
use crate::scalar::Real;

/// Eigenpairs of one mesh with their recovery estimates.
#[derive(Clone, Debug)]
pub struct LevelSolve<T> {
    pub eigen: Vec<EigenResult<T>>,
    pub f_m: Vec<T>,
    pub lambda_r: Vec<T>,
}

impl<T: Real> LevelSolve<T> {
    pub fn field(&self, space: &MorleySpace<'_, T>, i: usize) -> MorleyField<T> {
        space.field_from_active(&self.eigen[i].vector)
    }
}

/// Solves for the `opts.count` smallest eigenpairs on `space`.
pub fn solve_level<T: Real>(space: &MorleySpace<'_, T>, opts: &EigenOptions<T>) -> Result<LevelSolve<T>> {
    let (k, m) = space.assemble();
    if k.n() < opts.count {
        return Err(Error::InvalidInput(format!(
            "mesh has {} active DOFs, fewer than the {} requested eigenpairs",
            k.n(),
            opts.count
        )));
    }
    let eigen = solve_smallest_with(&k, &m, opts)?;
    let f_m: Vec<T> = eigen
        .iter()
        .map(|e| estimate_f_m(space, &space.field_from_active(&e.vector)))
        .collect();
    let lambda_r = eigen.iter().zip(&f_m).map(|(e, &f)| corrected_eigenvalue(e.value, f)).collect();
    Ok(LevelSolve { eigen, f_m, lambda_r })
}

#[derive(Clone, Debug)]
pub struct LevelResult<T> {
    pub level: usize,
    /// Largest triangle diameter.
    pub h: T,
    pub dofs: usize,
    pub n_triangles: usize,
    pub lambda_m: Vec<T>,
    pub f_m: Vec<T>,
    pub lambda_r: Vec<T>,
    pub residuals: Vec<T>,
    pub seconds: f64,
}

/// Calls `visit` for each mesh `T_level` in `levels`, refining uniformly.
pub fn for_each_level<T: Real>(
    domain: Domain,
    levels: RangeInclusive<usize>,
    mut visit: impl FnMut(usize, &TriangleMesh<T>) -> Result<()>,
) -> Result<()> {
    let (first, last) = (*levels.start(), *levels.end());
    if first == 0 || first > last {
        return Err(Error::InvalidInput(format!("invalid level range {first}..{last}")));
    }
    let mut mesh = domain.mesh::<T>(first);
    for level in first..=last {
        if level > first {
            mesh = mesh.refine_red();
        }
        visit(level, &mesh)?;
    }
    Ok(())
}

/// Morley eigenvalues and `lambda_R` on `T_level` for every level in range.
pub fn uniform_study<T: Real>(
    domain: Domain,
    bc: BoundaryCondition,
    levels: RangeInclusive<usize>,
    opts: &EigenOptions<T>,
) -> Result<Vec<LevelResult<T>>> {
    let mut out = Vec::new();
    for_each_level(domain, levels, |level, mesh| {
        let start = Instant::now();
        let space = MorleySpace::new(mesh, bc)?;
        let s = solve_level(&space, opts)?;
        out.push(LevelResult {
            level,
            h: mesh.mesh_size(),
            dofs: space.dofs.n_active(),
            n_triangles: mesh.n_triangles(),
            lambda_m: s.eigen.iter().map(|e| e.value).collect(),
            residuals: s.eigen.iter().map(|e| e.residual).collect(),
            f_m: s.f_m,
            lambda_r: s.lambda_r,
            seconds: start.elapsed().as_secs_f64(),
        });
        Ok(())
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_study_converges_from_below() {
        let opts = EigenOptions::new(1);
        let rows = uniform_study::<f64>(Domain::Square, BoundaryCondition::SimplySupported, 3..=5, &opts).unwrap();
        let exact = 4.0 * std::f64::consts::PI.powi(4);
        assert_eq!(rows.len(), 3);
        for w in rows.windows(2) {
            assert!(w[0].lambda_m[0] < w[1].lambda_m[0]);
            assert!(w[1].lambda_m[0] < exact);
            assert!(w[0].h > w[1].h);
        }
        for r in &rows {
            assert!((exact - r.lambda_r[0]).abs() < (exact - r.lambda_m[0]).abs());
        }
        #[allow(clippy::reversed_empty_ranges)]
        let empty = 3..=2;
        assert!(uniform_study::<f64>(Domain::Square, BoundaryCondition::Clamped, empty, &opts).is_err());
    }
}
