//! Residual error estimator, Doerfler marking and the adaptive loop.

use std::cmp::Ordering;

use crate::assembly::{BoundaryCondition, MorleyField, MorleySpace};
use crate::eigensolve::EigenOptions;
use crate::error::{Error, Result};
use crate::mesh::{Domain, TriangleMesh};
use crate::quadrature::TriangleRule;
use crate::scalar::{lit, Real};
use crate::study::solve_level;

/// Per-triangle indicators `eta_K`.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementEstimate<T> {
    pub eta: Vec<T>,
}

impl<T: Real> ElementEstimate<T> {
    /// `(sum_K eta_K^2)^(1/2)`.
    pub fn total(&self) -> T {
        self.eta.iter().map(|&e| e * e).sum::<T>().sqrt()
    }
}

/// `eta_K^2 = h_K^4 ||lambda u||_K^2 + sum_e 1/2 h_e ||[nabla_h^2 u]||_e^2`
/// over the interior edges `e` of `K`.
pub fn residual_estimator<T: Real>(space: &MorleySpace<'_, T>, lambda: T, u: &MorleyField<T>) -> ElementEstimate<T> {
    let mesh = space.mesh;
    let rule = TriangleRule::<T>::dunavant4();
    let hess = space.hessians(u);
    let half = lit::<T>(0.5);
    let eta = (0..mesh.n_triangles())
        .map(|k| {
            let geom = &space.basis(k).geom;
            let p = space.local_poly(u, k);
            let h2 = geom.diameter() * geom.diameter();
            let volume = h2 * h2 * rule.integrate(geom, |x| {
                let v = lambda * p.eval(x);
                v * v
            });
            let mut jump = T::zero();
            for e in mesh.tri_edges(k) {
                if mesh.is_boundary_edge(e) {
                    continue;
                }
                let other = mesh.neighbor_across(k, e);
                let len = mesh.edge_length(e);
                jump += half * len * len * (hess.values[k] - hess.values[other]).norm_sq();
            }
            (volume + jump).sqrt()
        })
        .collect();
    ElementEstimate { eta }
}

/// Smallest set, taken greedily by decreasing `eta_K` (ties by index), whose
/// squared indicators sum to at least `theta^2` times the total.
pub fn dorfler_mark<T: Real>(est: &ElementEstimate<T>, theta: T) -> Vec<usize> {
    let mut order: Vec<usize> = (0..est.eta.len()).collect();
    order.sort_by(|&a, &b| est.eta[b].partial_cmp(&est.eta[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    let total: T = est.eta.iter().map(|&e| e * e).sum();
    let target = theta * theta * total;
    let mut acc = T::zero();
    let mut marked = Vec::new();
    for k in order {
        if acc >= target || est.eta[k] <= T::zero() {
            break;
        }
        acc += est.eta[k] * est.eta[k];
        marked.push(k);
    }
    marked
}

#[derive(Clone, Debug)]
pub struct AdaptiveOptions<T> {
    pub theta: T,
    pub max_iterations: usize,
    pub max_dofs: usize,
    /// Zero-based index of the tracked eigenpair.
    pub eigen_index: usize,
    pub start_level: usize,
    pub eigen: EigenOptions<T>,
}

impl<T: Real> Default for AdaptiveOptions<T> {
    fn default() -> Self {
        AdaptiveOptions {
            theta: lit(0.3),
            max_iterations: 40,
            max_dofs: 500_000,
            eigen_index: 0,
            start_level: 1,
            eigen: EigenOptions::new(1),
        }
    }
}

/// One row of the adaptive history.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveStep<T> {
    pub iteration: usize,
    pub dofs: usize,
    pub n_triangles: usize,
    pub lambda_m: T,
    pub f_m: T,
    pub lambda_r: T,
    pub eta: T,
}

#[derive(Clone, Debug)]
pub struct AdaptiveRun<T> {
    pub steps: Vec<AdaptiveStep<T>>,
    pub final_mesh: TriangleMesh<T>,
}

/// Solve, estimate, mark and bisect until the iteration or DOF cap is hit.
pub fn adaptive_loop<T: Real>(domain: Domain, bc: BoundaryCondition, opts: &AdaptiveOptions<T>) -> Result<AdaptiveRun<T>> {
    if !(opts.theta > T::zero() && opts.theta < T::one()) {
        return Err(Error::InvalidInput("theta must lie in (0, 1)".into()));
    }
    if opts.start_level == 0 {
        return Err(Error::InvalidInput("levels start at 1".into()));
    }
    let mut eig = opts.eigen.clone();
    eig.count = eig.count.max(opts.eigen_index + 1);
    let mut mesh = domain.mesh::<T>(opts.start_level).prepare_for_bisection();
    let mut steps = Vec::new();
    for iteration in 1..=opts.max_iterations {
        let space = MorleySpace::new(&mesh, bc)?;
        let s = solve_level(&space, &eig)?;
        let i = opts.eigen_index;
        let u = space.field_from_active(&s.eigen[i].vector);
        let est = residual_estimator(&space, s.eigen[i].value, &u);
        let dofs = space.dofs.n_active();
        steps.push(AdaptiveStep {
            iteration,
            dofs,
            n_triangles: mesh.n_triangles(),
            lambda_m: s.eigen[i].value,
            f_m: s.f_m[i],
            lambda_r: s.lambda_r[i],
            eta: est.total(),
        });
        if iteration == opts.max_iterations || dofs >= opts.max_dofs {
            break;
        }
        let marked = dorfler_mark(&est, opts.theta);
        if marked.is_empty() {
            break;
        }
        mesh = mesh.refine_bisect(&marked);
    }
    Ok(AdaptiveRun { steps, final_mesh: mesh })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::BoundaryCondition::*;
    use crate::eigensolve::solve_smallest;
    use crate::interpolation::interp_morley;
    use crate::analytic::Polynomial;

    fn est(v: &[f64]) -> ElementEstimate<f64> {
        ElementEstimate { eta: v.to_vec() }
    }

    #[test]
    fn marking_examples() {
        assert_eq!(dorfler_mark(&est(&[0.0, 1.0, 2.0, 0.0]), 0.999_999), vec![2, 1]);
        assert_eq!(dorfler_mark(&est(&[0.1, 5.0, 0.1, 0.2]), 0.9), vec![1]);
        let uniform = est(&[1.0; 10]);
        assert_eq!(dorfler_mark(&uniform, 0.5).len(), 3);
        assert_eq!(dorfler_mark(&est(&[0.0; 4]), 0.5), Vec::<usize>::new());
    }

    #[test]
    fn quadratic_with_zero_lambda_has_zero_estimate() {
        let mesh = Domain::Pentagon.mesh::<f64>(2);
        let space = MorleySpace::new(&mesh, Clamped).unwrap();
        let q = Polynomial::new(vec![(1.0, 2, 0), (-0.5, 1, 1), (3.0, 0, 2), (1.0, 1, 0)]);
        let u = interp_morley(&space, &q);
        assert!(residual_estimator(&space, 0.0, &u).total() < 1e-10);
    }

    #[test]
    fn estimator_decays_at_first_order_on_square() {
        let mut etas = Vec::new();
        for level in 3..=5 {
            let mesh = Domain::Square.mesh::<f64>(level);
            let space = MorleySpace::new(&mesh, SimplySupported).unwrap();
            let (k, m) = space.assemble();
            let e = solve_smallest(&k, &m, 1, 1e-10).unwrap();
            etas.push(residual_estimator(&space, e[0].value, &space.field_from_active(&e[0].vector)).total());
        }
        let rate = (etas[1] / etas[2]).log2();
        assert!((rate - 1.0).abs() < 0.15, "rate {rate}");
    }

    #[test]
    fn crack_tip_carries_the_largest_indicator() {
        let mesh = Domain::CrackedSquare.mesh::<f64>(4);
        let space = MorleySpace::new(&mesh, Clamped).unwrap();
        let (k, m) = space.assemble();
        let e = solve_smallest(&k, &m, 1, 1e-10).unwrap();
        let est = residual_estimator(&space, e[0].value, &space.field_from_active(&e[0].vector));
        let mut order: Vec<usize> = (0..mesh.n_triangles()).collect();
        order.sort_by(|&a, &b| est.eta[b].partial_cmp(&est.eta[a]).unwrap());
        let decile = &order[..mesh.n_triangles() / 10];
        let touches_tip = |k: usize| mesh.triangle(k).iter().any(|&v| {
            let p = mesh.vertex(v);
            p[0].abs() < 1e-12 && p[1].abs() < 1e-12
        });
        assert!(touches_tip(order[0]));
        assert!(decile.iter().filter(|&&k| touches_tip(k)).count() >= 4);
    }

    #[test]
    fn theta_is_monotone() {
        let e = est(&[0.3, 0.9, 0.1, 0.5, 0.5, 0.2]);
        let mut prev: Vec<usize> = Vec::new();
        for t in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let s = dorfler_mark(&e, t);
            assert!(prev.iter().all(|k| s.contains(k)));
            prev = s;
        }
    }

    #[test]
    fn short_adaptive_run_refines_and_records() {
        let opts = AdaptiveOptions {
            max_iterations: 4,
            start_level: 2,
            ..AdaptiveOptions::default()
        };
        let run = adaptive_loop::<f64>(Domain::CrackedSquare, Clamped, &opts).unwrap();
        assert_eq!(run.steps.len(), 4);
        for w in run.steps.windows(2) {
            assert!(w[1].dofs > w[0].dofs);
            assert!(w[1].lambda_m > 0.0);
        }
        let s = &run.steps[3];
        assert!((s.lambda_r - s.lambda_m - s.f_m).abs() < 1e-9 * s.lambda_r);
    }
}
