//! Morley finite elements for the biharmonic eigenvalue problem, with
//! Richardson extrapolation and a recovery-based eigenvalue correction.
//!
//! The core is generic over the scalar type through [`Real`]; the `*64`
//! aliases fix it to `f64`.

pub mod adaptive;
pub mod analytic;
pub mod assembly;
pub mod cholesky;
pub mod dense;
pub mod eigensolve;
pub mod elements;
pub mod error;
pub mod geometry;
pub mod hhj_equiv;
pub mod interpolation;
pub mod mesh;
pub mod poly;
pub mod postprocess;
pub mod quadrature;
pub mod scalar;
pub mod sparse;
pub mod study;

pub use adaptive::{adaptive_loop, dorfler_mark, residual_estimator, AdaptiveOptions, AdaptiveStep, ElementEstimate};
pub use analytic::{AnalyticField, Polynomial, SinProduct};
pub use assembly::{BoundaryCondition, DofMap, MorleyField, MorleySpace};
pub use eigensolve::{solve_smallest, EigenOptions, EigenResult};
pub use error::{Error, Result};
pub use geometry::{Point, Sym2, TriangleGeometry};
pub use hhj_equiv::{expansion_terms, hhj_from_morley, hhj_residual, solve_morley_source, HhjSolution, Projector, SourceTerm};
pub use interpolation::{f_functional, interp_hhj, interp_morley, PiecewiseConstSymField};
pub use mesh::{Domain, TriangleMesh};
pub use postprocess::{corrected_eigenvalue, estimate_f_m, extrapolate, fit_rates, recover_hessian, ConvergenceTable, RateFit};
pub use scalar::Real;
pub use sparse::SparseSymMatrix;
pub use study::{uniform_study, LevelResult};

pub type Mesh64 = TriangleMesh<f64>;
pub type Geometry64 = TriangleGeometry<f64>;
pub type Sym64 = Sym2<f64>;
pub type Matrix64 = SparseSymMatrix<f64>;
pub type Space64<'m> = MorleySpace<'m, f64>;
pub type Field64 = MorleyField<f64>;
pub type Eigen64 = EigenResult<f64>;
