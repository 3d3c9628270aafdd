//! Smallest eigenpairs of a symmetric positive definite pencil `K x = lambda M x`
//! by block inverse iteration with Rayleigh-Ritz projection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cholesky::SparseCholesky;
use crate::dense::{generalized_symmetric_eigen, DenseMatrix};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::sparse::SparseSymMatrix;

#[derive(Clone, Debug)]
pub struct EigenOptions<T> {
    /// Number of wanted eigenpairs.
    pub count: usize,
    /// Relative residual `||K x - lambda M x|| / ||K x||` required of each pair.
    pub tol: T,
    pub max_iter: usize,
    /// Extra block vectors beyond `count`.
    pub guard: usize,
    pub seed: u64,
    /// Pencils up to this size are solved densely.
    pub dense_threshold: usize,
}

impl<T: Real> EigenOptions<T> {
    pub fn new(count: usize) -> Self {
        EigenOptions {
            count,
            tol: lit(1e-10),
            max_iter: 500,
            guard: 3,
            seed: 0x5eed,
            dense_threshold: 32,
        }
    }

    pub fn tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Clone, Debug)]
pub struct EigenResult<T> {
    /// Zero-based position in the ascending spectrum.
    pub index: usize,
    pub value: T,
    /// `M`-normalized, largest-magnitude entry positive.
    pub vector: Vec<T>,
    pub residual: T,
    /// Rounding level of `residual` (see [`residual_floor`]); convergence
    /// accepts `residual <= max(tol, FLOOR_FACTOR * residual_floor)`.
    pub residual_floor: T,
}

/// Safety factor applied to the residual rounding floor.
pub const FLOOR_FACTOR: f64 = 4.0;

/// The `q` smallest eigenpairs with default options and tolerance `tol`.
pub fn solve_smallest<T: Real>(
    k: &SparseSymMatrix<T>,
    m: &SparseSymMatrix<T>,
    q: usize,
    tol: T,
) -> Result<Vec<EigenResult<T>>> {
    solve_smallest_with(k, m, &EigenOptions::new(q).tol(tol))
}

pub fn solve_smallest_with<T: Real>(
    k: &SparseSymMatrix<T>,
    m: &SparseSymMatrix<T>,
    opts: &EigenOptions<T>,
) -> Result<Vec<EigenResult<T>>> {
    check_input(k, m, opts)?;
    if k.n() <= opts.dense_threshold {
        return solve_dense(k, m, opts);
    }
    let factor = SparseCholesky::new(k)?;
    solve_smallest_with_factor(&factor, k, m, opts)
}

fn check_input<T: Real>(k: &SparseSymMatrix<T>, m: &SparseSymMatrix<T>, opts: &EigenOptions<T>) -> Result<()> {
    if k.n() != m.n() {
        return Err(Error::InvalidInput("K and M differ in size".into()));
    }
    if opts.count == 0 || opts.count > k.n() {
        return Err(Error::InvalidInput(format!(
            "requested {} eigenpairs of a pencil of size {}",
            opts.count,
            k.n()
        )));
    }
    Ok(())
}

fn residual<T: Real>(k: &SparseSymMatrix<T>, m: &SparseSymMatrix<T>, x: &[T], theta: T) -> T {
    let kx = k.matvec(x);
    let mx = m.matvec(x);
    let mut r = T::zero();
    let mut d = T::zero();
    for i in 0..x.len() {
        let e = kx[i] - theta * mx[i];
        r += e * e;
        d += kx[i] * kx[i];
    }
    (r / d).sqrt()
}

/// Rounding level of the computed residual: `eps || |K||x| + |theta||M||x| || / ||K x||`.
pub fn residual_floor<T: Real>(k: &SparseSymMatrix<T>, m: &SparseSymMatrix<T>, x: &[T], theta: T) -> T {
    let ax: Vec<T> = x.iter().map(|v| v.abs()).collect();
    let ka = abs_matvec(k, &ax);
    let ma = abs_matvec(m, &ax);
    let kx = k.matvec(x);
    let num: T = ka.iter().zip(&ma).map(|(&a, &b)| (a + theta.abs() * b).powi(2)).sum();
    let den: T = kx.iter().map(|&v| v * v).sum();
    T::epsilon() * (num / den).sqrt()
}

fn abs_matvec<T: Real>(a: &SparseSymMatrix<T>, x: &[T]) -> Vec<T> {
    (0..a.n())
        .map(|i| {
            let (c, v) = a.row(i);
            c.iter().zip(v).map(|(&j, &w)| w.abs() * x[j]).sum()
        })
        .collect()
}

fn normalize_sign<T: Real>(x: &mut [T]) {
    let mut big = T::zero();
    for &v in x.iter() {
        if v.abs() > big.abs() {
            big = v;
        }
    }
    if big < T::zero() {
        x.iter_mut().for_each(|v| *v = -*v);
    }
}

fn finish<T: Real>(
    k: &SparseSymMatrix<T>,
    m: &SparseSymMatrix<T>,
    values: &[T],
    vectors: Vec<Vec<T>>,
) -> Vec<EigenResult<T>> {
    values
        .iter()
        .zip(vectors)
        .enumerate()
        .map(|(index, (&value, mut vector))| {
            let norm = m.bilinear(&vector, &vector).sqrt();
            vector.iter_mut().for_each(|v| *v /= norm);
            normalize_sign(&mut vector);
            let residual = residual(k, m, &vector, value);
            let residual_floor = residual_floor(k, m, &vector, value);
            EigenResult {
                index,
                value,
                vector,
                residual,
                residual_floor,
            }
        })
        .collect()
}

fn solve_dense<T: Real>(
    k: &SparseSymMatrix<T>,
    m: &SparseSymMatrix<T>,
    opts: &EigenOptions<T>,
) -> Result<Vec<EigenResult<T>>> {
    let n = k.n();
    let kd = k.to_dense();
    let md = m.to_dense();
    let a = DenseMatrix::from_fn(n, n, |i, j| kd[i][j]);
    let b = DenseMatrix::from_fn(n, n, |i, j| md[i][j]);
    let (values, z) = generalized_symmetric_eigen(&a, &b)
        .map_err(|_| Error::NotPositiveDefinite("mass matrix".into()))?;
    if values[0] <= T::zero() {
        return Err(Error::NotPositiveDefinite("stiffness matrix".into()));
    }
    let q = opts.count;
    let vectors = (0..q).map(|j| z.column(j)).collect();
    Ok(finish(k, m, &values[..q], vectors))
}

/// Subspace iteration on `K^{-1} M` reusing an existing factorization of `K`.
pub fn solve_smallest_with_factor<T: Real>(
    factor: &SparseCholesky<T>,
    k: &SparseSymMatrix<T>,
    m: &SparseSymMatrix<T>,
    opts: &EigenOptions<T>,
) -> Result<Vec<EigenResult<T>>> {
    check_input(k, m, opts)?;
    let n = k.n();
    let q = opts.count;
    let p = n.min(q + opts.guard);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<T>> = (0..p)
        .map(|_| (0..n).map(|_| lit::<T>(rng.random_range(-1.0..1.0))).collect())
        .collect();
    let mut work = Vec::with_capacity(n);
    let mut last_res = vec![T::infinity(); q];
    for _iter in 0..opts.max_iter {
        // Y = K^{-1} M X, with M X kept since Y^T K Y = Y^T M X
        let mx: Vec<Vec<T>> = x.iter().map(|xi| m.matvec(xi)).collect();
        let y: Vec<Vec<T>> = mx
            .iter()
            .map(|b| {
                let mut yi = b.clone();
                factor.solve_in_place(&mut yi, &mut work);
                yi
            })
            .collect();
        let my: Vec<Vec<T>> = y.iter().map(|yi| m.matvec(yi)).collect();
        let dot = |a: &[T], b: &[T]| a.iter().zip(b).map(|(&u, &v)| u * v).sum::<T>();
        let mut kr = DenseMatrix::zeros(p, p);
        let mut mr = DenseMatrix::zeros(p, p);
        for i in 0..p {
            for j in i..p {
                let kij = lit::<T>(0.5) * (dot(&y[i], &mx[j]) + dot(&y[j], &mx[i]));
                let mij = dot(&y[i], &my[j]);
                kr[(i, j)] = kij;
                kr[(j, i)] = kij;
                mr[(i, j)] = mij;
                mr[(j, i)] = mij;
            }
        }
        let (theta, z) = generalized_symmetric_eigen(&kr, &mr)
            .map_err(|_| Error::NotConverged("block lost rank".into()))?;
        x = (0..p)
            .map(|j| {
                let mut v = vec![T::zero(); n];
                for (i, yi) in y.iter().enumerate() {
                    let c = z[(i, j)];
                    for (vk, &yk) in v.iter_mut().zip(yi) {
                        *vk += c * yk;
                    }
                }
                v
            })
            .collect();
        let res: Vec<T> = (0..q).map(|j| residual(k, m, &x[j], theta[j])).collect();
        let converged = (0..q).all(|j| {
            res[j] <= opts.tol || res[j] <= lit::<T>(FLOOR_FACTOR) * residual_floor(k, m, &x[j], theta[j])
        });
        if converged {
            return Ok(finish(k, m, &theta[..q], x.into_iter().take(q).collect()));
        }
        last_res = res;
    }
    let worst = last_res.iter().fold(T::zero(), |a, &b| a.max(b));
    Err(Error::NotConverged(format!(
        "{} iterations, worst residual {worst}",
        opts.max_iter
    )))
}
