//! Sparse Cholesky factorization `P A P^T = L L^T` with an approximate
//! minimum degree ordering and an up-looking numeric phase.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::sparse::SparseSymMatrix;

const NONE: usize = usize::MAX;

#[derive(Clone, Debug)]
pub struct SparseCholesky<T> {
    n: usize,
    perm: Vec<usize>,
    /// Column pointers of `L`; the diagonal is the first entry of each column.
    lp: Vec<usize>,
    li: Vec<u32>,
    lx: Vec<T>,
}

/// Upper triangle of `P A P^T` in compressed column form.
struct Upper<T> {
    cp: Vec<usize>,
    ci: Vec<usize>,
    cx: Vec<T>,
}

fn permuted_upper<T: Real>(a: &SparseSymMatrix<T>, perm: &[usize], pinv: &[usize]) -> Upper<T> {
    let n = a.n();
    let mut cp = vec![0usize; n + 1];
    let mut ci = Vec::with_capacity(a.nnz() / 2 + n);
    let mut cx = Vec::with_capacity(a.nnz() / 2 + n);
    for k in 0..n {
        let (cols, vals) = a.row(perm[k]);
        for (&j, &v) in cols.iter().zip(vals) {
            let i = pinv[j];
            if i <= k {
                ci.push(i);
                cx.push(v);
            }
        }
        cp[k + 1] = ci.len();
    }
    Upper { cp, ci, cx }
}

fn etree<T>(c: &Upper<T>, n: usize) -> Vec<usize> {
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for k in 0..n {
        for &i0 in &c.ci[c.cp[k]..c.cp[k + 1]] {
            let mut i = i0;
            while i != NONE && i < k {
                let next = ancestor[i];
                ancestor[i] = k;
                if next == NONE {
                    parent[i] = k;
                }
                i = next;
            }
        }
    }
    parent
}

/// Nonzero pattern of row `k` of `L` (excluding the diagonal), written to
/// `s[top..n]` in topological order.
fn ereach<T>(c: &Upper<T>, k: usize, parent: &[usize], s: &mut [usize], mark: &mut [usize], stamp: usize) -> usize {
    let n = s.len();
    let mut top = n;
    mark[k] = stamp;
    for &i0 in &c.ci[c.cp[k]..c.cp[k + 1]] {
        if i0 > k {
            continue;
        }
        let mut i = i0;
        let mut len = 0;
        while mark[i] != stamp {
            s[len] = i;
            len += 1;
            mark[i] = stamp;
            i = parent[i];
        }
        while len > 0 {
            top -= 1;
            len -= 1;
            s[top] = s[len];
        }
    }
    top
}

impl<T: Real> SparseCholesky<T> {
    /// Factors a symmetric positive definite matrix.
    pub fn new(a: &SparseSymMatrix<T>) -> Result<Self> {
        let n = a.n();
        if n == 0 {
            return Ok(SparseCholesky {
                n,
                perm: vec![],
                lp: vec![0],
                li: vec![],
                lx: vec![],
            });
        }
        if n > u32::MAX as usize {
            return Err(Error::InvalidInput("matrix too large".into()));
        }
        let (perm, pinv, _) = amd::order::<usize>(n, a.row_ptr(), a.col_indices(), &amd::Control::default())
            .map_err(|s| Error::InvalidInput(format!("ordering failed: {s:?}")))?;
        let c = permuted_upper(a, &perm, &pinv);
        let parent = etree(&c, n);

        let mut s = vec![0usize; n];
        let mut mark = vec![NONE; n];
        let mut counts = vec![1usize; n];
        for k in 0..n {
            let top = ereach(&c, k, &parent, &mut s, &mut mark, k);
            for &j in &s[top..] {
                counts[j] += 1;
            }
        }
        let mut lp = vec![0usize; n + 1];
        for j in 0..n {
            lp[j + 1] = lp[j] + counts[j];
        }
        let nnz = lp[n];
        let mut li = vec![0u32; nnz];
        let mut lx = vec![T::zero(); nnz];
        let mut next: Vec<usize> = lp[..n].to_vec();
        let mut x = vec![T::zero(); n];
        mark.iter_mut().for_each(|m| *m = NONE);

        let tiny = T::epsilon() * lit(16.0);
        for k in 0..n {
            let top = ereach(&c, k, &parent, &mut s, &mut mark, k);
            for p in c.cp[k]..c.cp[k + 1] {
                let i = c.ci[p];
                if i <= k {
                    x[i] += c.cx[p];
                }
            }
            let akk = x[k];
            let mut d = akk;
            x[k] = T::zero();
            for &i in &s[top..] {
                let lki = x[i] / lx[lp[i]];
                x[i] = T::zero();
                for p in lp[i] + 1..next[i] {
                    x[li[p] as usize] -= lx[p] * lki;
                }
                d -= lki * lki;
                let p = next[i];
                next[i] += 1;
                li[p] = k as u32;
                lx[p] = lki;
            }
            // Pivot relative to its own diagonal entry: graded meshes span many
            // orders of magnitude, so a global scale is meaningless.
            if !(d > tiny * akk.abs()) {
                return Err(Error::NotPositiveDefinite(format!("pivot {k} is {d}")));
            }
            let p = next[k];
            next[k] += 1;
            li[p] = k as u32;
            lx[p] = d.sqrt();
        }
        Ok(SparseCholesky { n, perm, lp, li, lx })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored entries of `L`.
    pub fn nnz(&self) -> usize {
        self.lx.len()
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [T], work: &mut Vec<T>) {
        let n = self.n;
        work.clear();
        work.extend(self.perm.iter().map(|&p| b[p]));
        let x = work.as_mut_slice();
        for j in 0..n {
            let xj = x[j] / self.lx[self.lp[j]];
            x[j] = xj;
            for p in self.lp[j] + 1..self.lp[j + 1] {
                x[self.li[p] as usize] -= self.lx[p] * xj;
            }
        }
        for j in (0..n).rev() {
            let mut xj = x[j];
            for p in self.lp[j] + 1..self.lp[j + 1] {
                xj -= self.lx[p] * x[self.li[p] as usize];
            }
            x[j] = xj / self.lx[self.lp[j]];
        }
        for (k, &p) in self.perm.iter().enumerate() {
            b[p] = x[k];
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        let mut w = Vec::with_capacity(self.n);
        self.solve_in_place(&mut x, &mut w);
        x
    }

    /// `log det A`.
    pub fn log_det(&self) -> T {
        (0..self.n).map(|j| self.lx[self.lp[j]].ln()).sum::<T>() * lit(2.0)
    }
}
