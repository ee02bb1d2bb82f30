//! Small dense/sparse linear algebra kernels used by the objectives.
//!
//! Everything works on plain `&[f64]` slices. The matrices only need
//! `A x` and `Aᵀ r`, so the storage types stay minimal.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Panics if `data.len() != rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "dense matrix shape mismatch");
        DenseMatrix { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn scaled(mut self, alpha: f64) -> Self {
        scale(alpha, &mut self.data);
        self
    }

    /// `out = A x`
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x);
        }
    }

    /// `out = Aᵀ r`
    pub fn matvec_t(&self, r: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, ri) in r.iter().enumerate() {
            if *ri != 0.0 {
                axpy(*ri, self.row(i), out);
            }
        }
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(index, value)` lists. Indices must be `< cols`.
    pub fn from_rows<'a, I>(cols: usize, rows: I) -> Self
    where
        I: IntoIterator<Item = (&'a [usize], &'a [f64])>,
    {
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (idx, val) in rows {
            debug_assert!(idx.iter().all(|&j| j < cols));
            indices.extend_from_slice(idx);
            values.extend_from_slice(val);
            indptr.push(indices.len());
        }
        CsrMatrix {
            rows: indptr.len() - 1,
            cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let (idx, val) = self.row(i);
            *o = idx.iter().zip(val).map(|(&j, v)| v * x[j]).sum();
        }
    }

    pub fn matvec_t(&self, r: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, ri) in r.iter().enumerate() {
            let (idx, val) = self.row(i);
            for (&j, v) in idx.iter().zip(val) {
                out[j] += ri * v;
            }
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            let (idx, val) = self.row(i);
            for (&j, &v) in idx.iter().zip(val) {
                d.set(i, j, v);
            }
        }
        d
    }
}

/// Design matrix of a least-squares or logistic objective.
#[derive(Debug, Clone, PartialEq)]
pub enum Design {
    Dense(DenseMatrix),
    Sparse(CsrMatrix),
    /// Square diagonal matrix stored by its diagonal.
    Diagonal(Vec<f64>),
}

/// Above this many entries a sparse design is kept sparse.
pub const DENSE_CONVERSION_LIMIT: usize = 10_000_000;

impl Design {
    pub fn rows(&self) -> usize {
        match self {
            Design::Dense(a) => a.rows(),
            Design::Sparse(a) => a.rows(),
            Design::Diagonal(d) => d.len(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Design::Dense(a) => a.cols(),
            Design::Sparse(a) => a.cols(),
            Design::Diagonal(d) => d.len(),
        }
    }

    /// Sparse rows become dense when `m·n` fits under [`DENSE_CONVERSION_LIMIT`].
    pub fn from_sparse(csr: CsrMatrix) -> Self {
        if csr.rows().saturating_mul(csr.cols()) <= DENSE_CONVERSION_LIMIT {
            Design::Dense(csr.to_dense())
        } else {
            Design::Sparse(csr)
        }
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Design::Dense(a) => a.matvec(x, out),
            Design::Sparse(a) => a.matvec(x, out),
            Design::Diagonal(d) => {
                for ((o, di), xi) in out.iter_mut().zip(d).zip(x) {
                    *o = di * xi;
                }
            }
        }
    }

    pub fn matvec_t(&self, r: &[f64], out: &mut [f64]) {
        match self {
            Design::Diagonal(_) => self.matvec(r, out),
            Design::Dense(a) => a.matvec_t(r, out),
            Design::Sparse(a) => a.matvec_t(r, out),
        }
    }

    /// Dense copy of `AᵀA`.
    pub fn gram(&self) -> DenseMatrix {
        let n = self.cols();
        let mut g = DenseMatrix::zeros(n, n);
        match self {
            Design::Diagonal(d) => {
                for (i, di) in d.iter().enumerate() {
                    g.set(i, i, di * di);
                }
            }
            Design::Dense(a) => {
                for r in 0..a.rows() {
                    let row = a.row(r);
                    for (i, &ri) in row.iter().enumerate() {
                        if ri == 0.0 {
                            continue;
                        }
                        let gi = &mut g.data[i * n..(i + 1) * n];
                        axpy(ri, row, gi);
                    }
                }
            }
            Design::Sparse(a) => {
                for r in 0..a.rows() {
                    let (idx, val) = a.row(r);
                    for (&i, &vi) in idx.iter().zip(val) {
                        for (&j, &vj) in idx.iter().zip(val) {
                            g.data[i * n + j] += vi * vj;
                        }
                    }
                }
            }
        }
        g
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PowerIterationError {
    #[error("power iteration did not converge in {iters} iterations (last Rayleigh quotients {previous} and {last})")]
    NotConverged { iters: usize, previous: f64, last: f64 },
}

/// Largest eigenvalue of a symmetric positive semidefinite operator by power
/// iteration. Stops once two consecutive Rayleigh quotients agree to `tol`
/// relative. The start vector is a fixed pseudo-random direction so the result
/// is reproducible.
pub fn power_iteration<F>(n: usize, apply: F, iters: usize, tol: f64) -> Result<f64, PowerIterationError>
where
    F: Fn(&[f64], &mut [f64]),
{
    if n == 0 {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a2b);
    let mut q: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let nq = norm(&q);
    scale(1.0 / nq, &mut q);
    let mut z = vec![0.0; n];
    let mut previous = f64::NAN;
    let mut last = f64::NAN;
    for _ in 0..iters {
        apply(&q, &mut z);
        let rq = dot(&q, &z);
        let nz = norm(&z);
        if nz == 0.0 {
            // q is in the null space of a PSD operator started from a generic
            // direction, so the operator is zero.
            return Ok(0.0);
        }
        previous = last;
        last = rq;
        if (last - previous).abs() <= tol * last.abs() {
            return Ok(last);
        }
        for (qi, zi) in q.iter_mut().zip(&z) {
            *qi = zi / nz;
        }
    }
    Err(PowerIterationError::NotConverged {
        iters,
        previous,
        last,
    })
}
