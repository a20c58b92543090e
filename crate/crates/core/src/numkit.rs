//! Small numerical kernels: row-compressed sparse matrices, dense vector
//! helpers and spectral-norm estimation.
//!
//! Vectors are plain `[f64]` slices. All products are deterministic: the
//! row-parallel `A·v` path computes each row exactly as the serial path does,
//! and `Aᵀ·v` is a serial row scatter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{check_len, Error, Result};

/// Below this many stored entries `matvec` stays on the calling thread.
const PAR_NNZ_THRESHOLD: usize = 1 << 16;

/// Row-compressed sparse matrix with strictly increasing column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if indptr.len() != n_rows + 1 {
            return Err(Error::InvalidMatrix(format!(
                "indptr has length {}, expected {}",
                indptr.len(),
                n_rows + 1
            )));
        }
        if indices.len() != values.len() {
            return Err(Error::InvalidMatrix(
                "indices and values differ in length".into(),
            ));
        }
        if indptr[0] != 0 || indptr[n_rows] != indices.len() {
            return Err(Error::InvalidMatrix("indptr does not span the entries".into()));
        }
        for r in 0..n_rows {
            let (lo, hi) = (indptr[r], indptr[r + 1]);
            if lo > hi {
                return Err(Error::InvalidMatrix(format!("indptr decreases at row {r}")));
            }
            let row = &indices[lo..hi];
            if let Some(&c) = row.iter().find(|&&c| c >= n_cols) {
                return Err(Error::InvalidMatrix(format!(
                    "column {c} out of bounds in row {r} (n_cols = {n_cols})"
                )));
            }
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidMatrix(format!(
                    "column indices not strictly increasing in row {r}"
                )));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite stored value".into()));
        }
        Ok(CsrMatrix {
            n_rows,
            n_cols,
            indptr,
            indices,
            values,
        })
    }

    /// Builds a matrix from row-major dense data, dropping exact zeros.
    pub fn from_dense(n_rows: usize, n_cols: usize, data: &[f64]) -> Result<Self> {
        check_len(n_rows * n_cols, data.len())?;
        let mut indptr = Vec::with_capacity(n_rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in data.chunks(n_cols.max(1)).take(n_rows) {
            for (c, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        // n_cols == 0 leaves chunks() empty
        indptr.resize(n_rows + 1, indices.len());
        CsrMatrix::new(n_rows, n_cols, indptr, indices, values)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::InvalidMatrix("ragged rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        CsrMatrix::from_dense(rows.len(), n_cols, &flat)
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for (i, &d) in diag.iter().enumerate() {
            if d != 0.0 {
                indices.push(i);
                values.push(d);
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            n_rows: n,
            n_cols: n,
            indptr,
            indices,
            values,
        }
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        CsrMatrix {
            n_rows,
            n_cols,
            indptr: vec![0; n_rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.indptr[r], self.indptr[r + 1]);
        (&self.indices[lo..hi], &self.values[lo..hi])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (idx, vals) = self.row(r);
        match idx.binary_search(&c) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (r, row) in out.iter_mut().enumerate() {
            let (idx, vals) = self.row(r);
            for (&c, &v) in idx.iter().zip(vals) {
                row[c] = v;
            }
        }
        out
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for c in 0..self.n_cols {
            counts[c + 1] += counts[c];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for r in 0..self.n_rows {
            let (idx, vals) = self.row(r);
            for (&c, &v) in idx.iter().zip(vals) {
                let p = next[c];
                indices[p] = r;
                values[p] = v;
                next[c] += 1;
            }
        }
        CsrMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            indptr,
            indices,
            values,
        }
    }

    /// `A·v`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n_cols, v.len())?;
        let mut out = vec![0.0; self.n_rows];
        self.matvec_into(v, &mut out);
        Ok(out)
    }

    /// `Aᵀ·v`, computed by scattering rows; the transpose is never formed.
    pub fn matvec_transpose(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n_rows, v.len())?;
        let mut out = vec![0.0; self.n_cols];
        self.matvec_transpose_into(v, &mut out);
        Ok(out)
    }

    /// Unchecked `out = A·v`. Lengths must already agree.
    pub(crate) fn matvec_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.n_cols);
        debug_assert_eq!(out.len(), self.n_rows);
        let row_dot = |r: usize| -> f64 {
            let (idx, vals) = self.row(r);
            idx.iter().zip(vals).map(|(&c, &a)| a * v[c]).sum()
        };
        if self.nnz() >= PAR_NNZ_THRESHOLD {
            out.par_iter_mut()
                .enumerate()
                .for_each(|(r, o)| *o = row_dot(r));
        } else {
            for (r, o) in out.iter_mut().enumerate() {
                *o = row_dot(r);
            }
        }
    }

    /// Unchecked `out = Aᵀ·v`.
    pub(crate) fn matvec_transpose_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.n_rows);
        debug_assert_eq!(out.len(), self.n_cols);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (r, &vr) in v.iter().enumerate() {
            if vr == 0.0 {
                continue;
            }
            let (idx, vals) = self.row(r);
            for (&c, &a) in idx.iter().zip(vals) {
                out[c] += a * vr;
            }
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `y += alpha·x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// Estimates `‖A‖₂²` by power iteration on `AᵀA` from a seeded random start.
///
/// The result is the Rayleigh quotient of `AᵀA` at the final iterate, so it
/// never exceeds the true value and does not decrease as `iters` grows.
pub fn estimate_spectral_norm_sq(a: &CsrMatrix, iters: usize, seed: u64) -> f64 {
    let iters = iters.max(1);
    if a.nnz() == 0 || a.n_cols() == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..a.n_cols()).map(|_| rng.random::<f64>() - 0.5).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let mut av = vec![0.0; a.n_rows()];
    let mut atav = vec![0.0; a.n_cols()];
    for _ in 0..iters {
        a.matvec_into(&v, &mut av);
        a.matvec_transpose_into(&av, &mut atav);
        let nrm = norm2(&atav);
        if nrm == 0.0 {
            return 0.0;
        }
        for (vi, wi) in v.iter_mut().zip(&atav) {
            *vi = wi / nrm;
        }
    }
    a.matvec_into(&v, &mut av);
    dot(&av, &av)
}

/// Squared column norms and diagonal of `G = Aᵀ·diag(w)·A + ridge·I`.
///
/// `G` is never stored whole: it is produced in column blocks from the row
/// structure of `A`, and only the upper triangle of each block is computed,
/// with symmetry supplying the rest of every column norm.
pub fn weighted_gram_column_stats(
    a: &CsrMatrix,
    weights: &[f64],
    ridge: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    const BLOCK: usize = 64;
    check_len(a.n_rows(), weights.len())?;
    let n = a.n_cols();
    let cells = a.n_rows().saturating_mul(n);
    if a.nnz() >= cells / 4
        && cells <= DENSE_GRAM_MAX_CELLS
        && weights.iter().all(|&w| w >= 0.0)
    {
        return Ok(dense_weighted_gram_column_stats(a, weights, ridge));
    }
    let mut norms_sq = vec![0.0; n];
    let mut diag = vec![0.0; n];
    // per-row position of the first entry with column >= current block start
    let mut cursor: Vec<usize> = a.indptr[..a.n_rows()].to_vec();
    let mut block = vec![0.0; n.min(BLOCK) * n];
    let mut u = [0.0; BLOCK];

    let mut j0 = 0;
    while j0 < n {
        let j1 = (j0 + BLOCK).min(n);
        let b = j1 - j0;
        block[..j1 * b].iter_mut().for_each(|x| *x = 0.0);
        for r in 0..a.n_rows() {
            let start = cursor[r];
            let end_row = a.indptr[r + 1];
            let mut p = start;
            while p < end_row && a.indices[p] < j1 {
                p += 1;
            }
            cursor[r] = p;
            if p == start || weights[r] == 0.0 {
                continue;
            }
            u[..b].iter_mut().for_each(|x| *x = 0.0);
            for q in start..p {
                u[a.indices[q] - j0] = weights[r] * a.values[q];
            }
            // rows k < j1 of the block: entries of row r with column < j1
            for q in a.indptr[r]..p {
                let k = a.indices[q];
                let akq = a.values[q];
                let dst = &mut block[k * b..(k + 1) * b];
                for (d, &uj) in dst.iter_mut().zip(&u[..b]) {
                    *d += akq * uj;
                }
            }
        }
        for j in j0..j1 {
            block[j * b + (j - j0)] += ridge;
            diag[j] = block[j * b + (j - j0)];
        }
        for k in 0..j1 {
            let row = &block[k * b..(k + 1) * b];
            for (jj, &g) in row.iter().enumerate() {
                let g2 = g * g;
                norms_sq[j0 + jj] += g2;
                if k < j0 {
                    norms_sq[k] += g2;
                }
            }
        }
        j0 = j1;
    }
    Ok((norms_sq, diag))
}

/// Largest `rows × cols` routed through the dense GEMM path (512 MB).
const DENSE_GRAM_MAX_CELLS: usize = 1 << 26;

fn dense_weighted_gram_column_stats(
    a: &CsrMatrix,
    weights: &[f64],
    ridge: f64,
) -> (Vec<f64>, Vec<f64>) {
    const NB: usize = 256;
    let (m, n) = (a.n_rows(), a.n_cols());
    // B = W^{1/2} A, so that the Gram matrix is BᵀB
    let mut b = vec![0.0; m * n];
    for r in 0..m {
        let s = weights[r].sqrt();
        let (cols, vals) = a.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            b[r * n + c] = s * v;
        }
    }
    let mut diag = vec![0.0; n];
    let mut norms_sq = vec![0.0; n];
    let mut block = vec![0.0; NB * NB];
    for i0 in (0..n).step_by(NB) {
        let bi = NB.min(n - i0);
        for j0 in (i0..n).step_by(NB) {
            let bj = NB.min(n - j0);
            // block = B[:, I]ᵀ B[:, J]
            unsafe {
                matrixmultiply::dgemm(
                    bi,
                    m,
                    bj,
                    1.0,
                    b.as_ptr().add(i0),
                    1,
                    n as isize,
                    b.as_ptr().add(j0),
                    n as isize,
                    1,
                    0.0,
                    block.as_mut_ptr(),
                    bj as isize,
                    1,
                );
            }
            for ii in 0..bi {
                let row = &mut block[ii * bj..(ii + 1) * bj];
                if i0 == j0 {
                    row[ii] += ridge;
                    diag[i0 + ii] = row[ii];
                }
                let mut row_sq = 0.0;
                for (acc, &v) in norms_sq[j0..j0 + bj].iter_mut().zip(row.iter()) {
                    *acc += v * v;
                    row_sq += v * v;
                }
                if i0 != j0 {
                    norms_sq[i0 + ii] += row_sq;
                }
            }
        }
    }
    (norms_sq, diag)
}

/// Dot product with four independent accumulators; faster than [`dot`] on
/// long slices and rounded differently.
pub fn dot_unrolled(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// In-place Cholesky factorization of a dense symmetric `n × n` row-major
/// matrix. On success the lower triangle holds `L` with `A = LLᵀ` and the
/// strict upper triangle is zeroed. Fails at the first non-positive pivot.
///
/// Right-looking and blocked: each panel is factored directly and the
/// trailing lower triangle is updated with matrix products.
pub fn cholesky_in_place(a: &mut [f64], n: usize) -> Result<()> {
    const NB: usize = 128;
    check_len(n * n, a.len())?;
    for k0 in (0..n).step_by(NB) {
        let k1 = (k0 + NB).min(n);
        // diagonal block, then the panel below it
        for i in k0..n {
            let (done, rest) = a.split_at_mut(i * n);
            let row_i = &mut rest[..n];
            for j in k0..k1.min(i) {
                let row_j = &done[j * n + k0..j * n + j];
                let s = row_i[j] - dot_unrolled(&row_i[k0..j], row_j);
                row_i[j] = s / done[j * n + j];
            }
            if i < k1 {
                let d = row_i[i] - dot_unrolled(&row_i[k0..i], &row_i[k0..i]);
                if !(d > 0.0) || !d.is_finite() {
                    return Err(Error::InvalidMatrix(format!(
                        "matrix is not positive definite (pivot {i} = {d:e})"
                    )));
                }
                row_i[i] = d.sqrt();
            }
        }
        // A[R, C] −= P_R P_Cᵀ over row blocks R and column blocks C ≤ R below k1
        let kb = k1 - k0;
        let ptr = a.as_mut_ptr();
        for r0 in (k1..n).step_by(NB) {
            let rb = NB.min(n - r0);
            for c0 in (k1..=r0).step_by(NB) {
                let cb = NB.min(n - c0);
                // the panel (columns k0..k1) and the target (columns ≥ k1)
                // occupy disjoint elements
                unsafe {
                    matrixmultiply::dgemm(
                        rb,
                        kb,
                        cb,
                        -1.0,
                        ptr.add(r0 * n + k0),
                        n as isize,
                        1,
                        ptr.add(c0 * n + k0),
                        1,
                        n as isize,
                        1.0,
                        ptr.add(r0 * n + c0),
                        n as isize,
                        1,
                    );
                }
            }
        }
    }
    for i in 0..n {
        a[i * n + i + 1..(i + 1) * n].iter_mut().for_each(|v| *v = 0.0);
    }
    Ok(())
}

/// Solves `LLᵀx = b` given the factor from [`cholesky_in_place`].
pub fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(l.len(), n * n);
    let mut y = b.to_vec();
    for i in 0..n {
        let s = y[i] - dot(&l[i * n..i * n + i], &y[..i]);
        y[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    y
}
