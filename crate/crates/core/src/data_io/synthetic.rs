//! Dense synthetic classification data: the upper Cholesky factor of a
//! random symmetric matrix shifted to be positive definite.
//!
//! Recipe: labels `y_i = ±1` with probability ½ each; `R` uniform on
//! `[0,1]^{n×n}`; `M = R + Rᵀ`; if `λ_min(M) < 0` then `M ← M − 2λ_min I`;
//! the data matrix is `X = Lᵀ` where `M = LLᵀ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Dataset;
use crate::error::{Error, Result};
use crate::numkit::{self, CsrMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub seed: u64,
}

const LANCZOS_MAX_STEPS: usize = 600;
const LANCZOS_TOL: f64 = 1e-10;
const LANCZOS_SEED_SALT: u64 = 0x6C61_6E63_7A6F_7321;
const RETRY_SHIFT: f64 = 1e-10;

/// Labels and the symmetric matrix `R + Rᵀ` (row-major), in RNG order:
/// all labels first, then `R` row by row.
fn draw(spec: &SyntheticSpec) -> (Vec<f64>, Vec<f64>) {
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let y: Vec<f64> = (0..n)
        .map(|_| if rng.random::<f64>() > 0.5 { 1.0 } else { -1.0 })
        .collect();
    let mut m: Vec<f64> = (0..n * n).map(|_| rng.random::<f64>()).collect();
    for i in 0..n {
        m[i * n + i] *= 2.0;
        for j in i + 1..n {
            let s = m[i * n + j] + m[j * n + i];
            m[i * n + j] = s;
            m[j * n + i] = s;
        }
    }
    (y, m)
}

fn dense_symv(m: &[f64], n: usize, v: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = numkit::dot_unrolled(&m[i * n..(i + 1) * n], v);
    }
}

/// Number of eigenvalues of the symmetric tridiagonal `(alpha, beta)` that
/// are strictly below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for k in 0..alpha.len() {
        let b2 = if k == 0 { 0.0 } else { beta[k - 1] * beta[k - 1] };
        q = alpha[k] - x - if k == 0 { 0.0 } else { b2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (alpha[k].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue of a tridiagonal matrix by bisection: returns a
/// bracket `(lo, hi)` with `lo ≤ λ_min ≤ hi`.
fn tridiag_min_eig(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..alpha.len() {
        let r = if k > 0 { beta[k - 1].abs() } else { 0.0 }
            + if k < beta.len() { beta[k].abs() } else { 0.0 };
        lo = lo.min(alpha[k] - r);
        hi = hi.max(alpha[k] + r);
    }
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    while hi - lo > 4.0 * f64::EPSILON * scale {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// Last component of the unit eigenvector for the eigenvalue just above
/// `sigma`, by inverse iteration on `T − σI` (positive definite, so the
/// LDLᵀ recurrence needs no pivoting).
fn tridiag_eigvec_last(alpha: &[f64], beta: &[f64], sigma: f64) -> f64 {
    let m = alpha.len();
    let mut d = vec![0.0; m];
    let mut l = vec![0.0; m.saturating_sub(1)];
    d[0] = alpha[0] - sigma;
    for k in 1..m {
        l[k - 1] = beta[k - 1] / d[k - 1];
        d[k] = alpha[k] - sigma - l[k - 1] * beta[k - 1];
    }
    let mut v = vec![1.0; m];
    for _ in 0..3 {
        for k in 1..m {
            v[k] -= l[k - 1] * v[k - 1];
        }
        for k in 0..m {
            v[k] /= d[k];
        }
        for k in (0..m - 1).rev() {
            v[k] -= l[k] * v[k + 1];
        }
        let norm = numkit::norm2(&v);
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v[m - 1]
}

/// Smallest eigenvalue of a dense symmetric matrix by Lanczos with full
/// reorthogonalization. Stops when the Ritz residual `|β_m s_m|` falls below
/// `LANCZOS_TOL·‖M‖`.
fn lanczos_min_eig(m: &[f64], n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ LANCZOS_SEED_SALT);
    let mut q: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let norm = numkit::norm2(&q);
    q.iter_mut().for_each(|v| *v /= norm);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut theta = f64::NAN;
    for step in 0..LANCZOS_MAX_STEPS.min(n) {
        dense_symv(m, n, &q, &mut w);
        let a = numkit::dot(&q, &w);
        alpha.push(a);
        basis.push(q.clone());
        for _ in 0..2 {
            for b in &basis {
                let c = numkit::dot(b, &w);
                numkit::axpy(-c, b, &mut w);
            }
        }
        let b = numkit::norm2(&w);
        let (lo, hi) = tridiag_min_eig(&alpha, &beta);
        theta = 0.5 * (lo + hi);
        let scale = alpha.iter().chain(&beta).fold(0.0f64, |acc, v| acc.max(v.abs())) * 3.0;
        if b <= LANCZOS_TOL * scale || step + 1 == n {
            break;
        }
        let shift = lo - 1e-9 * scale;
        let resid = b * tridiag_eigvec_last(&alpha, &beta, shift).abs();
        if resid <= LANCZOS_TOL * scale {
            break;
        }
        beta.push(b);
        q.iter_mut().zip(&w).for_each(|(qi, wi)| *qi = wi / b);
    }
    theta
}

/// Builds the shifted matrix and returns it with the labels.
fn shifted(spec: &SyntheticSpec) -> (Vec<f64>, Vec<f64>) {
    let n = spec.n;
    let (y, mut m) = draw(spec);
    let lambda_min = lanczos_min_eig(&m, n, spec.seed);
    if lambda_min < 0.0 {
        for i in 0..n {
            m[i * n + i] -= 2.0 * lambda_min;
        }
    }
    (y, m)
}

#[cfg(test)]
pub(crate) fn shifted_gram(spec: &SyntheticSpec) -> Vec<f64> {
    shifted(spec).1
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    let n = spec.n;
    if n < 2 {
        return Err(Error::Config(format!("synthetic dimension must be >= 2, got {n}")));
    }
    let (y, mut m) = shifted(spec);
    if numkit::cholesky_in_place(&mut m, n).is_err() {
        let (_, again) = shifted(spec);
        m = again;
        for i in 0..n {
            m[i * n + i] += RETRY_SHIFT;
        }
        numkit::cholesky_in_place(&mut m, n).map_err(|e| {
            Error::Internal(format!("synthetic matrix not positive definite after shift: {e}"))
        })?;
    }

    // X = Lᵀ: row i holds column i of L from the diagonal down
    let mut indptr = Vec::with_capacity(n + 1);
    let mut indices = Vec::with_capacity(n * (n + 1) / 2);
    let mut values = Vec::with_capacity(n * (n + 1) / 2);
    indptr.push(0);
    for i in 0..n {
        for k in i..n {
            let v = m[k * n + i];
            if v != 0.0 {
                indices.push(k);
                values.push(v);
            }
        }
        indptr.push(indices.len());
    }
    drop(m);
    let a = CsrMatrix::new(n, n, indptr, indices, values)?;
    Dataset::new(a, y)
}
