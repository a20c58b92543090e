//! Smooth convex losses `f` with value, gradient, Hessian-vector products and
//! a Lipschitz bound for `∇f`.
//!
//! Data-fitting losses are averaged over the `N` rows of the data matrix, so
//! the penalty `μ` is on the scale of a single sample:
//!
//! * logistic: `f(x) = (1/N) Σ log(1 + exp(−yᵢ aᵢᵀx)) + (ridge/2)‖x‖²`
//! * least squares: `f(x) = (1/2N) ‖Ax − b‖² + (ridge/2)‖x‖²`
//! * quadratic: `f(x) = ½ xᵀHx + cᵀx + (ridge/2)‖x‖²`

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::numkit::{self, CsrMatrix};

/// Power iterations used for the Lipschitz estimate.
pub const LIPSCHITZ_POWER_ITERS: usize = 100;
/// Seed of the power-iteration start vector.
pub const LIPSCHITZ_SEED: u64 = 0x0BA5_EED;
/// Multiplier applied to the power-iteration estimate, which is a lower bound.
pub const LIPSCHITZ_SAFETY: f64 = 1.02;

/// `∇²f(x)` frozen at a point and applied as an operator.
pub trait HessianOperator {
    fn dim(&self) -> usize;

    /// `out = ∇²f(x)·v`; lengths are the caller's responsibility.
    fn apply(&self, v: &[f64], out: &mut [f64]);
}

/// A convex, continuously differentiable function with Lipschitz gradient.
pub trait SmoothObjective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> Result<f64>;

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        Ok((self.value(x)?, self.gradient(x)?))
    }

    fn hess_vec(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), v.len())?;
        let op = self.hessian_at(x)?;
        let mut out = vec![0.0; self.dim()];
        op.apply(v, &mut out);
        Ok(out)
    }

    /// Hessian at `x`, with whatever per-point work it needs done once.
    fn hessian_at<'a>(&'a self, x: &[f64]) -> Result<Box<dyn HessianOperator + 'a>>;

    /// Upper bound on `‖∇²f‖₂` over all of ℝⁿ.
    fn lipschitz(&self) -> f64;

    /// Squared Euclidean column norms and diagonal of `∇²f(x)`.
    ///
    /// The default probes every column with a unit vector.
    fn hessian_column_stats(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.dim();
        let op = self.hessian_at(x)?;
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        let mut norms_sq = Vec::with_capacity(n);
        let mut diag = Vec::with_capacity(n);
        for j in 0..n {
            e[j] = 1.0;
            op.apply(&e, &mut col);
            e[j] = 0.0;
            norms_sq.push(numkit::dot(&col, &col));
            diag.push(col[j]);
        }
        Ok((norms_sq, diag))
    }

    /// Dense row-major block `∇²f(x)[cols, cols]`.
    ///
    /// The default probes each selected column with a unit vector.
    fn hessian_block(&self, x: &[f64], cols: &[usize]) -> Result<Vec<f64>> {
        let n = self.dim();
        let k = cols.len();
        let op = self.hessian_at(x)?;
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        let mut block = vec![0.0; k * k];
        for (c, &j) in cols.iter().enumerate() {
            e[j] = 1.0;
            op.apply(&e, &mut col);
            e[j] = 0.0;
            for (r, &i) in cols.iter().enumerate() {
                block[r * k + c] = col[i];
            }
        }
        Ok(block)
    }
}

/// Position of each selected column, `usize::MAX` elsewhere.
fn local_index(n: usize, cols: &[usize]) -> Result<Vec<usize>> {
    let mut local = vec![usize::MAX; n];
    for (p, &j) in cols.iter().enumerate() {
        if j >= n {
            return Err(Error::InvalidInput(format!("column {j} out of range for dimension {n}")));
        }
        local[j] = p;
    }
    Ok(local)
}

/// `(AᵀWA)[cols, cols] + ridge·I`, one pass over the rows of `A`.
fn weighted_gram_block(a: &CsrMatrix, w: &[f64], ridge: f64, cols: &[usize]) -> Result<Vec<f64>> {
    let k = cols.len();
    let local = local_index(a.n_cols(), cols)?;
    let mut block = vec![0.0; k * k];
    let mut hit: Vec<(usize, f64)> = Vec::with_capacity(k);
    for (r, &wr) in w.iter().enumerate() {
        let (idx, vals) = a.row(r);
        hit.clear();
        hit.extend(
            idx.iter()
                .zip(vals)
                .filter(|(&j, _)| local[j] != usize::MAX)
                .map(|(&j, &v)| (local[j], v)),
        );
        for (p, &(i, vi)) in hit.iter().enumerate() {
            let s = wr * vi;
            for &(j, vj) in &hit[p..] {
                block[i.min(j) * k + i.max(j)] += s * vj;
            }
        }
    }
    for i in 0..k {
        block[i * k + i] += ridge;
        for j in 0..i {
            block[i * k + j] = block[j * k + i];
        }
    }
    Ok(block)
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// `1 / (1 + exp(−z))` without overflow.
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn check_ridge(ridge: f64) -> Result<()> {
    if ridge.is_finite() && ridge >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("ridge must be >= 0, got {ridge}")))
    }
}

/// Binary logistic regression on rows of `A` with labels in {−1, +1}.
#[derive(Clone)]
pub struct LogisticLoss {
    a: CsrMatrix,
    y: Vec<f64>,
    ridge: f64,
    lipschitz: f64,
}

impl LogisticLoss {
    pub fn new(a: CsrMatrix, y: Vec<f64>, ridge: f64) -> Result<Self> {
        check_len(a.n_rows(), y.len())?;
        check_ridge(ridge)?;
        if let Some(bad) = y.iter().find(|&&l| l != 1.0 && l != -1.0) {
            return Err(Error::InvalidInput(format!(
                "logistic labels must be -1 or +1, found {bad}"
            )));
        }
        if a.n_rows() == 0 {
            return Err(Error::InvalidInput("logistic loss needs at least one row".into()));
        }
        let norm_sq = numkit::estimate_spectral_norm_sq(&a, LIPSCHITZ_POWER_ITERS, LIPSCHITZ_SEED);
        let lipschitz = LIPSCHITZ_SAFETY * norm_sq / (4.0 * a.n_rows() as f64) + ridge;
        Ok(LogisticLoss {
            a,
            y,
            ridge,
            lipschitz,
        })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.a
    }

    pub fn labels(&self) -> &[f64] {
        &self.y
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    fn margins(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.a.n_cols(), x.len())?;
        let mut ax = vec![0.0; self.a.n_rows()];
        self.a.matvec_into(x, &mut ax);
        for (m, &yi) in ax.iter_mut().zip(&self.y) {
            *m *= yi;
        }
        Ok(ax)
    }

    /// Per-row curvature `σ(m)(1 − σ(m))/N` at margins `m`.
    fn curvature_weights(&self, x: &[f64]) -> Result<Vec<f64>> {
        let inv_n = 1.0 / self.a.n_rows() as f64;
        Ok(self
            .margins(x)?
            .into_iter()
            .map(|m| {
                let s = sigmoid(m);
                s * (1.0 - s) * inv_n
            })
            .collect())
    }
}

impl fmt::Debug for LogisticLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LogisticLoss")
            .field("rows", &self.a.n_rows())
            .field("cols", &self.a.n_cols())
            .field("ridge", &self.ridge)
            .finish()
    }
}

impl SmoothObjective for LogisticLoss {
    fn dim(&self) -> usize {
        self.a.n_cols()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let m = self.margins(x)?;
        let inv_n = 1.0 / m.len() as f64;
        Ok(m.iter().map(|&mi| softplus(-mi)).sum::<f64>() * inv_n
            + 0.5 * self.ridge * numkit::dot(x, x))
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.value_and_gradient(x)?.1)
    }

    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let m = self.margins(x)?;
        let inv_n = 1.0 / m.len() as f64;
        let value = m.iter().map(|&mi| softplus(-mi)).sum::<f64>() * inv_n
            + 0.5 * self.ridge * numkit::dot(x, x);
        // s_i = −y_i σ(−m_i) / N
        let s: Vec<f64> = m
            .iter()
            .zip(&self.y)
            .map(|(&mi, &yi)| -yi * sigmoid(-mi) * inv_n)
            .collect();
        let mut g = vec![0.0; self.dim()];
        self.a.matvec_transpose_into(&s, &mut g);
        numkit::axpy(self.ridge, x, &mut g);
        Ok((value, g))
    }

    fn hessian_at<'a>(&'a self, x: &[f64]) -> Result<Box<dyn HessianOperator + 'a>> {
        Ok(Box::new(GramHessian {
            a: &self.a,
            weights: self.curvature_weights(x)?,
            ridge: self.ridge,
        }))
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn hessian_column_stats(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let w = self.curvature_weights(x)?;
        numkit::weighted_gram_column_stats(&self.a, &w, self.ridge)
    }

    fn hessian_block(&self, x: &[f64], cols: &[usize]) -> Result<Vec<f64>> {
        let w = self.curvature_weights(x)?;
        weighted_gram_block(&self.a, &w, self.ridge, cols)
    }
}

/// LASSO-style least squares `(1/2N)‖Ax − b‖²`.
#[derive(Clone)]
pub struct LeastSquaresLoss {
    a: CsrMatrix,
    b: Vec<f64>,
    ridge: f64,
    lipschitz: f64,
}

impl LeastSquaresLoss {
    pub fn new(a: CsrMatrix, b: Vec<f64>, ridge: f64) -> Result<Self> {
        check_len(a.n_rows(), b.len())?;
        check_ridge(ridge)?;
        if a.n_rows() == 0 {
            return Err(Error::InvalidInput("least squares needs at least one row".into()));
        }
        if !numkit::all_finite(&b) {
            return Err(Error::InvalidInput("non-finite target".into()));
        }
        let norm_sq = numkit::estimate_spectral_norm_sq(&a, LIPSCHITZ_POWER_ITERS, LIPSCHITZ_SEED);
        let lipschitz = LIPSCHITZ_SAFETY * norm_sq / a.n_rows() as f64 + ridge;
        Ok(LeastSquaresLoss {
            a,
            b,
            ridge,
            lipschitz,
        })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.a
    }

    pub fn targets(&self) -> &[f64] {
        &self.b
    }

    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.a.n_cols(), x.len())?;
        let mut r = vec![0.0; self.a.n_rows()];
        self.a.matvec_into(x, &mut r);
        for (ri, bi) in r.iter_mut().zip(&self.b) {
            *ri -= bi;
        }
        Ok(r)
    }
}

impl fmt::Debug for LeastSquaresLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LeastSquaresLoss")
            .field("rows", &self.a.n_rows())
            .field("cols", &self.a.n_cols())
            .field("ridge", &self.ridge)
            .finish()
    }
}

impl SmoothObjective for LeastSquaresLoss {
    fn dim(&self) -> usize {
        self.a.n_cols()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let r = self.residual(x)?;
        let inv_n = 1.0 / r.len() as f64;
        Ok(0.5 * numkit::dot(&r, &r) * inv_n + 0.5 * self.ridge * numkit::dot(x, x))
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.value_and_gradient(x)?.1)
    }

    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mut r = self.residual(x)?;
        let inv_n = 1.0 / r.len() as f64;
        let value = 0.5 * numkit::dot(&r, &r) * inv_n + 0.5 * self.ridge * numkit::dot(x, x);
        r.iter_mut().for_each(|v| *v *= inv_n);
        let mut g = vec![0.0; self.dim()];
        self.a.matvec_transpose_into(&r, &mut g);
        numkit::axpy(self.ridge, x, &mut g);
        Ok((value, g))
    }

    fn hessian_at<'a>(&'a self, x: &[f64]) -> Result<Box<dyn HessianOperator + 'a>> {
        check_len(self.dim(), x.len())?;
        Ok(Box::new(GramHessian {
            a: &self.a,
            weights: vec![1.0 / self.a.n_rows() as f64; self.a.n_rows()],
            ridge: self.ridge,
        }))
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn hessian_column_stats(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        check_len(self.dim(), x.len())?;
        let w = vec![1.0 / self.a.n_rows() as f64; self.a.n_rows()];
        numkit::weighted_gram_column_stats(&self.a, &w, self.ridge)
    }

    fn hessian_block(&self, x: &[f64], cols: &[usize]) -> Result<Vec<f64>> {
        check_len(self.dim(), x.len())?;
        let w = vec![1.0 / self.a.n_rows() as f64; self.a.n_rows()];
        weighted_gram_block(&self.a, &w, self.ridge, cols)
    }
}

/// `½ xᵀHx + cᵀx` with an explicit symmetric positive-semidefinite `H`.
#[derive(Clone)]
pub struct QuadraticLoss {
    h: CsrMatrix,
    c: Vec<f64>,
    ridge: f64,
    lipschitz: f64,
}

impl QuadraticLoss {
    pub fn new(h: CsrMatrix, c: Vec<f64>, ridge: f64) -> Result<Self> {
        if h.n_rows() != h.n_cols() {
            return Err(Error::InvalidMatrix(format!(
                "quadratic term must be square, got {}x{}",
                h.n_rows(),
                h.n_cols()
            )));
        }
        check_len(h.n_rows(), c.len())?;
        check_ridge(ridge)?;
        if !numkit::all_finite(&c) {
            return Err(Error::InvalidInput("non-finite linear term".into()));
        }
        // adjoint spot check ⟨Hu, v⟩ = ⟨u, Hv⟩ on seeded random probes
        let n = h.n_rows();
        let mut rng = ChaCha8Rng::seed_from_u64(LIPSCHITZ_SEED);
        for _ in 0..3 {
            let u: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let hu = h.matvec(&u)?;
            let hv = h.matvec(&v)?;
            let lhs = numkit::dot(&hu, &v);
            let rhs = numkit::dot(&u, &hv);
            let scale = numkit::norm2(&hu) * numkit::norm2(&v) + numkit::norm2(&u) * numkit::norm2(&hv);
            if (lhs - rhs).abs() > 1e-10 * (1.0 + scale) {
                return Err(Error::InvalidMatrix("quadratic term is not symmetric".into()));
            }
        }
        // ‖H‖₂ = sqrt(‖H‖₂²) for symmetric H
        let norm = numkit::estimate_spectral_norm_sq(&h, LIPSCHITZ_POWER_ITERS, LIPSCHITZ_SEED).sqrt();
        let lipschitz = LIPSCHITZ_SAFETY * norm + ridge;
        Ok(QuadraticLoss {
            h,
            c,
            ridge,
            lipschitz,
        })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.h
    }

    pub fn linear(&self) -> &[f64] {
        &self.c
    }
}

impl fmt::Debug for QuadraticLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuadraticLoss")
            .field("n", &self.h.n_rows())
            .field("ridge", &self.ridge)
            .finish()
    }
}

impl SmoothObjective for QuadraticLoss {
    fn dim(&self) -> usize {
        self.h.n_rows()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let hx = self.h.matvec(x)?;
        Ok(0.5 * numkit::dot(x, &hx) + numkit::dot(&self.c, x) + 0.5 * self.ridge * numkit::dot(x, x))
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut g = self.h.matvec(x)?;
        for ((gi, ci), xi) in g.iter_mut().zip(&self.c).zip(x) {
            *gi += ci + self.ridge * xi;
        }
        Ok(g)
    }

    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let hx = self.h.matvec(x)?;
        let value = 0.5 * numkit::dot(x, &hx) + numkit::dot(&self.c, x) + 0.5 * self.ridge * numkit::dot(x, x);
        let mut g = hx;
        for ((gi, ci), xi) in g.iter_mut().zip(&self.c).zip(x) {
            *gi += ci + self.ridge * xi;
        }
        Ok((value, g))
    }

    fn hessian_at<'a>(&'a self, x: &[f64]) -> Result<Box<dyn HessianOperator + 'a>> {
        check_len(self.dim(), x.len())?;
        Ok(Box::new(ExplicitHessian {
            h: &self.h,
            ridge: self.ridge,
        }))
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn hessian_column_stats(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        check_len(self.dim(), x.len())?;
        // symmetric: column norms are row norms
        let n = self.dim();
        let mut norms_sq = Vec::with_capacity(n);
        let mut diag = Vec::with_capacity(n);
        for r in 0..n {
            let d = self.h.get(r, r) + self.ridge;
            let (idx, vals) = self.h.row(r);
            let off: f64 = idx
                .iter()
                .zip(vals)
                .filter(|(&c, _)| c != r)
                .map(|(_, v)| v * v)
                .sum();
            norms_sq.push(off + d * d);
            diag.push(d);
        }
        Ok((norms_sq, diag))
    }

    fn hessian_block(&self, x: &[f64], cols: &[usize]) -> Result<Vec<f64>> {
        check_len(self.dim(), x.len())?;
        let k = cols.len();
        let local = local_index(self.dim(), cols)?;
        let mut block = vec![0.0; k * k];
        for (r, &i) in cols.iter().enumerate() {
            let (idx, vals) = self.h.row(i);
            for (&j, &v) in idx.iter().zip(vals) {
                if local[j] != usize::MAX {
                    block[r * k + local[j]] = v;
                }
            }
            block[r * k + r] += self.ridge;
        }
        Ok(block)
    }
}

/// `(1/N)·AᵀWA + ridge·I` for a fixed row weighting.
struct GramHessian<'a> {
    a: &'a CsrMatrix,
    weights: Vec<f64>,
    ridge: f64,
}

impl HessianOperator for GramHessian<'_> {
    fn dim(&self) -> usize {
        self.a.n_cols()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let mut av = vec![0.0; self.a.n_rows()];
        self.a.matvec_into(v, &mut av);
        for (t, w) in av.iter_mut().zip(&self.weights) {
            *t *= w;
        }
        self.a.matvec_transpose_into(&av, out);
        numkit::axpy(self.ridge, v, out);
    }
}

struct ExplicitHessian<'a> {
    h: &'a CsrMatrix,
    ridge: f64,
}

impl HessianOperator for ExplicitHessian<'_> {
    fn dim(&self) -> usize {
        self.h.n_rows()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        self.h.matvec_into(v, out);
        numkit::axpy(self.ridge, v, out);
    }
}

/// An `ℓ1`-regularized instance: minimize `φ(x) = f(x) + μ‖x‖₁`.
pub struct Problem {
    objective: Box<dyn SmoothObjective>,
    mu: f64,
}

impl Problem {
    pub fn new(objective: impl SmoothObjective + 'static, mu: f64) -> Result<Self> {
        Problem::from_boxed(Box::new(objective), mu)
    }

    pub fn from_boxed(objective: Box<dyn SmoothObjective>, mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::Config(format!("mu must be > 0, got {mu}")));
        }
        Ok(Problem { objective, mu })
    }

    pub fn objective(&self) -> &dyn SmoothObjective {
        self.objective.as_ref()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    /// `φ(x) = f(x) + μ‖x‖₁`.
    pub fn phi(&self, x: &[f64]) -> Result<f64> {
        Ok(self.objective.value(x)? + self.mu * numkit::norm1(x))
    }
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("n", &self.dim())
            .field("mu", &self.mu)
            .finish()
    }
}
