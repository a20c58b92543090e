//! Inexact minimization of `ψ(d) = dᵀg + ½ dᵀ(H + δI)d` over the free
//! coordinates, with `d_i = 0` held exactly on the rest.

use crate::numkit;
use crate::objective::HessianOperator;

/// Ridge added to the reduced operator so singular Hessians stay solvable.
pub const DEFAULT_CG_RIDGE: f64 = 1e-8;

/// Reduced Newton system at one iterate.
pub struct ReducedSystem<'a> {
    /// Coordinates allowed to move, ascending.
    pub free: &'a [usize],
    /// Full-length minimum-norm subgradient; the right-hand side is `−g` on `free`.
    pub g: &'a [f64],
    pub hess: &'a dyn HessianOperator,
    pub ridge: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CgBreakdown {
    NonFinite,
    /// `pᵀ(H+δI)p ≤ 0`: the operator is not positive definite.
    NegativeCurvature,
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    /// Full-length step, zero off the free set.
    pub d: Vec<f64>,
    pub iterations: usize,
    /// `‖(H+δI)d + g‖∞ / ‖g‖∞` over the free coordinates, from the true residual.
    pub rel_residual: f64,
    pub converged: bool,
    pub breakdown: Option<CgBreakdown>,
}

impl ReducedSystem<'_> {
    fn gather(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| full[i]).collect()
    }

    fn scatter(&self, reduced: &[f64], n: usize) -> Vec<f64> {
        let mut full = vec![0.0; n];
        for (&i, &v) in self.free.iter().zip(reduced) {
            full[i] = v;
        }
        full
    }
}

struct ReducedOp<'s, 'a> {
    sys: &'s ReducedSystem<'a>,
    full_in: Vec<f64>,
    full_out: Vec<f64>,
}

impl ReducedOp<'_, '_> {
    fn apply(&mut self, v: &[f64], out: &mut [f64]) {
        for (&i, &vi) in self.sys.free.iter().zip(v) {
            self.full_in[i] = vi;
        }
        self.sys.hess.apply(&self.full_in, &mut self.full_out);
        for ((o, &i), &vi) in out.iter_mut().zip(self.sys.free).zip(v) {
            *o = self.full_out[i] + self.sys.ridge * vi;
        }
    }
}

/// Conjugate gradients on the free subspace.
///
/// Stops once `‖(H+δI)d + g‖∞ ≤ rel_tol·‖g‖∞` on the free coordinates; the
/// recurrence residual triggers the test and the true residual confirms it.
/// A warm start is used only if it already has `ψ < 0`, so the returned step
/// is always a descent direction for `ψ`.
pub fn solve_reduced(
    sys: &ReducedSystem<'_>,
    rel_tol: f64,
    max_iters: usize,
    warm_start: Option<&[f64]>,
) -> CgOutcome {
    let n = sys.g.len();
    let m = sys.free.len();
    let g_red = sys.gather(sys.g);
    let g_norm = numkit::norm_inf(&g_red);
    if m == 0 || g_norm == 0.0 {
        return CgOutcome {
            d: vec![0.0; n],
            iterations: 0,
            rel_residual: 0.0,
            converged: true,
            breakdown: None,
        };
    }

    let mut op = ReducedOp {
        sys,
        full_in: vec![0.0; n],
        full_out: vec![0.0; n],
    };
    let b: Vec<f64> = g_red.iter().map(|v| -v).collect();
    let mut ap = vec![0.0; m];

    let true_residual = |op: &mut ReducedOp<'_, '_>, x: &[f64], ap: &mut [f64]| -> Vec<f64> {
        op.apply(x, ap);
        b.iter().zip(ap.iter()).map(|(bi, ai)| bi - ai).collect()
    };

    let mut x = vec![0.0; m];
    let mut r = b.clone();
    if let Some(w) = warm_start {
        let xw = sys.gather(w);
        if numkit::all_finite(&xw) && xw.iter().any(|&v| v != 0.0) {
            op.apply(&xw, &mut ap);
            let psi = numkit::dot(&xw, &g_red) + 0.5 * numkit::dot(&xw, &ap);
            if psi < 0.0 {
                r = b.iter().zip(&ap).map(|(bi, ai)| bi - ai).collect();
                x = xw;
            }
        }
    }

    let mut rel = numkit::norm_inf(&r) / g_norm;
    let mut iterations = 0;
    let mut converged = rel <= rel_tol;
    let mut breakdown = None;
    let mut residual_is_true = true;

    let mut p = r.clone();
    let mut rr = numkit::dot(&r, &r);
    while !converged && iterations < max_iters {
        op.apply(&p, &mut ap);
        let pap = numkit::dot(&p, &ap);
        if !pap.is_finite() {
            breakdown = Some(CgBreakdown::NonFinite);
            break;
        }
        if pap <= 0.0 {
            breakdown = Some(CgBreakdown::NegativeCurvature);
            break;
        }
        let alpha = rr / pap;
        if !alpha.is_finite() {
            breakdown = Some(CgBreakdown::NonFinite);
            break;
        }
        numkit::axpy(alpha, &p, &mut x);
        numkit::axpy(-alpha, &ap, &mut r);
        iterations += 1;
        residual_is_true = false;

        if numkit::norm_inf(&r) <= rel_tol * g_norm {
            r = true_residual(&mut op, &x, &mut ap);
            residual_is_true = true;
            rel = numkit::norm_inf(&r) / g_norm;
            if rel <= rel_tol {
                converged = true;
                break;
            }
            // drifted recurrence: restart from the true residual
            p.copy_from_slice(&r);
            rr = numkit::dot(&r, &r);
            continue;
        }
        let rr_new = numkit::dot(&r, &r);
        let beta = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_new;
    }

    if !residual_is_true {
        r = true_residual(&mut op, &x, &mut ap);
        rel = numkit::norm_inf(&r) / g_norm;
        converged = rel <= rel_tol;
    }
    if !numkit::all_finite(&x) {
        x.iter_mut().for_each(|v| *v = 0.0);
        breakdown = Some(CgBreakdown::NonFinite);
        rel = 1.0;
        converged = false;
    }

    CgOutcome {
        d: sys.scatter(&x, n),
        iterations,
        rel_residual: rel,
        converged,
        breakdown,
    }
}

/// `ψ(d) = dᵀg + ½ dᵀ(H+δI)d` evaluated on a full-length step.
pub fn reduced_model_value(sys: &ReducedSystem<'_>, d: &[f64]) -> f64 {
    let mut hd = vec![0.0; d.len()];
    sys.hess.apply(d, &mut hd);
    numkit::dot(d, sys.g) + 0.5 * (numkit::dot(d, &hd) + sys.ridge * numkit::dot(d, d))
}
