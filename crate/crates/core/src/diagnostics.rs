//! Run metrics: relative objective error, solution sparsity and the
//! diagonal-dominance measure of a Hessian.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::objective::SmoothObjective;
use crate::solver::SolveReport;

pub const DEFAULT_DOMINANCE_CAP: usize = 10_000;

/// Largest shortfall `φ* − φ_k` accepted before the reference is rejected.
pub const REFERENCE_SLACK: f64 = 1e-6;

/// `(φ_k − φ*) / (1 + |φ*|)`, clamped at zero for `φ_k` marginally below `φ*`.
pub fn relative_error(phi_k: f64, phi_star: f64) -> Result<f64> {
    if phi_k < phi_star - REFERENCE_SLACK {
        return Err(Error::BadReference { phi_k, phi_star });
    }
    Ok(((phi_k - phi_star) / (1.0 + phi_star.abs())).max(0.0))
}

/// Percentage of entries with `|x_i| ≤ zero_tol`.
pub fn sparsity_percent(x: &[f64], zero_tol: f64) -> f64 {
    if x.is_empty() {
        return 100.0;
    }
    let zeros = x.iter().filter(|v| v.abs() <= zero_tol).count();
    100.0 * zeros as f64 / x.len() as f64
}

/// `𝒟(∇²f(x)) = max_i ‖H_{:,i}‖₂ / max_i |H_ii|`.
pub fn diagonal_dominance(obj: &dyn SmoothObjective, x: &[f64], n_cap: usize) -> Result<f64> {
    let n = obj.dim();
    check_len(n, x.len())?;
    if n > n_cap {
        return Err(Error::Refused(format!(
            "diagonal dominance needs n Hessian columns; n = {n} exceeds the cap {n_cap}"
        )));
    }
    let (norms_sq, diag) = obj.hessian_column_stats(x)?;
    let max_norm = norms_sq.iter().fold(0.0f64, |a, &v| a.max(v)).sqrt();
    let max_diag = diag.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    if max_diag == 0.0 {
        return Err(Error::Degenerate("Hessian diagonal is identically zero".into()));
    }
    Ok(max_norm / max_diag)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTracePoint {
    pub iter: usize,
    pub seconds: f64,
    pub phi: f64,
    pub rel_err: Option<f64>,
    pub g_inf: f64,
    pub nnz: usize,
}

/// One point per iterate, starting with `x⁰` at zero seconds.
pub fn convergence_trace(
    report: &SolveReport,
    phi_star: Option<f64>,
) -> Result<Vec<ConvergenceTracePoint>> {
    let rel = |phi: f64| phi_star.map(|s| relative_error(phi, s)).transpose();
    let mut out = vec![ConvergenceTracePoint {
        iter: 0,
        seconds: 0.0,
        phi: report.phi0,
        rel_err: rel(report.phi0)?,
        g_inf: report.g_inf0,
        nnz: report.nnz0,
    }];
    for t in &report.trace {
        out.push(ConvergenceTracePoint {
            iter: t.iter,
            seconds: t.seconds,
            phi: t.phi,
            rel_err: rel(t.phi)?,
            g_inf: t.g_inf,
            nnz: t.nnz,
        });
    }
    Ok(out)
}
