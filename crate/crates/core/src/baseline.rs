//! Reference solvers: proximal gradient (ISTA) with fixed step `1/L`, and an
//! exhaustive sign-pattern oracle for tiny instances.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit;
use crate::objective::{Problem, SmoothObjective};
use crate::orthant::{identify_sets, sgn};
use crate::solver::{self, IterationTrace, SolveReport, Termination};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IstaConfig {
    pub outer_tol: f64,
    pub max_iters: usize,
    pub lipschitz_override: Option<f64>,
    pub time_limit: Option<Duration>,
}

impl Default for IstaConfig {
    fn default() -> Self {
        IstaConfig {
            outer_tol: 1e-6,
            max_iters: 100_000,
            lipschitz_override: None,
            time_limit: None,
        }
    }
}

/// `x ← S_{μ/L}(x − ∇f(x)/L)` until `‖g(x)‖∞ ≤ tol`.
pub fn ista_solve(problem: &Problem, x0: &[f64], cfg: &IstaConfig) -> Result<SolveReport> {
    solver::check_start(problem, x0)?;
    let lipschitz = solver::resolve_lipschitz(problem, cfg.lipschitz_override)?;
    let obj = problem.objective();
    let mu = problem.mu();

    let start = Instant::now();
    let mut x = x0.to_vec();
    let (mut f_x, mut grad) = obj.value_and_gradient(&x)?;
    let mut phi = f_x + mu * numkit::norm1(&x);
    let phi0 = phi;
    let nnz0 = x.iter().filter(|&&v| v != 0.0).count();
    let mut g_inf0 = f64::NAN;
    let mut g_inf = f64::NAN;
    let mut trace: Vec<IterationTrace> = Vec::new();

    let termination = loop {
        if !phi.is_finite() || !numkit::all_finite(&grad) {
            break Termination::NonFinite;
        }
        g_inf = identify_sets(&x, &grad, mu).g_inf();
        match trace.last_mut() {
            Some(last) => last.g_inf = g_inf,
            None => g_inf0 = g_inf,
        }
        if g_inf <= cfg.outer_tol {
            break Termination::Tolerance;
        }
        if trace.len() >= cfg.max_iters {
            break Termination::MaxIterations;
        }
        if cfg.time_limit.is_some_and(|t| start.elapsed() >= t) {
            break Termination::TimeLimit;
        }

        let x_next = solver::ista_step(&x, &grad, lipschitz, mu);
        let gamma = solver::surrogate_gamma(&x, &x_next, f_x, &grad, lipschitz, mu);
        let phi_prev = phi;
        x = x_next;
        (f_x, grad) = obj.value_and_gradient(&x)?;
        phi = f_x + mu * numkit::norm1(&x);
        trace.push(IterationTrace {
            iter: trace.len() + 1,
            seconds: start.elapsed().as_secs_f64(),
            phi,
            phi_prev,
            gamma,
            g_inf: f64::NAN,
            nnz: x.iter().filter(|&&v| v != 0.0).count(),
            alpha: 1.0,
            alpha_bar: 0.0,
            ..IterationTrace::default()
        });
    };

    Ok(SolveReport {
        solver: "ista".into(),
        iterations: trace.len(),
        x,
        phi,
        g_inf,
        phi0,
        g_inf0,
        nnz0,
        termination,
        fallback_count: 0,
        lipschitz,
        seconds: start.elapsed().as_secs_f64(),
        trace,
    })
}

pub const DEFAULT_ORACLE_MAX_DIM: usize = 12;

#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub x_star: Vec<f64>,
    pub phi_star: f64,
    pub signs: Vec<i8>,
    pub g_inf: f64,
    pub faces_checked: usize,
    /// Faces whose smooth subproblem did not reach the Newton tolerance.
    pub unconverged_faces: usize,
}

struct FaceSolution {
    x: Vec<f64>,
    phi: f64,
    converged: bool,
}

const FACE_NEWTON_ITERS: usize = 100;

/// Minimizes `f(x) + μ σᵀx` over `{x : x_i = 0 where σ_i = 0}` by damped
/// Newton with dense Cholesky on the free block, starting from `start`
/// (which must vanish off the face).
fn solve_face(obj: &dyn SmoothObjective, mu: f64, signs: &[i8], start: &[f64]) -> Result<FaceSolution> {
    let n = signs.len();
    let free: Vec<usize> = (0..n).filter(|&i| signs[i] != 0).collect();
    let k = free.len();
    let mut x = start.to_vec();
    let face_value = |x: &[f64]| -> Result<f64> {
        let lin: f64 = signs.iter().zip(x).map(|(&s, v)| s as f64 * v).sum();
        Ok(obj.value(x)? + mu * lin)
    };
    if k == 0 {
        let phi = obj.value(&x)?;
        return Ok(FaceSolution {
            x,
            phi,
            converged: true,
        });
    }

    let mut converged = false;
    let mut h_val = face_value(&x)?;
    for _ in 0..FACE_NEWTON_ITERS {
        let grad = obj.gradient(&x)?;
        let g: Vec<f64> = free.iter().map(|&i| grad[i] + mu * signs[i] as f64).collect();
        let g_scale = 1.0 + numkit::norm_inf(&grad);
        if numkit::norm_inf(&g) <= 1e-15 * g_scale {
            converged = true;
            break;
        }
        let mut dense = obj.hessian_block(&x, &free)?;
        // symmetrize away rounding in the operator
        for r in 0..k {
            for c in 0..r {
                let v = 0.5 * (dense[r * k + c] + dense[c * k + r]);
                dense[r * k + c] = v;
                dense[c * k + r] = v;
            }
        }
        if numkit::cholesky_in_place(&mut dense, k).is_err() {
            break;
        }
        let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        let p = numkit::cholesky_solve(&dense, k, &rhs);
        let slope = numkit::dot(&g, &p);
        if -slope <= 1e-30 * g_scale * g_scale {
            converged = true;
            break;
        }

        // Inside the quadratic-convergence region the predicted decrease is
        // below what φ can resolve, so Armijo would reject good steps.
        if -slope <= 1e-10 * (1.0 + h_val.abs()) {
            for (r, &i) in free.iter().enumerate() {
                x[i] += p[r];
            }
            h_val = face_value(&x)?;
            continue;
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial = x.clone();
            for (r, &i) in free.iter().enumerate() {
                trial[i] += t * p[r];
            }
            let v = face_value(&trial)?;
            if v <= h_val + 1e-4 * t * slope {
                x = trial;
                h_val = v;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // no representable decrease left: this is as good as it gets
            converged = numkit::norm_inf(&g) <= 1e-9 * g_scale;
            break;
        }
    }
    let phi = obj.value(&x)? + mu * numkit::norm1(&x);
    Ok(FaceSolution { x, phi, converged })
}

fn signs_of(index: usize, n: usize) -> Vec<i8> {
    let mut s = vec![0i8; n];
    let mut r = index;
    for v in s.iter_mut() {
        *v = (r % 3) as i8 - 1;
        r /= 3;
    }
    s
}

/// The face with the highest-index free coordinate of `idx` fixed at zero.
fn parent_of(idx: usize, n: usize) -> Option<usize> {
    let (mut r, mut place, mut top) = (idx, 1, None);
    for _ in 0..n {
        let digit = r % 3;
        if digit != 1 {
            top = Some((digit, place));
        }
        r /= 3;
        place *= 3;
    }
    top.map(|(digit, place)| if digit == 0 { idx + place } else { idx - place })
}

/// Exact minimizer by enumerating every sign pattern in `{−1, 0, +1}ⁿ`.
///
/// On each face the problem is smooth; the global minimizer is the face
/// minimizer whose free coordinates carry exactly the face signs. Assumes
/// `f` is strictly convex so that every face minimizer is unique.
pub fn brute_force_oracle(problem: &Problem, n_max: usize) -> Result<OracleResult> {
    let n = problem.dim();
    if n > n_max {
        return Err(Error::Refused(format!(
            "oracle enumerates 3^n faces; n = {n} exceeds the limit {n_max}"
        )));
    }
    let obj = problem.objective();
    let mu = problem.mu();
    let faces = 3usize.pow(n as u32);

    // Faces are solved in order of their number of free coordinates, each
    // warm-started from the minimizer of its parent face.
    let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for idx in 0..faces {
        let free = signs_of(idx, n).iter().filter(|&&s| s != 0).count();
        by_level[free].push(idx);
    }
    let mut minimizers: Vec<Vec<f64>> = vec![Vec::new(); faces];
    let mut unconverged_faces = 0;
    let mut best: Option<(usize, f64, Vec<f64>)> = None;
    let zero = vec![0.0; n];
    for level in 0..=n {
        let solved: Vec<(usize, FaceSolution)> = by_level[level]
            .par_iter()
            .map(|&idx| {
                let start = parent_of(idx, n).map_or(&zero, |p| &minimizers[p]);
                solve_face(obj, mu, &signs_of(idx, n), start).map(|s| (idx, s))
            })
            .collect::<Result<_>>()?;
        if level > 0 {
            for &idx in &by_level[level - 1] {
                minimizers[idx] = Vec::new();
            }
        }
        for (idx, sol) in solved {
            unconverged_faces += usize::from(!sol.converged);
            let signs = signs_of(idx, n);
            let consistent =
                sol.phi.is_finite() && sol.x.iter().zip(&signs).all(|(&v, &z)| sgn(v) == z);
            let better = best
                .as_ref()
                .is_none_or(|(b_idx, b_phi, _)| sol.phi.total_cmp(b_phi).then(idx.cmp(b_idx)).is_lt());
            if consistent && better {
                best = Some((idx, sol.phi, sol.x.clone()));
            }
            minimizers[idx] = sol.x;
        }
    }
    let (idx, phi_star, x_star) =
        best.ok_or_else(|| Error::Internal("no sign-consistent face minimizer found".into()))?;
    let grad = obj.gradient(&x_star)?;
    Ok(OracleResult {
        g_inf: identify_sets(&x_star, &grad, mu).g_inf(),
        signs: signs_of(idx, n),
        x_star,
        phi_star,
        faces_checked: faces,
        unconverged_faces,
    })
}
