//! The orthant-based adaptive (OBA) driver.
//!
//! Each outer iteration classifies the variables, frees a budgeted subset of
//! the zero variables with the largest subgradient, runs the corrective cycle
//! of subspace Newton-CG solves, takes a projected backtracking step on the
//! piecewise quadratic model, and finally compares the trial point against
//! an ISTA step through the surrogate bound `Γ`.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::numkit;
use crate::objective::{HessianOperator, Problem};
use crate::orthant::{self, identify_sets, sgn, OrthantState, PiecewiseQuadModel, VarClass};
use crate::subspace::{self, CgBreakdown, ReducedSystem};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Initial fraction of variables allowed to leave zero.
    pub eta: f64,
    /// Cutoff below which the globalization step snaps to the ISTA point.
    pub eps: f64,
    /// Relative ∞-norm residual tolerance of the subspace CG solves.
    pub cg_rel_tol: f64,
    pub cg_ridge: f64,
    /// Stop once `‖g(x)‖∞` falls to this value.
    pub outer_tol: f64,
    pub max_outer_iters: usize,
    /// Defaults to `|U_F| + 1`, which the cycle can never exceed.
    pub max_cycle_iters: Option<usize>,
    /// Defaults to twice the dimension of the free subspace; rounding can
    /// keep CG from converging within the dimension on near-singular systems.
    pub max_cg_iters: Option<usize>,
    pub max_line_search_halvings: usize,
    pub lipschitz_override: Option<f64>,
    pub time_limit: Option<Duration>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eta: 0.01,
            eps: 1e-4,
            cg_rel_tol: 0.1,
            cg_ridge: subspace::DEFAULT_CG_RIDGE,
            outer_tol: 1e-6,
            max_outer_iters: 1000,
            max_cycle_iters: None,
            max_cg_iters: None,
            max_line_search_halvings: 60,
            lipschitz_override: None,
            time_limit: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return bad(format!("eta must lie in (0,1), got {}", self.eta));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad(format!("eps must be > 0, got {}", self.eps));
        }
        if !(self.cg_rel_tol > 0.0 && self.cg_rel_tol < 1.0) {
            return bad(format!("cg_rel_tol must lie in (0,1), got {}", self.cg_rel_tol));
        }
        if !(self.cg_ridge >= 0.0 && self.cg_ridge.is_finite()) {
            return bad(format!("cg_ridge must be >= 0, got {}", self.cg_ridge));
        }
        if !(self.outer_tol >= 0.0) {
            return bad(format!("outer_tol must be >= 0, got {}", self.outer_tol));
        }
        if let Some(l) = self.lipschitz_override {
            if !(l > 0.0 && l.is_finite()) {
                return bad(format!("Lipschitz override must be > 0, got {l}"));
            }
        }
        Ok(())
    }

    pub fn initial_budget(&self, n: usize) -> usize {
        ((self.eta * n as f64).floor() as usize).max(1)
    }
}

/// What happened inside one corrective cycle.
#[derive(Debug, Clone, Default, Serialize)]
pub struct CycleRecord {
    /// Number of subspace solves, `j`.
    pub passes: usize,
    pub initial_free_unsure: usize,
    /// Variables demoted to the active set after each pass.
    pub demoted: Vec<Vec<usize>>,
    pub cg_iterations: Vec<usize>,
    pub final_rel_residual: f64,
    pub cg_converged: bool,
    pub breakdown: Option<CgBreakdown>,
}

impl CycleRecord {
    pub fn total_cg_iterations(&self) -> usize {
        self.cg_iterations.iter().sum()
    }

    pub fn demoted_count(&self) -> usize {
        self.demoted.iter().map(Vec::len).sum()
    }
}

/// Greedy split of the unsure set: the `min(|U|, τ)` entries with largest
/// `|g_i|` are freed, ties broken by lower index. Both lists come back sorted.
pub fn select_free_set(state: &OrthantState, tau: usize) -> (Vec<usize>, Vec<usize>) {
    let mut unsure = state.unsure();
    unsure.sort_by(|&i, &j| {
        state.g[j]
            .abs()
            .total_cmp(&state.g[i].abs())
            .then(i.cmp(&j))
    });
    let keep = tau.min(unsure.len());
    let mut held = unsure.split_off(keep);
    unsure.sort_unstable();
    held.sort_unstable();
    (unsure, held)
}

/// Repeated subspace solves, demoting every freed variable whose trial value
/// lands outside its predicted orthant, until all predictions hold.
///
/// The returned step is zero on every variable held or demoted.
pub fn corrective_cycle(
    state: &OrthantState,
    free_unsure: &[usize],
    hess: &dyn HessianOperator,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, CycleRecord)> {
    let n = state.dim();
    let mut movable: Vec<bool> = state.class.iter().map(|&c| c == VarClass::Free).collect();
    for &i in free_unsure {
        debug_assert_eq!(state.class[i], VarClass::Unsure);
        movable[i] = true;
    }
    let mut remaining: Vec<usize> = free_unsure.to_vec();
    let limit = cfg.max_cycle_iters.unwrap_or(free_unsure.len() + 1);
    let mut record = CycleRecord {
        initial_free_unsure: free_unsure.len(),
        ..CycleRecord::default()
    };
    let mut warm: Option<Vec<f64>> = None;

    loop {
        let free: Vec<usize> = (0..n).filter(|&i| movable[i]).collect();
        let sys = ReducedSystem {
            free: &free,
            g: &state.g,
            hess,
            ridge: cfg.cg_ridge,
        };
        let max_cg = cfg.max_cg_iters.unwrap_or(2 * free.len()).max(1);
        let out = subspace::solve_reduced(&sys, cfg.cg_rel_tol, max_cg, warm.as_deref());
        record.passes += 1;
        record.cg_iterations.push(out.iterations);
        record.final_rel_residual = out.rel_residual;
        record.cg_converged = out.converged;
        record.breakdown = out.breakdown;

        let flipped: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| state.zeta[i] != sgn(state.x[i] + out.d[i]))
            .collect();
        if flipped.is_empty() {
            record.demoted.push(Vec::new());
            return Ok((out.d, record));
        }
        if record.passes >= limit {
            return Err(Error::CycleLimit { limit });
        }
        let mut d = out.d;
        for &i in &flipped {
            movable[i] = false;
            d[i] = 0.0;
        }
        remaining.retain(|i| !flipped.contains(i));
        record.demoted.push(flipped);
        warm = Some(d);
    }
}

#[derive(Debug, Clone)]
pub struct LineSearchOutcome {
    pub x_hat: Vec<f64>,
    pub alpha: f64,
    pub halvings: usize,
    /// `q(x̂) − q(x)`, never positive.
    pub model_change: f64,
}

/// Largest `α ∈ {1, ½, ¼, …}` with `q(P(x + αd)) ≤ q(x)`.
pub fn projected_line_search(
    x: &[f64],
    d: &[f64],
    zeta: &[i8],
    model: &PiecewiseQuadModel<'_>,
    max_halvings: usize,
) -> Result<LineSearchOutcome> {
    let mut alpha = 1.0;
    for halvings in 0..=max_halvings {
        let trial: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect();
        let x_hat = orthant::orthant_project(&trial, zeta);
        let change = model.change(&x_hat);
        if change <= 0.0 {
            return Ok(LineSearchOutcome {
                x_hat,
                alpha,
                halvings,
                model_change: change,
            });
        }
        alpha *= 0.5;
    }
    Err(Error::LineSearchFailed {
        halvings: max_halvings,
    })
}

/// `S_{μ/L}(x − ∇f(x)/L)`.
pub fn ista_step(x: &[f64], grad: &[f64], lipschitz: f64, mu: f64) -> Vec<f64> {
    let shifted: Vec<f64> = x.iter().zip(grad).map(|(xi, gi)| xi - gi / lipschitz).collect();
    orthant::soft_threshold(&shifted, mu / lipschitz)
}

/// `Γ = f(x) + ∇f(x)ᵀ(x_I − x) + (L/2)‖x_I − x‖² + μ‖x_I‖₁`, an upper bound on
/// `φ(x_I)` whenever `L` bounds the curvature of `f`.
pub fn surrogate_gamma(
    x: &[f64],
    x_ista: &[f64],
    f_x: f64,
    grad: &[f64],
    lipschitz: f64,
    mu: f64,
) -> f64 {
    let s: Vec<f64> = x_ista.iter().zip(x).map(|(a, b)| a - b).collect();
    f_x + numkit::dot(grad, &s) + 0.5 * lipschitz * numkit::dot(&s, &s) + mu * numkit::norm1(x_ista)
}

#[derive(Debug, Clone)]
pub struct GlobalizeOutcome {
    pub x: Vec<f64>,
    pub phi: f64,
    pub alpha_bar: f64,
    pub trials: usize,
}

/// Backtracks from `x̂` toward the ISTA point until `φ ≤ Γ`, giving up on the
/// trial point entirely once the step falls below `eps`.
pub fn globalize(
    x_hat: &[f64],
    x_ista: &[f64],
    gamma: f64,
    mut phi_eval: impl FnMut(&[f64]) -> Result<f64>,
    eps: f64,
) -> Result<GlobalizeOutcome> {
    let mut alpha_bar = 1.0;
    let mut trials = 0;
    loop {
        let z: Vec<f64> = if alpha_bar == 1.0 {
            x_hat.to_vec()
        } else if alpha_bar == 0.0 {
            x_ista.to_vec()
        } else {
            x_ista
                .iter()
                .zip(x_hat)
                .map(|(xi, xh)| xi + alpha_bar * (xh - xi))
                .collect()
        };
        let phi = phi_eval(&z)?;
        trials += 1;
        if phi <= gamma || alpha_bar == 0.0 {
            return Ok(GlobalizeOutcome {
                x: z,
                phi,
                alpha_bar,
                trials,
            });
        }
        alpha_bar *= 0.5;
        if alpha_bar < eps {
            alpha_bar = 0.0;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Tolerance,
    #[serde(rename = "max_iters")]
    MaxIterations,
    TimeLimit,
    NonFinite,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Tolerance => "tolerance",
            Termination::MaxIterations => "max_iters",
            Termination::TimeLimit => "time_limit",
            Termination::NonFinite => "non_finite",
        }
    }
}

/// One outer iteration, describing the step from `x^k` to `x^{k+1}`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IterationTrace {
    /// `k + 1`
    pub iter: usize,
    pub seconds: f64,
    /// `φ(x^{k+1})`
    pub phi: f64,
    /// `φ(x^k)`
    pub phi_prev: f64,
    pub gamma: f64,
    /// `‖g(x^{k+1})‖∞`; NaN when the run stopped before it was evaluated.
    pub g_inf: f64,
    pub nnz: usize,
    pub cycle_j: usize,
    pub cg_iters: usize,
    pub cg_rel_residual: f64,
    pub cg_converged: bool,
    pub free_unsure: usize,
    pub demoted: usize,
    pub tau: usize,
    pub alpha: f64,
    pub ls_halvings: usize,
    pub alpha_bar: f64,
    pub fallback: bool,
}

impl IterationTrace {
    /// `φ(x^{k+1}) ≤ Γ^k ≤ φ(x^k)` up to rounding.
    pub fn safeguard_holds(&self) -> bool {
        let slack = 1e-12 * (1.0 + self.phi_prev.abs());
        self.phi <= self.gamma + slack && self.gamma <= self.phi_prev + slack
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub solver: String,
    pub x: Vec<f64>,
    pub phi: f64,
    pub g_inf: f64,
    pub phi0: f64,
    pub g_inf0: f64,
    pub nnz0: usize,
    pub iterations: usize,
    pub termination: Termination,
    pub fallback_count: usize,
    pub lipschitz: f64,
    pub seconds: f64,
    pub trace: Vec<IterationTrace>,
}

impl SolveReport {
    pub fn nnz(&self) -> usize {
        self.x.iter().filter(|&&v| v != 0.0).count()
    }
}

pub(crate) fn resolve_lipschitz(problem: &Problem, override_l: Option<f64>) -> Result<f64> {
    let l = override_l.unwrap_or_else(|| problem.objective().lipschitz());
    if l > 0.0 && l.is_finite() {
        Ok(l)
    } else {
        Err(Error::Config(format!(
            "Lipschitz constant must be > 0, got {l}; pass an override"
        )))
    }
}

pub(crate) fn check_start(problem: &Problem, x0: &[f64]) -> Result<()> {
    check_len(problem.dim(), x0.len())?;
    if !numkit::all_finite(x0) {
        return Err(Error::InvalidInput("starting point is not finite".into()));
    }
    Ok(())
}

/// Runs OBA from `x0`.
pub fn solve(problem: &Problem, x0: &[f64], cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    check_start(problem, x0)?;
    let lipschitz = resolve_lipschitz(problem, cfg.lipschitz_override)?;
    let obj = problem.objective();
    let mu = problem.mu();
    let n = problem.dim();

    let start = Instant::now();
    let mut tau = cfg.initial_budget(n);
    let mut x = x0.to_vec();
    let (mut f_x, mut grad) = obj.value_and_gradient(&x)?;
    let mut phi = f_x + mu * numkit::norm1(&x);
    let phi0 = phi;
    let nnz0 = x.iter().filter(|&&v| v != 0.0).count();
    let mut g_inf0 = f64::NAN;
    let mut g_inf = f64::NAN;
    let mut trace: Vec<IterationTrace> = Vec::new();
    let mut fallback_count = 0;

    let termination = loop {
        if !phi.is_finite() || !numkit::all_finite(&grad) {
            break Termination::NonFinite;
        }
        let state = identify_sets(&x, &grad, mu);
        g_inf = state.g_inf();
        match trace.last_mut() {
            Some(last) => last.g_inf = g_inf,
            None => g_inf0 = g_inf,
        }
        if g_inf <= cfg.outer_tol {
            break Termination::Tolerance;
        }
        if trace.len() >= cfg.max_outer_iters {
            break Termination::MaxIterations;
        }
        if cfg.time_limit.is_some_and(|t| start.elapsed() >= t) {
            break Termination::TimeLimit;
        }

        let (free_unsure, _held) = select_free_set(&state, tau);
        if free_unsure.is_empty() && !state.class.contains(&VarClass::Free) {
            return Err(Error::Internal(
                "nonzero subgradient with an empty free set".into(),
            ));
        }
        let tau_used = tau;
        let hess = obj.hessian_at(&x)?;
        let (d, cycle) = corrective_cycle(&state, &free_unsure, hess.as_ref(), cfg)?;
        if cycle.passes == 1 {
            tau = tau.saturating_mul(2).min(n);
        }

        let model = PiecewiseQuadModel {
            x: &x,
            f_x,
            grad: &grad,
            hess: hess.as_ref(),
            mu,
        };
        let ls = projected_line_search(&x, &d, &state.zeta, &model, cfg.max_line_search_halvings)?;
        drop(hess);

        let x_ista = ista_step(&x, &grad, lipschitz, mu);
        let gamma = surrogate_gamma(&x, &x_ista, f_x, &grad, lipschitz, mu);
        let glob = globalize(&ls.x_hat, &x_ista, gamma, |z| problem.phi(z), cfg.eps)?;
        if glob.alpha_bar < 1.0 {
            fallback_count += 1;
        }

        let phi_prev = phi;
        x = glob.x;
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
            cycle_j: cycle.passes,
            cg_iters: cycle.total_cg_iterations(),
            cg_rel_residual: cycle.final_rel_residual,
            cg_converged: cycle.cg_converged,
            free_unsure: cycle.initial_free_unsure,
            demoted: cycle.demoted_count(),
            tau: tau_used,
            alpha: ls.alpha,
            ls_halvings: ls.halvings,
            alpha_bar: glob.alpha_bar,
            fallback: glob.alpha_bar < 1.0,
        });
    };

    Ok(SolveReport {
        solver: "oba".into(),
        iterations: trace.len(),
        x,
        phi,
        g_inf,
        phi0,
        g_inf0,
        nnz0,
        termination,
        fallback_count,
        lipschitz,
        seconds: start.elapsed().as_secs_f64(),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::CsrMatrix;
    use crate::objective::{LogisticLoss, QuadraticLoss, SmoothObjective};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn quad(h: CsrMatrix, c: Vec<f64>) -> QuadraticLoss {
        QuadraticLoss::new(h, c, 0.0).unwrap()
    }

    fn state_at(obj: &dyn SmoothObjective, x: &[f64], mu: f64) -> OrthantState {
        identify_sets(x, &obj.gradient(x).unwrap(), mu)
    }

    #[test]
    fn select_free_set_picks_largest_subgradients() {
        // ∇f = (6, 0, 4, −2), μ = 1 at x = 0 → |g| over U = (5, 3, 1)
        let obj = quad(CsrMatrix::identity(4), vec![6.0, 0.0, 4.0, -2.0]);
        let s = state_at(&obj, &[0.0; 4], 1.0);
        assert_eq!(s.unsure(), vec![0, 2, 3]);
        let (uf, ua) = select_free_set(&s, 2);
        assert_eq!(uf, vec![0, 2]);
        assert_eq!(ua, vec![3]);

        let (uf, ua) = select_free_set(&s, 10);
        assert_eq!(uf, vec![0, 2, 3]);
        assert!(ua.is_empty());
    }

    #[test]
    fn select_free_set_breaks_ties_by_index() {
        let obj = quad(CsrMatrix::identity(4), vec![3.0, -3.0, 3.0, 5.0]);
        let s = state_at(&obj, &[0.0; 4], 1.0);
        let (uf, ua) = select_free_set(&s, 2);
        assert_eq!(uf, vec![0, 3]);
        assert_eq!(ua, vec![1, 2]);
    }

    #[test]
    fn select_free_set_empty_unsure() {
        let obj = quad(CsrMatrix::identity(2), vec![0.1, 0.2]);
        let s = state_at(&obj, &[0.0; 2], 1.0);
        let (uf, ua) = select_free_set(&s, 3);
        assert!(uf.is_empty() && ua.is_empty());
    }

    fn exact_cfg() -> SolverConfig {
        SolverConfig {
            cg_rel_tol: 1e-12,
            cg_ridge: 0.0,
            max_cg_iters: Some(100),
            ..SolverConfig::default()
        }
    }

    #[test]
    fn cycle_with_no_unsure_variables_is_one_pass() {
        let obj = quad(CsrMatrix::diagonal(&[2.0, 3.0]), vec![1.0, 1.0]);
        let x = [1.0, -1.0];
        let s = state_at(&obj, &x, 0.5);
        let hess = obj.hessian_at(&x).unwrap();
        let (d, rec) = corrective_cycle(&s, &[], hess.as_ref(), &exact_cfg()).unwrap();
        assert_eq!(rec.passes, 1);
        assert_eq!(rec.demoted_count(), 0);
        // Newton step on the face: d = −H⁻¹g
        assert!((d[0] + s.g[0] / 2.0).abs() < 1e-12);
        assert!((d[1] + s.g[1] / 3.0).abs() < 1e-12);
    }

    #[test]
    fn cycle_is_single_pass_for_diagonal_hessians() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let n = 8;
            let diag: Vec<f64> = (0..n).map(|_| 0.5 + rng.random::<f64>() * 3.0).collect();
            let c: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 6.0 - 3.0).collect();
            let obj = quad(CsrMatrix::diagonal(&diag), c);
            let x: Vec<f64> = (0..n)
                .map(|_| if rng.random::<bool>() { 0.0 } else { rng.random::<f64>() - 0.5 })
                .collect();
            let s = state_at(&obj, &x, 1.0);
            let unsure = s.unsure();
            let hess = obj.hessian_at(&x).unwrap();
            let (_, rec) = corrective_cycle(&s, &unsure, hess.as_ref(), &exact_cfg()).unwrap();
            assert_eq!(rec.passes, 1);
        }
    }

    #[test]
    fn coupled_pair_needs_one_correction() {
        // H = [[1, .9], [.9, 1]], ∇f(0) = (−3, −1.5), μ = 1 → g = (−2, −0.5), ζ = (+, +).
        // First solve: d = H⁻¹(2, 0.5) = (8.16, −6.84): the second variable flips.
        // Second solve on {0}: d = (2, 0).
        let h = CsrMatrix::from_rows(&[vec![1.0, 0.9], vec![0.9, 1.0]]).unwrap();
        let obj = quad(h, vec![-3.0, -1.5]);
        let s = state_at(&obj, &[0.0, 0.0], 1.0);
        assert_eq!(s.zeta, vec![1, 1]);
        let hess = obj.hessian_at(&[0.0, 0.0]).unwrap();
        let (d, rec) = corrective_cycle(&s, &[0, 1], hess.as_ref(), &exact_cfg()).unwrap();
        assert_eq!(rec.passes, 2);
        assert_eq!(rec.demoted, vec![vec![1], vec![]]);
        assert!((d[0] - 2.0).abs() < 1e-12);
        assert_eq!(d[1], 0.0);
    }

    fn model_for<'a>(
        x: &'a [f64],
        f_x: f64,
        grad: &'a [f64],
        hess: &'a dyn HessianOperator,
        mu: f64,
    ) -> PiecewiseQuadModel<'a> {
        PiecewiseQuadModel {
            x,
            f_x,
            grad,
            hess,
            mu,
        }
    }

    #[test]
    fn line_search_full_step_inside_orthant() {
        let obj = quad(CsrMatrix::identity(2), vec![-2.0, 3.0]);
        let x = [1.0, -1.0];
        let (f, g) = obj.value_and_gradient(&x).unwrap();
        let hess = obj.hessian_at(&x).unwrap();
        let s = identify_sets(&x, &g, 0.1);
        let d: Vec<f64> = s.g.iter().map(|v| -0.1 * v).collect();
        let model = model_for(&x, f, &g, hess.as_ref(), 0.1);
        let ls = projected_line_search(&x, &d, &s.zeta, &model, 60).unwrap();
        assert_eq!(ls.alpha, 1.0);
        assert_eq!(ls.x_hat, vec![x[0] + d[0], x[1] + d[1]]);
    }

    #[test]
    fn line_search_full_step_from_origin_for_exact_quadratic_solves() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let n = 6;
            let b: Vec<Vec<f64>> = (0..n + 2)
                .map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect())
                .collect();
            let h: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| b.iter().map(|r| r[i] * r[j]).sum()).collect())
                .collect();
            let c: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let obj = quad(CsrMatrix::from_rows(&h).unwrap(), c);
            let mu = 0.2;
            let x = vec![0.0; n];
            let (f, g) = obj.value_and_gradient(&x).unwrap();
            let s = identify_sets(&x, &g, mu);
            let hess = obj.hessian_at(&x).unwrap();
            let (d, _) = corrective_cycle(&s, &s.unsure(), hess.as_ref(), &exact_cfg()).unwrap();
            let model = model_for(&x, f, &g, hess.as_ref(), mu);
            let ls = projected_line_search(&x, &d, &s.zeta, &model, 60).unwrap();
            assert_eq!(ls.alpha, 1.0);
        }
    }

    #[test]
    fn line_search_halves_when_full_step_overshoots() {
        // f = ½(x−2)², μ = 1, x = 0.5: φ'(x) = x − 2 + 1 = −0.5, ζ = +1.
        // d = 3: q(3.5) − q(0.5) = 3(−1.5) + 4.5 + 3 = 3 > 0,
        //        q(2.0) − q(0.5) = 1.5(−1.5) + 1.125 + 1.5 = 0.375 > 0,
        //        q(1.25) − q(0.5) = 0.75(−1.5) + 0.28125 + 0.75 = −0.09375 ≤ 0.
        let obj = quad(CsrMatrix::identity(1), vec![-2.0]);
        let x = [0.5];
        let (f, g) = obj.value_and_gradient(&x).unwrap();
        let hess = obj.hessian_at(&x).unwrap();
        let model = model_for(&x, f, &g, hess.as_ref(), 1.0);
        let ls = projected_line_search(&x, &[3.0], &[1], &model, 60).unwrap();
        assert_eq!(ls.alpha, 0.25);
        assert_eq!(ls.x_hat, vec![1.25]);

        // d = 1.5 overshoots at α = 1 (x̂ = 2) but not at ½
        let ls = projected_line_search(&x, &[2.4], &[1], &model, 60).unwrap();
        // q(2.9) − q(.5) = 2.4(−1.5) + 2.88 + 2.4 = 1.68; q(1.7) − q(.5) = −1.8 + 0.72 + 1.2 = 0.12;
        // q(1.1) − q(.5) = −0.9 + 0.18 + 0.6 = −0.12
        assert_eq!(ls.alpha, 0.25);
    }

    #[test]
    fn line_search_reports_non_descent() {
        // uphill from the origin inside the negative orthant
        let obj = quad(CsrMatrix::identity(1), vec![-2.0]);
        let x = [0.0];
        let (f, g) = obj.value_and_gradient(&x).unwrap();
        let hess = obj.hessian_at(&x).unwrap();
        let model = model_for(&x, f, &g, hess.as_ref(), 1.0);
        assert!(matches!(
            projected_line_search(&x, &[-1.0], &[-1], &model, 60),
            Err(Error::LineSearchFailed { halvings: 60 })
        ));
    }

    #[test]
    fn ista_step_examples() {
        // optimum of ½(x−2)² + |x| is 1
        assert_eq!(ista_step(&[1.0], &[-1.0], 1.0, 1.0), vec![1.0]);
        assert_eq!(ista_step(&[0.0], &[3.0], 1.0, 1.0), vec![-2.0]);
        assert_eq!(ista_step(&[0.3, -0.2], &[0.1, 0.4], 2.0, 10.0), vec![0.0, 0.0]);
    }

    #[test]
    fn surrogate_examples() {
        let obj = quad(CsrMatrix::identity(1), vec![0.0]);
        let mu = 0.5;
        let x = [2.0];
        let (f, g) = obj.value_and_gradient(&x).unwrap();
        let phi = |z: &[f64]| obj.value(z).unwrap() + mu * numkit::norm1(z);
        assert_eq!(surrogate_gamma(&x, &x, f, &g, 1.0, mu), phi(&x));
        // Hessian equal to L·I: the bound is tight
        let xi = ista_step(&x, &g, 1.0, mu);
        assert!((surrogate_gamma(&x, &xi, f, &g, 1.0, mu) - phi(&xi)).abs() < 1e-15);
    }

    #[test]
    fn surrogate_bounds_ista_value_on_logistic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let rows: Vec<Vec<f64>> = (0..8)
                .map(|_| (0..5).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
                .collect();
            let y: Vec<f64> = (0..8).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
            let obj = LogisticLoss::new(CsrMatrix::from_rows(&rows).unwrap(), y, 0.0).unwrap();
            let mu = rng.random::<f64>() * 0.2;
            let x: Vec<f64> = (0..5).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let (f, g) = obj.value_and_gradient(&x).unwrap();
            let l = obj.lipschitz();
            let xi = ista_step(&x, &g, l, mu);
            let gamma = surrogate_gamma(&x, &xi, f, &g, l, mu);
            let phi_i = obj.value(&xi).unwrap() + mu * numkit::norm1(&xi);
            let phi_x = f + mu * numkit::norm1(&x);
            assert!(gamma >= phi_i - 1e-12);
            assert!(gamma <= phi_x + 1e-12);
        }
    }

    #[test]
    fn globalize_accepts_trial_point() {
        let out = globalize(&[1.0], &[0.0], 5.0, |z: &[f64]| Ok(z[0]), 1e-4).unwrap();
        assert_eq!(out.alpha_bar, 1.0);
        assert_eq!(out.x, vec![1.0]);
        assert_eq!(out.trials, 1);
    }

    #[test]
    fn globalize_halves_once() {
        // φ(z) = z², x_I = 0, x̂ = 2: φ(x̂) = 4 = Γ + 1 with Γ = 3, φ(1) = 1 ≤ 3
        let out = globalize(&[2.0], &[0.0], 3.0, |z: &[f64]| Ok(z[0] * z[0]), 1e-4).unwrap();
        assert_eq!(out.alpha_bar, 0.5);
        assert_eq!(out.x, vec![1.0]);
    }

    #[test]
    fn globalize_falls_back_to_ista_point() {
        // φ above Γ everywhere on the segment except at x_I
        let out = globalize(
            &[1.0],
            &[0.0],
            0.0,
            |z: &[f64]| Ok(if z[0] == 0.0 { 0.0 } else { 1.0 + z[0] }),
            1e-4,
        )
        .unwrap();
        assert_eq!(out.alpha_bar, 0.0);
        assert_eq!(out.x, vec![0.0]);
        // 1, ½, …, 2^-13 ≥ 1e-4 and then the snap to zero
        assert_eq!(out.trials, 15);
    }

    #[test]
    fn solve_returns_immediately_at_optimum() {
        let obj = quad(CsrMatrix::identity(1), vec![-2.0]);
        let p = Problem::new(obj, 1.0).unwrap();
        let r = solve(&p, &[1.0], &SolverConfig::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.termination, Termination::Tolerance);
        assert_eq!(r.x, vec![1.0]);
    }

    #[test]
    fn solve_one_dimensional_lasso() {
        let obj = quad(CsrMatrix::identity(1), vec![-2.0]);
        let p = Problem::new(obj, 1.0).unwrap();
        let r = solve(&p, &[0.0], &SolverConfig::default()).unwrap();
        assert_eq!(r.termination, Termination::Tolerance);
        assert!((r.x[0] - 1.0).abs() < 1e-6);
        // ½x² − 2x + |x| at x = 1
        assert!((r.phi + 0.5).abs() < 1e-10);
    }

    #[test]
    fn budget_doubles_only_after_clean_cycles() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 300;
        let rows: Vec<Vec<f64>> = (0..120)
            .map(|_| (0..n).map(|_| if rng.random::<f64>() < 0.1 { rng.random::<f64>() * 2.0 - 1.0 } else { 0.0 }).collect())
            .collect();
        let y: Vec<f64> = (0..120).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let obj = LogisticLoss::new(CsrMatrix::from_rows(&rows).unwrap(), y, 0.0).unwrap();
        let p = Problem::new(obj, 0.005).unwrap();
        let r = solve(&p, &vec![0.0; n], &SolverConfig::default()).unwrap();
        assert_eq!(r.termination, Termination::Tolerance);
        assert_eq!(r.trace[0].tau, 3);
        for w in r.trace.windows(2) {
            let expected = if w[0].cycle_j == 1 { (2 * w[0].tau).min(n) } else { w[0].tau };
            assert_eq!(w[1].tau, expected);
        }
        for t in &r.trace {
            assert!(t.safeguard_holds());
            assert!(t.cycle_j <= t.free_unsure + 1);
        }
    }

    #[test]
    fn config_validation() {
        let ok = SolverConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            SolverConfig { eta: 0.0, ..ok.clone() },
            SolverConfig { eta: 1.0, ..ok.clone() },
            SolverConfig { eps: 0.0, ..ok.clone() },
            SolverConfig { cg_rel_tol: 1.5, ..ok.clone() },
            SolverConfig { lipschitz_override: Some(-1.0), ..ok.clone() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))));
        }
        assert_eq!(ok.initial_budget(50), 1);
        assert_eq!(ok.initial_budget(250), 2);
    }
}
