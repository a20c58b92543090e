//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oba::baseline::{self, brute_force_oracle, IstaConfig};
use oba::cli::{self, BenchmarkArgs, LossKind, NormalizeArg, ReplayArgs, SolverArgs, SolverKind};
use oba::data_io::{self, Normalization, SyntheticSpec};
use oba::diagnostics::{self, sparsity_percent};
use oba::numkit::{self, norm_inf, CsrMatrix};
use oba::orthant::{min_norm_subgradient, soft_threshold};
use oba::{
    solve, LeastSquaresLoss, LogisticLoss, Problem, QuadraticLoss, SmoothObjective, SolveReport,
    SolverConfig, Termination,
};

type Check = Result<String, String>;

struct Outcome {
    id: usize,
    name: &'static str,
    result: Check,
    warning: Option<String>,
    seconds: f64,
}

/// Every OBA report produced anywhere in the suite.
#[derive(Default)]
struct Runs {
    reports: Vec<(String, SolveReport)>,
}

impl Runs {
    fn solve(&mut self, label: String, problem: &Problem, cfg: &SolverConfig) -> SolveReport {
        let x0 = vec![0.0; problem.dim()];
        let report = solve(problem, &x0, cfg).unwrap_or_else(|e| panic!("{label}: {e}"));
        self.reports.push((label, report.clone()));
        report
    }

    fn iterations(&self) -> usize {
        self.reports.iter().map(|(_, r)| r.trace.len()).sum()
    }
}

fn timed(limit: Option<f64>, f: impl FnOnce() -> Check) -> (Check, f64) {
    let start = Instant::now();
    let mut result = f();
    let secs = start.elapsed().as_secs_f64();
    if let Some(limit) = limit {
        if secs >= limit {
            result = Err(format!(
                "{} (runtime {secs:.1} s exceeds {limit} s)",
                result.unwrap_or_else(|e| e)
            ));
        }
    }
    (result, secs)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// instance generators

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    uniform(rng, lo.ln(), hi.ln()).exp()
}

/// Dense row-major `rows × cols` with entries in `[−1, 1]`, each zero with
/// probability `1 − density`.
fn dense_random(rng: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> Vec<f64> {
    (0..rows * cols)
        .map(|_| {
            if rng.random_bool(density) {
                uniform(rng, -1.0, 1.0)
            } else {
                0.0
            }
        })
        .collect()
}

/// `BᵀB / m` for a random `m × n` matrix `B`.
fn random_psd(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<f64> {
    let b = dense_random(rng, m, n, 1.0);
    let mut h = vec![0.0; n * n];
    for r in 0..m {
        let row = &b[r * n..(r + 1) * n];
        for i in 0..n {
            for j in 0..n {
                h[i * n + j] += row[i] * row[j] / m as f64;
            }
        }
    }
    h
}

fn quadratic_instance(rng: &mut ChaCha8Rng, n: usize) -> QuadraticLoss {
    let m = rng.random_range(1..=2 * n);
    let h = random_psd(rng, n, m);
    let c: Vec<f64> = (0..n).map(|_| uniform(rng, -2.0, 2.0)).collect();
    let ridge = log_uniform(rng, 0.01, 1.0);
    QuadraticLoss::new(CsrMatrix::from_dense(n, n, &h).unwrap(), c, ridge).unwrap()
}

/// Labels follow a planted linear model so that small `μ` gives dense
/// solutions and large `μ` gives zero.
fn logistic_instance(rng: &mut ChaCha8Rng, n: usize, ridge: f64) -> LogisticLoss {
    let rows = rng.random_range(2 * n..=4 * n + 10);
    let a: Vec<f64> = dense_random(rng, rows, n, 0.7).iter().map(|v| 3.0 * v).collect();
    let w: Vec<f64> = (0..n).map(|_| uniform(rng, -1.0, 1.0)).collect();
    let y: Vec<f64> = a
        .chunks(n)
        .map(|row| {
            let z: f64 = row.iter().zip(&w).map(|(p, q)| p * q).sum::<f64>() + uniform(rng, -1.5, 1.5);
            if z >= 0.0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    LogisticLoss::new(CsrMatrix::from_dense(rows, n, &a).unwrap(), y, ridge).unwrap()
}

fn least_squares_instance(rng: &mut ChaCha8Rng, rows: usize, n: usize, ridge: f64) -> LeastSquaresLoss {
    let a = dense_random(rng, rows, n, 0.5);
    let b: Vec<f64> = (0..rows).map(|_| uniform(rng, -2.0, 2.0)).collect();
    LeastSquaresLoss::new(CsrMatrix::from_dense(rows, n, &a).unwrap(), b, ridge).unwrap()
}

fn tight(tol: f64) -> SolverConfig {
    SolverConfig {
        outer_tol: tol,
        ..SolverConfig::default()
    }
}

// ---------------------------------------------------------------------------
// 1. oracle equivalence

fn c1_oracle(runs: &mut Runs) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst_x = 0.0f64;
    let mut worst_phi = 0.0f64;
    let mut dense_solutions = 0;
    for k in 0..50 {
        let n = rng.random_range(2..=10);
        let mu = uniform(&mut rng, 0.01, 1.0);
        let (kind, problem) = if k % 2 == 0 {
            ("quadratic", Problem::new(quadratic_instance(&mut rng, n), mu).unwrap())
        } else {
            let ridge = log_uniform(&mut rng, 0.01, 0.1);
            ("logistic", Problem::new(logistic_instance(&mut rng, n, ridge), mu).unwrap())
        };
        let oracle = brute_force_oracle(&problem, baseline::DEFAULT_ORACLE_MAX_DIM)
            .map_err(|e| format!("instance {k}: oracle failed: {e}"))?;
        let report = runs.solve(format!("c1/{k}"), &problem, &tight(1e-11));
        let dx = report
            .x
            .iter()
            .zip(&oracle.x_star)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let dphi = (report.phi - oracle.phi_star).abs();
        worst_x = worst_x.max(dx);
        worst_phi = worst_phi.max(dphi);
        if oracle.x_star.iter().any(|&v| v != 0.0) {
            dense_solutions += 1;
        }
        ensure(dx <= 1e-7 && dphi <= 1e-10, || {
            format!("instance {k} ({kind}, n = {n}, μ = {mu:.4}): ‖x − x*‖∞ = {dx:.2e}, |φ − φ*| = {dphi:.2e}")
        })?;
    }
    Ok(format!(
        "50 instances ({dense_solutions} with x* ≠ 0), max ‖x − x*‖∞ = {worst_x:.2e}, max |φ − φ*| = {worst_phi:.2e}"
    ))
}

// ---------------------------------------------------------------------------
// 2. linear-rate envelope

/// `I − 2vvᵀ/‖v‖²` applied to both sides of `diag(d)`.
fn reflected_diagonal(v: &[f64], d: &[f64]) -> Vec<f64> {
    let n = d.len();
    let vv: f64 = v.iter().map(|t| t * t).sum();
    let q: Vec<f64> = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            (if i == j { 1.0 } else { 0.0 }) - 2.0 * v[i] * v[j] / vv
        })
        .collect();
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let s: f64 = (0..n).map(|k| q[i * n + k] * d[k] * q[j * n + k]).sum();
            h[i * n + j] = s;
            h[j * n + i] = s;
        }
    }
    h
}

fn c2_envelope(runs: &mut Runs) -> Check {
    const N: usize = 50;
    const LAMBDA: f64 = 1.0;
    const L: f64 = 1e3;
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut checked = 0;
    let mut tightest = f64::INFINITY;
    for k in 0..20 {
        let mut d: Vec<f64> = (0..N).map(|_| log_uniform(&mut rng, LAMBDA, L)).collect();
        d[0] = LAMBDA;
        d[N - 1] = L;
        let c: Vec<f64> = (0..N).map(|_| uniform(&mut rng, -2.0, 2.0)).collect();
        let mu = uniform(&mut rng, 0.05, 1.0);
        let rotated = k >= 10;
        let (h, phi_star) = if rotated {
            let v: Vec<f64> = (0..N).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
            (reflected_diagonal(&v, &d), None)
        } else {
            // separable: x_i = −S_μ(c_i) / d_i
            let phi: f64 = c
                .iter()
                .zip(&d)
                .map(|(&ci, &di)| {
                    let xi = -ci.signum() * (ci.abs() - mu).max(0.0) / di;
                    0.5 * di * xi * xi + ci * xi + mu * xi.abs()
                })
                .sum();
            let mut diag = vec![0.0; N * N];
            for i in 0..N {
                diag[i * N + i] = d[i];
            }
            (diag, Some(phi))
        };
        let q = QuadraticLoss::new(CsrMatrix::from_dense(N, N, &h).unwrap(), c, 0.0).unwrap();
        let problem = Problem::new(q, mu).unwrap();
        let cfg = SolverConfig {
            lipschitz_override: Some(L),
            ..tight(1e-12)
        };
        let report = runs.solve(format!("c2/{k}"), &problem, &cfg);
        let phi_star = match phi_star {
            Some(p) => p,
            None => {
                let ista = baseline::ista_solve(
                    &problem,
                    &[0.0; N],
                    &IstaConfig {
                        outer_tol: 1e-12,
                        max_iters: 200_000,
                        lipschitz_override: Some(L),
                        time_limit: None,
                    },
                )
                .map_err(|e| e.to_string())?;
                ista.phi.min(report.phi)
            }
        };
        let gap0 = report.phi0 - phi_star;
        for t in &report.trace {
            let bound = (1.0 - LAMBDA / L).powi(t.iter as i32) * gap0 + 1e-12;
            let gap = t.phi - phi_star;
            tightest = tightest.min(bound - gap);
            ensure(gap <= bound, || {
                format!(
                    "instance {k} ({}), iter {}: φ − φ* = {gap:.3e} > envelope {bound:.3e}",
                    if rotated { "rotated" } else { "diagonal" },
                    t.iter
                )
            })?;
            checked += 1;
        }
    }
    Ok(format!(
        "20 quadratics (n = 50, λ/L = 1e-3), {checked} iterates inside the envelope, min slack {tightest:.2e}"
    ))
}

// ---------------------------------------------------------------------------
// randomized suite feeding criteria 3, 4 and 6

fn randomized_suite(runs: &mut Runs, target_iterations: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let start = runs.iterations();
    let mut k = 0;
    while runs.iterations() - start < target_iterations {
        let n = rng.random_range(10..=120);
        let obj: Box<dyn SmoothObjective> = match k % 4 {
            0 => Box::new(quadratic_instance(&mut rng, n)),
            1 => Box::new(logistic_instance(&mut rng, n, 0.0)),
            2 => {
                let ridge = log_uniform(&mut rng, 1e-4, 1e-1);
                Box::new(logistic_instance(&mut rng, n, ridge))
            }
            _ => {
                // more features than samples and no ridge: not strongly convex
                let rows = rng.random_range(n / 2..=n);
                Box::new(least_squares_instance(&mut rng, rows.max(2), n, 0.0))
            }
        };
        let g0 = norm_inf(&obj.gradient(&vec![0.0; n]).unwrap());
        let mu = log_uniform(&mut rng, 1e-3, 0.9) * g0;
        let problem = Problem::from_boxed(obj, mu).unwrap();
        let cfg = SolverConfig {
            eta: [0.01, 0.1, 0.5][k % 3],
            ..tight(1e-10)
        };
        runs.solve(format!("suite/{k}"), &problem, &cfg);
        k += 1;
    }
    k
}

// ---------------------------------------------------------------------------
// 3, 4, 6: trace invariants over every OBA run

fn c3_safeguard(runs: &Runs) -> (Check, Option<String>) {
    let mut records = 0;
    for (label, r) in &runs.reports {
        for t in &r.trace {
            records += 1;
            if !t.safeguard_holds() {
                return (
                    Err(format!(
                        "{label} iter {}: φ(x⁺) = {:e}, Γ = {:e}, φ(x) = {:e}",
                        t.iter, t.phi, t.gamma, t.phi_prev
                    )),
                    None,
                );
            }
        }
    }
    let fallbacks: usize = runs.reports.iter().map(|(_, r)| r.fallback_count).sum();
    let with_fallback = runs.reports.iter().filter(|(_, r)| r.fallback_count > 0).count();
    let first: usize = runs
        .reports
        .iter()
        .filter(|(_, r)| r.trace.first().is_some_and(|t| t.fallback))
        .count();
    let warning = (fallbacks > 0).then(|| {
        format!(
            "ISTA fallback used {fallbacks} times in {with_fallback} of {} runs ({first} at the first iteration)",
            runs.reports.len()
        )
    });
    (
        Ok(format!(
            "φ(x⁺) ≤ Γ ≤ φ(x) on {records} iterations of {} runs; fallback count {fallbacks}",
            runs.reports.len()
        )),
        warning,
    )
}

fn c4_finite(runs: &Runs) -> Check {
    let total = runs.iterations();
    let mut max_halvings = 0;
    let mut max_passes_over_bound = 0i64;
    for (label, r) in &runs.reports {
        for t in &r.trace {
            max_halvings = max_halvings.max(t.ls_halvings);
            max_passes_over_bound = max_passes_over_bound.max(t.cycle_j as i64 - (t.free_unsure as i64 + 1));
            ensure(t.ls_halvings <= 60, || {
                format!("{label} iter {}: {} line-search halvings", t.iter, t.ls_halvings)
            })?;
            ensure(t.cycle_j <= t.free_unsure + 1, || {
                format!(
                    "{label} iter {}: {} cycle passes with |U_F| = {}",
                    t.iter, t.cycle_j, t.free_unsure
                )
            })?;
        }
        ensure(r.termination != Termination::NonFinite, || format!("{label}: non-finite iterate"))?;
    }
    ensure(total >= 10_000, || format!("only {total} iterations aggregated"))?;
    Ok(format!(
        "{total} iterations: max halvings {max_halvings}, max j − (|U_F| + 1) = {max_passes_over_bound}"
    ))
}

fn c6_cg(runs: &Runs) -> Check {
    let mut worst = 0.0f64;
    let mut records = 0;
    for (label, r) in &runs.reports {
        for t in &r.trace {
            records += 1;
            worst = worst.max(t.cg_rel_residual);
            ensure(t.cg_rel_residual <= 0.1, || {
                format!(
                    "{label} iter {}: relative residual {:.3e} (converged = {})",
                    t.iter, t.cg_rel_residual, t.cg_converged
                )
            })?;
        }
    }
    Ok(format!("{records} trace records, max ‖(H+δI)d + g‖∞ / ‖g‖∞ = {worst:.3e}"))
}

// ---------------------------------------------------------------------------
// 5. derivative correctness

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    diff / numkit::norm2(b)
}

fn c5_derivatives() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst_g = 0.0f64;
    let mut worst_h = 0.0f64;
    for kind in ["logistic", "least-squares", "quadratic"] {
        for k in 0..20 {
            let n = rng.random_range(3..=30);
            let ridge = if k % 2 == 0 { 0.0 } else { uniform(&mut rng, 0.0, 0.5) };
            let obj: Box<dyn SmoothObjective> = match kind {
                "logistic" => Box::new(logistic_instance(&mut rng, n, ridge)),
                "least-squares" => {
                    let rows = rng.random_range(2..=3 * n);
                    Box::new(least_squares_instance(&mut rng, rows, n, ridge))
                }
                _ => Box::new(quadratic_instance(&mut rng, n)),
            };
            let x: Vec<f64> = (0..n).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
            let g = obj.gradient(&x).map_err(|e| e.to_string())?;

            let h = 1e-6;
            let fd: Vec<f64> = (0..n)
                .map(|i| {
                    let mut p = x.clone();
                    let mut m = x.clone();
                    p[i] += h;
                    m[i] -= h;
                    (obj.value(&p).unwrap() - obj.value(&m).unwrap()) / (p[i] - m[i])
                })
                .collect();
            let eg = rel(&fd, &g);

            let v: Vec<f64> = (0..n).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
            let hv = obj.hess_vec(&x, &v).map_err(|e| e.to_string())?;
            let h = 1e-5;
            let xp: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + h * b).collect();
            let xm: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - h * b).collect();
            let gp = obj.gradient(&xp).unwrap();
            let gm = obj.gradient(&xm).unwrap();
            let fd_hv: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            let eh = rel(&fd_hv, &hv);

            worst_g = worst_g.max(eg);
            worst_h = worst_h.max(eh);
            ensure(eg <= 1e-5, || format!("{kind} instance {k}: gradient relative error {eg:.2e}"))?;
            ensure(eh <= 1e-4, || format!("{kind} instance {k}: hess_vec relative error {eh:.2e}"))?;
        }
    }
    Ok(format!(
        "60 instances, max gradient rel. error {worst_g:.2e}, max hess_vec rel. error {worst_h:.2e}"
    ))
}

// ---------------------------------------------------------------------------
// 7. synthetic diagonal dominance

fn c7_dominance() -> Check {
    let mut values = Vec::new();
    for seed in [1, 2, 3] {
        let ds = data_io::generate_synthetic(&SyntheticSpec { n: 5000, seed }).map_err(|e| e.to_string())?;
        let ds = data_io::normalize(&ds, Normalization::MinMax);
        let n = ds.n_features();
        let loss = LogisticLoss::new(ds.a, ds.targets, 0.0).map_err(|e| e.to_string())?;
        let d = diagnostics::diagonal_dominance(&loss, &vec![0.0; n], diagnostics::DEFAULT_DOMINANCE_CAP)
            .map_err(|e| e.to_string())?;
        values.push(d);
    }
    let text = values.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", ");
    ensure(values.iter().all(|v| (35.0..=140.0).contains(v)), || {
        format!("𝒟 = [{text}] outside [35, 140]")
    })?;
    Ok(format!("n = 5000, seeds 1..3: 𝒟 = [{text}] ⊂ [35, 140]"))
}

// ---------------------------------------------------------------------------
// 8. planted-support LASSO

fn support(x: &[f64]) -> BTreeSet<usize> {
    x.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, _)| i).collect()
}

fn c8_sparsity(runs: &mut Runs) -> Check {
    const N: usize = 200;
    const ROWS: usize = 400;
    const K: usize = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let a = dense_random(&mut rng, ROWS, N, 1.0);
    let mut planted: Vec<usize> = Vec::new();
    while planted.len() < K {
        let j = rng.random_range(0..N);
        if !planted.contains(&j) {
            planted.push(j);
        }
    }
    planted.sort_unstable();
    let mut x_true = vec![0.0; N];
    for &j in &planted {
        x_true[j] = if rng.random_bool(0.5) { 1.0 } else { -1.0 } * uniform(&mut rng, 1.0, 2.0);
    }
    let b: Vec<f64> = (0..ROWS)
        .map(|r| {
            let row = &a[r * N..(r + 1) * N];
            row.iter().zip(&x_true).map(|(p, q)| p * q).sum::<f64>() + 0.01 * uniform(&mut rng, -1.0, 1.0)
        })
        .collect();
    let col = |j: usize| -> Vec<f64> { (0..ROWS).map(|r| a[r * N + j]).collect() };
    let inv_rows = 1.0 / ROWS as f64;

    // The two off-support columns most correlated with A_S G⁻¹ sgn(x_S),
    // G = A_SᵀA_S/N: the first to enter as μ shrinks.
    let mut g = vec![0.0; K * K];
    for (p, &i) in planted.iter().enumerate() {
        for (q, &j) in planted.iter().enumerate() {
            g[p * K + q] = numkit::dot(&col(i), &col(j)) * inv_rows;
        }
    }
    numkit::cholesky_in_place(&mut g, K).map_err(|e| e.to_string())?;
    let s: Vec<f64> = planted.iter().map(|&j| x_true[j].signum()).collect();
    let coef = numkit::cholesky_solve(&g, K, &s);
    let mut v = vec![0.0; ROWS];
    for (p, &j) in planted.iter().enumerate() {
        numkit::axpy(coef[p], &col(j), &mut v);
    }
    let mut off: Vec<(f64, usize)> = (0..N)
        .filter(|j| !planted.contains(j))
        .map(|j| (numkit::dot(&col(j), &v).abs(), j))
        .collect();
    off.sort_by(|p, q| q.0.total_cmp(&p.0));
    let mut cols: Vec<usize> = planted.clone();
    cols.extend(off.iter().take(2).map(|&(_, j)| j));
    cols.sort_unstable();
    let m = cols.len();
    let planted_local: BTreeSet<usize> = (0..m).filter(|&p| planted.contains(&cols[p])).collect();

    // (1/2N)‖A_C z − b‖² as ½zᵀHz + cᵀz + const
    let mut h = vec![0.0; m * m];
    for p in 0..m {
        for q in 0..m {
            h[p * m + q] = numkit::dot(&col(cols[p]), &col(cols[q])) * inv_rows;
        }
    }
    let c: Vec<f64> = cols.iter().map(|&j| -numkit::dot(&col(j), &b) * inv_rows).collect();
    let sub = |mu: f64| {
        let q = QuadraticLoss::new(CsrMatrix::from_dense(m, m, &h).unwrap(), c.clone(), 0.0).unwrap();
        Problem::new(q, mu).unwrap()
    };

    // geometric bisection on μ
    let mut hi = norm_inf(&c);
    let mut lo = 1e-4 * hi;
    let mut found = None;
    let mut probes = 0;
    for _ in 0..40 {
        let mu = (lo * hi).sqrt();
        probes += 1;
        let oracle = brute_force_oracle(&sub(mu), 12).map_err(|e| e.to_string())?;
        let supp = support(&oracle.x_star);
        if supp == planted_local {
            found = Some((mu, oracle));
            break;
        }
        if supp.is_superset(&planted_local) {
            lo = mu;
        } else {
            hi = mu;
        }
    }
    let (mu, oracle) = found.ok_or_else(|| format!("bisection found no μ after {probes} oracle probes"))?;

    let full = Problem::new(
        LeastSquaresLoss::new(CsrMatrix::from_dense(ROWS, N, &a).unwrap(), b.clone(), 0.0).unwrap(),
        mu,
    )
    .unwrap();
    let report = runs.solve("c8/lasso".into(), &full, &tight(1e-10));
    let supp = support(&report.x);
    let planted_set: BTreeSet<usize> = planted.iter().copied().collect();
    ensure(supp == planted_set, || {
        format!("μ = {mu:.4e}: OBA support {supp:?} differs from planted {planted_set:?}")
    })?;
    let x_sub: Vec<f64> = cols.iter().map(|&j| report.x[j]).collect();
    let dx = x_sub
        .iter()
        .zip(&oracle.x_star)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    let sp_oba = sparsity_percent(&x_sub, 0.0);
    let sp_oracle = sparsity_percent(&oracle.x_star, 0.0);
    ensure(sp_oba == sp_oracle, || {
        format!("sparsity on the checked columns: OBA {sp_oba}% vs oracle {sp_oracle}%")
    })?;
    ensure(dx <= 1e-7, || format!("OBA vs oracle on the checked columns: {dx:.2e}"))?;
    let sp_full = sparsity_percent(&report.x, 0.0);
    let expect = 100.0 * (N - K) as f64 / N as f64;
    ensure(sp_full == expect, || format!("full sparsity {sp_full}% ≠ {expect}%"))?;
    Ok(format!(
        "μ = {mu:.4e} after {probes} oracle probes; sparsity {sp_full}% (exact zeros), checked columns {sp_oba:.2}% = oracle, ‖Δx‖∞ = {dx:.1e}"
    ))
}

// ---------------------------------------------------------------------------
// 9. ISTA fixed point

fn c9_fixed_point(runs: &mut Runs) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let (mut stationary, mut nonstationary) = (0, 0);
    for k in 0..100 {
        let n = rng.random_range(5..=25);
        let obj: Box<dyn SmoothObjective> = match k % 3 {
            0 => Box::new(quadratic_instance(&mut rng, n)),
            1 => Box::new(logistic_instance(&mut rng, n, 0.01)),
            _ => Box::new(least_squares_instance(&mut rng, 3 * n, n, 0.0)),
        };
        let g0 = norm_inf(&obj.gradient(&vec![0.0; n]).unwrap());
        let mu = log_uniform(&mut rng, 0.01, 0.9) * g0;
        let problem = Problem::from_boxed(obj, mu).unwrap();
        let x: Vec<f64> = match k % 4 {
            0 => (0..n)
                .map(|_| if rng.random_bool(0.3) { 0.0 } else { uniform(&mut rng, -1.0, 1.0) })
                .collect(),
            1 => {
                let mut x = runs.solve(format!("c9/{k}"), &problem, &tight(1e-12)).x;
                let i = rng.random_range(0..n);
                x[i] += log_uniform(&mut rng, 1e-6, 1e-4);
                x
            }
            _ => runs.solve(format!("c9/{k}"), &problem, &tight(1e-12)).x,
        };
        let obj = problem.objective();
        let grad = obj.gradient(&x).unwrap();
        let lip = obj.lipschitz();
        let g_inf = norm_inf(&min_norm_subgradient(&grad, &x, mu));
        let step: Vec<f64> = x.iter().zip(&grad).map(|(a, b)| a - b / lip).collect();
        let prox = soft_threshold(&step, mu / lip);
        let r_inf = x.iter().zip(&prox).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let fixed = r_inf <= 1e-8;
        let opt = g_inf <= 1e-10;
        ensure(fixed == opt, || {
            format!("point {k}: ‖x − 𝒮(x − ∇f/L)‖∞ = {r_inf:.2e} but ‖g‖∞ = {g_inf:.2e}")
        })?;
        if opt {
            stationary += 1;
        } else {
            nonstationary += 1;
        }
    }
    ensure(stationary > 0 && nonstationary > 0, || {
        format!("degenerate sample: {stationary} stationary, {nonstationary} not")
    })?;
    Ok(format!("100 points ({stationary} stationary, {nonstationary} not): both directions agree"))
}

// ---------------------------------------------------------------------------
// 10. determinism

fn trace_without_seconds(path: &Path) -> Result<Vec<Vec<String>>, String> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
    let skip = headers.iter().position(|h| h == "seconds").ok_or("no seconds column")?;
    let mut rows = vec![headers.iter().map(String::from).collect::<Vec<_>>()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        rows.push(
            rec.iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, v)| v.to_string())
                .collect(),
        );
    }
    Ok(rows)
}

fn c10_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    let args = BenchmarkArgs {
        loss: LossKind::Logistic,
        data: vec![],
        synthetic: vec![200],
        seed: 7,
        mu: 0.01,
        solvers: vec![SolverKind::Oba, SolverKind::Ista],
        ridge: 0.0,
        normalize: NormalizeArg::Minmax,
        solver_args: SolverArgs {
            tol: 1e-6,
            max_iters: Some(20_000),
            eta: 0.01,
            eps: 1e-4,
            cg_tol: 0.1,
            lipschitz: None,
        },
        ref_tol: 1e-10,
        time_cap: 300.0,
        out: first.clone(),
    };
    let code = cli::cmd_benchmark(&args).map_err(|e| e.to_string())?;
    ensure(code == cli::EXIT_OK, || format!("benchmark exited with {code}"))?;
    let code = cli::cmd_replay(&ReplayArgs {
        manifest: first.join(cli::MANIFEST_FILE),
        out: second.clone(),
    })
    .map_err(|e| e.to_string())?;
    ensure(code == cli::EXIT_OK, || format!("replay exited with {code}"))?;

    let mut traces: Vec<_> = std::fs::read_dir(&first)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|name| name.ends_with(".trace.csv"))
        .collect();
    traces.sort();
    ensure(traces.len() == 2, || format!("expected 2 trace files, found {traces:?}"))?;
    let mut rows = 0;
    for name in &traces {
        let a = trace_without_seconds(&first.join(name))?;
        let b = trace_without_seconds(&second.join(name))?;
        ensure(a == b, || format!("{name} differs between run and replay"))?;
        rows += a.len() - 1;
    }
    Ok(format!("{} traces, {rows} rows identical apart from seconds", traces.len()))
}

// ---------------------------------------------------------------------------

/// Criteria to run: numeric arguments select a subset, none means all.
fn selected() -> Vec<usize> {
    let picked: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    if picked.is_empty() {
        (1..=10).collect()
    } else {
        picked
    }
}

fn main() {
    let want = selected();
    let mut runs = Runs::default();
    let mut outcomes: Vec<Outcome> = Vec::new();
    let mut push = |id: usize, name: &'static str, f: &mut dyn FnMut(&mut Runs) -> (Check, f64)| {
        if want.contains(&id) {
            let (result, seconds) = f(&mut runs);
            outcomes.push(Outcome {
                id,
                name,
                result,
                warning: None,
                seconds,
            });
        }
    };

    push(1, "oracle equivalence", &mut |r| timed(Some(30.0), || c1_oracle(r)));
    push(2, "linear-rate envelope", &mut |r| timed(Some(5.0), || c2_envelope(r)));
    push(5, "derivative correctness", &mut |_| timed(Some(10.0), c5_derivatives));
    push(7, "synthetic diagonal dominance", &mut |_| timed(Some(180.0), c7_dominance));
    push(8, "planted-support sparsity", &mut |r| timed(Some(10.0), || c8_sparsity(r)));
    push(9, "ISTA fixed point", &mut |r| timed(None, || c9_fixed_point(r)));
    push(10, "benchmark determinism", &mut |_| timed(None, c10_determinism));

    let mut suite_runs = 0;
    if [3, 4, 6].iter().any(|id| want.contains(id)) {
        let start = Instant::now();
        let have = runs.iterations();
        suite_runs = randomized_suite(&mut runs, 10_000usize.saturating_sub(have).max(5_000));
        let suite_secs = start.elapsed().as_secs_f64();
        if want.contains(&3) {
            let (result, warning) = c3_safeguard(&runs);
            outcomes.push(Outcome {
                id: 3,
                name: "safeguard chain",
                result,
                warning,
                seconds: suite_secs,
            });
        }
        for (id, name, check) in [
            (4, "finite termination", c4_finite as fn(&Runs) -> Check),
            (6, "CG residual contract", c6_cg),
        ] {
            if want.contains(&id) {
                outcomes.push(Outcome {
                    id,
                    name,
                    result: check(&runs),
                    warning: None,
                    seconds: 0.0,
                });
            }
        }
    }

    outcomes.sort_by_key(|o| o.id);
    println!(
        "acceptance: {} OBA runs ({} from the randomized suite), {} iterations",
        runs.reports.len(),
        suite_runs,
        runs.iterations()
    );
    let mut failed = 0;
    for o in &outcomes {
        let (tag, detail) = match &o.result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag}  C{:<2} {:<30} {detail} [{:.2} s]", o.id, o.name, o.seconds);
        if let Some(w) = &o.warning {
            println!("WARN  C{:<2} {:<30} {w}", o.id, o.name);
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} of {} criteria failed", outcomes.len());
        std::process::exit(1);
    }
    println!("acceptance: all {} criteria passed", outcomes.len());
}
