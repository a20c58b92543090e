//! C interface to the `oba` solver.
//!
//! Problems and reports are opaque heap handles released with their `_free`
//! functions. Every fallible call returns an [`ObaStatus`]; on failure a
//! description is available from [`oba_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use oba::baseline::{self, IstaConfig};
use oba::data_io::{self, LabelMap};
use oba::{
    CsrMatrix, Error, LeastSquaresLoss, LogisticLoss, Problem, QuadraticLoss, SolveReport,
    SolverConfig, Termination,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    DimensionMismatch = 3,
    InvalidConfig = 4,
    Io = 5,
    Parse = 6,
    SolverFailure = 7,
    Internal = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObaLoss {
    Logistic = 0,
    LeastSquares = 1,
    Quadratic = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObaSolverKind {
    Oba = 0,
    Ista = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObaTermination {
    Tolerance = 0,
    MaxIterations = 1,
    TimeLimit = 2,
    NonFinite = 3,
}

/// Solver settings. Non-positive `lipschitz` means "estimate"; non-positive
/// `time_limit_seconds` means no limit.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ObaConfig {
    pub eta: f64,
    pub eps: f64,
    pub cg_rel_tol: f64,
    pub outer_tol: f64,
    pub max_iters: usize,
    pub lipschitz: f64,
    pub time_limit_seconds: f64,
}

pub struct ObaProblem {
    inner: Problem,
}

pub struct ObaReport {
    inner: SolveReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> ObaStatus {
    match err {
        Error::DimensionMismatch { .. } => ObaStatus::DimensionMismatch,
        Error::InvalidMatrix(_) | Error::InvalidInput(_) | Error::BadReference { .. } => {
            ObaStatus::InvalidInput
        }
        Error::Config(_) | Error::Refused(_) => ObaStatus::InvalidConfig,
        Error::Parse { .. } => ObaStatus::Parse,
        Error::Io { .. } => ObaStatus::Io,
        Error::LineSearchFailed { .. } | Error::CycleLimit { .. } | Error::Degenerate(_) => {
            ObaStatus::SolverFailure
        }
        _ => ObaStatus::Internal,
    }
}

/// Runs `f`, recording any error or panic for [`oba_last_error`].
fn guard(f: impl FnOnce() -> Result<(), (ObaStatus, String)>) -> ObaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ObaStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside the solver library");
            ObaStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (ObaStatus, String) {
    (status_of(&e), e.to_string())
}

fn null_err(what: &str) -> (ObaStatus, String) {
    (ObaStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` must be null or valid for `len` reads.
unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (ObaStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null_err(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn build(loss: ObaLoss, a: CsrMatrix, targets: Vec<f64>, ridge: f64, mu: f64) -> oba::Result<Problem> {
    match loss {
        ObaLoss::Logistic => Problem::new(LogisticLoss::new(a, targets, ridge)?, mu),
        ObaLoss::LeastSquares => Problem::new(LeastSquaresLoss::new(a, targets, ridge)?, mu),
        ObaLoss::Quadratic => Problem::new(QuadraticLoss::new(a, targets, ridge)?, mu),
    }
}

/// Library defaults.
#[no_mangle]
pub extern "C" fn oba_config_default() -> ObaConfig {
    let d = SolverConfig::default();
    ObaConfig {
        eta: d.eta,
        eps: d.eps,
        cg_rel_tol: d.cg_rel_tol,
        outer_tol: d.outer_tol,
        max_iters: d.max_outer_iters,
        lipschitz: 0.0,
        time_limit_seconds: 0.0,
    }
}

/// Builds a problem from a CSR matrix with `n_rows + 1` row pointers and
/// `indptr[n_rows]` entries. For `Quadratic` the matrix is `H` and `targets`
/// is the linear term; otherwise rows are samples and `targets` their labels
/// (`±1` for logistic).
///
/// # Safety
/// Every pointer must be valid for the lengths implied above and `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn oba_problem_new_csr(
    loss: ObaLoss,
    n_rows: usize,
    n_cols: usize,
    indptr: *const usize,
    indices: *const usize,
    values: *const f64,
    targets: *const f64,
    ridge: f64,
    mu: f64,
    out: *mut *mut ObaProblem,
) -> ObaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        *out = ptr::null_mut();
        let indptr = slice(indptr, n_rows + 1, "indptr")?;
        let nnz = indptr[n_rows];
        let indices = slice(indices, nnz, "indices")?;
        let values = slice(values, nnz, "values")?;
        let targets = slice(targets, n_rows, "targets")?;
        let a = CsrMatrix::new(n_rows, n_cols, indptr.to_vec(), indices.to_vec(), values.to_vec())
            .map_err(lib_err)?;
        let problem = build(loss, a, targets.to_vec(), ridge, mu).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(ObaProblem { inner: problem }));
        Ok(())
    })
}

/// Reads a LIBSVM file. Labels are mapped `{0,1} → {−1,+1}` for logistic and
/// kept as-is otherwise.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn oba_problem_from_libsvm(
    path: *const c_char,
    loss: ObaLoss,
    ridge: f64,
    mu: f64,
    out: *mut *mut ObaProblem,
) -> ObaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        *out = ptr::null_mut();
        if path.is_null() {
            return Err(null_err("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (ObaStatus::InvalidInput, "path is not UTF-8".to_string()))?;
        let map = match loss {
            ObaLoss::Logistic => LabelMap::Binary,
            _ => LabelMap::Raw,
        };
        let ds = data_io::read_libsvm(path, map).map_err(lib_err)?;
        let problem = build(loss, ds.a, ds.targets, ridge, mu).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(ObaProblem { inner: problem }));
        Ok(())
    })
}

/// Number of variables; 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn oba_problem_dim(problem: *const ObaProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.inner.dim())
}

/// Evaluates `φ(x) = f(x) + μ‖x‖₁`.
///
/// # Safety
/// `x` must be valid for `len` reads and `out_phi` writable.
#[no_mangle]
pub unsafe extern "C" fn oba_problem_objective(
    problem: *const ObaProblem,
    x: *const f64,
    len: usize,
    out_phi: *mut f64,
) -> ObaStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null_err("problem"))?;
        if out_phi.is_null() {
            return Err(null_err("out_phi"));
        }
        let x = slice(x, len, "x")?;
        if len != p.inner.dim() {
            return Err(lib_err(Error::DimensionMismatch {
                expected: p.inner.dim(),
                found: len,
            }));
        }
        *out_phi = p.inner.phi(x).map_err(lib_err)?;
        Ok(())
    })
}

/// # Safety
/// `problem` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn oba_problem_free(problem: *mut ObaProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Solves from `x0` (the origin when null). `config` may be null for defaults.
///
/// # Safety
/// `x0`, when non-null, must hold `oba_problem_dim(problem)` values; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn oba_solve(
    problem: *const ObaProblem,
    solver: ObaSolverKind,
    config: *const ObaConfig,
    x0: *const f64,
    out: *mut *mut ObaReport,
) -> ObaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        *out = ptr::null_mut();
        let p = &problem.as_ref().ok_or_else(|| null_err("problem"))?.inner;
        let cfg = config.as_ref().copied().unwrap_or_else(|| oba_config_default());
        let n = p.dim();
        let x0 = if x0.is_null() {
            vec![0.0; n]
        } else {
            std::slice::from_raw_parts(x0, n).to_vec()
        };
        let lipschitz = (cfg.lipschitz > 0.0).then_some(cfg.lipschitz);
        let time_limit = (cfg.time_limit_seconds > 0.0)
            .then(|| Duration::try_from_secs_f64(cfg.time_limit_seconds))
            .transpose()
            .map_err(|_| (ObaStatus::InvalidConfig, "time limit out of range".to_string()))?;
        let report = match solver {
            ObaSolverKind::Oba => {
                let sc = SolverConfig {
                    eta: cfg.eta,
                    eps: cfg.eps,
                    cg_rel_tol: cfg.cg_rel_tol,
                    outer_tol: cfg.outer_tol,
                    max_outer_iters: cfg.max_iters,
                    lipschitz_override: lipschitz,
                    time_limit,
                    ..SolverConfig::default()
                };
                oba::solve(p, &x0, &sc)
            }
            ObaSolverKind::Ista => {
                let ic = IstaConfig {
                    outer_tol: cfg.outer_tol,
                    max_iters: cfg.max_iters,
                    lipschitz_override: lipschitz,
                    time_limit,
                };
                baseline::ista_solve(p, &x0, &ic)
            }
        }
        .map_err(lib_err)?;
        *out = Box::into_raw(Box::new(ObaReport { inner: report }));
        Ok(())
    })
}

fn report<'a>(r: *const ObaReport) -> Option<&'a SolveReport> {
    unsafe { r.as_ref() }.map(|r| &r.inner)
}

/// # Safety
/// `r` must be a live report handle.
#[no_mangle]
pub unsafe extern "C" fn oba_report_termination(r: *const ObaReport) -> ObaTermination {
    match report(r).map(|r| r.termination) {
        Some(Termination::Tolerance) => ObaTermination::Tolerance,
        Some(Termination::MaxIterations) => ObaTermination::MaxIterations,
        Some(Termination::TimeLimit) => ObaTermination::TimeLimit,
        Some(Termination::NonFinite) | None => ObaTermination::NonFinite,
    }
}

/// # Safety
/// `r` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn oba_report_iterations(r: *const ObaReport) -> usize {
    report(r).map_or(0, |r| r.iterations)
}

/// Final `φ`; NaN for a null handle.
///
/// # Safety
/// `r` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn oba_report_phi(r: *const ObaReport) -> f64 {
    report(r).map_or(f64::NAN, |r| r.phi)
}

/// Final `‖g(x)‖∞`; NaN for a null handle.
///
/// # Safety
/// `r` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn oba_report_g_inf(r: *const ObaReport) -> f64 {
    report(r).map_or(f64::NAN, |r| r.g_inf)
}

/// # Safety
/// `r` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn oba_report_fallback_count(r: *const ObaReport) -> usize {
    report(r).map_or(0, |r| r.fallback_count)
}

/// # Safety
/// `r` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn oba_report_dim(r: *const ObaReport) -> usize {
    report(r).map_or(0, |r| r.x.len())
}

/// Copies the solution into `out`, which must hold exactly
/// `oba_report_dim(r)` values.
///
/// # Safety
/// `out` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn oba_report_copy_x(r: *const ObaReport, out: *mut f64, len: usize) -> ObaStatus {
    guard(|| {
        let rep = report(r).ok_or_else(|| null_err("report"))?;
        if len != rep.x.len() {
            return Err(lib_err(Error::DimensionMismatch {
                expected: rep.x.len(),
                found: len,
            }));
        }
        if len > 0 && out.is_null() {
            return Err(null_err("out"));
        }
        if len > 0 {
            std::slice::from_raw_parts_mut(out, len).copy_from_slice(&rep.x);
        }
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn oba_report_free(r: *mut ObaReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn oba_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn oba_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
