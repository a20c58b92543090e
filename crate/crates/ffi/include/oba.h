#ifndef OBA_H
#define OBA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum ObaStatus {
  OBA_STATUS_OK = 0,
  OBA_STATUS_NULL_POINTER = 1,
  OBA_STATUS_INVALID_INPUT = 2,
  OBA_STATUS_DIMENSION_MISMATCH = 3,
  OBA_STATUS_INVALID_CONFIG = 4,
  OBA_STATUS_IO = 5,
  OBA_STATUS_PARSE = 6,
  OBA_STATUS_SOLVER_FAILURE = 7,
  OBA_STATUS_INTERNAL = 8,
  OBA_STATUS_PANIC = 9,
} ObaStatus;

typedef enum ObaLoss {
  OBA_LOSS_LOGISTIC = 0,
  OBA_LOSS_LEAST_SQUARES = 1,
  OBA_LOSS_QUADRATIC = 2,
} ObaLoss;

typedef enum ObaSolverKind {
  OBA_SOLVER_KIND_OBA = 0,
  OBA_SOLVER_KIND_ISTA = 1,
} ObaSolverKind;

typedef enum ObaTermination {
  OBA_TERMINATION_TOLERANCE = 0,
  OBA_TERMINATION_MAX_ITERATIONS = 1,
  OBA_TERMINATION_TIME_LIMIT = 2,
  OBA_TERMINATION_NON_FINITE = 3,
} ObaTermination;

typedef struct ObaProblem ObaProblem;

typedef struct ObaReport ObaReport;

/**
 * Solver settings. Non-positive `lipschitz` means "estimate"; non-positive
 * `time_limit_seconds` means no limit.
 */
typedef struct ObaConfig {
  double eta;
  double eps;
  double cg_rel_tol;
  double outer_tol;
  size_t max_iters;
  double lipschitz;
  double time_limit_seconds;
} ObaConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library defaults.
 */
struct ObaConfig oba_config_default(void);

/**
 * Builds a problem from a CSR matrix with `n_rows + 1` row pointers and
 * `indptr[n_rows]` entries. For `Quadratic` the matrix is `H` and `targets`
 * is the linear term; otherwise rows are samples and `targets` their labels
 * (`±1` for logistic).
 *
 * # Safety
 * Every pointer must be valid for the lengths implied above and `out` must
 * be writable.
 */
enum ObaStatus oba_problem_new_csr(enum ObaLoss loss,
                                   size_t n_rows,
                                   size_t n_cols,
                                   const size_t *indptr,
                                   const size_t *indices,
                                   const double *values,
                                   const double *targets,
                                   double ridge,
                                   double mu,
                                   struct ObaProblem **out);

/**
 * Reads a LIBSVM file. Labels are mapped `{0,1} → {−1,+1}` for logistic and
 * kept as-is otherwise.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum ObaStatus oba_problem_from_libsvm(const char *path,
                                       enum ObaLoss loss,
                                       double ridge,
                                       double mu,
                                       struct ObaProblem **out);

/**
 * Number of variables; 0 for a null handle.
 *
 * # Safety
 * `problem` must be null or a live handle.
 */
size_t oba_problem_dim(const struct ObaProblem *problem);

/**
 * Evaluates `φ(x) = f(x) + μ‖x‖₁`.
 *
 * # Safety
 * `x` must be valid for `len` reads and `out_phi` writable.
 */
enum ObaStatus oba_problem_objective(const struct ObaProblem *problem,
                                     const double *x,
                                     size_t len,
                                     double *out_phi);

/**
 * # Safety
 * `problem` must be null or a handle not freed before.
 */
void oba_problem_free(struct ObaProblem *problem);

/**
 * Solves from `x0` (the origin when null). `config` may be null for defaults.
 *
 * # Safety
 * `x0`, when non-null, must hold `oba_problem_dim(problem)` values; `out`
 * must be writable.
 */
enum ObaStatus oba_solve(const struct ObaProblem *problem,
                         enum ObaSolverKind solver,
                         const struct ObaConfig *config,
                         const double *x0,
                         struct ObaReport **out);

/**
 * # Safety
 * `r` must be a live report handle.
 */
enum ObaTermination oba_report_termination(const struct ObaReport *r);

/**
 * # Safety
 * `r` must be null or a live report handle.
 */
size_t oba_report_iterations(const struct ObaReport *r);

/**
 * Final `φ`; NaN for a null handle.
 *
 * # Safety
 * `r` must be null or a live report handle.
 */
double oba_report_phi(const struct ObaReport *r);

/**
 * Final `‖g(x)‖∞`; NaN for a null handle.
 *
 * # Safety
 * `r` must be null or a live report handle.
 */
double oba_report_g_inf(const struct ObaReport *r);

/**
 * # Safety
 * `r` must be null or a live report handle.
 */
size_t oba_report_fallback_count(const struct ObaReport *r);

/**
 * # Safety
 * `r` must be null or a live report handle.
 */
size_t oba_report_dim(const struct ObaReport *r);

/**
 * Copies the solution into `out`, which must hold exactly
 * `oba_report_dim(r)` values.
 *
 * # Safety
 * `out` must be valid for `len` writes.
 */
enum ObaStatus oba_report_copy_x(const struct ObaReport *r, double *out, size_t len);

/**
 * # Safety
 * `r` must be null or a handle not freed before.
 */
void oba_report_free(struct ObaReport *r);

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *oba_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *oba_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OBA_H */
