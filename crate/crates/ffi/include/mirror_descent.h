#ifndef MIRROR_DESCENT_H
#define MIRROR_DESCENT_H

/* Generated by cbindgen from mirror-descent-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Step-size rule selector for [`MdRunParams`].
 */
typedef enum MdRule {
  /**
   * Constant step `gamma0`.
   */
  MdRule_Fixed = 0,
  /**
   * Adaptive rule `sqrt(2 sigma) / (||g_k|| sqrt(k))`; not monotone.
   */
  MdRule_Nesterov = 1,
  /**
   * Monotone rule `sqrt(2 sigma R) / (G_k k^{a/2})`; needs no Lipschitz
   * constant.
   */
  MdRule_LipschitzFree = 2,
} MdRule;

/**
 * Status code returned by every fallible call.
 */
typedef enum MdStatus {
  MdStatus_Ok = 0,
  MdStatus_NullPointer = 1,
  MdStatus_InvalidArgument = 2,
  MdStatus_UnknownProblem = 3,
  MdStatus_ConfigError = 4,
  MdStatus_UnsupportedGeometry = 5,
  /**
   * The problem's geometry has no closed-form bound constant; pass a
   * positive `r` explicitly.
   */
  MdStatus_NeedsExplicitR = 6,
  MdStatus_ZeroGradient = 7,
  MdStatus_NumericalError = 8,
  MdStatus_MissingOptimum = 9,
  MdStatus_BufferTooSmall = 10,
  MdStatus_InternalError = 11,
} MdStatus;

/**
 * Opaque problem handle.
 */
typedef struct MdProblem MdProblem;

/**
 * Opaque trace handle, remembering which problem produced it.
 */
typedef struct MdTrace MdTrace;

/**
 * Run configuration. `gamma0` is read only by the fixed rule; `a` and `r`
 * only by the Lipschitz-free rule. A nonpositive `r` requests the
 * closed-form worst case for the problem's geometry, which exists only for
 * Euclidean problems.
 */
typedef struct MdRunParams {
  enum MdRule rule;
  double gamma0;
  double a;
  double r;
  /**
   * Ergodic weight exponent, `m >= -1` (composite problems need `m <= 0`).
   */
  double m;
  size_t iterations;
} MdRunParams;

/**
 * One executed iteration of a finished run. `h_value` is NaN for
 * non-composite runs.
 */
typedef struct MdTraceRow {
  size_t k;
  double gamma;
  double grad_dual_norm;
  double omega;
  double f_value;
  double h_value;
} MdTraceRow;

/**
 * Bound audit of a finished run. NaN marks an unavailable field; when
 * `diagnostic_only` is nonzero the rule carries no bound guarantee and
 * `satisfied` is meaningless.
 */
typedef struct MdBoundReport {
  double observed_gap;
  double theorem_rhs;
  double corollary_rhs;
  double max_grad_dual;
  size_t effective_iterations;
  uint8_t satisfied;
  uint8_t diagnostic_only;
} MdBoundReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *md_version(void);

/**
 * Copies the most recent error message on this thread into `buf` (always
 * nul-terminated when `cap > 0`) and returns the full message length in
 * bytes, excluding the terminator. A `NULL` buffer just queries the length.
 *
 * # Safety
 * `buf` must be valid for writes of `cap` bytes, or `NULL`.
 */
size_t md_last_error_message(char *buf, size_t cap);

/**
 * Builds a problem from its registry name (`example1`, `sqrt-simplex-n{n}`,
 * `pwl-max-n{n}-s{seed}`, `lasso-box-n{n}-l{lambda}-s{seed}`). On success
 * the caller owns the handle and must release it with [`md_problem_free`].
 *
 * # Safety
 * `name` must be a valid nul-terminated string and `out` a valid pointer.
 */
enum MdStatus md_problem_from_name(const char *name, struct MdProblem **out);

/**
 * Releases a problem handle; a `NULL` handle is ignored.
 *
 * # Safety
 * `problem` must have come from [`md_problem_from_name`] and not have been
 * freed already.
 */
void md_problem_free(struct MdProblem *problem);

/**
 * Problem dimension.
 *
 * # Safety
 * `problem` and `out` must be valid pointers.
 */
enum MdStatus md_problem_dim(const struct MdProblem *problem, size_t *out);

/**
 * Closed-form worst-case bound constant for the problem's geometry.
 *
 * # Safety
 * `problem` and `out` must be valid pointers.
 */
enum MdStatus md_problem_safe_r(const struct MdProblem *problem, double *out);

/**
 * Runs the solver from the problem's canonical start. On success the caller
 * owns the trace and must release it with [`md_trace_free`].
 *
 * # Safety
 * All pointers must be valid; `problem` must be a live handle.
 */
enum MdStatus md_run(const struct MdProblem *problem,
                     const struct MdRunParams *params,
                     struct MdTrace **out);

/**
 * Releases a trace handle; a `NULL` handle is ignored.
 *
 * # Safety
 * `trace` must have come from [`md_run`] and not have been freed already.
 */
void md_trace_free(struct MdTrace *trace);

/**
 * Number of executed iterations.
 *
 * # Safety
 * `trace` and `out` must be valid pointers.
 */
enum MdStatus md_trace_len(const struct MdTrace *trace, size_t *out);

/**
 * Iteration at which the run stopped on a zero subgradient, or 0 when the
 * full budget executed.
 *
 * # Safety
 * `trace` and `out` must be valid pointers.
 */
enum MdStatus md_trace_stopped_at(const struct MdTrace *trace, size_t *out);

/**
 * Copies row `index` (0-based) of the trace.
 *
 * # Safety
 * `trace` and `out` must be valid pointers.
 */
enum MdStatus md_trace_row(const struct MdTrace *trace, size_t index, struct MdTraceRow *out);

/**
 * Copies the weak-ergodic average into `buf` and reports the dimension in
 * `written`. Fails with `BufferTooSmall` when `cap` is insufficient.
 *
 * # Safety
 * `buf` must be valid for `cap` doubles; other pointers must be valid.
 */
enum MdStatus md_trace_solution(const struct MdTrace *trace,
                                double *buf,
                                size_t cap,
                                size_t *written);

/**
 * Copies the last iterate into `buf`; same contract as [`md_trace_solution`].
 *
 * # Safety
 * `buf` must be valid for `cap` doubles; other pointers must be valid.
 */
enum MdStatus md_trace_last_iterate(const struct MdTrace *trace,
                                    double *buf,
                                    size_t cap,
                                    size_t *written);

/**
 * Audits a finished trace against the bound for the rule that produced it.
 * `r` overrides the bound constant; pass a nonpositive value to reuse the
 * `r` the run itself used (Lipschitz-free runs) or the geometry's closed
 * form. The trace must come from the same problem handle's registry name.
 *
 * # Safety
 * All pointers must be valid; `problem` and `trace` must be live handles.
 */
enum MdStatus md_audit(const struct MdProblem *problem,
                       const struct MdTrace *trace,
                       double r,
                       struct MdBoundReport *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* MIRROR_DESCENT_H */
