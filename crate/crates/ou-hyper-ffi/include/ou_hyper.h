#ifndef OU_HYPER_H
#define OU_HYPER_H

/* Generated by cbindgen from the ou-hyper-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * ABI revision reported by [`ou_abi_version`]; bumped on any breaking
 * change to this header.
 */
#define OU_ABI_VERSION 1

/**
 * Which way a verdict's claim points.
 */
typedef enum OuDirection {
  /**
   * The claim is lhs <= rhs.
   */
  OU_DIRECTION_LEQ = 0,
  /**
   * The claim is lhs >= rhs.
   */
  OU_DIRECTION_GEQ = 1,
} OuDirection;

/**
 * Result codes for every fallible entry point.
 */
typedef enum OuStatus {
  /**
   * Success; all out-parameters are valid.
   */
  OU_STATUS_OK = 0,
  /**
   * A parameter was rejected: unknown name, bad range, wrong dimension.
   */
  OU_STATUS_INVALID_ARGUMENT = 1,
  /**
   * An evaluation produced a non-finite value.
   */
  OU_STATUS_NON_FINITE = 2,
  /**
   * An iterative procedure stopped short of its target tolerance.
   */
  OU_STATUS_NON_CONVERGENT = 3,
  /**
   * A monotone inversion left the representable range.
   */
  OU_STATUS_RANGE_ERROR = 4,
  /**
   * A required pointer argument was NULL.
   */
  OU_STATUS_NULL_POINTER = 5,
  /**
   * A string argument was not valid UTF-8.
   */
  OU_STATUS_INVALID_UTF8 = 6,
  /**
   * The check panicked internally; inputs are unchanged but the run
   * should be treated as failed.
   */
  OU_STATUS_PANIC = 7,
} OuStatus;

/**
 * Opaque evaluator handle: one quadrature setup for a fixed dimension.
 */
typedef struct OuEvaluator OuEvaluator;

/**
 * Opaque test-function handle.
 */
typedef struct OuFunction OuFunction;

/**
 * Opaque generator handle (the `c` in the generalized inequalities).
 */
typedef struct OuGenerator OuGenerator;

/**
 * Numeric outcome of one inequality check.
 *
 * `margin` is always `rhs - lhs`; `direction` says which sign means the
 * claim held (`Leq` wants it nonnegative, `Geq` nonpositive). `holds` is
 * that sign test with `slack` of numerical headroom already applied, and
 * `error_estimate <= slack` bounds the quadrature plus inversion error.
 */
typedef struct OuVerdict {
  double lhs;
  double rhs;
  double margin;
  double slack;
  double error_estimate;
  enum OuDirection direction;
  bool holds;
} OuVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Reports the ABI revision of the loaded library. Callers should check it
 * against the `OU_ABI_VERSION` they were compiled with.
 */
uint32_t ou_abi_version(void);

/**
 * Returns the calling thread's last error message as a NUL-terminated
 * string; empty after a successful call. Never NULL. The buffer is owned
 * by the library and is overwritten by the thread's next call.
 */
const char *ou_last_error_message(void);

/**
 * Creates an evaluator for dimension `dim` (1, 2, or 3) with the default
 * quadrature order for that dimension.
 *
 * # Safety
 * `out` must be a valid pointer to an `OuEvaluator *`. On success it
 * receives a handle that must be released with [`ou_evaluator_free`].
 */
enum OuStatus ou_evaluator_new(uint32_t dim, struct OuEvaluator **out);

/**
 * Creates an evaluator with an explicit one-dimensional quadrature order
 * (tensorized in higher dimension).
 *
 * # Safety
 * Same contract as [`ou_evaluator_new`].
 */
enum OuStatus ou_evaluator_with_order(uint32_t order, uint32_t dim, struct OuEvaluator **out);

/**
 * Releases an evaluator handle; NULL is ignored.
 *
 * # Safety
 * `ev` must be NULL or a handle returned by this library that has not
 * already been freed.
 */
void ou_evaluator_free(struct OuEvaluator *ev);

/**
 * Parses a test-function spec such as `"exp_linear:lambda=0.5"` or
 * `"logistic:a=1,b=1"` for dimension `dim`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a valid pointer to an
 * `OuFunction *`. On success `out` receives a handle to release with
 * [`ou_function_free`].
 */
enum OuStatus ou_function_parse(const char *spec, uint32_t dim, struct OuFunction **out);

/**
 * Releases a function handle; NULL is ignored.
 *
 * # Safety
 * `f` must be NULL or a handle returned by this library that has not
 * already been freed.
 */
void ou_function_free(struct OuFunction *f);

/**
 * Parses a generator spec such as `"power:p=2"` or `"exm1:alpha=1,beta=1"`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a valid pointer to an
 * `OuGenerator *`. On success `out` receives a handle to release with
 * [`ou_generator_free`].
 */
enum OuStatus ou_generator_parse(const char *spec, struct OuGenerator **out);

/**
 * Releases a generator handle; NULL is ignored.
 *
 * # Safety
 * `c` must be NULL or a handle returned by this library that has not
 * already been freed.
 */
void ou_generator_free(struct OuGenerator *c);

/**
 * Checks the contraction `||Q_t f||_q <= ||f||_p` at the critical exponent
 * `q = e^{2t}(p - 1) + 1`.
 *
 * # Safety
 * `ev` and `f` must be live handles from this library and `out` a valid
 * pointer to an `OuVerdict`.
 */
enum OuStatus ou_check_hc(const struct OuEvaluator *ev,
                          const struct OuFunction *f,
                          double p,
                          double t,
                          struct OuVerdict *out);

/**
 * Checks the exponential variant `||exp(Q_t f)||_{e^{2t}} <= ||exp f||_1`.
 *
 * # Safety
 * Same contract as [`ou_check_hc`].
 */
enum OuStatus ou_check_ehc(const struct OuEvaluator *ev,
                           const struct OuFunction *f,
                           double t,
                           struct OuVerdict *out);

/**
 * Checks the reverse contraction for positive f at reverse exponent
 * `e^{2t}(alpha + 1) - 1`.
 *
 * # Safety
 * Same contract as [`ou_check_hc`].
 */
enum OuStatus ou_check_rhc(const struct OuEvaluator *ev,
                           const struct OuFunction *f,
                           double alpha,
                           double t,
                           struct OuVerdict *out);

/**
 * Checks the logarithmic Sobolev inequality
 * `Ent(f^2) <= 2 E|grad f|^2`.
 *
 * # Safety
 * Same contract as [`ou_check_hc`].
 */
enum OuStatus ou_check_lsi(const struct OuEvaluator *ev,
                           const struct OuFunction *f,
                           struct OuVerdict *out);

/**
 * Checks the generalized forward inequality driven by generator `c`.
 *
 * # Safety
 * `ev`, `c`, and `f` must be live handles from this library and `out` a
 * valid pointer to an `OuVerdict`.
 */
enum OuStatus ou_check_genhc(const struct OuEvaluator *ev,
                             const struct OuGenerator *c,
                             const struct OuFunction *f,
                             double t,
                             struct OuVerdict *out);

/**
 * Checks the generalized reverse inequality driven by generator `c`.
 *
 * # Safety
 * Same contract as [`ou_check_genhc`].
 */
enum OuStatus ou_check_genrhc(const struct OuEvaluator *ev,
                              const struct OuGenerator *c,
                              const struct OuFunction *f,
                              double t,
                              struct OuVerdict *out);

/**
 * Checks the generalized entropy inequality driven by generator `c` (the
 * t -> 0 differential form of the generalized contraction).
 *
 * # Safety
 * Same contract as [`ou_check_genhc`].
 */
enum OuStatus ou_check_glsi(const struct OuEvaluator *ev,
                            const struct OuGenerator *c,
                            const struct OuFunction *f,
                            struct OuVerdict *out);

/**
 * Runs both growth-condition checks for a generator on the default grid.
 * `c_passed` receives the forward condition's outcome, `cprime_passed` the
 * reverse condition's.
 *
 * # Safety
 * `c` must be a live handle from this library; `c_passed` and
 * `cprime_passed` must be valid `bool` pointers.
 */
enum OuStatus ou_generator_conditions(const struct OuGenerator *c,
                                      bool *c_passed,
                                      bool *cprime_passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OU_HYPER_H */
