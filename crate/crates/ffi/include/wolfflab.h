#ifndef WOLFFLAB_H
#define WOLFFLAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every `wl_*` call.
 */
typedef enum WlStatus {
  WL_STATUS_OK = 0,
  WL_STATUS_NULL_POINTER = 1,
  WL_STATUS_INVALID_ARGUMENT = 2,
  WL_STATUS_ASSUMPTION_VIOLATION = 3,
  WL_STATUS_NOT_APPLICABLE = 4,
  WL_STATUS_DIVERGENT = 5,
  WL_STATUS_QUADRATURE_FAILURE = 6,
  WL_STATUS_ITERATION_BUDGET = 7,
  WL_STATUS_SHOOTING_FAILURE = 8,
  WL_STATUS_INVALID_PROFILE = 9,
  WL_STATUS_PANIC = 10,
  WL_STATUS_OTHER = 11,
} WlStatus;

typedef enum WlRegime {
  WL_REGIME_NONEXISTENCE = 0,
  WL_REGIME_SUBCRITICAL = 1,
  WL_REGIME_CRITICAL = 2,
  WL_REGIME_SUPERCRITICAL = 3,
} WlRegime;

typedef enum WlVerdict {
  WL_VERDICT_HIT_NONPOSITIVE = 0,
  WL_VERDICT_CONVERGES_TO = 1,
  WL_VERDICT_DIVERGES = 2,
} WlVerdict;

typedef enum WlClassification {
  WL_CLASSIFICATION_CROSSING = 0,
  WL_CLASSIFICATION_FAST_DECAY = 1,
  WL_CLASSIFICATION_SLOW_DECAY = 2,
  WL_CLASSIFICATION_UNDETERMINED = 3,
} WlClassification;

/**
 * Validated parameter tuple `(n, p, q, a, beta)`.
 */
typedef struct WlParams WlParams;

/**
 * A radial profile `u(|x|)`.
 */
typedef struct WlProfile WlProfile;

/**
 * Outcome of a shooting run, including the computed profile.
 */
typedef struct WlShooting WlShooting;

typedef struct WlExponents {
  double s0;
  double p_star;
  double q_critical;
  double q_liouville;
  double fast_rate;
  double slow_rate;
  double integrability_floor;
} WlExponents;

typedef struct WlSequenceSummary {
  enum WlVerdict verdict;
  /**
   * Stopping index when `verdict` is `HitNonpositive`, else 0.
   */
  size_t j0;
  /**
   * Limit when `verdict` is `ConvergesTo`, else NaN.
   */
  double limit;
  /**
   * Total number of terms, including `a_0`.
   */
  size_t len;
} WlSequenceSummary;

typedef struct WlShootingSummary {
  enum WlClassification classification;
  /**
   * First zero of `u`; NaN unless `Crossing`.
   */
  double crossing_radius;
  /**
   * NaN when no rate was fitted.
   */
  double fitted_rate;
  double fast_rate;
  double slow_rate;
  /**
   * Number of profile nodes.
   */
  size_t nodes;
} WlShootingSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Validates `(n, p, q, a, beta)` against the standing assumptions
 * (`n >= 3`, `1 < p <= 2`, `q > p - 1`, `0 <= -a < p beta < n`).
 */
enum WlStatus wl_params_new(uint32_t n,
                            double p,
                            double q,
                            double a,
                            double beta,
                            struct WlParams **out);

/**
 * As [`wl_params_new`] but only requires `q > 0`; for the exponent
 * iterations.
 */
enum WlStatus wl_params_new_iteration(uint32_t n,
                                      double p,
                                      double q,
                                      double a,
                                      double beta,
                                      struct WlParams **out);

/**
 * # Safety
 * `params` must be null or come from `wl_params_new*` and not be freed yet.
 */
void wl_params_free(struct WlParams *params);

enum WlStatus wl_derive_exponents(const struct WlParams *params, struct WlExponents *out);

/**
 * `tol` is the relative band for calling `q` critical.
 */
enum WlStatus wl_classify(const struct WlParams *params,
                          double tol,
                          enum WlRegime *regime,
                          bool *lp_impossible);

/**
 * Runs the nonexistence iteration. Up to `cap` terms are copied into
 * `terms` (which may be null when `cap` is 0); `summary.len` reports how
 * many there are in total.
 *
 * # Safety
 * `terms` must be valid for `cap` writes of `double`.
 */
enum WlStatus wl_nonexistence_sequence(const struct WlParams *params,
                                       size_t max_iter,
                                       double *terms,
                                       size_t cap,
                                       struct WlSequenceSummary *summary);

/**
 * The exact singular solution `c r^{-t}` (PDE case, `beta = 1`).
 */
enum WlStatus wl_singular_profile(const struct WlParams *params, struct WlProfile **out);

/**
 * The finite-energy extremal at the critical exponent.
 */
enum WlStatus wl_bubble_profile(const struct WlParams *params, struct WlProfile **out);

/**
 * A tabulated profile, extended by `u ~ r^{inner_exponent}` below the grid
 * and `u ~ r^{-tail_exponent}` above it.
 *
 * # Safety
 * `r` and `u` must each be valid for `len` reads of `double`.
 */
enum WlStatus wl_profile_from_grid(const double *r,
                                   const double *u,
                                   size_t len,
                                   double inner_exponent,
                                   double tail_exponent,
                                   struct WlProfile **out);

enum WlStatus wl_profile_value(const struct WlProfile *profile, double r, double *out);

/**
 * # Safety
 * `profile` must be null or come from this library and not be freed yet.
 */
void wl_profile_free(struct WlProfile *profile);

/**
 * Relative residual of the radial equation at `r`.
 */
enum WlStatus wl_pde_residual(const struct WlProfile *profile,
                              const struct WlParams *params,
                              double r,
                              double *out);

/**
 * `W_{beta,p}(|y|^a u^q)` at `|x| = x`, to relative tolerance `rel_tol`.
 */
enum WlStatus wl_wolff_potential(const struct WlProfile *profile,
                                 const struct WlParams *params,
                                 double x,
                                 double rel_tol,
                                 double *out);

/**
 * Shoots from `u(0) = alpha` out to `r_max` and classifies the decay.
 */
enum WlStatus wl_shoot(const struct WlParams *params,
                       double alpha,
                       double r_max,
                       double ode_tol,
                       struct WlShooting **out);

enum WlStatus wl_shooting_summary(const struct WlShooting *shot, struct WlShootingSummary *out);

/**
 * A copy of the computed profile as a separate handle.
 */
enum WlStatus wl_shooting_profile(const struct WlShooting *shot, struct WlProfile **out);

/**
 * # Safety
 * `shot` must be null or come from [`wl_shoot`] and not be freed yet.
 */
void wl_shooting_free(struct WlShooting *shot);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `cap`) and returns its full length in bytes, excluding the
 * terminator. Returns 0 after a successful call.
 *
 * # Safety
 * `buf` must be null or valid for `cap` writes.
 */
size_t wl_last_error_message(char *buf, size_t cap);

/**
 * Library version as a static NUL-terminated string.
 */
const char *wl_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WOLFFLAB_H */
