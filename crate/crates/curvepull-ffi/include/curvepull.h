#ifndef CURVEPULL_H
#define CURVEPULL_H

/* Generated by cbindgen from curvepull-ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CpStatus {
  CP_STATUS_OK = 0,
  CP_STATUS_NULL_ARGUMENT = 1,
  CP_STATUS_INVALID_UTF8 = 2,
  CP_STATUS_PARSE = 3,
  CP_STATUS_NOT_PCF = 4,
  CP_STATUS_PRECONDITION = 5,
  /**
   * The engine could not decide within its depth budget.
   */
  CP_STATUS_UNDECIDED = 6,
  /**
   * An exact result does not fit the 64-bit output.
   */
  CP_STATUS_OVERFLOW = 7,
  CP_STATUS_INTERNAL = 8,
} CpStatus;

typedef enum CpFateKind {
  CP_FATE_KIND_PERIPHERAL = 0,
  CP_FATE_KIND_ESSENTIAL = 1,
  CP_FATE_KIND_UNDECIDED = 2,
} CpFateKind;

/**
 * Opaque handle around a built σ evaluator.
 */
typedef struct CpEvaluator CpEvaluator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *cp_version(void);

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into the library from the same thread.
 */
const char *cp_last_error(void);

/**
 * Build an evaluator from a map spec in JSON (the CLI `--spec` format).
 *
 * # Safety
 * `spec_json` must be a NUL-terminated string and `out` writable.
 */
enum CpStatus cp_evaluator_from_spec(const char *spec_json, struct CpEvaluator **out);

/**
 * # Safety
 * `ev` must come from [`cp_evaluator_from_spec`] and not be freed twice.
 */
void cp_evaluator_free(struct CpEvaluator *ev);

/**
 * Horoball size `t` in (0, 1] and approach depth in 4..=40.
 *
 * # Safety
 * `ev` must be a live evaluator.
 */
enum CpStatus cp_evaluator_set_settings(struct CpEvaluator *ev, double t, uint32_t depth);

/**
 * Degree of the map actually pulled back.
 *
 * # Safety
 * `ev` must be a live evaluator and `out` writable.
 */
enum CpStatus cp_evaluator_degree(const struct CpEvaluator *ev, uint32_t *out);

/**
 * Whether σ is constant for this marking.
 *
 * # Safety
 * `ev` must be a live evaluator and `out` writable.
 */
enum CpStatus cp_evaluator_is_constant(const struct CpEvaluator *ev, bool *out);

/**
 * The fixed point of σ.
 *
 * # Safety
 * `ev` must be a live evaluator, outputs writable.
 */
enum CpStatus cp_evaluator_tau0(const struct CpEvaluator *ev, double *re, double *im);

/**
 * σ(τ) for a point of the upper half plane.
 *
 * # Safety
 * `ev` must be a live evaluator, outputs writable.
 */
enum CpStatus cp_sigma_eval(const struct CpEvaluator *ev,
                            double re,
                            double im,
                            double *out_re,
                            double *out_im);

/**
 * Fate of the cusp `p/q` (`1/0` is infinity). For an essential fate the
 * target cusp is written to `out_p/out_q`, otherwise they are left alone.
 *
 * # Safety
 * `ev` must be a live evaluator, outputs writable.
 */
enum CpStatus cp_cusp_fate(const struct CpEvaluator *ev,
                           int64_t p,
                           int64_t q,
                           enum CpFateKind *out_kind,
                           int64_t *out_p,
                           int64_t *out_q);

/**
 * Exact multiplier of an essential cusp, as a reduced fraction.
 *
 * # Safety
 * `ev` must be a live evaluator, outputs writable.
 */
enum CpStatus cp_cusp_multiplier(const struct CpEvaluator *ev,
                                 int64_t p,
                                 int64_t q,
                                 int64_t *out_num,
                                 int64_t *out_den);

/**
 * Attractor search over cusps of height at most `height`, as a JSON string
 * owned by the caller.
 *
 * # Safety
 * `ev` must be a live evaluator and `out` writable.
 */
enum CpStatus cp_attractor_json(const struct CpEvaluator *ev,
                                int64_t height,
                                uint32_t max_iter,
                                char **out);

/**
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void cp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CURVEPULL_H */
