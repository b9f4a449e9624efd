#pragma once

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call in this interface.
 */
typedef enum SglStatus {
  /**
   * The call succeeded.
   */
  SglStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  SglStatus_NullArgument = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  SglStatus_InvalidUtf8 = 2,
  /**
   * The library rejected the request; see `sgl_last_error`.
   */
  SglStatus_DomainError = 3,
  /**
   * An internal panic was caught; see `sgl_last_error`.
   */
  SglStatus_Panic = 4,
} SglStatus;

/**
 * An immutable problem instance: a partition matroid plus a value oracle.
 */
typedef struct SglInstance SglInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread; never free it.
 */
const char *sgl_last_error(void);

/**
 * Loads a builtin instance; `name` is `"7-12"` or `"19-33"`.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer. On `Ok`
 * the caller owns the handle written to `*out` and must release it with
 * [`sgl_instance_free`].
 */
enum SglStatus sgl_instance_builtin(const char *name, struct SglInstance **out);

/**
 * Parses an instance document (weighted-coverage or swm-coverage JSON);
 * SWM documents are reduced on load. `name` labels errors and names the
 * reduction.
 *
 * # Safety
 * `json` and `name` must be NUL-terminated strings and `out` a valid
 * pointer. On `Ok` the caller owns `*out`.
 */
enum SglStatus sgl_instance_from_json(const char *json, const char *name, struct SglInstance **out);

/**
 * Loads an instance document from a file path.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer. On `Ok`
 * the caller owns `*out`.
 */
enum SglStatus sgl_instance_from_file(const char *path, struct SglInstance **out);

/**
 * Releases an instance handle. Null is a no-op.
 *
 * # Safety
 * `inst` must be null or a handle from an `sgl_instance_*` constructor that
 * has not been freed; it is invalid after this call.
 */
void sgl_instance_free(struct SglInstance *inst);

/**
 * Number of ground-set elements.
 *
 * # Safety
 * `inst` must be a live handle and `out_size` a valid pointer.
 */
enum SglStatus sgl_instance_ground_size(const struct SglInstance *inst, uintptr_t *out_size);

/**
 * Number of matroid parts (the m of the arrival process).
 *
 * # Safety
 * `inst` must be a live handle and `out_parts` a valid pointer.
 */
enum SglStatus sgl_instance_num_parts(const struct SglInstance *inst, uintptr_t *out_parts);

/**
 * One greedy run under the uniformly random arrival order drawn from
 * `seed`. Writes the full trace as JSON (permutation, per-step options,
 * final set and value).
 *
 * # Safety
 * `inst` must be a live handle, `tie_spec` a NUL-terminated string (e.g.
 * `"first-name"`), and `out_json` a valid pointer. On `Ok` the caller owns
 * `*out_json` and must release it with [`sgl_string_free`].
 */
enum SglStatus sgl_solve_json(const struct SglInstance *inst,
                              uint64_t seed,
                              const char *tie_spec,
                              char **out_json);

/**
 * One greedy run under an explicit arrival order: `order` lists every part
 * index (0-based) exactly once.
 *
 * # Safety
 * `inst` must be a live handle, `order` valid for `order_len` reads,
 * `tie_spec` a NUL-terminated string, `out_json` a valid pointer. On `Ok`
 * the caller owns `*out_json`.
 */
enum SglStatus sgl_solve_order_json(const struct SglInstance *inst,
                                    const uintptr_t *order,
                                    uintptr_t order_len,
                                    const char *tie_spec,
                                    char **out_json);

/**
 * Brute-force optimum over all bases, as JSON
 * `{"opt_set": [...], "opt_value": v, "bases": "count"}`.
 *
 * # Safety
 * `inst` must be a live handle and `out_json` a valid pointer. On `Ok` the
 * caller owns `*out_json`.
 */
enum SglStatus sgl_opt_json(const struct SglInstance *inst, char **out_json);

/**
 * Expected greedy value over all m! arrival orders, as a JSON report with
 * per-step means, the optimum, the ratio and its exact fraction.
 *
 * # Safety
 * `inst` must be a live handle, `tie_spec` a NUL-terminated string, and
 * `out_json` a valid pointer. On `Ok` the caller owns `*out_json`.
 */
enum SglStatus sgl_ratio_exact_json(const struct SglInstance *inst,
                                    const char *tie_spec,
                                    char **out_json);

/**
 * Monte Carlo estimate of the expected greedy value over `trials` seeded
 * random orders; the result does not depend on thread count.
 *
 * # Safety
 * `inst` must be a live handle, `tie_spec` a NUL-terminated string, and
 * `out_json` a valid pointer. On `Ok` the caller owns `*out_json`.
 */
enum SglStatus sgl_ratio_monte_carlo_json(const struct SglInstance *inst,
                                          uint64_t trials,
                                          uint64_t seed,
                                          const char *tie_spec,
                                          char **out_json);

/**
 * Checks non-negativity, monotonicity, submodularity and the derived
 * marginal inequalities over every subset; rejects ground sets larger than
 * `max_elements`. The JSON report lists violations with witnesses.
 *
 * # Safety
 * `inst` must be a live handle and `out_json` a valid pointer. On `Ok` the
 * caller owns `*out_json`.
 */
enum SglStatus sgl_verify_exhaustive_json(const struct SglInstance *inst,
                                          uintptr_t max_elements,
                                          char **out_json);

/**
 * Sampled variant of the property check, including the random-subset
 * sampling lower bound.
 *
 * # Safety
 * `inst` must be a live handle and `out_json` a valid pointer. On `Ok` the
 * caller owns `*out_json`.
 */
enum SglStatus sgl_verify_sampled_json(const struct SglInstance *inst,
                                       uint64_t trials,
                                       uint64_t seed,
                                       char **out_json);

/**
 * Solves the ratio-bound quadratic at `(p, q)` and writes the root to
 * `*out_c`; p in [0, 1] (0 meaning the limit), q in (0, 1).
 *
 * # Safety
 * `out_c` must be a valid pointer.
 */
enum SglStatus sgl_bound_fixed_point(double p, double q, double *out_c);

/**
 * Maximizes the fixed-point root over the grid `{1/res, ..., (res-1)/res}²`
 * and writes the best parameters and root.
 *
 * # Safety
 * `out_p`, `out_q` and `out_c` must be valid pointers.
 */
enum SglStatus sgl_bound_grid_search(uintptr_t resolution,
                                     double *out_p,
                                     double *out_q,
                                     double *out_c);

/**
 * Releases a string returned by this interface. Null is a no-op.
 *
 * # Safety
 * `s` must be null or a string returned by this interface that has not been
 * freed; it is invalid after this call.
 */
void sgl_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus
