/* chunkseam — analysis toolkit for chunk-boundary artifacts in
 * action-chunked policies.
 *
 * Stable C API of the shared library. All entry points return a status code;
 * on failure a thread-local message is available via chunkseam_last_error().
 * Objects returned through out-parameters are owned by the caller and must
 * be released with the matching *_free function.
 */
#ifndef CHUNKSEAM_H
#define CHUNKSEAM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CHUNKSEAM_API __declspec(dllexport)
#else
#define CHUNKSEAM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum chunkseam_status {
  CHUNKSEAM_OK = 0,
  CHUNKSEAM_ERROR_INVALID_ARGUMENT = 1,
  CHUNKSEAM_ERROR_CONFIG = 2,
  CHUNKSEAM_ERROR_CAPABILITY = 3,
  CHUNKSEAM_ERROR_IO = 4,
  CHUNKSEAM_ERROR_RUNNER = 5,
  CHUNKSEAM_ERROR_INTERNAL = 6
} chunkseam_status;

CHUNKSEAM_API const char* chunkseam_version(void);
CHUNKSEAM_API const char* chunkseam_status_name(chunkseam_status status);

/* Message describing the most recent failure on this thread; empty string
 * when the last call succeeded. The pointer stays valid until the next API
 * call on the same thread. */
CHUNKSEAM_API const char* chunkseam_last_error(void);

CHUNKSEAM_API void chunkseam_string_free(char* text);

/* ------------------------------------------------------------------------
 * Experiment driver.
 *
 * command: rollout | analyze | scan | decompose | direction | steer |
 *          aggregate
 * config_json: JSON object merged over the built-in defaults (NULL or ""
 *          for pure defaults). Unknown keys are rejected by name.
 * input_paths: file arguments (traces for analyze, steering reports for
 *          aggregate); may be NULL when n_inputs is 0.
 * result_json (optional): receives a malloc'd JSON string describing the
 *          run (effective config, written files, result payload). Free with
 *          chunkseam_string_free.
 */
CHUNKSEAM_API chunkseam_status chunkseam_run(const char* command,
                                             const char* config_json,
                                             const char* const* input_paths,
                                             size_t n_inputs, char** result_json);

/* ------------------------------------------------------------------------
 * Rollout traces. */

typedef struct chunkseam_trace chunkseam_trace;

CHUNKSEAM_API chunkseam_status chunkseam_trace_read(const char* path,
                                                    chunkseam_trace** out_trace);
CHUNKSEAM_API chunkseam_status chunkseam_trace_write(const chunkseam_trace* trace,
                                                     const char* path);
CHUNKSEAM_API void chunkseam_trace_free(chunkseam_trace* trace);

CHUNKSEAM_API chunkseam_status chunkseam_trace_info(const chunkseam_trace* trace,
                                                    int64_t* steps, int64_t* stride,
                                                    int64_t* horizon,
                                                    int64_t* action_dim, int* success);

/* Episode-level boundary metrics over a control window
 * ("all" | "contact_free" | "contact_free_first_n"). `first_n` and
 * `guard_margin` only matter for the contact-dependent windows. Either
 * out-pointer may be NULL. */
CHUNKSEAM_API chunkseam_status chunkseam_trace_episode_contrast(
    const chunkseam_trace* trace, const char* control, int64_t first_n,
    int64_t guard_margin, double* out_contrast, double* out_boundary_jerk);

/* ------------------------------------------------------------------------
 * Metrics on raw buffers (row-major actions, steps x dim). */

/* Jerk series over [window_start, window_end); writes one value per
 * timestep t >= 2 in the window and stores the count in out_count.
 * out_values must hold at least window_end - window_start doubles. */
CHUNKSEAM_API chunkseam_status chunkseam_jerk_series(const double* actions,
                                                     int64_t steps, int64_t dim,
                                                     int64_t window_start,
                                                     int64_t window_end,
                                                     double* out_values,
                                                     int64_t* out_count);

/* ------------------------------------------------------------------------
 * Statistics. */

CHUNKSEAM_API chunkseam_status chunkseam_wilson_ci(int64_t successes, int64_t n,
                                                   double level, double* out_point,
                                                   double* out_lo, double* out_hi);

CHUNKSEAM_API chunkseam_status chunkseam_bootstrap_ci(const double* samples, int64_t n,
                                                      int64_t n_boot, double level,
                                                      uint64_t seed, double* out_point,
                                                      double* out_lo, double* out_hi);

/* two_sided != 0 selects the two-sided test; otherwise one-sided "greater"
 * on mean(b) - mean(a). */
CHUNKSEAM_API chunkseam_status chunkseam_permutation_test(
    const double* group_a, int64_t n_a, const double* group_b, int64_t n_b,
    int64_t n_perm, int two_sided, uint64_t seed, double* out_observed_delta,
    double* out_p_value);

CHUNKSEAM_API chunkseam_status chunkseam_pearson_r(const double* xs, const double* ys,
                                                   int64_t n, double* out_r);

#ifdef __cplusplus
}
#endif

#endif /* CHUNKSEAM_H */
