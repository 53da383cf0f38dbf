#ifndef WSNLOC_H
#define WSNLOC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum WsnStatus {
  WSN_STATUS_OK = 0,
  WSN_STATUS_NULL_POINTER = 1,
  WSN_STATUS_INVALID_ARGUMENT = 2,
  WSN_STATUS_INVALID_DEPLOYMENT = 3,
  WSN_STATUS_INVALID_PARAMS = 4,
  WSN_STATUS_INVALID_CONFIG = 5,
  WSN_STATUS_NO_ESTIMATES = 6,
  WSN_STATUS_LOCALIZATION = 7,
  WSN_STATUS_PANIC = 8,
} WsnStatus;

/**
 * Localization methods, as accepted by the `method` arguments.
 */
typedef enum WsnMethod {
  WSN_METHOD_DVHOP = 0,
  WSN_METHOD_PSO = 1,
  WSN_METHOD_SCAPSO = 2,
  WSN_METHOD_ADAPSCAPSO = 3,
} WsnMethod;

/**
 * A node deployment.
 */
typedef struct WsnDeployment WsnDeployment;

/**
 * Results of a Monte-Carlo scenario run.
 */
typedef struct WsnReport WsnReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *wsn_last_error_message(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void wsn_string_free(char *s);

/**
 * Deploys `n_nodes` nodes uniformly over `width` x `height`, exactly as a
 * scenario run with the same run seed would.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum WsnStatus wsn_deployment_generate(size_t n_nodes,
                                       double anchor_ratio,
                                       double width,
                                       double height,
                                       double comm_range,
                                       uint64_t seed,
                                       struct WsnDeployment **out);

/**
 * Parses and validates a deployment JSON document.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` valid for writes.
 */
enum WsnStatus wsn_deployment_from_json(const char *json, struct WsnDeployment **out);

/**
 * Serializes a deployment. Free the result with [`wsn_string_free`].
 *
 * # Safety
 * `d` must be a live handle and `out` valid for writes.
 */
enum WsnStatus wsn_deployment_to_json(const struct WsnDeployment *d, char **out);

/**
 * Number of nodes, or 0 for NULL.
 *
 * # Safety
 * `d` must be NULL or a live handle.
 */
size_t wsn_deployment_node_count(const struct WsnDeployment *d);

/**
 * # Safety
 * `d` must be NULL or a handle not yet freed.
 */
void wsn_deployment_free(struct WsnDeployment *d);

/**
 * Localizes the unknown nodes of `d` with one method and default
 * parameters. `est_x` and `est_y` must hold `len` == node count values;
 * entries of anchors and unlocalized nodes are set to NaN. The average
 * error over localized nodes goes to `avg_error` when it is not NULL.
 *
 * # Safety
 * `d` must be a live handle; `est_x` and `est_y` valid for `len` writes.
 */
enum WsnStatus wsn_localize(const struct WsnDeployment *d,
                            uint32_t method,
                            uint64_t seed,
                            double *est_x,
                            double *est_y,
                            size_t len,
                            double *avg_error);

/**
 * Runs preset `scenario` ("s1" to "s4") for `n_runs` runs with all four
 * methods and default parameters.
 *
 * # Safety
 * `scenario` must be a nul-terminated string and `out` valid for writes.
 */
enum WsnStatus wsn_run_scenario(const char *scenario,
                                size_t n_runs,
                                uint64_t master_seed,
                                struct WsnReport **out);

/**
 * Mean over runs of a method's average localization error, in meters.
 *
 * # Safety
 * `r` must be a live handle and `out` valid for writes.
 */
enum WsnStatus wsn_report_mean_error(const struct WsnReport *r, uint32_t method, double *out);

/**
 * Summary JSON with per-method statistics and error reductions. Free the
 * result with [`wsn_string_free`].
 *
 * # Safety
 * `r` must be a live handle and `out` valid for writes.
 */
enum WsnStatus wsn_report_summary_json(const struct WsnReport *r, char **out);

/**
 * # Safety
 * `r` must be NULL or a handle not yet freed.
 */
void wsn_report_free(struct WsnReport *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WSNLOC_H */
