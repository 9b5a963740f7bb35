#ifndef RFAUTH_H
#define RFAUTH_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum {
  RF_STATUS_OK = 0,
  RF_STATUS_INVALID_ARGUMENT = 1,
  RF_STATUS_INVALID_STATE = 2,
  RF_STATUS_TRAINING_FAILURE = 3,
  RF_STATUS_NUMERIC_FAILURE = 4,
  RF_STATUS_FORMAT = 5,
  RF_STATUS_CONFIG = 6,
  RF_STATUS_IO = 7,
  RF_STATUS_NULL_POINTER = 8,
  RF_STATUS_PANIC = 9,
} RfStatus;

/**
 * A trained discriminator loaded from a checkpoint.
 */
typedef struct RfAuthenticator RfAuthenticator;

/**
 * Experiment configuration.
 */
typedef struct RfConfig RfConfig;

/**
 * Results of an experiment run.
 */
typedef struct RfResults RfResults;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *rfauth_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rfauth_version(void);

/**
 * Default configuration.
 */
RfStatus rfauth_config_default(RfConfig **out);

/**
 * Configuration parsed from TOML text.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` a writable pointer.
 */
RfStatus rfauth_config_from_toml(const char *toml, RfConfig **out);

/**
 * Configuration loaded from a TOML file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` a writable pointer.
 */
RfStatus rfauth_config_load(const char *path, RfConfig **out);

/**
 * Replaces the seed list with a single seed.
 *
 * # Safety
 * `config` must be a live handle.
 */
RfStatus rfauth_config_set_seed(RfConfig *config, uint64_t seed);

/**
 * # Safety
 * `config` must be NULL or a handle not yet freed.
 */
void rfauth_config_free(RfConfig *config);

/**
 * Loads a discriminator saved as `<stem>.rfnn` plus `<stem>.toml`.
 *
 * # Safety
 * `stem` must be a NUL-terminated string; `out` a writable pointer.
 */
RfStatus rfauth_authenticator_load(const char *stem, RfAuthenticator **out);

/**
 * Authenticates one received packet given as `n_samples` interleaved
 * (I, Q) pairs. Writes 1/0 to `accept` and the score to `score`.
 *
 * # Safety
 * `iq` must point to `2 * n_samples` doubles; the outputs must be writable.
 */
RfStatus rfauth_authenticate(const RfAuthenticator *auth,
                             const double *iq,
                             size_t n_samples,
                             int32_t *accept,
                             double *score);

/**
 * # Safety
 * `auth` must be NULL or a handle not yet freed.
 */
void rfauth_authenticator_free(RfAuthenticator *auth);

/**
 * Runs the named experiment (`snr-sweep`, `epsilon-sweep`,
 * `transferability` or `single`) with `config`.
 *
 * # Safety
 * `config` must be a live handle, `name` a NUL-terminated string and
 * `out` a writable pointer.
 */
RfStatus rfauth_run_experiment(const RfConfig *config, const char *name, RfResults **out);

/**
 * Number of attacked cells in `results`.
 *
 * # Safety
 * `results` must be a live handle and `count` writable.
 */
RfStatus rfauth_results_cell_count(const RfResults *results, size_t *count);

/**
 * Initial and final fooling rate of cell `index`.
 *
 * # Safety
 * `results` must be a live handle and the outputs writable.
 */
RfStatus rfauth_results_cell_fooling(const RfResults *results,
                                     size_t index,
                                     double *initial,
                                     double *final_rate);

/**
 * Writes the CSV files for `results` into directory `dir`.
 *
 * # Safety
 * `results` must be a live handle and `dir` a NUL-terminated string.
 */
RfStatus rfauth_results_export(const RfResults *results, const char *dir);

/**
 * # Safety
 * `results` must be NULL or a handle not yet freed.
 */
void rfauth_results_free(RfResults *results);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* RFAUTH_H */
