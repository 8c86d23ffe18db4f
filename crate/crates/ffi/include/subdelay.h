#ifndef SUBDELAY_H
#define SUBDELAY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Ratio criterion; the parameter is the regularizer (<= 0 uses the configured epsilon).
#define SD_CRITERION_RATIO 0

// Threshold criterion; the parameter is the threshold.
#define SD_CRITERION_THRESHOLD 1

// Status codes returned by every fallible call.
typedef enum SdStatus {
  SD_STATUS_OK = 0,
  SD_STATUS_NULL_POINTER = 1,
  SD_STATUS_INVALID_ARGUMENT = 2,
  SD_STATUS_DIMENSION = 3,
  SD_STATUS_NON_FINITE = 4,
  SD_STATUS_INSUFFICIENT_DATA = 5,
  // Input not persistently exciting; use a richer input or more data.
  SD_STATUS_EXCITATION = 6,
  // Numerical breakdown; bootstrap a new estimator.
  SD_STATUS_BREAKDOWN = 7,
  SD_STATUS_BUFFER_TOO_SMALL = 8,
  SD_STATUS_INTERNAL = 9,
} SdStatus;

// Opaque estimator handle.
typedef struct SdEstimator SdEstimator;

// Estimator settings.
typedef struct SdConfig {
  // Number of inputs.
  size_t m;
  // Number of outputs.
  size_t l;
  // Hankel columns used by the bootstrap.
  size_t j;
  // Past horizon.
  size_t i;
  // Future horizon.
  size_t h;
  // Forgetting factor in (0, 1].
  double gamma;
  // Ratio-criterion regularizer.
  double epsilon;
  // Largest delay reported.
  size_t d_max;
  // Relative pseudoinverse cutoff; negative selects the default.
  double rank_tol;
} SdConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Default settings for a single-input single-output system.
struct SdConfig sd_config_default(void);

// Bootstraps an estimator from `n` samples. `u` holds `n * m` values and `y`
// holds `n * l` values, both sample-major. On success `*out` receives a new
// handle.
//
// # Safety
// `config` must point to a valid `SdConfig`, `u` and `y` to arrays of the
// stated lengths, and `out` to writable storage for one pointer.
enum SdStatus sd_estimator_bootstrap(const struct SdConfig *config,
                                     const double *u,
                                     const double *y,
                                     size_t n,
                                     struct SdEstimator **out);

// Feeds one sample (`m` inputs, `l` outputs). On error the estimator is
// left unchanged.
//
// # Safety
// `est` must be a live handle; `u` and `y` must hold `m` and `l` values.
enum SdStatus sd_estimator_update(struct SdEstimator *est, const double *u, const double *y);

// Absolute index of the newest sample absorbed.
//
// # Safety
// `est` must be a live handle and `k` writable.
enum SdStatus sd_estimator_time(const struct SdEstimator *est, size_t *k);

// Current delay estimates, row-major over (output, input). `delays` and
// `valid` must each have room for `len >= l * m` entries; `valid[c]` is 1
// when channel `c` carries a usable response.
//
// # Safety
// `est` must be a live handle; `delays` and `valid` must be writable for
// `len` entries.
enum SdStatus sd_estimator_delays(const struct SdEstimator *est,
                                  uint32_t criterion,
                                  double param,
                                  size_t *delays,
                                  uint8_t *valid,
                                  size_t len);

// Writes the Markov first block column (`h*l` rows, `m` columns, row-major)
// into `out`, which must hold `len >= h * l * m` values. Entry
// `[(r*l + j) * m + c]` is the lag-`r` response of output `j` to input `c`.
//
// # Safety
// `est` must be a live handle and `out` writable for `len` values.
enum SdStatus sd_estimator_markov(const struct SdEstimator *est, double *out, size_t len);

// Releases a handle. Null is ignored.
//
// # Safety
// `est` must be null or a handle not yet freed.
void sd_estimator_free(struct SdEstimator *est);

// Copies the calling thread's last error message into `buf` (NUL
// terminated, truncated to `len`). Returns the full message length plus one,
// or 0 when there is no message.
//
// # Safety
// `buf` must be null or writable for `len` bytes.
size_t sd_last_error_message(char *buf, size_t len);

// Static description of a status code.
const char *sd_status_string(enum SdStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUBDELAY_H */
