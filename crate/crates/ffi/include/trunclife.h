#ifndef TRUNCLIFE_H
#define TRUNCLIFE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum TlStatus {
  TL_STATUS_OK = 0,
  // A required pointer argument was null.
  TL_STATUS_NULL_POINTER = 1,
  // An argument is out of range (window, rate, level, indicator, weight).
  TL_STATUS_INVALID_ARGUMENT = 2,
  // No observation with positive weight.
  TL_STATUS_EMPTY_SAMPLE = 3,
  // The fit or a numerical routine failed.
  TL_STATUS_NUMERICAL = 4,
  // A file could not be opened or read.
  TL_STATUS_IO = 5,
  // Malformed input text.
  TL_STATUS_PARSE = 6,
  // Internal panic; the library state is unchanged.
  TL_STATUS_PANIC = 7,
} TlStatus;

// Opaque set of weighted observed records.
typedef struct TlRecordSet TlRecordSet;

// Output of `tl_fit`.
typedef struct TlFitResult {
  double theta_hat;
  double se;
  double alpha_hat;
  double n_hat;
  double life_expectancy;
  double ci_low;
  double ci_high;
  double level;
  // Total weight of the sample.
  double m;
  double objective_at_max;
  // 1 if the maximizer converged, else 0.
  int converged;
  // 1 if the maximum lies on the edge of the rate domain, else 0.
  int at_boundary;
} TlFitResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null if the last call
// succeeded. Valid until the next call into the library on this thread.
const char *tl_last_error(void);

// Library version as a static NUL-terminated string.
const char *tl_version(void);

// New empty record set. Never null.
struct TlRecordSet *tl_records_new(void);

// Release a record set. Null is ignored.
//
// # Safety
// `set` must be null or a handle from this library not yet freed.
void tl_records_free(struct TlRecordSet *set);

// Number of records in `set`; 0 for null.
//
// # Safety
// `set` must be null or a live handle.
size_t tl_records_len(const struct TlRecordSet *set);

// Append one record. `l` and `r` must be 0 or 1 and not both 1; the weight
// must be finite and non-negative.
//
// # Safety
// `set` must be null or a live handle.
enum TlStatus tl_records_push(struct TlRecordSet *set, double y, int l, int r, double weight);

// Load a record CSV (`y,l,r[,weight]`) into a new set stored in `*out`.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum TlStatus tl_records_load_csv(const char *path, struct TlRecordSet **out);

// The bundled 2018-2019 enterprise records, in a new set stored in `*out`.
//
// # Safety
// `out` must be writable.
enum TlStatus tl_records_enterprise(struct TlRecordSet **out);

// Simulate one observed sample into a new set stored in `*out`.
//
// # Safety
// `out` must be writable.
enum TlStatus tl_simulate(double theta0,
                          double s,
                          double g,
                          uint64_t n,
                          uint64_t seed,
                          struct TlRecordSet **out);

// Fit the rate to `set` for study length `s` and cohort span `g`, with a
// normal interval at coverage `level`.
//
// # Safety
// `set` must be a live handle; `out` must be writable.
enum TlStatus tl_fit(const struct TlRecordSet *set,
                     double s,
                     double g,
                     double level,
                     struct TlFitResult *out);

// Probability that a unit of rate `theta` is observed.
//
// # Safety
// `out` must be writable.
enum TlStatus tl_alpha(double theta, double s, double g, double *out);

// Curvature of the population criterion at its maximum `theta`.
//
// # Safety
// `out` must be writable.
enum TlStatus tl_eta(double theta, double s, double g, double *out);

// Density of the observed triple `(y, l, r)`; 0 off the support.
//
// # Safety
// `out` must be writable.
enum TlStatus tl_obs_density(double y, int l, int r, double theta, double s, double g, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRUNCLIFE_H */
