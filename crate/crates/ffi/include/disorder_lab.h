#ifndef DISORDER_LAB_H
#define DISORDER_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DlStatus {
  DL_STATUS_OK = 0,
  DL_STATUS_NULL_POINTER = 1,
  DL_STATUS_INVALID_UTF8 = 2,
  DL_STATUS_CAPACITY = 3,
  DL_STATUS_OUT_OF_RANGE = 4,
  DL_STATUS_DOMAIN = 5,
  DL_STATUS_PRECISION = 6,
  DL_STATUS_SINGULARITY = 7,
  DL_STATUS_ORDERING = 8,
  DL_STATUS_ALIGNMENT = 9,
  DL_STATUS_CONTRACT = 10,
  DL_STATUS_CALIBRATION = 11,
  DL_STATUS_USAGE = 12,
  DL_STATUS_SCHEMA = 13,
  DL_STATUS_INTEGRITY = 14,
  DL_STATUS_IO = 15,
  DL_STATUS_PANIC = 16,
} DlStatus;

typedef enum DlFormat {
  DL_FORMAT_CSV = 0,
  DL_FORMAT_JSON = 1,
} DlFormat;

// Scale e^{N^λ} and precision for one (N, λ).
typedef struct DlPhaseContext DlPhaseContext;

// Sieved primes with fixed-point logarithms.
typedef struct DlPrimeTable DlPrimeTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer is
// valid until the next failing call on the same thread.
const char *dl_last_error_message(void);

void dl_clear_last_error(void);

// Library version as a static string.
const char *dl_version(void);

// Sieve primes up to `bound` with `log_bits` bits of fixed-point logarithm.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum DlStatus dl_prime_table_new(uint64_t bound, uint32_t log_bits, struct DlPrimeTable **out);

// # Safety
// `table` must come from `dl_prime_table_new` and not be freed twice.
void dl_prime_table_free(struct DlPrimeTable *table);

// Number of primes in the table; 0 for NULL.
//
// # Safety
// `table` must be NULL or a live handle.
size_t dl_prime_table_len(const struct DlPrimeTable *table);

// Σ_{p ≤ x} 1/p.
//
// # Safety
// `table` must be a live handle and `out` writable.
enum DlStatus dl_prime_table_mertens_sum(const struct DlPrimeTable *table, double x, double *out);

// # Safety
// `out` must be writable.
enum DlStatus dl_phase_context_new(double n,
                                   double lambda,
                                   uint32_t guard_bits,
                                   struct DlPhaseContext **out);

// # Safety
// `ctx` must come from `dl_phase_context_new` and not be freed twice.
void dl_phase_context_free(struct DlPhaseContext *ctx);

// Working precision of the context in bits; 0 for NULL.
//
// # Safety
// `ctx` must be NULL or a live handle.
uint32_t dl_phase_context_precision_bits(const struct DlPhaseContext *ctx);

// u e^{N^λ} log p mod 2π for the prime at `index` in `table`.
//
// # Safety
// Handles must be live and `out` writable.
enum DlStatus dl_reduce_phase(const struct DlPhaseContext *ctx,
                              const struct DlPrimeTable *table,
                              size_t index,
                              double u,
                              double *out);

// Normalized prime sum P(λ, n; k, N, u), written as (re, im).
//
// # Safety
// Handles must be live and `out_re`, `out_im` writable.
enum DlStatus dl_prime_sum(const struct DlPhaseContext *ctx,
                           const struct DlPrimeTable *table,
                           uint32_t k,
                           uint32_t exponent,
                           double u,
                           double *out_re,
                           double *out_im);

// Hardy's Z(t).
//
// # Safety
// `out` must be writable.
enum DlStatus dl_hardy_z(double t, double *out);

// Riemann–Siegel θ(t).
//
// # Safety
// `out` must be writable.
enum DlStatus dl_rs_theta(double t, double *out);

// Run a named experiment from config text and return the encoded report.
//
// `experiment` may be NULL when the config names it. On success `*report`
// holds a NUL-terminated string to release with `dl_string_free`, and
// `*exit_code` the CLI exit code (0 all pass, 1 a check failed). On failure
// `*exit_code` is 2 for usage and schema errors and 3 otherwise.
//
// # Safety
// String arguments must be NUL-terminated; output pointers writable.
enum DlStatus dl_run_experiment(const char *experiment,
                                const char *config_text,
                                uint64_t seed,
                                uint32_t threads,
                                enum DlFormat format,
                                char **report,
                                int32_t *exit_code);

// Release a string returned by this library.
//
// # Safety
// `s` must be NULL or a pointer returned by this library, freed once.
void dl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DISORDER_LAB_H */
