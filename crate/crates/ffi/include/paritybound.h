#ifndef PARITYBOUND_H
#define PARITYBOUND_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum PbStatus {
  PB_OK = 0,
  PB_NULL_POINTER = 1,
  PB_INVALID_UTF8 = 2,
  PB_VALIDATION = 3,
  PB_CAPACITY = 4,
  PB_NO_CONVERGENCE = 5,
  PB_NUMERIC = 6,
  PB_SUPPORT = 7,
  PB_PARSE = 8,
  PB_USAGE = 9,
  PB_BUFFER_TOO_SMALL = 10,
  PB_MISSING_STATE = 11,
  PB_PANIC = 12,
} PbStatus;

// Observable family handle.
typedef struct PbFamily PbFamily;

// Density state handle.
typedef struct PbState PbState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or NULL. Owned by the library.
const char *pb_last_error(void);

// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum PbStatus pb_family_from_json(const char *json, struct PbFamily **out);

// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum PbStatus pb_family_from_fixture(const char *name, struct PbFamily **out);

// # Safety
// `fam` must be NULL or a handle from this library that has not been freed.
void pb_family_free(struct PbFamily *fam);

// # Safety
// `fam` must be a live family handle.
size_t pb_family_sites(const struct PbFamily *fam);

// # Safety
// `fam` must be a live family handle.
size_t pb_family_terms(const struct PbFamily *fam);

// Defect weight of terms `i < j`.
//
// # Safety
// `fam` must be a live family handle and `out` a valid pointer.
enum PbStatus pb_defect_weight(const struct PbFamily *fam, size_t i, size_t j, double *out);

// Denominator `m + sum of defect weights`.
//
// # Safety
// `fam` must be a live family handle and `out` a valid pointer.
enum PbStatus pb_denominator(const struct PbFamily *fam, double *out);

// Dense `||B||^2`. `max_dim = 0` selects the default cap.
//
// # Safety
// `fam` must be a live family handle and `out` a valid pointer.
enum PbStatus pb_exact_norm_sq(const struct PbFamily *fam, size_t max_dim, double *out);

// See-saw estimate of the product threshold.
//
// # Safety
// `fam` must be a live family handle. `gamma` must be valid; `converged` may be NULL.
enum PbStatus pb_seesaw_threshold(const struct PbFamily *fam,
                                  size_t restarts,
                                  size_t max_iters,
                                  double tol,
                                  uint64_t seed,
                                  double *gamma,
                                  bool *converged);

// Site constants attained by local ascent, one per site, written to
// `out[0..len]`. These are lower estimates. `len` must be at least the
// number of sites.
//
// # Safety
// `fam` must be a live family handle and `out` must hold `len` doubles.
enum PbStatus pb_site_constants(const struct PbFamily *fam,
                                size_t restarts,
                                uint64_t seed,
                                double *out,
                                size_t len);

// Certified upper bounds on the site constants, written to `out[0..len]`.
// Exact for traceless qubit operators.
//
// # Safety
// `fam` must be a live family handle and `out` must hold `len` doubles.
enum PbStatus pb_site_constant_bounds(const struct PbFamily *fam, double *out, size_t len);

// Product of square roots of the site constants.
//
// # Safety
// `constants` must hold `len` doubles and `out` must be valid.
enum PbStatus pb_explicit_threshold_bound(const double *constants, size_t len, double *out);

// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum PbStatus pb_state_from_json(const char *json, struct PbState **out);

// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum PbStatus pb_state_from_fixture(const char *name, struct PbState **out);

// # Safety
// `state` must be NULL or a handle from this library that has not been freed.
void pb_state_free(struct PbState *state);

// `Tr(rho B)`.
//
// # Safety
// Both handles must be live and `out` valid.
enum PbStatus pb_expectation(const struct PbFamily *fam, const struct PbState *state, double *out);

// Total correlation in nats.
//
// # Safety
// `state` must be live and `out` valid.
enum PbStatus pb_total_correlation(const struct PbState *state, double *out);

// # Safety
// `out` must be valid.
enum PbStatus pb_trace_distance_lower_bound(double excess, double denominator, double *out);

// # Safety
// `out` must be valid.
enum PbStatus pb_itot_lower_bound(double excess, double denominator, double *out);

// Excess bound at time `t` under entropy decay at rate `lambda`.
//
// # Safety
// `out` must be valid.
enum PbStatus pb_decay_excess_bound(double lambda,
                                    double itot0,
                                    double denominator,
                                    double t,
                                    double *out);

// Time after which the excess bound stays below `epsilon`.
//
// # Safety
// `out` must be valid.
enum PbStatus pb_survival_time(double lambda,
                               double itot0,
                               double denominator,
                               double epsilon,
                               double *out);

// Bound on the time integral of the squared excess.
//
// # Safety
// `out` must be valid.
enum PbStatus pb_integrated_excess_bound(double lambda,
                                         double itot0,
                                         double denominator,
                                         double *out);

// Runs a CLI invocation in-process. `argv` excludes the program name, e.g.
// `{"verify"}` or `{"defects", "--fixture", "chsh"}`. On success `*out`
// receives the report (free with [`pb_string_free`]) and `*exit_code` the
// status the binary would exit with.
//
// # Safety
// `argv` must hold `argc` NUL-terminated strings; `out` and `exit_code` must be valid.
enum PbStatus pb_run(const char *const *argv, size_t argc, char **out, int32_t *exit_code);

// # Safety
// `s` must be NULL or a string returned by this library that has not been freed.
void pb_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PARITYBOUND_H */
