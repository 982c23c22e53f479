#ifndef DUFFING_H
#define DUFFING_H

/* This file is generated by cbindgen from the duffing-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes mirroring the CLI exit taxonomy.
typedef enum DuffingStatus {
  DUFFING_STATUS_OK = 0,
  // A required pointer argument was null or otherwise unusable.
  DUFFING_STATUS_NULL_ARGUMENT = 1,
  // The configuration failed to parse or validate.
  DUFFING_STATUS_CONFIG_ERROR = 2,
  // The fixed-point iteration hit its cap; a report is still produced.
  DUFFING_STATUS_DID_NOT_CONVERGE = 3,
  // A numerical routine failed (shooting divergence, bad parameters).
  DUFFING_STATUS_NUMERICAL_ERROR = 4,
  // An internal invariant was violated.
  DUFFING_STATUS_INTERNAL_ERROR = 5,
} DuffingStatus;

// Opaque parsed configuration.
typedef struct DuffingConfig DuffingConfig;

// Opaque solve outcome.
typedef struct DuffingSolveReport DuffingSolveReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static string; never freed by the caller.
const char *duffing_version(void);

// Message of the last failure on this thread, or null. Valid until the next
// failing call on the same thread; do not free.
const char *duffing_last_error_message(void);

// Parse a JSON configuration document into an opaque handle.
//
// # Safety
// `json` must point to a NUL-terminated string and `out` must be a valid
// pointer; on success the caller owns the handle and must release it with
// [`duffing_config_free`].
enum DuffingStatus duffing_config_parse(const char *json, struct DuffingConfig **out);

// Release a configuration handle. Null is ignored.
//
// # Safety
// `cfg` must be a handle returned by [`duffing_config_parse`], not yet
// freed.
void duffing_config_free(struct DuffingConfig *cfg);

// Solve the inclusion described by the configuration.
//
// On `DUFFING_DID_NOT_CONVERGE` the last iterate is still returned through
// `out` so callers can inspect it.
//
// # Safety
// `cfg` must be a live handle from [`duffing_config_parse`]; `out` must be
// valid. A returned report must be released with [`duffing_report_free`].
enum DuffingStatus duffing_solve(const struct DuffingConfig *cfg, struct DuffingSolveReport **out);

// Release a solve report. Null is ignored.
//
// # Safety
// `report` must come from [`duffing_solve`], not yet freed.
void duffing_report_free(struct DuffingSolveReport *report);

// # Safety
// `report` must be a live handle from [`duffing_solve`].
bool duffing_report_converged(const struct DuffingSolveReport *report);

// # Safety
// `report` must be a live handle from [`duffing_solve`].
uint64_t duffing_report_iterations(const struct DuffingSolveReport *report);

// Sup-norm residual of the reported trajectory against its own data.
//
// # Safety
// `report` must be a live handle from [`duffing_solve`].
double duffing_report_residual(const struct DuffingSolveReport *report);

// Number of grid nodes (subintervals plus one).
//
// # Safety
// `report` must be a live handle from [`duffing_solve`].
uint64_t duffing_report_num_nodes(const struct DuffingSolveReport *report);

// # Safety
// `report` must be a live handle from [`duffing_solve`].
uint64_t duffing_report_dim(const struct DuffingSolveReport *report);

// Copy the grid nodes; `buf` needs `num_nodes` entries.
//
// # Safety
// `report` must be live and `buf` must point to at least `len` doubles.
enum DuffingStatus duffing_report_copy_times(const struct DuffingSolveReport *report,
                                             double *buf,
                                             uint64_t len);

// Copy the trajectory samples; `buf` needs `num_nodes * dim` entries.
//
// # Safety
// `report` must be live and `buf` must point to at least `len` doubles.
enum DuffingStatus duffing_report_copy_solution(const struct DuffingSolveReport *report,
                                                double *buf,
                                                uint64_t len);

// Copy the derivative samples; `buf` needs `num_nodes * dim` entries.
//
// # Safety
// `report` must be live and `buf` must point to at least `len` doubles.
enum DuffingStatus duffing_report_copy_derivative(const struct DuffingSolveReport *report,
                                                  double *buf,
                                                  uint64_t len);

// Copy the recorded selection; `buf` needs `num_nodes * dim` entries.
//
// # Safety
// `report` must be live and `buf` must point to at least `len` doubles.
enum DuffingStatus duffing_report_copy_selection(const struct DuffingSolveReport *report,
                                                 double *buf,
                                                 uint64_t len);

// Solve metadata (convergence, norms, shooting constant) as a JSON string.
//
// # Safety
// `report` must be live; `out` must be valid and the returned string must
// be released with [`duffing_string_free`].
enum DuffingStatus duffing_report_meta_json(const struct DuffingSolveReport *report, char **out);

// Compile the admissibility report for a configuration as a JSON string.
//
// # Safety
// `cfg` must be a live handle; `out` must be valid and the returned string
// must be released with [`duffing_string_free`].
enum DuffingStatus duffing_check_json(const struct DuffingConfig *cfg, char **out);

// Run the relaxation experiment; per-level results as a JSON array string.
//
// # Safety
// `cfg` must be a live handle; `out` must be valid and the returned string
// must be released with [`duffing_string_free`].
enum DuffingStatus duffing_relax_json(const struct DuffingConfig *cfg, char **out);

// `pi_p` constant; see the library documentation.
//
// # Safety
// `out` must be a valid pointer.
enum DuffingStatus duffing_pi_p(double p, double *out);

// n-th Dirichlet eigenvalue on `[0, b]` for exponent `p`.
//
// # Safety
// `out` must be a valid pointer.
enum DuffingStatus duffing_eigen_lambda(double p, double b, uint32_t n, double *out);

// Release a string returned by this library. Null is ignored.
//
// # Safety
// `s` must have been returned through one of this library's out-pointers,
// not yet freed.
void duffing_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DUFFING_H */
