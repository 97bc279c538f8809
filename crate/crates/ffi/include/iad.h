#ifndef IAD_H
#define IAD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible function.
typedef enum IadStatus {
  IAD_STATUS_OK = 0,
  IAD_STATUS_NULL_POINTER = 1,
  IAD_STATUS_INVALID_ARGUMENT = 2,
  IAD_STATUS_DIMENSION_MISMATCH = 3,
  IAD_STATUS_NOT_STOCHASTIC = 4,
  IAD_STATUS_REDUCIBLE = 5,
  IAD_STATUS_SINGULAR = 6,
  IAD_STATUS_NOT_CONVERGED = 7,
  IAD_STATUS_NUMERICAL = 8,
  IAD_STATUS_IO = 9,
  IAD_STATUS_PANIC = 10,
} IadStatus;

// A validated column-stochastic transition matrix.
typedef struct IadChain IadChain;

// An assignment of fine states to coarse states.
typedef struct IadPartition IadPartition;

// Tolerances for [`iad_solve`]. Zero fields take the library defaults.
typedef struct IadSolveOptions {
  double tau;
  size_t max_outer;
} IadSolveOptions;

// Rate diagnostics for one chain, partition and angle-bound index `k`.
typedef struct IadRateReport {
  double rho_j;
  double rho_exact_formula;
  double norm_bound;
  size_t k;
  double sin2_theta;
  double angle_bound;
  double sqrt_lambda2;
  double rho_hat_p;
  bool reversible;
} IadRateReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *iad_last_error_message(void);

// Static description of a status code.
const char *iad_status_str(enum IadStatus status);

// Library version as a static string.
const char *iad_version(void);

// Builds a chain from an `n x n` row-major array. With `row_stochastic` the
// rows sum to one and the matrix is transposed; otherwise the columns do.
//
// # Safety
// `data` must point to `n * n` doubles and `out` to a writable handle slot.
enum IadStatus iad_chain_new(const double *data,
                             size_t n,
                             bool row_stochastic,
                             struct IadChain **out);

// Builds a published example chain by name (`1d` or `2d`).
//
// # Safety
// `name` must be a NUL-terminated string and `out` a writable handle slot.
enum IadStatus iad_chain_from_model(const char *name, struct IadChain **out);

// Releases a chain. Null is ignored.
//
// # Safety
// `chain` must come from this library and not be used afterwards.
void iad_chain_free(struct IadChain *chain);

// Number of states, or 0 for a null handle.
//
// # Safety
// `chain` must be null or a live handle.
size_t iad_chain_dim(const struct IadChain *chain);

// Builds a partition from coarse labels `0..n-1`, one per fine state.
//
// # Safety
// `assignment` must point to `len` values and `out` to a writable slot.
enum IadStatus iad_partition_new(const size_t *assignment, size_t len, struct IadPartition **out);

// Builds a named partition family (`split1d:57`, `uniform1d:4,0`,
// `stripes2d:3`, `grid2d:6`, `singletons`, `single`) on `len` states.
//
// # Safety
// `spec` must be a NUL-terminated string and `out` a writable slot.
enum IadStatus iad_partition_from_spec(const char *spec, size_t len, struct IadPartition **out);

// Releases a partition. Null is ignored.
//
// # Safety
// `part` must come from this library and not be used afterwards.
void iad_partition_free(struct IadPartition *part);

// Number of coarse states, or 0 for a null handle.
//
// # Safety
// `part` must be null or a live handle.
size_t iad_partition_coarse_count(const struct IadPartition *part);

// Steady state of an irreducible chain written to `out[0..len]`, where
// `len` must equal the chain dimension.
//
// # Safety
// `chain` must be live and `out` must point to `len` writable doubles.
enum IadStatus iad_steady_state(const struct IadChain *chain, double tol, double *out, size_t len);

// Runs IAD. `mu0` may be null for a uniform start. On success the steady
// state is written to `out` and the number of outer steps to `iterations`
// (which may be null). On non-convergence the last iterate is written and
// `IAD_STATUS_NOT_CONVERGED` returned.
//
// # Safety
// Handles must be live; `mu0` (if non-null) and `out` must hold `len` doubles.
enum IadStatus iad_solve(const struct IadChain *chain,
                         const struct IadPartition *part,
                         const double *mu0,
                         size_t len,
                         struct IadSolveOptions options,
                         double *out,
                         size_t *iterations);

// Rate diagnostics for `part` with the angle bound at index `k`.
//
// # Safety
// Handles must be live and `out` must point to a writable report.
enum IadStatus iad_rate_report(const struct IadChain *chain,
                               const struct IadPartition *part,
                               size_t k,
                               struct IadRateReport *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* IAD_H */
