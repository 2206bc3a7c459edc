#ifndef WBCIP_H
#define WBCIP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum WbcipStatus {
  WBCIP_STATUS_OK = 0,
  WBCIP_STATUS_NULL_POINTER = 1,
  WBCIP_STATUS_INVALID_ARGUMENT = 2,
  WBCIP_STATUS_CONFIG = 3,
  WBCIP_STATUS_INVALID_STATE = 4,
  WBCIP_STATUS_STEP_FAILURE = 5,
  WBCIP_STATUS_INFEASIBLE = 6,
  WBCIP_STATUS_NO_REFERENCE = 7,
  WBCIP_STATUS_BUFFER_TOO_SMALL = 8,
  WBCIP_STATUS_INTERNAL = 9,
} WbcipStatus;

/**
 * Opaque simulation handle.
 */
typedef struct WbcipSimulation WbcipSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a simulation from a TOML configuration on its first mesh,
 * initialized with the frictionless steady state of its test.
 *
 * # Safety
 * `config_toml` must be a NUL-terminated string and `out` a valid pointer.
 * The handle written to `out` must be released with `wbcip_simulation_free`.
 */
enum WbcipStatus wbcip_simulation_new(const char *config_toml, struct WbcipSimulation **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `sim` must be null or a handle from `wbcip_simulation_new` not yet freed.
 */
void wbcip_simulation_free(struct WbcipSimulation *sim);

/**
 * Advances with CFL steps until `t_end`, the last step shortened to land on it.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum WbcipStatus wbcip_simulation_advance(struct WbcipSimulation *sim, double t_end);

/**
 * # Safety
 * `sim` must be a live handle and `out` a valid pointer.
 */
enum WbcipStatus wbcip_simulation_time(const struct WbcipSimulation *sim, double *out);

/**
 * # Safety
 * `sim` must be a live handle and `out` a valid pointer.
 */
enum WbcipStatus wbcip_simulation_num_dofs(const struct WbcipSimulation *sim, uintptr_t *out);

/**
 * Copies DoF abscissae and nodal `H`, `q` into arrays of length `len`,
 * which must be at least the DoF count. Any output pointer may be null.
 *
 * # Safety
 * `sim` must be a live handle; non-null outputs must hold `len` doubles.
 */
enum WbcipStatus wbcip_simulation_copy_state(const struct WbcipSimulation *sim,
                                             double *x,
                                             double *h,
                                             double *q,
                                             uintptr_t len);

/**
 * L¹ errors in `H` and `q` against the steady reference of the test.
 *
 * # Safety
 * `sim` must be a live handle; `err_h` and `err_q` valid pointers.
 */
enum WbcipStatus wbcip_simulation_l1_error(const struct WbcipSimulation *sim,
                                           double *err_h,
                                           double *err_q);

/**
 * DeC integration weights for `m` subintervals, row-major `(m+1)×(m+1)`;
 * row `k`, column `l` is `∫₀^{k/m} ψ_l`.
 *
 * # Safety
 * `out` must hold `len` doubles.
 */
enum WbcipStatus wbcip_theta_coefficients(uintptr_t m, double *out, uintptr_t len);

/**
 * Physical flux `(q, q²/H + gH²/2)`.
 *
 * # Safety
 * `out` must hold two doubles.
 */
enum WbcipStatus wbcip_flux(double h, double q, double g, double *out);

/**
 * Copies the message of the last failure on this thread into `buf`,
 * NUL-terminated and truncated to `len` bytes. Returns the full message
 * length without the terminator.
 *
 * # Safety
 * `buf` must be null or hold `len` bytes.
 */
uintptr_t wbcip_last_error_message(char *buf, uintptr_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WBCIP_H */
