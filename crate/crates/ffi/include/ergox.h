#ifndef ERGOX_H
#define ERGOX_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Work and heat measured against `H_SE`.
 */
#define ERGOX_MODE_FULL 0

/**
 * Work and heat measured against `H_S + H_E`.
 */
#define ERGOX_MODE_NONINTERACTING 1

typedef enum ErgoxStatus {
  ERGOX_STATUS_OK = 0,
  ERGOX_STATUS_NULL_POINTER = 1,
  ERGOX_STATUS_INVALID_ARGUMENT = 2,
  ERGOX_STATUS_NUMERICAL_FAILURE = 3,
  ERGOX_STATUS_INVARIANT_VIOLATION = 4,
  ERGOX_STATUS_PANIC = 5,
} ErgoxStatus;

/**
 * Jaynes-Cummings parameters with the derived energy model.
 */
typedef struct ErgoxModel ErgoxModel;

typedef struct ErgoxOperator ErgoxOperator;

typedef struct ErgoxProtocol ErgoxProtocol;

typedef struct ErgoxState ErgoxState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ergox_version(void);

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *ergox_last_error_message(void);

/**
 * Resonant or detuned JC model with photon cutoff `cutoff`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum ErgoxStatus ergox_jc_model_new(double omega_s,
                                    double omega_e,
                                    double coupling,
                                    size_t cutoff,
                                    struct ErgoxModel **out);

/**
 * Hilbert-space dimension `2 (N + 1)`, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t ergox_jc_model_dim(const struct ErgoxModel *model);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void ergox_jc_model_free(struct ErgoxModel *model);

/**
 * Product state `|qubit, photons>`.
 *
 * # Safety
 * `model` must be a live handle and `out` valid for writing.
 */
enum ErgoxStatus ergox_state_jc_product(const struct ErgoxModel *model,
                                        size_t qubit,
                                        size_t photons,
                                        struct ErgoxState **out);

/**
 * Dressed eigenstate `|n+>` (`plus`) or `|n->`.
 *
 * # Safety
 * `model` must be a live handle and `out` valid for writing.
 */
enum ErgoxStatus ergox_state_jc_dressed(const struct ErgoxModel *model,
                                        size_t n,
                                        bool plus,
                                        struct ErgoxState **out);

/**
 * Product of qubit and cavity Gibbs states; a temperature of 0 gives the
 * ground state.
 *
 * # Safety
 * `model` must be a live handle and `out` valid for writing.
 */
enum ErgoxStatus ergox_state_jc_thermal(const struct ErgoxModel *model,
                                        double t_system,
                                        double t_environment,
                                        struct ErgoxState **out);

/**
 * Density matrix from row-major real and imaginary parts of length
 * `(dim_s dim_e)^2`; `im` may be null for a real matrix.
 *
 * # Safety
 * `re` (and `im` when non-null) must point to that many doubles.
 */
enum ErgoxStatus ergox_state_from_density(size_t dim_s,
                                          size_t dim_e,
                                          const double *re,
                                          const double *im,
                                          struct ErgoxState **out);

/**
 * # Safety
 * `state` must be null or a live handle.
 */
size_t ergox_state_dim(const struct ErgoxState *state);

/**
 * # Safety
 * `state` must be null or a handle not yet freed.
 */
void ergox_state_free(struct ErgoxState *state);

/**
 * Hermitian operator from row-major parts, as for states.
 *
 * # Safety
 * `re` (and `im` when non-null) must point to `(dim_s dim_e)^2` doubles.
 */
enum ErgoxStatus ergox_operator_from_matrix(size_t dim_s,
                                            size_t dim_e,
                                            const double *re,
                                            const double *im,
                                            struct ErgoxOperator **out);

/**
 * `H_SE` (`ERGOX_MODE_FULL`) or `H_S + H_E` of the model.
 *
 * # Safety
 * `model` must be a live handle and `out` valid for writing.
 */
enum ErgoxStatus ergox_jc_hamiltonian(const struct ErgoxModel *model,
                                      uint32_t energy_mode,
                                      struct ErgoxOperator **out);

/**
 * # Safety
 * `op` must be null or a handle not yet freed.
 */
void ergox_operator_free(struct ErgoxOperator *op);

/**
 * Global ergotropy of `state` with respect to `hamiltonian`.
 *
 * # Safety
 * Handles must be live and `out_value` valid for writing.
 */
enum ErgoxStatus ergox_ergotropy(const struct ErgoxState *state,
                                 const struct ErgoxOperator *hamiltonian,
                                 double *out_value);

/**
 * Local ergotropy over qubit unitaries (system dimension 2).
 *
 * # Safety
 * Handles must be live and `out_value` valid for writing.
 */
enum ErgoxStatus ergox_local_ergotropy(const struct ErgoxState *state,
                                       const struct ErgoxOperator *hamiltonian,
                                       uint64_t seed,
                                       double *out_value);

/**
 * Analytic sequence emptying `|0, photons>` on a resonant model.
 *
 * # Safety
 * `model` must be a live handle and `out` valid for writing.
 */
enum ErgoxStatus ergox_fock_protocol(const struct ErgoxModel *model,
                                     size_t photons,
                                     struct ErgoxProtocol **out);

/**
 * Greedy bang-bang search with default settings (horizon `3 pi / Omega`).
 * `pure_variant` stops at the first stall instead of applying random kicks.
 *
 * # Safety
 * Handles must be live and `out` valid for writing.
 */
enum ErgoxStatus ergox_greedy_protocol(const struct ErgoxModel *model,
                                       const struct ErgoxState *state,
                                       uint64_t seed,
                                       uint32_t energy_mode,
                                       bool pure_variant,
                                       struct ErgoxProtocol **out);

/**
 * Parses the JSON form written by [`ergox_protocol_to_json`].
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` valid for writing.
 */
enum ErgoxStatus ergox_protocol_from_json(const char *json, struct ErgoxProtocol **out);

/**
 * Serializes a protocol; free the string with [`ergox_string_free`].
 *
 * # Safety
 * `protocol` must be a live handle and `out` valid for writing.
 */
enum ErgoxStatus ergox_protocol_to_json(const struct ErgoxProtocol *protocol, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void ergox_string_free(char *s);

/**
 * Number of steps (free intervals plus local unitaries).
 *
 * # Safety
 * `protocol` must be null or a live handle.
 */
size_t ergox_protocol_len(const struct ErgoxProtocol *protocol);

/**
 * # Safety
 * `protocol` must be null or a live handle.
 */
size_t ergox_protocol_local_ops(const struct ErgoxProtocol *protocol);

/**
 * Sum of free-evolution intervals; NaN for a null handle.
 *
 * # Safety
 * `protocol` must be null or a live handle.
 */
double ergox_protocol_total_free_time(const struct ErgoxProtocol *protocol);

/**
 * # Safety
 * `protocol` must be null or a handle not yet freed.
 */
void ergox_protocol_free(struct ErgoxProtocol *protocol);

/**
 * Applies `protocol` to `state` and reports extracted work and the
 * decrease of bath energy. Either output pointer may be null.
 *
 * # Safety
 * Handles must be live; non-null outputs must be valid for writing.
 */
enum ErgoxStatus ergox_apply_protocol(const struct ErgoxModel *model,
                                      const struct ErgoxState *state,
                                      const struct ErgoxProtocol *protocol,
                                      uint32_t energy_mode,
                                      double *out_work,
                                      double *out_heat);

/**
 * Lie-algebra dimension for a Heisenberg chain with full control of the
 * first `controlled_sites` spins, and the maximum `4^sites - 1`.
 *
 * # Safety
 * Output pointers must be valid for writing.
 */
enum ErgoxStatus ergox_lie_heisenberg(size_t sites,
                                      double gamma,
                                      double delta,
                                      size_t controlled_sites,
                                      double tol,
                                      size_t *out_dimension,
                                      size_t *out_max);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ERGOX_H */
