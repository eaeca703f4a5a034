/* Generated by cbindgen from crates/ffi/src/lib.rs. */

#ifndef KAHLERLAB_H
#define KAHLERLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Number of doubles in one row of a run record.
 */
#define KL_ROW_FIELDS 10

/**
 * Terminal state of a flow run.
 */
typedef enum {
  KL_RUN_STATUS_CONVERGED = 0,
  KL_RUN_STATUS_T_MAX_REACHED = 1,
  KL_RUN_STATUS_DIVERGED = 2,
} KlRunStatus;

typedef enum {
  KL_STATUS_OK = 0,
  KL_STATUS_NULL_POINTER = 1,
  KL_STATUS_INVALID_ARGUMENT = 2,
  KL_STATUS_DOMAIN = 3,
  KL_STATUS_PENCIL = 4,
  KL_STATUS_DEGENERATE_SPECTRUM = 5,
  KL_STATUS_PHASE_SINGULARITY = 6,
  KL_STATUS_DEGENERATE_FIELD = 7,
  KL_STATUS_RESOLUTION = 8,
  KL_STATUS_GRID_MISMATCH = 9,
  KL_STATUS_SCHEDULE = 10,
  KL_STATUS_CONFIG = 11,
  KL_STATUS_IO = 12,
  KL_STATUS_PANIC = 13,
} KlStatus;

typedef struct KlCoefficients KlCoefficients;

typedef struct KlFlowConfig KlFlowConfig;

typedef struct KlRunRecord KlRunRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null after a success. The
 * pointer stays valid until the next call into this library on the same
 * thread.
 */
const char *kl_last_error(void);

/**
 * Writes `S_0..S_n` of `lambda[0..n]` into `out[0..=n]`.
 *
 * # Safety
 * `lambda` must point to `n` doubles and `out` to `n + 1`.
 */
KlStatus kl_symmetric_functions(const double *lambda, size_t n, double *out);

/**
 * Eigenvalues of `ω⁻¹χ`, ascending, into `out[0..n]`.
 *
 * # Safety
 * `chi` and `omega` must point to `2·n·n` doubles, `out` to `n`.
 */
KlStatus kl_relative_eigenvalues(const double *chi, const double *omega, size_t n, double *out);

/**
 * Creates gMA coefficients from `c_1..c_{n−1}` (`c_len = n − 1`) and a
 * constant `c0`.
 *
 * # Safety
 * `c` must point to `c_len` doubles; `out` must be writable.
 */
KlStatus kl_gma_coefficients_new(size_t n,
                                 const double *c,
                                 size_t c_len,
                                 double c0,
                                 double c0_floor,
                                 KlCoefficients **out);

/**
 * # Safety
 * `coeffs` must come from [`kl_gma_coefficients_new`] and not be used after.
 */
void kl_gma_coefficients_free(KlCoefficients *coeffs);

/**
 * `P^ℓ(λ)`; `+∞` when a tuple has a vanishing denominator.
 *
 * # Safety
 * `lambda` must point to `n` doubles; `coeffs` and `out` must be valid.
 */
KlStatus kl_gma_p(const KlCoefficients *coeffs,
                  const double *lambda,
                  size_t n,
                  size_t ell,
                  double *out);

/**
 * `Q_{c0}(λ)` at the given pointwise `c0`.
 *
 * # Safety
 * As for [`kl_gma_p`].
 */
KlStatus kl_gma_q(const KlCoefficients *coeffs,
                  const double *lambda,
                  size_t n,
                  double c0,
                  double *out);

/**
 * Membership in the closed gMA cone; `margin` is negative outside.
 *
 * # Safety
 * As for [`kl_gma_p`]; `is_member` and `margin` must be writable.
 */
KlStatus kl_gamma_bar_membership(const KlCoefficients *coeffs,
                                 const double *lambda,
                                 size_t n,
                                 bool *is_member,
                                 double *margin);

/**
 * `Σ arccot λ_i`.
 *
 * # Safety
 * `lambda` must point to `n` doubles and `out` must be writable.
 */
KlStatus kl_lagrangian_phase(const double *lambda, size_t n, double *out);

/**
 * Parses a run configuration (the CLI's JSON schema). Relative paths in it
 * resolve against `base_dir`, which may be null for the working directory.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `base_dir` null or one; `out`
 * writable.
 */
KlStatus kl_flow_config_from_json(const char *json, const char *base_dir, KlFlowConfig **out);

/**
 * # Safety
 * `cfg` must come from [`kl_flow_config_from_json`] and not be used after.
 */
void kl_flow_config_free(KlFlowConfig *cfg);

/**
 * Runs the flow to convergence, `t_max` or divergence.
 *
 * # Safety
 * `cfg` must be valid and `out` writable.
 */
KlStatus kl_flow_run(const KlFlowConfig *cfg, KlRunRecord **out);

/**
 * # Safety
 * `rec` must come from [`kl_flow_run`] and not be used after.
 */
void kl_run_record_free(KlRunRecord *rec);

/**
 * # Safety
 * `rec` must be valid; `status` and `rows` writable.
 */
KlStatus kl_run_record_info(const KlRunRecord *rec, KlRunStatus *status, size_t *rows);

/**
 * Row `index` in CSV column order: t, res_l2, res_inf, sup_abs_phidot,
 * energy_I, energy_J, min_eig, theta_min, theta_max, dt.
 *
 * # Safety
 * `rec` must be valid and `out` must point to [`KL_ROW_FIELDS`] doubles.
 */
KlStatus kl_run_record_row(const KlRunRecord *rec, size_t index, double *out);

/**
 * Copies the final potential into `out[0..len]`; `len` must equal the
 * number of grid points, which is written to `points` when `out` is null.
 *
 * # Safety
 * `rec` must be valid; `out` null or pointing to `len` doubles; `points`
 * writable.
 */
KlStatus kl_run_record_final_phi(const KlRunRecord *rec, double *out, size_t len, size_t *points);

/**
 * The record as CSV text; release with [`kl_string_free`].
 *
 * # Safety
 * `rec` must be valid and `out` writable.
 */
KlStatus kl_run_record_csv(const KlRunRecord *rec, char **out);

/**
 * # Safety
 * `s` must come from this library and not be used after.
 */
void kl_string_free(char *s);

/**
 * Runs a property suite by id. `samples = 0` selects the suite default.
 *
 * # Safety
 * `suite` must be a NUL-terminated string and `passed` writable.
 */
KlStatus kl_props_run(const char *suite, uint64_t seed, size_t samples, bool *passed);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* KAHLERLAB_H */
