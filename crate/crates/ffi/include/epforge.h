#ifndef EPFORGE_H
#define EPFORGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EpfStatus {
  EPF_STATUS_OK = 0,
  EPF_STATUS_NULL_POINTER = 1,
  EPF_STATUS_INVALID_ARGUMENT = 2,
  EPF_STATUS_NUMERICAL = 3,
  EPF_STATUS_OUT_OF_RANGE = 4,
  EPF_STATUS_PANIC = 5,
} EpfStatus;

/**
 * A list of located exceptional points.
 */
typedef struct EpfCandidates EpfCandidates;

/**
 * Eigenvalues of one Hamiltonian.
 */
typedef struct EpfSpectrum EpfSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Free with
 * [`epf_string_free`].
 */
char *epf_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed at most once.
 */
void epf_string_free(char *s);

/**
 * Library version as a static NUL-terminated string.
 */
const char *epf_version(void);

/**
 * Solves the spectrum of the `n`-site chain with `p` parameters.
 *
 * # Safety
 * `params` must point to `p` doubles (or be null when `p == 0`); `out` must
 * be a valid pointer.
 */
enum EpfStatus epf_spectrum_new(size_t n,
                                const double *params,
                                size_t p,
                                double center,
                                bool kinetic_shift,
                                struct EpfSpectrum **out);

/**
 * # Safety
 * `s` must be null or a handle from [`epf_spectrum_new`].
 */
size_t epf_spectrum_len(const struct EpfSpectrum *s);

/**
 * # Safety
 * `s` must be a handle from [`epf_spectrum_new`]; `re` and `im` valid pointers.
 */
enum EpfStatus epf_spectrum_eigenvalue(const struct EpfSpectrum *s,
                                       size_t index,
                                       double *re,
                                       double *im);

/**
 * True when all eigenvalues are real and non-degenerate.
 *
 * # Safety
 * `s` must be null or a handle from [`epf_spectrum_new`].
 */
bool epf_spectrum_is_physical(const struct EpfSpectrum *s);

/**
 * # Safety
 * `s` must be null or a handle from [`epf_spectrum_new`], freed at most once.
 */
void epf_spectrum_free(struct EpfSpectrum *s);

/**
 * Fourth-order EPs of the two-parameter chain at N = 2K.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum EpfStatus epf_ep4_even(size_t k, struct EpfCandidates **out);

/**
 * Fifth-order EPs of the two-parameter chain at N = 2K + 1.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum EpfStatus epf_ep5_odd(size_t k, struct EpfCandidates **out);

/**
 * Second-order EPs of the one-parameter chain at even N.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum EpfStatus epf_ep2_one_param(size_t n, struct EpfCandidates **out);

/**
 * Newton search with `grid^p` seeds on `[-2, 2]^p`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum EpfStatus epf_ep_newton(size_t n, size_t p, size_t grid, struct EpfCandidates **out);

/**
 * # Safety
 * `c` must be null or a candidate handle.
 */
size_t epf_candidates_len(const struct EpfCandidates *c);

/**
 * Order, verification flag, largest residual and parameter count of one
 * candidate. Any output pointer may be null.
 *
 * # Safety
 * `c` must be a candidate handle; non-null outputs must be valid.
 */
enum EpfStatus epf_candidate_info(const struct EpfCandidates *c,
                                  size_t index,
                                  size_t *order,
                                  bool *verified,
                                  double *max_residual,
                                  size_t *param_count);

/**
 * Copies the parameters of one candidate into `buf` (`buf_len` doubles).
 *
 * # Safety
 * `c` must be a candidate handle; `buf` must hold `buf_len` doubles.
 */
enum EpfStatus epf_candidate_params(const struct EpfCandidates *c,
                                    size_t index,
                                    double *buf,
                                    size_t buf_len);

/**
 * All candidates as a JSON array. Free with [`epf_string_free`].
 *
 * # Safety
 * `c` must be a candidate handle; `out` a valid pointer.
 */
enum EpfStatus epf_candidates_json(const struct EpfCandidates *c, char **out);

/**
 * # Safety
 * `c` must be null or a candidate handle, freed at most once.
 */
void epf_candidates_free(struct EpfCandidates *c);

/**
 * Secular polynomial `det(E - H)` as text. Free with [`epf_string_free`].
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum EpfStatus epf_secular_text(size_t n, size_t p, char **out);

/**
 * Large-K approximant of the most negative EP4 coordinate with `terms`
 * correction terms.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum EpfStatus epf_ep4_asymptotic(size_t k, size_t terms, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EPFORGE_H */
