#ifndef KQUANT_H
#define KQUANT_H

#include <stddef.h>
#include <stdint.h>

/* Generated from crates/ffi; do not edit. */

typedef enum KqStatus {
  KQ_STATUS_OK = 0,
  KQ_STATUS_NULL_POINTER = 1,
  KQ_STATUS_INVALID_ARGUMENT = 2,
  KQ_STATUS_UNKNOWN_MODEL = 3,
  KQ_STATUS_CAPABILITY = 4,
  KQ_STATUS_MEMORY_BUDGET = 5,
  KQ_STATUS_POSITIVITY = 6,
  KQ_STATUS_NOT_POSITIVE_DEFINITE = 7,
  KQ_STATUS_UNSUPPORTED = 8,
  KQ_STATUS_BUFFER_SIZE = 9,
  KQ_STATUS_CONFIG = 10,
  KQ_STATUS_CHECK_FAILED = 11,
  KQ_STATUS_IO = 12,
  KQ_STATUS_INTERNAL = 13,
} KqStatus;

// A Hermitian positive definite Gram matrix on sections of L^k.
typedef struct KqGram KqGram;

// A model variety with its quadrature grid.
typedef struct KqModel KqModel;

// A Kähler potential.
typedef struct KqPotential KqPotential;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread; empty if none. The pointer
// stays valid until the next failing call on this thread.
const char *kq_last_error(void);

// Library version as a static NUL-terminated string.
const char *kq_version(void);

// Builds `name` ("CP1" or "CP2_toric") supporting levels up to `resolution`.
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum KqStatus kq_model_new(const char *name, uintptr_t resolution, struct KqModel **out_model);

// # Safety
// `model` must come from [`kq_model_new`] and not be used afterwards.
void kq_model_free(struct KqModel *model);

// # Safety
// Pointers must be valid.
enum KqStatus kq_model_node_count(const struct KqModel *model, uintptr_t *out_count);

// dim H⁰(X, L^k).
//
// # Safety
// Pointers must be valid.
enum KqStatus kq_model_section_count(const struct KqModel *model,
                                     uintptr_t k,
                                     uintptr_t *out_count);

// Parses a potential from JSON, e.g. `{"family":"legendre","l":2,"eps":0.05}`.
//
// # Safety
// `json` must be NUL-terminated and `out_potential` valid.
enum KqStatus kq_potential_from_json(const char *json, struct KqPotential **out_potential);

// # Safety
// `out_potential` must be valid.
enum KqStatus kq_potential_constant(double value, struct KqPotential **out_potential);

// φ = eps · P_l(cos θ) on CP1.
//
// # Safety
// `out_potential` must be valid.
enum KqStatus kq_potential_legendre(uintptr_t l, double eps, struct KqPotential **out_potential);

// Pullback of ω_FS by z ↦ λz on CP1.
//
// # Safety
// `out_potential` must be valid.
enum KqStatus kq_potential_mobius(double lambda, struct KqPotential **out_potential);

// # Safety
// `potential` must come from a `kq_potential_*` constructor.
void kq_potential_free(struct KqPotential *potential);

// Writes ρ_k(ω_φ) at every node; `len` must equal the node count.
//
// # Safety
// Handles must be valid and `values` must hold `len` doubles.
enum KqStatus kq_bergman_kernel(const struct KqModel *model,
                                const struct KqPotential *potential,
                                uintptr_t k,
                                double *values,
                                uintptr_t len);

// Hilb(h_ref^k e^{-kφ}).
//
// # Safety
// Handles and `out_gram` must be valid.
enum KqStatus kq_hilb(const struct KqModel *model,
                      const struct KqPotential *potential,
                      uintptr_t k,
                      struct KqGram **out_gram);

// # Safety
// Pointers must be valid.
enum KqStatus kq_gram_dim(const struct KqGram *gram, uintptr_t *out_dim);

// log det in the monomial basis.
//
// # Safety
// Pointers must be valid.
enum KqStatus kq_gram_log_det(const struct KqGram *gram, double *out_value);

// Copies the matrix row-major into `re` and `im`, each of length dim².
//
// # Safety
// `re` and `im` must hold `len` doubles.
enum KqStatus kq_gram_entries(const struct KqGram *gram, double *re, double *im, uintptr_t len);

// # Safety
// `gram` must come from [`kq_hilb`].
void kq_gram_free(struct KqGram *gram);

// Mabuchi K-energy of ω_φ along the linear path (CP1).
//
// # Safety
// Pointers must be valid.
enum KqStatus kq_k_energy(const struct KqModel *model,
                          const struct KqPotential *potential,
                          double *out_value);

// ℒ_k(ω_φ) - ℒ_k(ω_ref).
//
// # Safety
// Pointers must be valid.
enum KqStatus kq_l_difference(const struct KqModel *model,
                              const struct KqPotential *potential,
                              uintptr_t k,
                              double *out_value);

// Fits values ≈ c · k^p. If every value is below the noise floor, p is
// -inf, c is 0 and r2 is 1.
//
// # Safety
// `ks` and `values` must hold `n` entries; outputs must be valid.
enum KqStatus kq_fit_decay(const uintptr_t *ks,
                           const double *values,
                           uintptr_t n,
                           double *out_c,
                           double *out_p,
                           double *out_r2);

// Runs an experiment config given as JSON text; `out_passed` is set to 1
// if every check passed, else 0.
//
// # Safety
// `json` must be NUL-terminated and `out_passed` valid.
enum KqStatus kq_run_config(const char *json, int *out_passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KQUANT_H */
