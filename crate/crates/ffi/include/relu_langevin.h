#ifndef RELU_LANGEVIN_H
#define RELU_LANGEVIN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every exported function.
typedef enum RlStatus {
  RL_STATUS_OK = 0,
  RL_STATUS_NULL_POINTER = 1,
  RL_STATUS_INVALID_ARGUMENT = 2,
  RL_STATUS_DOMAIN = 3,
  RL_STATUS_SHAPE = 4,
  RL_STATUS_NON_FINITE = 5,
  RL_STATUS_SIZE = 6,
  RL_STATUS_INTERNAL = 7,
} RlStatus;

// Random ReLU generator.
typedef struct RlGenerator RlGenerator;

// Isotropic Gaussian-mixture prior.
typedef struct RlGmm RlGmm;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message, NUL-terminated and
// truncated to `capacity` bytes, into `buffer`. Returns the full message
// length excluding the terminator.
//
// # Safety
// `buffer` must be null or point to `capacity` writable bytes.
size_t rl_last_error_message(char *buffer, size_t capacity);

// Creates a generator with layer widths `dims[0..n_dims]` (latent first).
//
// # Safety
// `dims` must point to `n_dims` values and `out` must be writable.
enum RlStatus rl_generator_new(const size_t *dims,
                               size_t n_dims,
                               uint64_t seed,
                               struct RlGenerator **out);

// Releases a generator; null is ignored.
//
// # Safety
// `generator` must come from [`rl_generator_new`] and not be used afterwards.
void rl_generator_free(struct RlGenerator *generator);

// Writes the latent and output dimensions.
//
// # Safety
// All pointers must be valid.
enum RlStatus rl_generator_dims(const struct RlGenerator *generator,
                                size_t *input_dim,
                                size_t *output_dim);

// Evaluates `G(z)` into `out[0..out_len]`.
//
// # Safety
// `z` must hold `z_len` values and `out` `out_len` writable values.
enum RlStatus rl_generator_apply(const struct RlGenerator *generator,
                                 const double *z,
                                 size_t z_len,
                                 double *out,
                                 size_t out_len);

// Creates a mixture of `components` isotropic Gaussians in `dim`
// dimensions. `means` is row-major `components × dim`.
//
// # Safety
// Arrays must have the stated lengths and `out` must be writable.
enum RlStatus rl_gmm_new(size_t components,
                         size_t dim,
                         const double *weights,
                         const double *means,
                         const double *variances,
                         struct RlGmm **out);

// Releases a mixture; null is ignored.
//
// # Safety
// `gmm` must come from [`rl_gmm_new`] and not be used afterwards.
void rl_gmm_free(struct RlGmm *gmm);

// Log-density and score of the mixture at `z`.
//
// # Safety
// `z` and `score` must hold `dim` values, `log_density` must be writable.
enum RlStatus rl_gmm_log_density_and_score(const struct RlGmm *gmm,
                                           const double *z,
                                           size_t dim,
                                           double *log_density,
                                           double *score);

// Idealized loss at `x` for target `z_star`, both of length `n`.
//
// # Safety
// `x` and `z_star` must hold `n` values, `out` must be writable.
enum RlStatus rl_ideal_loss(const double *x,
                            const double *z_star,
                            size_t n,
                            size_t depth,
                            double *out);

// Gradient of the idealized loss into `grad[0..n]`.
//
// # Safety
// `x`, `z_star` and `grad` must hold `n` values.
enum RlStatus rl_ideal_gradient(const double *x,
                                const double *z_star,
                                size_t n,
                                size_t depth,
                                double *grad);

// Smallest Hessian eigenvalue of the idealized loss at `x ≠ 0`.
//
// # Safety
// `x` and `z_star` must hold `n` values, `out` must be writable.
enum RlStatus rl_min_hessian_eig(const double *x,
                                 const double *z_star,
                                 size_t n,
                                 size_t depth,
                                 double *out);

// Euclidean projection of `v` onto the ℓ1 ball of `radius` around `center`.
//
// # Safety
// `v`, `center` and `out` must hold `n` values.
enum RlStatus rl_project_l1(const double *v,
                            const double *center,
                            size_t n,
                            double radius,
                            double *out);

// Sliced W1 between two row-major `count × dim` sample sets.
//
// # Safety
// `a` and `b` must hold `count·dim` values, `out` must be writable.
enum RlStatus rl_sliced_w1(const double *a,
                           const double *b,
                           size_t count,
                           size_t dim,
                           size_t projections,
                           uint64_t seed,
                           double *out);

// Runs `steps` Langevin steps on the idealized loss from `z0` and writes
// the final state into `final_state[0..n]`.
//
// # Safety
// `z_star`, `z0` and `final_state` must hold `n` values.
enum RlStatus rl_ideal_langevin(const double *z_star,
                                const double *z0,
                                size_t n,
                                size_t depth,
                                double eta,
                                double beta,
                                size_t steps,
                                uint64_t seed,
                                double *final_state);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RELU_LANGEVIN_H */
