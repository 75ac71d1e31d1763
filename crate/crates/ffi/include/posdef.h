#ifndef POSDEF_H
#define POSDEF_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>

/**
 * Result of every fallible call.
 */
typedef enum PosdefStatus {
  POSDEF_STATUS_OK = 0,
  POSDEF_STATUS_INVALID_INPUT = 1,
  POSDEF_STATUS_INFEASIBLE = 2,
  POSDEF_STATUS_NUMERIC = 3,
  POSDEF_STATUS_PARSE = 4,
  POSDEF_STATUS_IO = 5,
  POSDEF_STATUS_NULL_POINTER = 6,
  POSDEF_STATUS_PANIC = 7,
} PosdefStatus;

typedef enum PosdefDenoiseStrategy {
  POSDEF_DENOISE_STRATEGY_ALTERNATING = 0,
  POSDEF_DENOISE_STRATEGY_PENALTY = 1,
} PosdefDenoiseStrategy;

typedef enum PosdefExtensionStrategy {
  POSDEF_EXTENSION_STRATEGY_MAX_MIN_EIG = 0,
  POSDEF_EXTENSION_STRATEGY_CENTRAL = 1,
  POSDEF_EXTENSION_STRATEGY_POLE_MODEL = 2,
} PosdefExtensionStrategy;

/**
 * Sum of undamped oscillations `sum_r p_r exp(-i omega_r t)`.
 */
typedef struct PosdefPoleModel PosdefPoleModel;

/**
 * Sampled signal `f_j = f(j dt)`.
 */
typedef struct PosdefSignal PosdefSignal;

typedef struct PosdefDenoiseOptions {
  enum PosdefDenoiseStrategy strategy;
  size_t max_iter;
  /**
   * NaN selects `1e-8 f0`.
   */
  double conv_tol;
  /**
   * NaN uses the measured `f0`.
   */
  double f0_known;
  size_t penalty_sweeps;
} PosdefDenoiseOptions;

typedef struct PosdefDenoiseReport {
  size_t iterations;
  bool converged;
  double raw_min_eig;
  double final_min_eig;
  double final_cost;
  double shrink_factor;
} PosdefDenoiseReport;

typedef struct PosdefPositivity {
  double min_value;
  double argmin_omega;
  double fraction_below;
  double tol;
  bool pass;
} PosdefPositivity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length in
 * bytes, excluding the terminator.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t posdef_last_error(char *buf, size_t len);

/**
 * Builds a signal from `n` real and imaginary parts. `im` may be null for
 * a real signal.
 *
 * # Safety
 * `re` (and `im` when non-null) must hold `n` doubles; `out` must be valid.
 */
enum PosdefStatus posdef_signal_new(double dt,
                                    const double *re,
                                    const double *im,
                                    size_t n,
                                    struct PosdefSignal **out_signal);

/**
 * # Safety
 * `signal` must be null or a handle from this library, freed at most once.
 */
void posdef_signal_free(struct PosdefSignal *signal);

/**
 * Number of samples; 0 for a null handle.
 *
 * # Safety
 * `signal` must be null or a live handle.
 */
size_t posdef_signal_len(const struct PosdefSignal *signal);

/**
 * Time step; NaN for a null handle.
 *
 * # Safety
 * `signal` must be null or a live handle.
 */
double posdef_signal_dt(const struct PosdefSignal *signal);

/**
 * Copies up to `n` samples into `re` and `im` (either may be null).
 *
 * # Safety
 * Non-null `re` and `im` must be writable for `n` doubles.
 */
enum PosdefStatus posdef_signal_values(const struct PosdefSignal *signal,
                                       double *re,
                                       double *im,
                                       size_t n);

/**
 * Reads a `t,re,im` CSV file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out_signal` must be valid.
 */
enum PosdefStatus posdef_signal_read(const char *path, struct PosdefSignal **out_signal);

/**
 * Writes a `t,re,im` CSV file.
 *
 * # Safety
 * `signal` must be a live handle and `path` a NUL-terminated string.
 */
enum PosdefStatus posdef_signal_write(const struct PosdefSignal *signal, const char *path);

/**
 * Samples a model signal described by run-configuration TOML text (the
 * `[model]`, `[dimer]`, `[ssh]` and `[noise]` sections and `seed`).
 *
 * # Safety
 * `config_toml` must be a NUL-terminated string; `out_signal` must be valid.
 */
enum PosdefStatus posdef_generate(const char *config_toml, struct PosdefSignal **out_signal);

/**
 * Smallest eigenvalue of the signal's Gramian.
 *
 * # Safety
 * `signal` must be a live handle; `out_value` must be valid.
 */
enum PosdefStatus posdef_min_eigenvalue(const struct PosdefSignal *signal, double *out_value);

/**
 * Library defaults for [`posdef_denoise`].
 */
struct PosdefDenoiseOptions posdef_denoise_options_default(void);

/**
 * Projects a signal onto positive definite signals. Non-convergence is
 * reported through `out_report.converged`, not the status. `out_report`
 * may be null.
 *
 * # Safety
 * `signal` and `options` must be valid; `out_signal` must be valid.
 */
enum PosdefStatus posdef_denoise(const struct PosdefSignal *signal,
                                 const struct PosdefDenoiseOptions *options,
                                 struct PosdefSignal **out_signal,
                                 struct PosdefDenoiseReport *out_report);

/**
 * Appends `n_points` positive definite samples. `out_all_unique` (may be
 * null) tells whether every appended value was uniquely determined.
 *
 * # Safety
 * `signal` must be a live handle; `out_signal` must be valid.
 */
enum PosdefStatus posdef_extend(const struct PosdefSignal *signal,
                                size_t n_points,
                                enum PosdefExtensionStrategy strategy,
                                struct PosdefSignal **out_signal,
                                bool *out_all_unique);

/**
 * Fits a pole model; `rank = 0` estimates the rank from the Gramian.
 *
 * # Safety
 * `signal` must be a live handle; `out_model` must be valid.
 */
enum PosdefStatus posdef_poles_fit(const struct PosdefSignal *signal,
                                   size_t rank,
                                   struct PosdefPoleModel **out_model);

/**
 * Builds a pole model from `n` frequencies and weights.
 *
 * # Safety
 * `omega` and `weight` must hold `n` doubles; `out_model` must be valid.
 */
enum PosdefStatus posdef_poles_new(double dt,
                                   const double *omega,
                                   const double *weight,
                                   size_t n,
                                   struct PosdefPoleModel **out_model);

/**
 * # Safety
 * `model` must be null or a handle from this library, freed at most once.
 */
void posdef_poles_free(struct PosdefPoleModel *model);

/**
 * Number of poles; 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t posdef_poles_len(const struct PosdefPoleModel *model);

/**
 * Pole `index` in ascending frequency order.
 *
 * # Safety
 * `model` must be a live handle; outputs must be valid.
 */
enum PosdefStatus posdef_poles_get(const struct PosdefPoleModel *model,
                                   size_t index,
                                   double *out_omega,
                                   double *out_weight);

/**
 * Samples the model at `j = 0..n_total`.
 *
 * # Safety
 * `model` must be a live handle; `out_signal` must be valid.
 */
enum PosdefStatus posdef_poles_extrapolate(const struct PosdefPoleModel *model,
                                           size_t n_total,
                                           struct PosdefSignal **out_signal);

/**
 * Damped Fourier transform at `n` increasing frequencies. `out_im` may be
 * null.
 *
 * # Safety
 * `omegas` must hold `n` doubles and non-null outputs room for `n`.
 */
enum PosdefStatus posdef_spectrum(const struct PosdefSignal *signal,
                                  double tau,
                                  const double *omegas,
                                  size_t n,
                                  double *out_re,
                                  double *out_im);

/**
 * Positivity of the damped transform on `n_points` frequencies spanning
 * `[-pi/dt, pi/dt]`. `tol` NaN selects the truncation-tail bound.
 *
 * # Safety
 * `signal` must be a live handle; `out_result` must be valid.
 */
enum PosdefStatus posdef_check_positivity(const struct PosdefSignal *signal,
                                          double tau,
                                          size_t n_points,
                                          double tol,
                                          struct PosdefPositivity *out_result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POSDEF_H */
