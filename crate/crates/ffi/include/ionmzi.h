#ifndef IONMZI_H
#define IONMZI_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IonmziStatus {
  IONMZI_STATUS_OK = 0,
  IONMZI_STATUS_NULL_POINTER = 1,
  IONMZI_STATUS_INVALID_ARGUMENT = 2,
  IONMZI_STATUS_NOT_NORMALIZED = 3,
  IONMZI_STATUS_NUMERIC_FAILURE = 4,
  IONMZI_STATUS_INVALID_CONFIG = 5,
  IONMZI_STATUS_PANIC = 6,
} IonmziStatus;

/**
 * Opaque two-ion state.
 */
typedef struct IonmziIonPair IonmziIonPair;

/**
 * Branch probabilities of one open pass.
 */
typedef struct IonmziPassResult {
  double p_scatter_u;
  double p_scatter_l;
  double p_detect_upper;
  double p_detect_lower;
  double p_recycle;
} IonmziPassResult;

typedef struct IonmziIteration {
  double p_entangled;
  double p_scattered;
  double p_stuck;
  double p_truncated;
} IonmziIteration;

typedef struct IonmziMonteCarlo {
  uint64_t trials;
  uint64_t entangled;
  uint64_t scattered;
  uint64_t stuck;
  uint64_t truncated;
  double p_entangled;
  double se_entangled;
} IonmziMonteCarlo;

/**
 * Single pass and iterated yield of the mixed input. Fidelities are NaN
 * when the conditioning detector never fires.
 */
typedef struct IonmziMixed {
  double p_scatter;
  double p_detect_upper;
  double p_detect_lower;
  double fidelity_upper_psi_plus;
  double fidelity_lower_psi_minus;
  double p_entangled_iterated;
} IonmziMixed;

typedef struct IonmziThroughput {
  double p_total;
  double pairs_per_second;
} IonmziThroughput;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Product state `(alpha|m+> + beta|m->)_U (a|m+> + b|m->)_L`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum IonmziStatus ionmzi_ion_pair_new_product(double alpha_re,
                                              double alpha_im,
                                              double beta_re,
                                              double beta_im,
                                              double a_re,
                                              double a_im,
                                              double b_re,
                                              double b_im,
                                              struct IonmziIonPair **out);

/**
 * General normalized state from its four amplitudes.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum IonmziStatus ionmzi_ion_pair_new(double c_mp_re,
                                      double c_mp_im,
                                      double c_pm_re,
                                      double c_pm_im,
                                      double c_mm_re,
                                      double c_mm_im,
                                      double c_pp_re,
                                      double c_pp_im,
                                      struct IonmziIonPair **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `p` must come from an `ionmzi_ion_pair_new*` call and not be freed twice.
 */
void ionmzi_ion_pair_free(struct IonmziIonPair *p);

/**
 * One sigma+ pass through the open interferometer, entering next to M1.
 *
 * # Safety
 * `p` must be a live handle and `out` valid for writes.
 */
enum IonmziStatus ionmzi_single_pass(const struct IonmziIonPair *p, struct IonmziPassResult *out);

/**
 * Closed-form totals over unlimited passes.
 *
 * # Safety
 * `p` must be a live handle and `out` valid for writes.
 */
enum IonmziStatus ionmzi_iterate_analytic(const struct IonmziIonPair *p,
                                          struct IonmziIteration *out);

/**
 * Pass-by-pass totals with at most `max_passes` passes.
 *
 * # Safety
 * `p` must be a live handle and `out` valid for writes.
 */
enum IonmziStatus ionmzi_iterate_numeric(const struct IonmziIonPair *p,
                                         uint32_t max_passes,
                                         struct IonmziIteration *out);

/**
 * Sampled photon histories; deterministic for a given seed.
 *
 * # Safety
 * `p` must be a live handle and `out` valid for writes.
 */
enum IonmziStatus ionmzi_monte_carlo(const struct IonmziIonPair *p,
                                     uint64_t trials,
                                     uint64_t seed,
                                     uint32_t max_passes,
                                     struct IonmziMonteCarlo *out);

/**
 * `F |psi+><psi+| + (1-F) |phi+><phi+|` input.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum IonmziStatus ionmzi_mixed(double fidelity, struct IonmziMixed *out);

/**
 * `4 pi c / (finesse * length)` in 1/s.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum IonmziStatus ionmzi_cavity_decay_rate(double finesse, double length, double *out);

/**
 * Cavity emission probability from decay rate, coupling and loss rate.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum IonmziStatus ionmzi_p_cav(double gamma, double omega, double loss_rate, double *out);

/**
 * Pair rate at a given cavity operating point.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum IonmziStatus ionmzi_throughput(double p_protocol,
                                    double p_cav,
                                    double eta,
                                    double xi,
                                    double photon_rate,
                                    struct IonmziThroughput *out);

/**
 * Runs a JSON config (same keys as the command-line tool) and returns the
 * rendered report. Release it with [`ionmzi_string_free`].
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `out` valid for writes.
 */
enum IonmziStatus ionmzi_run_json(const char *config_json, char **out);

/**
 * # Safety
 * `s` must come from this library and not be freed twice. Null is ignored.
 */
void ionmzi_string_free(char *s);

/**
 * Static description of a status code.
 */
const char *ionmzi_status_message(enum IonmziStatus status);

/**
 * Message for the last failure on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *ionmzi_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IONMZI_H */
