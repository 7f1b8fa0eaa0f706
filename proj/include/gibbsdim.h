/* C interface of the gibbsdim shared library.
 *
 * All functions return gd_status; results go through out-parameters.
 * Handles are opaque and must be released with the matching _destroy
 * call. gd_last_error() returns a thread-local message for the most
 * recent failure on the calling thread.
 */

#ifndef GIBBSDIM_H
#define GIBBSDIM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gd_status {
  GD_OK = 0,
  GD_ERR_INVALID_ARGUMENT = 1,
  GD_ERR_PARSE = 2,
  GD_ERR_UNSUPPORTED_TAIL = 3,
  GD_ERR_EXACT_DIGIT_REQUIRED = 4,
  GD_ERR_INVALID_RANGE = 5,
  GD_ERR_ESTIMATION_FAILED = 6,
  GD_ERR_NO_K0 = 7,
  GD_ERR_IO = 8,
  GD_ERR_INTERNAL = 9
} gd_status;

typedef struct gd_partition gd_partition;
typedef struct gd_measure gd_measure;
typedef struct gd_orbit gd_orbit;

const char* gd_version(void);
const char* gd_generator_name(void);
const char* gd_status_name(gd_status status);
const char* gd_last_error(void);

/* ---- partition: branch lengths r_n and tails R_n (log space) ---- */

/* spec: "gauss" | "powerlaw:<alpha>" | "table:<path>" */
gd_status gd_partition_create(const char* spec, gd_partition** out);
void gd_partition_destroy(gd_partition* p);
gd_status gd_partition_log_r(const gd_partition* p, uint64_t digit,
                             double* out);
gd_status gd_partition_log_r_from_log(const gd_partition* p, double log_digit,
                                      double* out);
gd_status gd_partition_log_tail_r(const gd_partition* p, uint64_t digit,
                                  double* out);
gd_status gd_partition_log_tail_r_from_log(const gd_partition* p,
                                           double log_digit, double* out);
gd_status gd_partition_convergence_exponent(const gd_partition* p,
                                            double* out);
/* max |log R_n + (alpha-1) log n - C| over a geometric grid plus the
 * fitted least-squares slope of log R against log n */
gd_status gd_partition_tail_check(const gd_partition* p, uint64_t n_lo,
                                  uint64_t n_hi, double* max_residual,
                                  double* fitted_slope, double* fitted_c,
                                  int* pass);

/* ---- measure: digit law p_n, tails, series functionals ---- */

/* spec: "geometric:<q>" | "logsquare" | "zeta:<beta>" | "table:<path>" */
gd_status gd_measure_create(const char* spec, gd_measure** out);
void gd_measure_destroy(gd_measure* m);
gd_status gd_measure_log_p(const gd_measure* m, uint64_t digit, double* out);
gd_status gd_measure_log_p_from_log(const gd_measure* m, double log_digit,
                                    double* out);
gd_status gd_measure_log_tail_p(const gd_measure* m, uint64_t digit,
                                double* out);
gd_status gd_measure_log_tail_p_from_log(const gd_measure* m,
                                         double log_digit, double* out);
gd_status gd_measure_entropy_partial(const gd_measure* m, uint64_t depth,
                                     double* out);
gd_status gd_measure_lyapunov_partial(const gd_measure* m,
                                      const gd_partition* p, uint64_t depth,
                                      double* out);
gd_status gd_measure_trimmed_criterion_partial(const gd_measure* m,
                                               const gd_partition* p,
                                               uint64_t depth, double* out);
/* divergent != 0 when the entropy series keeps growing; dimension is
 * h/lambda otherwise */
gd_status gd_measure_volume_lemma_dim(const gd_measure* m,
                                      const gd_partition* p, double* dimension,
                                      int* divergent);

/* ---- orbits ---- */

gd_status gd_orbit_generate(const gd_measure* m, const gd_partition* p,
                            uint64_t length, uint64_t seed, gd_orbit** out);
void gd_orbit_destroy(gd_orbit* o);
gd_status gd_orbit_length(const gd_orbit* o, uint64_t* out);
/* exact_digit is 0 for log-only digits */
gd_status gd_orbit_digit(const gd_orbit* o, uint64_t n, uint64_t* exact_digit,
                         double* log_value);
gd_status gd_orbit_cum_log_p(const gd_orbit* o, uint64_t n, double* out);
gd_status gd_orbit_cum_log_r(const gd_orbit* o, uint64_t n, double* out);
gd_status gd_orbit_trimmed_sum(const gd_orbit* o, uint64_t n, double* total,
                               double* trimmed, uint64_t* argmax);
gd_status gd_orbit_blowup_ratio(const gd_orbit* o, uint64_t n, double* out);
gd_status gd_orbit_plant_excursion(const gd_orbit* o, uint64_t position,
                                   double log_value, gd_orbit** out);

/* ---- estimators ---- */

typedef enum gd_estimator_kind {
  GD_EST_SYMBOLIC = 0,
  GD_EST_LOWER_COVER = 1,
  GD_EST_NEIGHBOR_UPPER = 2,
  GD_EST_CASE_SPLIT = 3
} gd_estimator_kind;

typedef enum gd_estimate_flag {
  GD_FLAG_OK = 0,
  GD_FLAG_DEGENERATE_WHOLE_SPACE = 1,
  GD_FLAG_DIGIT_ONE_SKIPPED = 2,
  GD_FLAG_CASE1 = 3,
  GD_FLAG_CASE2 = 4
} gd_estimate_flag;

typedef struct gd_cover_estimate {
  uint64_t depth;
  double log_measure;
  double log_length;
  double ratio;
  int kind;  /* gd_estimator_kind */
  int flag;  /* gd_estimate_flag */
  uint64_t cover_anchor;
} gd_cover_estimate;

/* k0 is only read for GD_EST_CASE_SPLIT */
gd_status gd_estimate(const gd_orbit* o, gd_estimator_kind kind, uint64_t n,
                      uint64_t k0, gd_cover_estimate* out);

gd_status gd_ineq_check(const gd_measure* m, const gd_partition* p,
                        double alpha, double delta, double eta, uint64_t k_lo,
                        uint64_t k_hi, uint64_t n_hi, uint64_t* k0,
                        double* rhs, double* max_lhs);

gd_status gd_ball_bracket(const gd_measure* m, const gd_partition* p,
                          const uint64_t* prefix, size_t prefix_len,
                          double log_radius, int depth_cap, double* log_lo,
                          double* log_hi, int* depth_capped);

/* ---- experiment runner ----
 *
 * subcommand: orbit-stats | dimension | forced-excursion | ineq-check |
 *             series-check | oracle | report
 * config_path may be NULL; overrides are alternating key/value pairs.
 * exit_code receives the process-style status (0 pass, 1 numerical
 * failure, 2 usage/parse error). */
gd_status gd_run(const char* subcommand, const char* config_path,
                 const char* const* override_kv, size_t n_overrides,
                 int* exit_code);

#ifdef __cplusplus
}
#endif

#endif /* GIBBSDIM_H */
