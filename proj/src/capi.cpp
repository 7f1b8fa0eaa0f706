#include "gibbsdim.h"

#include <cstring>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "gibbsdim/config.hpp"
#include "gibbsdim/errors.hpp"
#include "gibbsdim/estimators.hpp"
#include "gibbsdim/measure.hpp"
#include "gibbsdim/orbit.hpp"
#include "gibbsdim/partition.hpp"
#include "gibbsdim/rng.hpp"
#include "gibbsdim/runner.hpp"

using namespace gibbsdim;

namespace {

thread_local std::string t_last_error;

gd_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return GD_ERR_INVALID_ARGUMENT;
    case ErrorCode::ParseError: return GD_ERR_PARSE;
    case ErrorCode::UnsupportedTailQuery: return GD_ERR_UNSUPPORTED_TAIL;
    case ErrorCode::ExactDigitRequired: return GD_ERR_EXACT_DIGIT_REQUIRED;
    case ErrorCode::InvalidRange: return GD_ERR_INVALID_RANGE;
    case ErrorCode::EstimationFailed: return GD_ERR_ESTIMATION_FAILED;
    case ErrorCode::NoK0Found: return GD_ERR_NO_K0;
    case ErrorCode::IoError: return GD_ERR_IO;
    case ErrorCode::Internal: return GD_ERR_INTERNAL;
  }
  return GD_ERR_INTERNAL;
}

template <typename Fn>
gd_status guarded(Fn&& fn) {
  try {
    fn();
    return GD_OK;
  } catch (const Error& e) {
    t_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return GD_ERR_INTERNAL;
  } catch (...) {
    t_last_error = "unknown error";
    return GD_ERR_INTERNAL;
  }
}

gd_status require(bool ok, const char* what) {
  if (ok) return GD_OK;
  t_last_error = what;
  return GD_ERR_INVALID_ARGUMENT;
}

const Partition& part_of(const gd_partition* p) {
  return *reinterpret_cast<const Partition*>(p);
}
const DigitMeasure& meas_of(const gd_measure* m) {
  return *reinterpret_cast<const DigitMeasure*>(m);
}

// Orbits hold references to their measure/partition, so the C handle
// keeps both alive; planted copies share them.
struct OrbitBox {
  std::shared_ptr<const DigitMeasure> measure;
  std::shared_ptr<const Partition> partition;
  Orbit orbit;
};

const OrbitBox& box_of(const gd_orbit* o) {
  return *reinterpret_cast<const OrbitBox*>(o);
}

}  // namespace

extern "C" {

const char* gd_version(void) { return library_version(); }
const char* gd_generator_name(void) { return SplitMix64::name(); }
const char* gd_last_error(void) { return t_last_error.c_str(); }

const char* gd_status_name(gd_status status) {
  switch (status) {
    case GD_OK: return "GD_OK";
    case GD_ERR_INVALID_ARGUMENT: return "GD_ERR_INVALID_ARGUMENT";
    case GD_ERR_PARSE: return "GD_ERR_PARSE";
    case GD_ERR_UNSUPPORTED_TAIL: return "GD_ERR_UNSUPPORTED_TAIL";
    case GD_ERR_EXACT_DIGIT_REQUIRED: return "GD_ERR_EXACT_DIGIT_REQUIRED";
    case GD_ERR_INVALID_RANGE: return "GD_ERR_INVALID_RANGE";
    case GD_ERR_ESTIMATION_FAILED: return "GD_ERR_ESTIMATION_FAILED";
    case GD_ERR_NO_K0: return "GD_ERR_NO_K0";
    case GD_ERR_IO: return "GD_ERR_IO";
    case GD_ERR_INTERNAL: return "GD_ERR_INTERNAL";
  }
  return "GD_ERR_INTERNAL";
}

gd_status gd_partition_create(const char* spec, gd_partition** out) {
  if (auto s = require(spec && out, "null argument")) return s;
  return guarded([&] {
    *out = reinterpret_cast<gd_partition*>(new Partition(Partition::parse(spec)));
  });
}

void gd_partition_destroy(gd_partition* p) {
  delete reinterpret_cast<Partition*>(p);
}

gd_status gd_partition_log_r(const gd_partition* p, uint64_t digit,
                             double* out) {
  if (auto s = require(p && out, "null argument")) return s;
  return guarded([&] { *out = part_of(p).log_r(Digit::from_index(digit)); });
}

gd_status gd_partition_log_r_from_log(const gd_partition* p, double log_digit,
                                      double* out) {
  if (auto s = require(p && out, "null argument")) return s;
  return guarded([&] { *out = part_of(p).log_r(Digit::from_log(log_digit)); });
}

gd_status gd_partition_log_tail_r(const gd_partition* p, uint64_t digit,
                                  double* out) {
  if (auto s = require(p && out, "null argument")) return s;
  return guarded(
      [&] { *out = part_of(p).log_tail_R(Digit::from_index(digit)); });
}

gd_status gd_partition_log_tail_r_from_log(const gd_partition* p,
                                           double log_digit, double* out) {
  if (auto s = require(p && out, "null argument")) return s;
  return guarded(
      [&] { *out = part_of(p).log_tail_R(Digit::from_log(log_digit)); });
}

gd_status gd_partition_convergence_exponent(const gd_partition* p,
                                            double* out) {
  if (auto s = require(p && out, "null argument")) return s;
  return guarded([&] { *out = part_of(p).convergence_exponent(); });
}

gd_status gd_partition_tail_check(const gd_partition* p, uint64_t n_lo,
                                  uint64_t n_hi, double* max_residual,
                                  double* fitted_slope, double* fitted_c,
                                  int* pass) {
  if (auto s = require(p, "null argument")) return s;
  return guarded([&] {
    const TailCheckReport rep = part_of(p).tail_asymptotic_check(n_lo, n_hi);
    if (max_residual) *max_residual = rep.max_residual;
    if (fitted_slope) *fitted_slope = rep.fitted_slope;
    if (fitted_c) *fitted_c = rep.fitted_intercept;
    if (pass) *pass = rep.pass ? 1 : 0;
  });
}

gd_status gd_measure_create(const char* spec, gd_measure** out) {
  if (auto s = require(spec && out, "null argument")) return s;
  return guarded([&] {
    *out = reinterpret_cast<gd_measure*>(
        new DigitMeasure(DigitMeasure::parse(spec)));
  });
}

void gd_measure_destroy(gd_measure* m) {
  delete reinterpret_cast<DigitMeasure*>(m);
}

gd_status gd_measure_log_p(const gd_measure* m, uint64_t digit, double* out) {
  if (auto s = require(m && out, "null argument")) return s;
  return guarded([&] { *out = meas_of(m).log_p(Digit::from_index(digit)); });
}

gd_status gd_measure_log_p_from_log(const gd_measure* m, double log_digit,
                                    double* out) {
  if (auto s = require(m && out, "null argument")) return s;
  return guarded([&] { *out = meas_of(m).log_p(Digit::from_log(log_digit)); });
}

gd_status gd_measure_log_tail_p(const gd_measure* m, uint64_t digit,
                                double* out) {
  if (auto s = require(m && out, "null argument")) return s;
  return guarded(
      [&] { *out = meas_of(m).log_tail_P(Digit::from_index(digit)); });
}

gd_status gd_measure_log_tail_p_from_log(const gd_measure* m,
                                         double log_digit, double* out) {
  if (auto s = require(m && out, "null argument")) return s;
  return guarded(
      [&] { *out = meas_of(m).log_tail_P(Digit::from_log(log_digit)); });
}

gd_status gd_measure_entropy_partial(const gd_measure* m, uint64_t depth,
                                     double* out) {
  if (auto s = require(m && out, "null argument")) return s;
  return guarded([&] { *out = meas_of(m).entropy_partial(depth); });
}

gd_status gd_measure_lyapunov_partial(const gd_measure* m,
                                      const gd_partition* p, uint64_t depth,
                                      double* out) {
  if (auto s = require(m && p && out, "null argument")) return s;
  return guarded(
      [&] { *out = meas_of(m).lyapunov_partial(part_of(p), depth); });
}

gd_status gd_measure_trimmed_criterion_partial(const gd_measure* m,
                                               const gd_partition* p,
                                               uint64_t depth, double* out) {
  if (auto s = require(m && p && out, "null argument")) return s;
  return guarded(
      [&] { *out = meas_of(m).trimmed_criterion_partial(part_of(p), depth); });
}

gd_status gd_measure_volume_lemma_dim(const gd_measure* m,
                                      const gd_partition* p, double* dimension,
                                      int* divergent) {
  if (auto s = require(m && p, "null argument")) return s;
  return guarded([&] {
    const VolumeLemmaResult res = meas_of(m).volume_lemma_dim(part_of(p));
    if (dimension) *dimension = res.dimension;
    if (divergent) *divergent = res.entropy_divergent ? 1 : 0;
  });
}

gd_status gd_orbit_generate(const gd_measure* m, const gd_partition* p,
                            uint64_t length, uint64_t seed, gd_orbit** out) {
  if (auto s = require(m && p && out, "null argument")) return s;
  return guarded([&] {
    auto measure = std::make_shared<const DigitMeasure>(meas_of(m));
    auto partition = std::make_shared<const Partition>(part_of(p));
    Orbit orbit = Orbit::generate(*measure, *partition, length, seed);
    *out = reinterpret_cast<gd_orbit*>(new OrbitBox{
        std::move(measure), std::move(partition), std::move(orbit)});
  });
}

void gd_orbit_destroy(gd_orbit* o) { delete reinterpret_cast<OrbitBox*>(o); }

gd_status gd_orbit_length(const gd_orbit* o, uint64_t* out) {
  if (auto s = require(o && out, "null argument")) return s;
  *out = box_of(o).orbit.length();
  return GD_OK;
}

gd_status gd_orbit_digit(const gd_orbit* o, uint64_t n, uint64_t* exact_digit,
                         double* log_value) {
  if (auto s = require(o, "null argument")) return s;
  return guarded([&] {
    const Digit& d = box_of(o).orbit.digit(n);
    if (exact_digit) *exact_digit = d.is_exact() ? d.exact() : 0;
    if (log_value) *log_value = d.log_value();
  });
}

gd_status gd_orbit_cum_log_p(const gd_orbit* o, uint64_t n, double* out) {
  if (auto s = require(o && out, "null argument")) return s;
  return guarded([&] {
    const Orbit& orbit = box_of(o).orbit;
    if (n > orbit.length())
      fail(ErrorCode::InvalidArgument, "index out of range");
    *out = orbit.cum_log_p(n);
  });
}

gd_status gd_orbit_cum_log_r(const gd_orbit* o, uint64_t n, double* out) {
  if (auto s = require(o && out, "null argument")) return s;
  return guarded([&] {
    const Orbit& orbit = box_of(o).orbit;
    if (n > orbit.length())
      fail(ErrorCode::InvalidArgument, "index out of range");
    *out = orbit.cum_log_r(n);
  });
}

gd_status gd_orbit_trimmed_sum(const gd_orbit* o, uint64_t n, double* total,
                               double* trimmed, uint64_t* argmax) {
  if (auto s = require(o, "null argument")) return s;
  return guarded([&] {
    const TrimmedSum t = box_of(o).orbit.trimmed_sum(n);
    if (total) *total = t.total;
    if (trimmed) *trimmed = t.trimmed;
    if (argmax) *argmax = t.argmax;
  });
}

gd_status gd_orbit_blowup_ratio(const gd_orbit* o, uint64_t n, double* out) {
  if (auto s = require(o && out, "null argument")) return s;
  return guarded([&] { *out = box_of(o).orbit.blowup_ratio(n); });
}

gd_status gd_orbit_plant_excursion(const gd_orbit* o, uint64_t position,
                                   double log_value, gd_orbit** out) {
  if (auto s = require(o && out, "null argument")) return s;
  return guarded([&] {
    const OrbitBox& src = box_of(o);
    Orbit planted = src.orbit.plant_excursion(position, log_value);
    *out = reinterpret_cast<gd_orbit*>(
        new OrbitBox{src.measure, src.partition, std::move(planted)});
  });
}

gd_status gd_estimate(const gd_orbit* o, gd_estimator_kind kind, uint64_t n,
                      uint64_t k0, gd_cover_estimate* out) {
  if (auto s = require(o && out, "null argument")) return s;
  return guarded([&] {
    const Orbit& orbit = box_of(o).orbit;
    CoverEstimate e;
    switch (kind) {
      case GD_EST_SYMBOLIC: e = symbolic_dimension(orbit, n); break;
      case GD_EST_LOWER_COVER: e = lower_cover_ratio(orbit, n); break;
      case GD_EST_NEIGHBOR_UPPER: e = neighbor_upper_ratio(orbit, n); break;
      case GD_EST_CASE_SPLIT: e = case_split_upper(orbit, n, k0); break;
      default: fail(ErrorCode::InvalidArgument, "unknown estimator kind");
    }
    out->depth = e.depth;
    out->log_measure = e.log_measure;
    out->log_length = e.log_length;
    out->ratio = e.ratio;
    out->kind = static_cast<int>(e.kind);
    out->flag = static_cast<int>(e.flag);
    out->cover_anchor = e.cover_anchor;
  });
}

gd_status gd_ineq_check(const gd_measure* m, const gd_partition* p,
                        double alpha, double delta, double eta, uint64_t k_lo,
                        uint64_t k_hi, uint64_t n_hi, uint64_t* k0,
                        double* rhs, double* max_lhs) {
  if (auto s = require(m && p, "null argument")) return s;
  return guarded([&] {
    const IneqReport rep = ineqsums_check(alpha, delta, eta, k_lo, k_hi, n_hi,
                                          meas_of(m), part_of(p));
    if (k0) *k0 = rep.k0;
    if (rhs) *rhs = rep.rhs;
    if (max_lhs) *max_lhs = rep.max_lhs;
  });
}

gd_status gd_ball_bracket(const gd_measure* m, const gd_partition* p,
                          const uint64_t* prefix, size_t prefix_len,
                          double log_radius, int depth_cap, double* log_lo,
                          double* log_hi, int* depth_capped) {
  if (auto s = require(m && p && (prefix || prefix_len == 0), "null argument"))
    return s;
  return guarded([&] {
    std::vector<Digit> digits;
    digits.reserve(prefix_len);
    for (size_t i = 0; i < prefix_len; ++i)
      digits.push_back(Digit::from_index(prefix[i]));
    const BallBracket b = ball_measure_bracket(digits, log_radius, depth_cap,
                                               meas_of(m), part_of(p));
    if (log_lo) *log_lo = b.log_lo;
    if (log_hi) *log_hi = b.log_hi;
    if (depth_capped) *depth_capped = b.depth_capped ? 1 : 0;
  });
}

gd_status gd_run(const char* subcommand, const char* config_path,
                 const char* const* override_kv, size_t n_overrides,
                 int* exit_code) {
  if (auto s = require(subcommand && exit_code &&
                           (override_kv || n_overrides == 0),
                       "null argument"))
    return s;
  return guarded([&] {
    ExperimentConfig cfg;
    if (config_path) cfg = parse_config_file(config_path);
    apply_env(cfg);
    for (size_t i = 0; i < n_overrides; ++i) {
      const char* kv = override_kv[i];
      const char* eq = std::strchr(kv, '=');
      if (!eq) fail(ErrorCode::ParseError,
                    std::string("override must be key=value: ") + kv);
      apply_override(cfg, std::string(kv, eq), std::string(eq + 1));
    }
    *exit_code = run_subcommand(subcommand, cfg, std::cout, std::cerr);
  });
}

}  // extern "C"
