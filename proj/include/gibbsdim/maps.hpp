#ifndef GIBBSDIM_MAPS_HPP
#define GIBBSDIM_MAPS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gibbsdim/digit.hpp"
#include "gibbsdim/logspace.hpp"
#include "gibbsdim/partition.hpp"

namespace gibbsdim {

// Log-space continued-fraction denominator recurrence
// q_n = a_n q_{n-1} + q_{n-2}; cylinder length 1/(q_n (q_n + q_{n-1})).
struct ContinuantState {
  double log_q_prev = kNegInf;  // log q_{-1} = log 0
  double log_q_curr = 0.0;      // log q_0 = log 1
  std::uint64_t depth = 0;

  void advance(double log_digit);
  double log_cyl_length() const;

  static constexpr std::uint64_t kDepthCap = 1000000;
};

// Geometry backend: full affine branches (exact Birkhoff sums of log r,
// the default for asymptotic experiments) or the true Gauss map via
// continuants (distortion validation).
struct MapModel {
  enum class Kind { PiecewiseLinear, GaussMap };

  Kind kind = Kind::PiecewiseLinear;
  const Partition* partition = nullptr;  // PiecewiseLinear only
  bool allow_log_digits = false;         // GaussMap log-asymptotic path

  static MapModel piecewise_linear(const Partition& p) {
    return MapModel{Kind::PiecewiseLinear, &p, false};
  }
  static MapModel gauss_map(bool allow_log_digits = false) {
    return MapModel{Kind::GaussMap, nullptr, allow_log_digits};
  }
};

double cyl_log_length(const MapModel& model, std::span<const Digit> digits);

// log | union of I(prefix, a) over a_start <= a <= a_end |, the whole
// left-accumulating union when a_end is absent. PiecewiseLinear only.
double union_log_length(const MapModel& model, std::span<const Digit> prefix,
                        const Digit& a_start,
                        const std::optional<Digit>& a_end);

struct NeighborCylinders {
  std::vector<Digit> left;                  // last digit + 1, always exists
  std::optional<std::vector<Digit>> right;  // last digit - 1, absent at 1
};
NeighborCylinders neighbor_cylinders(std::span<const Digit> prefix);

// | gauss-map log length - piecewise-linear log length | on the Gauss
// partition; bounded by n log 2 + log 2.
double distortion_residual(const Partition& gauss_partition,
                           std::span<const Digit> digits);

}  // namespace gibbsdim

#endif
