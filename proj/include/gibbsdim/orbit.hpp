#ifndef GIBBSDIM_ORBIT_HPP
#define GIBBSDIM_ORBIT_HPP

#include <cstdint>
#include <vector>

#include "gibbsdim/digit.hpp"
#include "gibbsdim/measure.hpp"
#include "gibbsdim/partition.hpp"
#include "gibbsdim/rng.hpp"

namespace gibbsdim {

struct TrimmedSum {
  double total = 0.0;    // S_n = -cum_log_r(n)
  double trimmed = 0.0;  // S'_n = S_n - max X
  std::uint64_t argmax = 0;
};

// Digit visit counts f_{n,k} for k <= k_cap plus an overflow bucket.
struct FrequencyTable {
  std::vector<std::uint64_t> counts;
  std::uint64_t overflow = 0;
  std::uint64_t total = 0;
};

// One orbit step with the running statistics on both sides of it; the
// full-storage orbit and the streaming scan expose the same view.
struct StepView {
  std::uint64_t n = 0;  // 1-based
  Digit digit;
  double cum_log_p_prev = 0.0;
  double cum_log_r_prev = 0.0;
  double cum_log_p = 0.0;
  double cum_log_r = 0.0;
  double max_x_prev = 0.0;
  double max_x = 0.0;
  std::uint64_t argmax = 0;
};

// Symbolic orbit with full per-step storage (about 48 bytes per step;
// fine for one orbit at a time, use OrbitScan for repeated long runs).
// Deterministic in (measure, partition, length, seed).
class Orbit {
 public:
  static Orbit generate(const DigitMeasure& measure, const Partition& part,
                        std::uint64_t length, std::uint64_t seed);

  std::uint64_t length() const { return digits_.size(); }
  std::uint64_t seed() const { return seed_; }
  const DigitMeasure& measure() const { return *measure_; }
  const Partition& partition() const { return *partition_; }

  const Digit& digit(std::uint64_t n) const { return digits_.at(n - 1); }
  double cum_log_p(std::uint64_t n) const { return n == 0 ? 0.0 : cum_log_p_.at(n - 1); }
  double cum_log_r(std::uint64_t n) const { return n == 0 ? 0.0 : cum_log_r_.at(n - 1); }
  double max_x(std::uint64_t n) const { return n == 0 ? 0.0 : max_x_.at(n - 1); }
  std::uint64_t argmax(std::uint64_t n) const { return n == 0 ? 0 : argmax_.at(n - 1); }

  StepView step(std::uint64_t n) const;
  TrimmedSum trimmed_sum(std::uint64_t n) const;
  // cum_log_r(n) / cum_log_r(n-1) = 1 + X_n / S_{n-1}; needs n >= 2
  double blowup_ratio(std::uint64_t n) const;
  // Copy with the digit at `position` replaced by a log-only digit of
  // the given log value; cumulative statistics recomputed from there.
  Orbit plant_excursion(std::uint64_t position, double log_value) const;
  FrequencyTable digit_frequencies(std::uint64_t n, std::uint64_t k_cap) const;

 private:
  Orbit() = default;
  void recompute_from(std::uint64_t position);

  const DigitMeasure* measure_ = nullptr;
  const Partition* partition_ = nullptr;
  std::uint64_t seed_ = 0;
  std::vector<Digit> digits_;
  std::vector<double> cum_log_p_;
  std::vector<double> cum_log_r_;
  std::vector<double> max_x_;
  std::vector<std::uint64_t> argmax_;
};

// Streaming counterpart of Orbit::generate: same digit stream and
// statistics, O(1) memory. Used by the batch runner for long orbits.
class OrbitScan {
 public:
  OrbitScan(const DigitMeasure& measure, const Partition& part,
            std::uint64_t length, std::uint64_t seed)
      : measure_(&measure),
        partition_(&part),
        sampler_(measure.make_sampler()),
        rng_(seed),
        length_(length) {}

  bool next(StepView& out);

 private:
  const DigitMeasure* measure_;
  const Partition* partition_;
  DigitSampler sampler_;
  SplitMix64 rng_;
  std::uint64_t length_;
  std::uint64_t n_ = 0;
  double clp_ = 0.0, clr_ = 0.0, maxx_ = 0.0;
  std::uint64_t argmax_ = 0;
};

}  // namespace gibbsdim

#endif
