#ifndef GIBBSDIM_PARTITION_HPP
#define GIBBSDIM_PARTITION_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gibbsdim/digit.hpp"

namespace gibbsdim {

enum class TailFamily { None, PowerLaw, Geometric };

// Analytic continuation rule past the end of an explicit table. The
// coefficient is fixed by continuity with the last tabulated value.
struct TableTail {
  TailFamily family = TailFamily::None;
  double param = 0.0;  // exponent (PowerLaw) or ratio in (0,1) (Geometric)
};

struct RatioBounds {
  double lo = 0.0;  // fitted K
  double hi = 0.0;  // fitted K'
};

struct TailCheckReport {
  double max_residual = 0.0;     // max |log R_n + (alpha-1) log n - C|
  double fitted_intercept = 0.0; // best-fit C
  double fitted_slope = 0.0;     // least-squares slope of log R vs log n
  double tolerance = 0.0;
  bool pass = false;
};

// Branch-length sequence {r_n} of the Markov partition, its tails and
// decay invariants, evaluated entirely in log space. Immutable after
// construction; safe for concurrent reads.
class Partition {
 public:
  enum class Kind { Gauss, PowerLaw, Table };

  // I(n) = [1/(n+1), 1/n]: r_n = 1/(n(n+1)), R_n = 1/n, alpha = 2.
  static Partition gauss(std::uint64_t table_bound = kDefaultTableBound);
  // r_n = n^-alpha / zeta(alpha), alpha > 1.
  static Partition power_law(double alpha,
                             std::uint64_t table_bound = kDefaultTableBound);
  static Partition from_table(std::vector<double> values, TableTail tail,
                              bool normalize = false);
  // "gauss" | "powerlaw:<alpha>" | "table:<path>"
  static Partition parse(std::string_view spec);
  static Partition load_table(const std::string& path);

  Kind kind() const { return kind_; }
  // Polynomial asymptotic of the decay; +inf for superpolynomial tails,
  // NaN when unknown (table without tail rule).
  double alpha() const { return alpha_; }
  std::uint64_t table_bound() const { return table_bound_; }
  RatioBounds ratio_bounds() const { return ratio_bounds_; }
  const std::string& spec_string() const { return spec_string_; }

  double log_r(const Digit& d) const;
  double log_tail_R(const Digit& d) const;
  // Fast index paths for series sweeps.
  double log_r_at(std::uint64_t n) const;
  double log_tail_R_at(std::uint64_t n) const;

  // sum of r_m over a_lo <= m <= a_hi (whole tail when a_hi absent),
  // in linear space; exact to summation accuracy, cancellation-safe.
  double mass_between(std::uint64_t a_lo,
                      std::optional<std::uint64_t> a_hi) const;

  double convergence_exponent() const;
  TailCheckReport tail_asymptotic_check(std::uint64_t n_lo,
                                        std::uint64_t n_hi) const;

  // Smallest digit d with log R(d) <= log_target.
  Digit invert_tail(double log_target) const;

 private:
  Partition() = default;
  void validate_table();
  double table_log_r_exact(std::uint64_t n) const;
  double table_tail_mass(std::uint64_t n) const;  // sum_{m>=n} r_m
  double tail_coef() const;

  Kind kind_ = Kind::Gauss;
  double alpha_ = 2.0;
  std::uint64_t table_bound_ = kDefaultTableBound;
  RatioBounds ratio_bounds_{};
  std::string spec_string_;

  // PowerLaw
  double norm_ = 1.0;  // 1/zeta(alpha)

  // Table
  std::vector<double> values_;
  std::vector<double> suffix_;  // suffix_[i] = sum_{m>i} values_[m-1] + tail mass
  TableTail tail_{};

  static constexpr std::uint64_t kDefaultTableBound = 10000000;
};

}  // namespace gibbsdim

#endif
