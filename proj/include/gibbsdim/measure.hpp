#ifndef GIBBSDIM_MEASURE_HPP
#define GIBBSDIM_MEASURE_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gibbsdim/digit.hpp"
#include "gibbsdim/partition.hpp"
#include "gibbsdim/rng.hpp"

namespace gibbsdim {

struct SeriesPoint {
  std::uint64_t n;
  double value;
};

// Partial-sum curves and ratio diagnostics of a digit distribution
// against a partition, recorded at checkpoint indices.
struct MeasureStats {
  std::vector<SeriesPoint> entropy_partials;
  std::vector<SeriesPoint> lyapunov_partials;
  std::vector<SeriesPoint> decay_pointwise;  // log p_N / log r_N
  std::vector<SeriesPoint> decay_cesaro;     // sum p log p / sum p log r
  std::vector<SeriesPoint> tail_ratio;       // log P_N / log R_N
  std::vector<SeriesPoint> criterion_partials;
};

struct VolumeLemmaResult {
  bool entropy_divergent = false;
  bool lyapunov_divergent = false;
  double entropy = 0.0;   // partial sums at the probe depth
  double lyapunov = 0.0;
  double dimension = 0.0; // h/lambda, meaningful when entropy converges
};

struct PolyLowerBound {
  bool ok = false;
  double log_coef = 0.0;  // log of the largest C with p_n >= C / n^(1+delta)
  std::string reason;
};

struct GibbsBounds {
  double lo = 1.0;
  double hi = 1.0;
};

class DigitMeasure;

// Stateful digit-process sampler; one per orbit. For Bernoulli measures
// draws are independent, for Markov1 the next row depends on the
// previous digit's class.
class DigitSampler {
 public:
  explicit DigitSampler(const DigitMeasure& m) : m_(&m) {}
  Digit next(SplitMix64& rng);

 private:
  const DigitMeasure* m_;
  int prev_class_ = -1;
};

// Digit distribution {p_n} with analytic tails, exact log-space
// evaluation, heavy-tail sampling, and the scalar series functionals
// (entropy / Lyapunov partial sums, decay ratios, trimmed-sum
// criterion, finite-entropy dimension oracle).
//
// Immutable after construction; the sampling CDF cache is internally
// synchronized, so concurrent use from orbit workers is safe.
class DigitMeasure {
 public:
  enum class Kind { Geometric, LogSquare, Zeta, Table, Markov1 };

  // p_n = (1-q) q^(n-1)
  static DigitMeasure geometric(double q);
  // p_n = c / ((n+1) ln^2(n+1)); infinite entropy, decay ratio 1/2 on
  // the Gauss partition
  static DigitMeasure log_square(std::uint64_t table_bound = kDefaultTableBound);
  // p_n = n^-beta / zeta(beta)
  static DigitMeasure zeta(double beta,
                           std::uint64_t table_bound = kDefaultTableBound);
  static DigitMeasure from_table(std::vector<double> values, TableTail tail,
                                 bool normalize = false);
  // Memory-1 digit chain: transition rows are bounded tilts of the base
  // measure, boosting or damping the next digit-1 probability depending
  // on whether the current digit is 1. Stationary by construction.
  static DigitMeasure markov1(const DigitMeasure& base, double theta_after_one,
                              double theta_after_big);
  // "geometric:<q>" | "logsquare" | "zeta:<beta>" | "table:<path>"
  static DigitMeasure parse(std::string_view spec);
  static DigitMeasure load_table(const std::string& path);

  Kind kind() const { return kind_; }
  std::uint64_t table_bound() const { return table_bound_; }
  GibbsBounds gibbs_bounds() const { return gibbs_; }
  RatioBounds ratio_bounds() const { return ratio_bounds_; }
  std::uint64_t monotone_from() const { return monotone_from_; }
  const std::string& spec_string() const { return spec_string_; }

  // Stationary marginal digit law (the Bernoulli law itself for
  // Bernoulli kinds).
  double log_p(const Digit& d) const;
  double log_tail_P(const Digit& d) const;
  // Fast index paths for series sweeps.
  double log_p_at(std::uint64_t n) const { return log_p_exact(n); }
  double log_tail_P_at(std::uint64_t n) const;
  double mass_between(std::uint64_t a_lo,
                      std::optional<std::uint64_t> a_hi) const;

  // One marginal draw by inverse CDF: table search below the table
  // bound, analytic tail inversion beyond (returns a log-only digit).
  Digit sample_digit(SplitMix64& rng) const;
  // Least digit with CDF(d) >= u; Bernoulli kinds only.
  Digit quantile(double u) const;
  DigitSampler make_sampler() const { return DigitSampler(*this); }

  double cylinder_log_measure(std::span<const Digit> digits) const;
  // log mu( union of I(prefix, a) for a_start <= a <= a_end ), whole
  // tail union when a_end is absent.
  double union_log_measure(std::span<const Digit> prefix, const Digit& a_start,
                           const std::optional<Digit>& a_end) const;

  double entropy_partial(std::uint64_t N) const;
  double lyapunov_partial(const Partition& part, std::uint64_t N) const;
  double trimmed_criterion_partial(const Partition& part,
                                   std::uint64_t N) const;
  MeasureStats series_stats(const Partition& part,
                            std::span<const std::uint64_t> checkpoints) const;
  VolumeLemmaResult volume_lemma_dim(const Partition& part,
                                     std::uint64_t probe_depth = 1000000) const;
  PolyLowerBound polynomial_lower_bound_check(double delta, std::uint64_t n_lo,
                                              std::uint64_t n_hi) const;

  // Gibbs-sandwich diagnostic for Markov1: log mu(C(word)) minus the
  // Birkhoff weight of the transition potential along the word closed
  // up periodically. Identically 0 for Bernoulli.
  double gibbs_log_ratio(std::span<const Digit> word) const;

 private:
  friend class DigitSampler;
  struct CdfCache;

  DigitMeasure() = default;
  double log_p_exact(std::uint64_t n) const;
  double tail_mass(std::uint64_t n) const;  // sum_{m>=n} p_m, linear
  double cdf(std::uint64_t n) const;
  Digit invert_cdf(double u) const;
  Digit sample_row(int cls, SplitMix64& rng) const;
  double row_log_p(int cls, const Digit& d) const;
  int digit_class(const Digit& d) const { return d.is_exact() && d.exact() == 1 ? 0 : 1; }
  void fit_marginal_bounds();

  Kind kind_ = Kind::Geometric;
  std::uint64_t table_bound_ = kDefaultTableBound;
  std::string spec_string_;
  GibbsBounds gibbs_{};
  RatioBounds ratio_bounds_{};
  std::uint64_t monotone_from_ = 1;

  // Geometric
  double q_ = 0.5;

  // LogSquare / Zeta
  double norm_ = 1.0;   // c
  double beta_ = 0.0;   // zeta exponent
  double tail_threshold_ = 1.0;  // sampler crossover: P(digit <= table bound)

  // Table
  std::vector<double> values_;
  std::vector<double> prefix_;   // prefix_[i] = sum of first i values
  std::vector<double> suffix_;
  TableTail tail_{};

  // Markov1
  std::shared_ptr<const DigitMeasure> base_;
  double theta_[2] = {0.0, 0.0};  // row tilt after digit 1 / after digit >= 2
  double row_norm_[2] = {1.0, 1.0};
  double class_weight_[2] = {0.0, 0.0};
  double marginal_scale_ = 1.0;   // marginal(a)/base(a) for a >= 2
  double marginal_p1_ = 0.0;

  mutable std::shared_ptr<CdfCache> cdf_cache_;

  static constexpr std::uint64_t kDefaultTableBound = 10000000;
};

}  // namespace gibbsdim

#endif
