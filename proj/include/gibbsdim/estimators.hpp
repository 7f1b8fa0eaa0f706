#ifndef GIBBSDIM_ESTIMATORS_HPP
#define GIBBSDIM_ESTIMATORS_HPP

#include <cstdint>
#include <span>

#include "gibbsdim/digit.hpp"
#include "gibbsdim/logspace.hpp"
#include "gibbsdim/measure.hpp"
#include "gibbsdim/orbit.hpp"
#include "gibbsdim/partition.hpp"

namespace gibbsdim {

enum class EstimatorKind { Symbolic, LowerCover, NeighborUpper, CaseSplit };
enum class EstimateFlag { Ok, DegenerateWholeSpace, DigitOneSkipped, Case1, Case2 };

const char* estimator_kind_name(EstimatorKind k);
const char* estimate_flag_name(EstimateFlag f);

// One structured-cover dimension ratio at a given depth. log_measure
// and log_length are both strictly negative except for the degenerate
// whole-space case, which is flagged instead of returning 0/0.
struct CoverEstimate {
  std::uint64_t depth = 0;
  double log_measure = 0.0;
  double log_length = 0.0;
  double ratio = 0.0;
  EstimatorKind kind = EstimatorKind::Symbolic;
  EstimateFlag flag = EstimateFlag::Ok;
  std::uint64_t cover_anchor = 0;  // case split: first covered sibling index
};

// Step-level estimators shared by the orbit wrappers and the streaming
// batch runner.
CoverEstimate symbolic_at(const StepView& v);
CoverEstimate lower_cover_at(const StepView& v, const DigitMeasure& m,
                             const Partition& p);
CoverEstimate neighbor_upper_at(const StepView& v, const DigitMeasure& m,
                                const Partition& p);
CoverEstimate case_split_at(const StepView& v, const DigitMeasure& m,
                            const Partition& p, std::uint64_t k0);

// Orbit wrappers.
CoverEstimate symbolic_dimension(const Orbit& o, std::uint64_t n);
// Same ratio with the true Gauss-map cylinder length from the
// continuant recurrence; needs exact digits.
CoverEstimate symbolic_dimension_gauss(const Orbit& o, std::uint64_t n);
CoverEstimate lower_cover_ratio(const Orbit& o, std::uint64_t n);
CoverEstimate neighbor_upper_ratio(const Orbit& o, std::uint64_t n);
CoverEstimate case_split_upper(const Orbit& o, std::uint64_t n,
                               std::uint64_t k0);

struct IneqReport {
  std::uint64_t k0 = 0;
  double rhs = 0.0;
  double max_lhs = 0.0;  // over k in [k0, k_hi], n in [1, n_hi]
  std::uint64_t arg_k = 0;
  std::uint64_t arg_n = 0;
};

// Exhaustive scan for the least k0 in [k_lo, k_hi] such that
//   log sum_{m=k}^{n+k} p_m / log sum_{m=k-1}^{n+k+1} r_m
//     <= (1+delta)/(alpha-delta) + eta
// for all k >= k0 in range and all n in [1, n_hi]. Throws NoK0Found when
// no such k0 exists in the range.
IneqReport ineqsums_check(double alpha, double delta, double eta,
                          std::uint64_t k_lo, std::uint64_t k_hi,
                          std::uint64_t n_hi, const DigitMeasure& m,
                          const Partition& p);

struct BallBracket {
  double log_lo = kNegInf;  // mass proven inside the ball
  double log_hi = 0.0;      // log_lo plus unresolved boundary mass
  bool depth_capped = false;
};

// Two-sided bracket of mu(B(x, r)) for x the midpoint of the prefix
// cylinder, by recursive decomposition: each level covers a contiguous
// run of sibling cylinders plus at most two partial ones to recurse on.
// Prefix digits must be exact; depth_cap <= 40.
BallBracket ball_measure_bracket(std::span<const Digit> prefix,
                                 double log_radius, int depth_cap,
                                 const DigitMeasure& m, const Partition& p);

}  // namespace gibbsdim

#endif
