#ifndef GIBBSDIM_LOGSPACE_HPP
#define GIBBSDIM_LOGSPACE_HPP

#include <cmath>
#include <limits>

// Log-space arithmetic helpers. All probabilities and lengths in this
// library live as natural logs; nothing below e^-700 is ever materialized.

namespace gibbsdim {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(e^a + e^b), safe when either operand is -inf.
inline double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

inline double log_sum_exp(double a, double b, double c) {
  return log_sum_exp(log_sum_exp(a, b), c);
}

// log(e^a - e^b); requires a >= b. Relative accuracy degrades when
// a ~ b, so callers with nearly-equal operands should subtract in
// linear space instead (see mass_between in the measure/partition types).
inline double log_diff_exp(double a, double b) {
  if (b == kNegInf) return a;
  if (b >= a) return kNegInf;
  return a + std::log1p(-std::exp(b - a));
}

// Compensated accumulator for long series sweeps.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - comp_;
    const double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace gibbsdim

#endif
