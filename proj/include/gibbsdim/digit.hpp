#ifndef GIBBSDIM_DIGIT_HPP
#define GIBBSDIM_DIGIT_HPP

#include <cmath>
#include <cstdint>
#include <optional>

#include "gibbsdim/errors.hpp"

namespace gibbsdim {

// Branch index of the Markov partition. Digits drawn from heavy-tailed
// measures routinely exceed any machine integer, so beyond the exact
// range a digit is carried only through its natural log.
class Digit {
 public:
  Digit() : log_value_(0.0) {}  // digit 1

  static Digit from_index(std::uint64_t n) {
    if (n == 0) fail(ErrorCode::InvalidArgument, "digit indices start at 1");
    Digit d;
    d.exact_ = n;
    d.log_value_ = std::log(static_cast<double>(n));
    return d;
  }

  static Digit from_log(double log_value) {
    if (!(log_value >= 0.0))
      fail(ErrorCode::InvalidArgument, "digit log value must be >= 0");
    Digit d;
    d.log_value_ = log_value;
    return d;
  }

  bool is_exact() const { return exact_.has_value(); }
  std::uint64_t exact() const {
    if (!exact_)
      fail(ErrorCode::ExactDigitRequired, "digit is carried in log form only");
    return *exact_;
  }
  std::optional<std::uint64_t> exact_opt() const { return exact_; }
  double log_value() const { return log_value_; }

  // Left neighbor index (digit + 1); always exists.
  Digit succ() const {
    if (exact_) return from_index(*exact_ + 1);
    // log(a+1) = l + log1p(e^-l)
    return from_log(log_value_ + std::log1p(std::exp(-log_value_)));
  }

  // Right neighbor index (digit - 1); absent for digit 1.
  std::optional<Digit> pred() const {
    if (exact_) {
      if (*exact_ == 1) return std::nullopt;
      return from_index(*exact_ - 1);
    }
    // log-only digits are far above 1 by construction
    return from_log(log_value_ + std::log1p(-std::exp(-log_value_)));
  }

  bool operator==(const Digit& o) const {
    if (exact_ && o.exact_) return *exact_ == *o.exact_;
    return exact_.has_value() == o.exact_.has_value() &&
           log_value_ == o.log_value_;
  }

 private:
  std::optional<std::uint64_t> exact_;
  double log_value_;
};

}  // namespace gibbsdim

#endif
