#include "gibbsdim/orbit.hpp"

#include <cmath>

#include "gibbsdim/errors.hpp"

namespace gibbsdim {

Orbit Orbit::generate(const DigitMeasure& measure, const Partition& part,
                      std::uint64_t length, std::uint64_t seed) {
  if (length < 1) fail(ErrorCode::InvalidArgument, "orbit length must be >= 1");
  Orbit o;
  o.measure_ = &measure;
  o.partition_ = &part;
  o.seed_ = seed;
  o.digits_.reserve(length);
  o.cum_log_p_.reserve(length);
  o.cum_log_r_.reserve(length);
  o.max_x_.reserve(length);
  o.argmax_.reserve(length);
  SplitMix64 rng(seed);
  DigitSampler sampler = measure.make_sampler();
  double clp = 0.0, clr = 0.0, maxx = 0.0;
  std::uint64_t argmax = 0;
  for (std::uint64_t n = 1; n <= length; ++n) {
    const Digit d = sampler.next(rng);
    clp += measure.log_p(d);
    const double lr = part.log_r(d);
    clr += lr;
    if (-lr > maxx) {
      maxx = -lr;
      argmax = n;
    }
    o.digits_.push_back(d);
    o.cum_log_p_.push_back(clp);
    o.cum_log_r_.push_back(clr);
    o.max_x_.push_back(maxx);
    o.argmax_.push_back(argmax);
  }
  return o;
}

StepView Orbit::step(std::uint64_t n) const {
  if (n < 1 || n > length())
    fail(ErrorCode::InvalidArgument, "step index out of range");
  StepView v;
  v.n = n;
  v.digit = digits_[n - 1];
  v.cum_log_p_prev = cum_log_p(n - 1);
  v.cum_log_r_prev = cum_log_r(n - 1);
  v.cum_log_p = cum_log_p(n);
  v.cum_log_r = cum_log_r(n);
  v.max_x_prev = max_x(n - 1);
  v.max_x = max_x(n);
  v.argmax = argmax(n);
  return v;
}

TrimmedSum Orbit::trimmed_sum(std::uint64_t n) const {
  if (n < 1 || n > length())
    fail(ErrorCode::InvalidArgument, "trimmed sum index out of range");
  TrimmedSum t;
  t.total = -cum_log_r(n);
  t.trimmed = t.total - max_x(n);
  t.argmax = argmax(n);
  return t;
}

double Orbit::blowup_ratio(std::uint64_t n) const {
  if (n < 2 || n > length())
    fail(ErrorCode::InvalidArgument, "blowup ratio needs 2 <= n <= length");
  return cum_log_r(n) / cum_log_r(n - 1);
}

Orbit Orbit::plant_excursion(std::uint64_t position, double log_value) const {
  if (position < 1 || position > length())
    fail(ErrorCode::InvalidArgument, "plant position out of range");
  Orbit out = *this;
  out.digits_[position - 1] = Digit::from_log(log_value);
  out.recompute_from(position);
  return out;
}

void Orbit::recompute_from(std::uint64_t position) {
  double clp = cum_log_p(position - 1);
  double clr = cum_log_r(position - 1);
  double maxx = max_x(position - 1);
  std::uint64_t arg = argmax(position - 1);
  for (std::uint64_t n = position; n <= length(); ++n) {
    const Digit& d = digits_[n - 1];
    clp += measure_->log_p(d);
    const double lr = partition_->log_r(d);
    clr += lr;
    if (-lr > maxx) {
      maxx = -lr;
      arg = n;
    }
    cum_log_p_[n - 1] = clp;
    cum_log_r_[n - 1] = clr;
    max_x_[n - 1] = maxx;
    argmax_[n - 1] = arg;
  }
}

FrequencyTable Orbit::digit_frequencies(std::uint64_t n,
                                        std::uint64_t k_cap) const {
  if (n < 1 || n > length())
    fail(ErrorCode::InvalidArgument, "frequency index out of range");
  FrequencyTable f;
  f.counts.assign(k_cap, 0);
  f.total = n;
  for (std::uint64_t i = 1; i <= n; ++i) {
    const Digit& d = digits_[i - 1];
    if (d.is_exact() && d.exact() <= k_cap)
      ++f.counts[d.exact() - 1];
    else
      ++f.overflow;
  }
  return f;
}

bool OrbitScan::next(StepView& out) {
  if (n_ >= length_) return false;
  ++n_;
  const Digit d = sampler_.next(rng_);
  out.n = n_;
  out.digit = d;
  out.cum_log_p_prev = clp_;
  out.cum_log_r_prev = clr_;
  out.max_x_prev = maxx_;
  clp_ += measure_->log_p(d);
  const double lr = partition_->log_r(d);
  clr_ += lr;
  if (-lr > maxx_) {
    maxx_ = -lr;
    argmax_ = n_;
  }
  out.cum_log_p = clp_;
  out.cum_log_r = clr_;
  out.max_x = maxx_;
  out.argmax = argmax_;
  return true;
}

}  // namespace gibbsdim
