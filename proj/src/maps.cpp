#include "gibbsdim/maps.hpp"

#include <cmath>

#include "gibbsdim/errors.hpp"
#include "gibbsdim/logspace.hpp"

namespace gibbsdim {

void ContinuantState::advance(double log_digit) {
  if (depth >= kDepthCap)
    fail(ErrorCode::InvalidArgument, "continuant depth cap exceeded");
  const double next =
      log_digit + log_q_curr +
      std::log1p(std::exp(log_q_prev - log_digit - log_q_curr));
  log_q_prev = log_q_curr;
  log_q_curr = next;
  ++depth;
}

double ContinuantState::log_cyl_length() const {
  if (depth == 0)
    fail(ErrorCode::InvalidArgument, "empty continuant state");
  // 1 / (q_n (q_n + q_{n-1}))
  return -2.0 * log_q_curr -
         std::log1p(std::exp(log_q_prev - log_q_curr));
}

double cyl_log_length(const MapModel& model, std::span<const Digit> digits) {
  if (digits.empty())
    fail(ErrorCode::InvalidArgument, "cylinder needs at least one digit");
  switch (model.kind) {
    case MapModel::Kind::PiecewiseLinear: {
      double out = 0.0;
      for (const Digit& d : digits) out += model.partition->log_r(d);
      return out;
    }
    case MapModel::Kind::GaussMap: {
      ContinuantState st;
      for (const Digit& d : digits) {
        if (!d.is_exact() && !model.allow_log_digits)
          fail(ErrorCode::ExactDigitRequired,
               "gauss-map geometry needs exact digits");
        st.advance(d.log_value());
      }
      return st.log_cyl_length();
    }
  }
  return 0.0;
}

double union_log_length(const MapModel& model, std::span<const Digit> prefix,
                        const Digit& a_start,
                        const std::optional<Digit>& a_end) {
  if (model.kind != MapModel::Kind::PiecewiseLinear)
    fail(ErrorCode::InvalidArgument,
         "union lengths are exact only for the piecewise-linear model");
  const Partition& part = *model.partition;
  if (a_end) {
    const bool both_exact = a_start.is_exact() && a_end->is_exact();
    if (both_exact ? a_end->exact() < a_start.exact()
                   : a_end->log_value() < a_start.log_value())
      fail(ErrorCode::InvalidRange, "union needs a_end >= a_start");
  }
  double out = 0.0;
  for (const Digit& d : prefix) out += part.log_r(d);
  if (a_start.is_exact() && (!a_end || a_end->is_exact())) {
    out += std::log(part.mass_between(
        a_start.exact(),
        a_end ? std::optional<std::uint64_t>(a_end->exact()) : std::nullopt));
  } else if (!a_end) {
    out += part.log_tail_R(a_start);
  } else {
    out += log_diff_exp(part.log_tail_R(a_start),
                        part.log_tail_R(a_end->succ()));
  }
  return out;
}

NeighborCylinders neighbor_cylinders(std::span<const Digit> prefix) {
  if (prefix.empty())
    fail(ErrorCode::InvalidArgument, "neighbors need a non-empty prefix");
  NeighborCylinders out;
  out.left.assign(prefix.begin(), prefix.end());
  out.left.back() = prefix.back().succ();
  if (auto p = prefix.back().pred()) {
    out.right.emplace(prefix.begin(), prefix.end());
    out.right->back() = *p;
  }
  return out;
}

double distortion_residual(const Partition& gauss_partition,
                           std::span<const Digit> digits) {
  if (gauss_partition.kind() != Partition::Kind::Gauss)
    fail(ErrorCode::InvalidArgument,
         "distortion residual is defined against the gauss partition");
  if (digits.empty() || digits.size() > 1000)
    fail(ErrorCode::InvalidArgument, "distortion depth must be in [1, 1000]");
  for (const Digit& d : digits)
    if (!d.is_exact())
      fail(ErrorCode::ExactDigitRequired,
           "distortion residual needs exact digits");
  const double exact = cyl_log_length(MapModel::gauss_map(), digits);
  const double linear =
      cyl_log_length(MapModel::piecewise_linear(gauss_partition), digits);
  return std::fabs(exact - linear);
}

}  // namespace gibbsdim
