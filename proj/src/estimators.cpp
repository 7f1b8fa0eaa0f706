#include "gibbsdim/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gibbsdim/errors.hpp"
#include "gibbsdim/logspace.hpp"
#include "gibbsdim/maps.hpp"

namespace gibbsdim {

namespace {

constexpr double kDegenerateEps = 1e-9;

double safe_ratio(double log_measure, double log_length) {
  const double r = log_measure / log_length;
  return r + 0.0;  // normalize -0
}

}  // namespace

const char* estimator_kind_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::Symbolic: return "symbolic";
    case EstimatorKind::LowerCover: return "lower_cover";
    case EstimatorKind::NeighborUpper: return "neighbor_upper";
    case EstimatorKind::CaseSplit: return "case_split";
  }
  return "?";
}

const char* estimate_flag_name(EstimateFlag f) {
  switch (f) {
    case EstimateFlag::Ok: return "ok";
    case EstimateFlag::DegenerateWholeSpace: return "degenerate_whole_space";
    case EstimateFlag::DigitOneSkipped: return "digit_one_skipped";
    case EstimateFlag::Case1: return "case1";
    case EstimateFlag::Case2: return "case2";
  }
  return "?";
}

CoverEstimate symbolic_at(const StepView& v) {
  CoverEstimate e;
  e.depth = v.n;
  e.kind = EstimatorKind::Symbolic;
  e.log_measure = v.cum_log_p;
  e.log_length = v.cum_log_r;
  e.ratio = safe_ratio(e.log_measure, e.log_length);
  return e;
}

CoverEstimate lower_cover_at(const StepView& v, const DigitMeasure& m,
                             const Partition& p) {
  CoverEstimate e;
  e.depth = v.n;
  e.kind = EstimatorKind::LowerCover;
  e.log_measure = v.cum_log_p_prev + m.log_tail_P(v.digit);
  e.log_length = v.cum_log_r_prev + p.log_tail_R(v.digit);
  if (std::fabs(e.log_measure) < kDegenerateEps &&
      std::fabs(e.log_length) < kDegenerateEps) {
    e.flag = EstimateFlag::DegenerateWholeSpace;
    e.ratio = std::numeric_limits<double>::quiet_NaN();
    return e;
  }
  e.ratio = safe_ratio(e.log_measure, e.log_length);
  return e;
}

CoverEstimate neighbor_upper_at(const StepView& v, const DigitMeasure& m,
                                const Partition& p) {
  CoverEstimate e;
  e.depth = v.n;
  e.kind = EstimatorKind::NeighborUpper;
  const auto right = v.digit.pred();
  if (!right) {
    e.flag = EstimateFlag::DigitOneSkipped;
    e.ratio = std::numeric_limits<double>::quiet_NaN();
    return e;
  }
  const Digit left = v.digit.succ();
  // mu(B) <= mu(hat I_n) and the radius is the left-neighbor length
  e.log_measure = v.cum_log_p_prev +
                  log_sum_exp(m.log_p(*right), m.log_p(v.digit), m.log_p(left));
  e.log_length = v.cum_log_r_prev + p.log_r(left);
  e.ratio = safe_ratio(e.log_measure, e.log_length);
  return e;
}

CoverEstimate case_split_at(const StepView& v, const DigitMeasure& m,
                            const Partition& p, std::uint64_t k0) {
  if (v.n < 2)
    fail(ErrorCode::InvalidArgument, "case split needs depth >= 2");
  if (k0 < 1) fail(ErrorCode::InvalidArgument, "case split needs k0 >= 1");
  CoverEstimate e;
  e.depth = v.n;
  e.kind = EstimatorKind::CaseSplit;

  // Ball proxy radius R(a_n) relative to the parent cylinder. Any
  // position of x inside its child guarantees coverage of every sibling
  // j with R(j) <= R(a_n) + R(a_n + 1); j_cov is the first of them.
  const double log_cover = log_sum_exp(p.log_tail_R(v.digit),
                                       p.log_tail_R(v.digit.succ()));
  const Digit j_cov = p.invert_tail(log_cover);
  e.cover_anchor = j_cov.is_exact() ? j_cov.exact() : 0;

  if (j_cov.is_exact() && j_cov.exact() <= k0) {
    // the k0 sibling is covered: bound by its mass over the parent scale
    e.flag = EstimateFlag::Case1;
    e.log_measure = v.cum_log_p_prev + m.log_p_at(k0);
    e.log_length = v.cum_log_r_prev;
  } else {
    // the ball reaches the accumulation side but not the k0 sibling;
    // everything from j_cov leftward lies inside
    e.flag = EstimateFlag::Case2;
    e.log_measure = v.cum_log_p_prev + m.log_tail_P(j_cov);
    e.log_length = v.cum_log_r_prev + p.log_tail_R(v.digit);
  }
  e.ratio = safe_ratio(e.log_measure, e.log_length);
  return e;
}

CoverEstimate symbolic_dimension(const Orbit& o, std::uint64_t n) {
  return symbolic_at(o.step(n));
}

CoverEstimate symbolic_dimension_gauss(const Orbit& o, std::uint64_t n) {
  if (n < 1 || n > o.length())
    fail(ErrorCode::InvalidArgument, "depth out of range");
  ContinuantState st;
  for (std::uint64_t k = 1; k <= n; ++k) {
    const Digit& d = o.digit(k);
    if (!d.is_exact())
      fail(ErrorCode::ExactDigitRequired,
           "gauss-map symbolic ratio needs exact digits");
    st.advance(d.log_value());
  }
  CoverEstimate e;
  e.depth = n;
  e.kind = EstimatorKind::Symbolic;
  e.log_measure = o.cum_log_p(n);
  e.log_length = st.log_cyl_length();
  e.ratio = safe_ratio(e.log_measure, e.log_length);
  return e;
}

CoverEstimate lower_cover_ratio(const Orbit& o, std::uint64_t n) {
  return lower_cover_at(o.step(n), o.measure(), o.partition());
}

CoverEstimate neighbor_upper_ratio(const Orbit& o, std::uint64_t n) {
  return neighbor_upper_at(o.step(n), o.measure(), o.partition());
}

CoverEstimate case_split_upper(const Orbit& o, std::uint64_t n,
                               std::uint64_t k0) {
  return case_split_at(o.step(n), o.measure(), o.partition(), k0);
}

IneqReport ineqsums_check(double alpha, double delta, double eta,
                          std::uint64_t k_lo, std::uint64_t k_hi,
                          std::uint64_t n_hi, const DigitMeasure& m,
                          const Partition& p) {
  if (!(alpha > 1.0)) fail(ErrorCode::InvalidArgument, "needs alpha > 1");
  const double delta_cap = std::min(1.0 / 3.0, (alpha - 1.0) / (alpha + 1.0));
  if (!(delta > 0.0 && delta < delta_cap))
    fail(ErrorCode::InvalidArgument,
         "delta must lie in (0, min{1/3, (alpha-1)/(alpha+1)})");
  if (!(eta > 0.0 && eta < 0.5))
    fail(ErrorCode::InvalidArgument, "eta must lie in (0, 1/2)");
  if (k_lo < 2 || k_hi < k_lo || n_hi < 1)
    fail(ErrorCode::InvalidArgument, "bad scan ranges");

  const double rhs = (1.0 + delta) / (alpha - delta) + eta;
  const std::uint64_t top = k_hi + n_hi + 2;
  std::vector<double> pp(top + 1, 0.0), rp(top + 1, 0.0);
  {
    KahanSum ap, ar;
    for (std::uint64_t i = 1; i <= top; ++i) {
      ap.add(std::exp(m.log_p_at(i)));
      ar.add(std::exp(p.log_r_at(i)));
      pp[i] = ap.value();
      rp[i] = ar.value();
    }
  }

  std::uint64_t last_bad = k_lo - 1;
  for (std::uint64_t k = k_lo; k <= k_hi; ++k) {
    for (std::uint64_t n = 1; n <= n_hi; ++n) {
      const double lhs = std::log(pp[n + k] - pp[k - 1]) /
                         std::log(rp[n + k + 1] - rp[k - 2]);
      if (lhs > rhs) {
        last_bad = k;
        break;
      }
    }
  }
  if (last_bad >= k_hi)
    fail(ErrorCode::NoK0Found,
         "no k0 in range: the bound still fails at k = " +
             std::to_string(last_bad));
  IneqReport rep;
  rep.k0 = last_bad + 1;
  rep.rhs = rhs;
  rep.max_lhs = -std::numeric_limits<double>::infinity();
  for (std::uint64_t k = rep.k0; k <= k_hi; ++k) {
    for (std::uint64_t n = 1; n <= n_hi; ++n) {
      const double lhs = std::log(pp[n + k] - pp[k - 1]) /
                         std::log(rp[n + k + 1] - rp[k - 2]);
      if (lhs > rep.max_lhs) {
        rep.max_lhs = lhs;
        rep.arg_k = k;
        rep.arg_n = n;
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// ball bracket

namespace {

struct BracketAcc {
  double lo = kNegInf;       // log mass proven inside
  double boundary = kNegInf; // log unresolved boundary mass
  bool capped = false;
};

struct BallGeometry {
  double bl, br;  // absolute ball edges, clamped to [0,1]
  const DigitMeasure* m;
  const Partition* p;
  int depth_cap;
};

// cyl: absolute [left, left+len] at log-measure log_mu; straddles a
// ball edge (or is the root).
void bracket_recurse(const BallGeometry& g, double left, double len,
                     double log_mu, int depth, BracketAcc* acc) {
  const double u = std::min(1.0, (g.br - left) / len);
  const double v = std::max(0.0, (g.bl - left) / len);
  if (u <= 0.0 || v >= 1.0) return;  // no overlap

  // digits fully inside the window [v, u]: R(m) <= u and R(m+1) >= v
  Digit m_lo_d = g.p->invert_tail(std::log(u));
  if (!m_lo_d.is_exact()) {
    // window sits beyond the exact digit range; leave it unresolved
    acc->boundary = log_sum_exp(acc->boundary, log_mu);
    acc->capped = true;
    return;
  }
  const std::uint64_t m_lo = m_lo_d.exact();

  const bool unbounded = v <= 0.0;  // window reaches the accumulation side
  std::uint64_t m_hi = 0;
  std::uint64_t v_straddle = 0;  // first candidate at the v edge
  if (!unbounded) {
    Digit j = g.p->invert_tail(std::log(v));
    if (!j.is_exact()) {
      acc->boundary = log_sum_exp(acc->boundary, log_mu);
      acc->capped = true;
      return;
    }
    // smallest j with R(j) <= v; children j-1 and j may straddle the
    // edge, everything with m+1 <= j-1 is safely inside on that side
    m_hi = j.exact() >= 2 ? j.exact() - 2 : 0;
    v_straddle = j.exact() >= 2 ? j.exact() - 1 : 1;
  }

  const bool have_run = unbounded || (m_hi >= m_lo);
  if (have_run) {
    const double run = unbounded ? g.m->log_tail_P_at(m_lo)
                                 : std::log(g.m->mass_between(m_lo, m_hi));
    if (run > kNegInf) acc->lo = log_sum_exp(acc->lo, log_mu + run);
  }
  auto in_run = [&](std::uint64_t d) {
    return have_run && d >= m_lo && (unbounded || d <= m_hi);
  };

  auto handle_boundary = [&](std::uint64_t digit) {
    if (digit < 1 || in_run(digit)) return;
    const double child_R = std::exp(g.p->log_tail_R_at(digit));
    const double child_R1 = std::exp(g.p->log_tail_R_at(digit + 1));
    if (child_R1 >= u || child_R <= v) return;  // outside the window
    if (depth >= g.depth_cap) {
      acc->boundary = log_sum_exp(acc->boundary, log_mu + g.m->log_p_at(digit));
      acc->capped = true;
      return;
    }
    bracket_recurse(g, left + len * child_R1, len * (child_R - child_R1),
                    log_mu + g.m->log_p_at(digit), depth + 1, acc);
  };

  std::uint64_t cands[3] = {m_lo > 1 ? m_lo - 1 : 0, v_straddle,
                            v_straddle != 0 ? v_straddle + 1 : 0};
  for (int i = 0; i < 3; ++i) {
    bool dup = false;
    for (int j = 0; j < i; ++j) dup = dup || cands[j] == cands[i];
    if (!dup) handle_boundary(cands[i]);
  }
}

}  // namespace

BallBracket ball_measure_bracket(std::span<const Digit> prefix,
                                 double log_radius, int depth_cap,
                                 const DigitMeasure& m, const Partition& p) {
  if (depth_cap < 0 || depth_cap > 40)
    fail(ErrorCode::InvalidArgument, "depth cap must be in [0, 40]");
  for (const Digit& d : prefix) {
    if (!d.is_exact() || d.exact() > p.table_bound())
      fail(ErrorCode::ExactDigitRequired,
           "ball bracket needs exact in-range prefix digits");
  }
  BallBracket out;
  if (log_radius >= 0.0) {  // radius >= 1 covers the whole space
    out.log_lo = 0.0;
    out.log_hi = 0.0;
    return out;
  }

  // absolute geometry of the prefix cylinder, then its midpoint
  double left = 0.0, len = 1.0;
  for (const Digit& d : prefix) {
    const double R1 = std::exp(p.log_tail_R_at(d.exact() + 1));
    const double R0 = std::exp(p.log_tail_R_at(d.exact()));
    left += len * R1;
    len *= R0 - R1;
  }
  const double x = left + 0.5 * len;
  const double radius = std::exp(log_radius);

  BallGeometry g;
  g.bl = std::max(0.0, x - radius);
  g.br = std::min(1.0, x + radius);
  g.m = &m;
  g.p = &p;
  g.depth_cap = depth_cap;
  if (g.bl <= 0.0 && g.br >= 1.0) {
    out.log_lo = 0.0;
    out.log_hi = 0.0;
    return out;
  }

  BracketAcc acc;
  bracket_recurse(g, 0.0, 1.0, 0.0, 0, &acc);
  out.log_lo = acc.lo;
  out.log_hi = log_sum_exp(acc.lo, acc.boundary);
  out.depth_capped = acc.capped;
  return out;
}

}  // namespace gibbsdim
