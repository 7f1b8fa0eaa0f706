#include "gibbsdim/measure.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "gibbsdim/errors.hpp"
#include "gibbsdim/logspace.hpp"
#include "gibbsdim/series.hpp"
#include "table_io.hpp"

namespace gibbsdim {

namespace {

constexpr double kMassTol = 1e-9;
constexpr std::uint64_t kDirectSumCap = 4096;
// series is declared divergent when the last decade still adds this much
constexpr double kDivergenceAbsTol = 1e-6;
constexpr double kDivergenceRelTol = 1e-4;
constexpr double kPolyBoundFloor = 1e-12;

// evaluation in the real digit value a = e^l; exact down to l = 0 and
// saturating gracefully above the exp() range
constexpr double kExpArgCap = 700.0;

// normalizers of the log-square family, one sweep per table bound
double logsquare_norm(std::uint64_t table_bound) {
  static std::mutex mu;
  static std::map<std::uint64_t, double> cache;
  std::lock_guard lk(mu);
  auto it = cache.find(table_bound);
  if (it != cache.end()) return it->second;
  KahanSum w;
  for (std::uint64_t n = 1; n <= table_bound; ++n)
    w.add(logsquare_weight(static_cast<double>(n)));
  const double tail = logsquare_tail_unnorm(table_bound + 1);
  // bracket the analytic tail between the raw integral bounds
  const double k0 = static_cast<double>(table_bound) + 2.0;
  const double integral = 1.0 / std::log(k0);
  const double first_term = 1.0 / (k0 * std::log(k0) * std::log(k0));
  if (tail < integral || tail > integral + first_term)
    fail(ErrorCode::Internal, "log-square tail bracket violated");
  const double c = 1.0 / (w.value() + tail);
  cache[table_bound] = c;
  return c;
}

// log(a+1) and log(log(a+1)) for a digit carried as l = log a
double log_a_plus_1(double l) { return l + std::log1p(std::exp(-l)); }

}  // namespace

struct DigitMeasure::CdfCache {
  std::mutex mu;
  std::vector<double> cum;  // cum[i] = sum_{n<=i} p_n
  double comp = 0.0;        // Kahan carry of the fill sweep
  std::atomic<std::size_t> filled{0};
};

// ---------------------------------------------------------------------------
// constructors

DigitMeasure DigitMeasure::geometric(double q) {
  if (!(q > 0.0 && q < 1.0))
    fail(ErrorCode::InvalidArgument, "geometric ratio must be in (0,1)");
  DigitMeasure m;
  m.kind_ = Kind::Geometric;
  m.q_ = q;
  {
    std::ostringstream os;
    os << "geometric:" << q;
    m.spec_string_ = os.str();
  }
  m.ratio_bounds_ = {q, q};
  m.tail_threshold_ = 1.0;
  return m;
}

DigitMeasure DigitMeasure::log_square(std::uint64_t table_bound) {
  DigitMeasure m;
  m.kind_ = Kind::LogSquare;
  m.table_bound_ = table_bound;
  m.norm_ = logsquare_norm(table_bound);
  m.spec_string_ = "logsquare";
  m.tail_threshold_ =
      1.0 - m.norm_ * logsquare_tail_unnorm(table_bound + 1);
  m.cdf_cache_ = std::make_shared<CdfCache>();
  m.cdf_cache_->cum.reserve(table_bound + 1);
  m.fit_marginal_bounds();
  return m;
}

DigitMeasure DigitMeasure::zeta(double beta, std::uint64_t table_bound) {
  if (!(beta > 1.0))
    fail(ErrorCode::InvalidArgument, "zeta measure needs beta > 1");
  DigitMeasure m;
  m.kind_ = Kind::Zeta;
  m.table_bound_ = table_bound;
  m.beta_ = beta;
  m.norm_ = 1.0 / zeta_value(beta);
  {
    std::ostringstream os;
    os << "zeta:" << beta;
    m.spec_string_ = os.str();
  }
  m.tail_threshold_ = 1.0 - m.norm_ * zeta_tail(beta, table_bound + 1);
  m.cdf_cache_ = std::make_shared<CdfCache>();
  m.cdf_cache_->cum.reserve(table_bound + 1);
  m.fit_marginal_bounds();
  return m;
}

DigitMeasure DigitMeasure::from_table(std::vector<double> values,
                                      TableTail tail, bool normalize) {
  if (values.empty())
    fail(ErrorCode::InvalidArgument, "measure table must be non-empty");
  DigitMeasure m;
  m.kind_ = Kind::Table;
  m.values_ = std::move(values);
  m.tail_ = tail;
  m.table_bound_ = m.values_.size();
  {
    std::ostringstream os;
    os << "table:<inline:" << m.values_.size() << ">";
    m.spec_string_ = os.str();
  }

  auto rebuild = [&m]() {
    const std::size_t n = m.values_.size();
    for (double v : m.values_)
      if (!(v >= 0.0))
        fail(ErrorCode::InvalidArgument, "measure table values must be >= 0");
    double tail_mass = 0.0;
    switch (m.tail_.family) {
      case TailFamily::None:
        break;
      case TailFamily::PowerLaw: {
        if (!(m.tail_.param > 1.0))
          fail(ErrorCode::InvalidArgument, "powerlaw tail needs exponent > 1");
        const double coef =
            m.values_.back() * std::pow(static_cast<double>(n), m.tail_.param);
        tail_mass = coef * zeta_tail(m.tail_.param, n + 1);
        break;
      }
      case TailFamily::Geometric:
        if (!(m.tail_.param > 0.0 && m.tail_.param < 1.0))
          fail(ErrorCode::InvalidArgument, "geometric tail ratio in (0,1)");
        tail_mass = m.values_.back() * m.tail_.param / (1.0 - m.tail_.param);
        break;
    }
    m.prefix_.assign(n + 1, 0.0);
    KahanSum acc;
    for (std::size_t i = 0; i < n; ++i) {
      acc.add(m.values_[i]);
      m.prefix_[i + 1] = acc.value();
    }
    m.suffix_.assign(n + 1, 0.0);
    m.suffix_[n] = tail_mass;
    for (std::size_t i = n; i-- > 0;)
      m.suffix_[i] = m.suffix_[i + 1] + m.values_[i];
    m.tail_threshold_ = 1.0 - tail_mass;
  };
  rebuild();
  if (normalize) {
    const double total = m.suffix_[0];
    for (double& v : m.values_) v /= total;
    rebuild();
  }
  if (std::fabs(m.suffix_[0] - 1.0) > kMassTol)
    fail(ErrorCode::InvalidArgument,
         "measure table plus tail does not sum to 1");
  m.fit_marginal_bounds();
  return m;
}

DigitMeasure DigitMeasure::markov1(const DigitMeasure& base,
                                   double theta_after_one,
                                   double theta_after_big) {
  if (base.kind_ == Kind::Markov1)
    fail(ErrorCode::InvalidArgument, "markov1 base must be Bernoulli");
  const double p1 = std::exp(base.log_p_exact(1));
  DigitMeasure m;
  m.kind_ = Kind::Markov1;
  m.table_bound_ = base.table_bound_;
  m.base_ = std::make_shared<const DigitMeasure>(base);
  m.theta_[0] = theta_after_one;
  m.theta_[1] = theta_after_big;
  for (int c = 0; c < 2; ++c) {
    if (!(1.0 + m.theta_[c] > 0.0))
      fail(ErrorCode::InvalidArgument, "markov1 tilt must keep rows positive");
    m.row_norm_[c] = 1.0 + m.theta_[c] * p1;
  }
  // stationary weights of the 2-state class chain (digit 1 vs digit >= 2)
  const double m0 = p1 * (1.0 + m.theta_[0]) / m.row_norm_[0];
  const double m1 = p1 * (1.0 + m.theta_[1]) / m.row_norm_[1];
  m.class_weight_[0] = m1 / (1.0 - m0 + m1);
  m.class_weight_[1] = 1.0 - m.class_weight_[0];
  m.marginal_scale_ = m.class_weight_[0] / m.row_norm_[0] +
                      m.class_weight_[1] / m.row_norm_[1];
  m.marginal_p1_ =
      m.class_weight_[0] * p1 * (1.0 + m.theta_[0]) / m.row_norm_[0] +
      m.class_weight_[1] * p1 * (1.0 + m.theta_[1]) / m.row_norm_[1];
  {
    std::ostringstream os;
    os << "markov1(" << base.spec_string_ << ";" << theta_after_one << ","
       << theta_after_big << ")";
    m.spec_string_ = os.str();
  }
  // Gibbs constants: extremes of marginal(a) / row_c(a) over the four
  // (class, digit-case) cells
  double lo = 1e300, hi = -1e300;
  for (int c = 0; c < 2; ++c) {
    const double at1 = m.marginal_p1_ * m.row_norm_[c] /
                       (p1 * (1.0 + m.theta_[c]));
    const double big = m.marginal_scale_ * m.row_norm_[c];
    lo = std::min({lo, at1, big});
    hi = std::max({hi, at1, big});
  }
  m.gibbs_ = {lo, hi};
  m.fit_marginal_bounds();
  return m;
}

void DigitMeasure::fit_marginal_bounds() {
  const std::uint64_t scan =
      std::min<std::uint64_t>(table_bound_, kind_ == Kind::Table
                                                ? values_.size()
                                                : 4096);
  double lo = 1e300, hi = 0.0;
  monotone_from_ = 1;
  double prev = std::exp(log_p_exact(1));
  for (std::uint64_t n = 2; n <= scan; ++n) {
    const double cur = std::exp(log_p_exact(n));
    if (prev > 0.0 && cur > 0.0) {
      const double ratio = cur / prev;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      if (cur > prev * (1.0 + 1e-12)) monotone_from_ = n;
    }
    prev = cur;
  }
  if (hi > 0.0) ratio_bounds_ = {lo, hi};
}

// ---------------------------------------------------------------------------
// pointwise evaluation

double DigitMeasure::log_p_exact(std::uint64_t n) const {
  const auto x = static_cast<double>(n);
  switch (kind_) {
    case Kind::Geometric:
      return std::log1p(-q_) + (x - 1.0) * std::log(q_);
    case Kind::LogSquare: {
      const double l1 = std::log(x + 1.0);
      return std::log(norm_) - std::log(x + 1.0) - 2.0 * std::log(l1);
    }
    case Kind::Zeta:
      return std::log(norm_) - beta_ * std::log(x);
    case Kind::Table:
      if (n <= values_.size()) return std::log(values_[n - 1]);
      switch (tail_.family) {
        case TailFamily::PowerLaw:
          return std::log(values_.back()) +
                 tail_.param * (std::log(static_cast<double>(values_.size())) -
                                std::log(x));
        case TailFamily::Geometric:
          return std::log(values_.back()) +
                 (x - static_cast<double>(values_.size())) *
                     std::log(tail_.param);
        case TailFamily::None:
          return kNegInf;  // finitely supported: no mass past the table
      }
      return 0.0;
    case Kind::Markov1:
      if (n == 1) return std::log(marginal_p1_);
      return std::log(marginal_scale_) + base_->log_p_exact(n);
  }
  return 0.0;
}

double DigitMeasure::log_p(const Digit& d) const {
  if (d.is_exact()) return log_p_exact(d.exact());
  const double l = d.log_value();
  switch (kind_) {
    case Kind::Geometric: {
      // (a-1) log q with a = e^l
      const double am1 = std::expm1(std::min(l, kExpArgCap));
      return std::log1p(-q_) + am1 * std::log(q_);
    }
    case Kind::LogSquare: {
      const double l1 = log_a_plus_1(l);
      return std::log(norm_) - l1 - 2.0 * std::log(l1);
    }
    case Kind::Zeta:
      return std::log(norm_) - beta_ * l;
    case Kind::Table:
      switch (tail_.family) {
        case TailFamily::PowerLaw:
          return std::log(values_.back()) +
                 tail_.param *
                     (std::log(static_cast<double>(values_.size())) - l);
        case TailFamily::Geometric: {
          const double a = std::exp(std::min(l, kExpArgCap));
          return std::log(values_.back()) +
                 (a - static_cast<double>(values_.size())) *
                     std::log(tail_.param);
        }
        case TailFamily::None:
          fail(ErrorCode::UnsupportedTailQuery,
               "measure table has no tail rule for log-only digits");
      }
      return 0.0;
    case Kind::Markov1:
      return std::log(marginal_scale_) + base_->log_p(d);
  }
  return 0.0;
}

double DigitMeasure::tail_mass(std::uint64_t n) const {
  switch (kind_) {
    case Kind::Geometric:
      return std::exp((static_cast<double>(n) - 1.0) * std::log(q_));
    case Kind::LogSquare:
      return norm_ * logsquare_tail_unnorm(n);
    case Kind::Zeta:
      return norm_ * zeta_tail(beta_, n);
    case Kind::Table: {
      if (n <= values_.size() + 1) return suffix_[n - 1];
      switch (tail_.family) {
        case TailFamily::PowerLaw: {
          const double coef =
              values_.back() *
              std::pow(static_cast<double>(values_.size()), tail_.param);
          return coef * zeta_tail(tail_.param, n);
        }
        case TailFamily::Geometric: {
          const double q = tail_.param;
          return values_.back() *
                 std::pow(q, static_cast<double>(n - values_.size())) /
                 (1.0 - q);
        }
        case TailFamily::None:
          return 0.0;  // finitely supported
      }
      return 0.0;
    }
    case Kind::Markov1:
      if (n <= 1) return 1.0;
      return marginal_scale_ * base_->tail_mass(n);
  }
  return 0.0;
}

double DigitMeasure::log_tail_P_at(std::uint64_t n) const {
  if (kind_ == Kind::Geometric)
    return (static_cast<double>(n) - 1.0) * std::log(q_);
  return std::log(tail_mass(n));
}

double DigitMeasure::log_tail_P(const Digit& d) const {
  if (d.is_exact()) return log_tail_P_at(d.exact());
  const double l = d.log_value();
  switch (kind_) {
    case Kind::Geometric:
      return std::expm1(std::min(l, kExpArgCap)) * std::log(q_);
    case Kind::LogSquare: {
      if (l > kExpArgCap) return std::log(norm_) - std::log(l);
      // exact tail shape in the real digit value
      const double a = std::exp(l);
      const double k = a + 1.0;
      const double lk = std::log(k);
      const double t =
          1.0 / lk + 0.5 / (k * lk * lk) + (lk + 2.0) / (12.0 * k * k * lk * lk * lk);
      return std::log(norm_ * t);
    }
    case Kind::Zeta: {
      if (l > kExpArgCap)
        return std::log(norm_) - std::log(beta_ - 1.0) - (beta_ - 1.0) * l;
      const double a = std::exp(l);
      const double t = std::pow(a, 1.0 - beta_) / (beta_ - 1.0) +
                       0.5 * std::pow(a, -beta_) +
                       beta_ * std::pow(a, -beta_ - 1.0) / 12.0;
      return std::log(norm_ * t);
    }
    case Kind::Table:
      switch (tail_.family) {
        case TailFamily::PowerLaw: {
          const double s = tail_.param;
          const double log_coef =
              std::log(values_.back()) +
              s * std::log(static_cast<double>(values_.size()));
          return log_coef - std::log(s - 1.0) - (s - 1.0) * l;
        }
        case TailFamily::Geometric: {
          const double q = tail_.param;
          const double a = std::exp(std::min(l, kExpArgCap));
          return std::log(values_.back() / (1.0 - q)) +
                 (a - static_cast<double>(values_.size())) * std::log(q);
        }
        case TailFamily::None:
          fail(ErrorCode::UnsupportedTailQuery,
               "measure table has no tail rule for log-only digits");
      }
      return 0.0;
    case Kind::Markov1:
      return std::log(marginal_scale_) + base_->log_tail_P(d);
  }
  return 0.0;
}

double DigitMeasure::mass_between(std::uint64_t a_lo,
                                  std::optional<std::uint64_t> a_hi) const {
  if (a_lo == 0) fail(ErrorCode::InvalidArgument, "digits start at 1");
  if (a_hi && *a_hi < a_lo)
    fail(ErrorCode::InvalidRange, "mass_between needs a_hi >= a_lo");
  if (kind_ == Kind::Markov1) {
    double out = 0.0;
    std::uint64_t lo = a_lo;
    if (a_lo == 1) {
      out += marginal_p1_;
      if (a_hi && *a_hi == 1) return out;
      lo = 2;
    }
    return out + marginal_scale_ * base_->mass_between(lo, a_hi);
  }
  if (!a_hi) return tail_mass(a_lo);
  if (*a_hi - a_lo <= kDirectSumCap &&
      (kind_ != Kind::Table || *a_hi <= values_.size() ||
       tail_.family != TailFamily::None)) {
    KahanSum acc;
    for (std::uint64_t m = a_lo; m <= *a_hi; ++m)
      acc.add(std::exp(log_p_exact(m)));
    return acc.value();
  }
  return tail_mass(a_lo) - tail_mass(*a_hi + 1);
}

// ---------------------------------------------------------------------------
// sampling

double DigitMeasure::cdf(std::uint64_t n) const {
  if (n == 0) return 0.0;
  auto& c = *cdf_cache_;
  std::size_t f = c.filled.load(std::memory_order_acquire);
  if (n > f) {
    std::lock_guard lk(c.mu);
    f = c.filled.load(std::memory_order_relaxed);
    if (n > f) {
      std::size_t target = std::max<std::size_t>(
          {static_cast<std::size_t>(n), 2 * f, std::size_t{1024}});
      target = std::min<std::size_t>(target, table_bound_);
      c.cum.resize(target + 1);
      double sum = f == 0 ? 0.0 : c.cum[f];
      double comp = c.comp;
      for (std::size_t i = f + 1; i <= target; ++i) {
        const double x = std::exp(log_p_exact(i)) - comp;
        const double t = sum + x;
        comp = (t - sum) - x;
        sum = t;
        c.cum[i] = sum;
      }
      c.comp = comp;
      c.filled.store(target, std::memory_order_release);
    }
  }
  return c.cum[n];
}

Digit DigitMeasure::invert_cdf(double u) const {
  switch (kind_) {
    case Kind::Geometric: {
      // smallest a with 1 - q^a >= u
      const double raw = std::log1p(-u) / std::log(q_);
      auto a = static_cast<std::uint64_t>(std::max(1.0, std::ceil(raw - 1e-12)));
      if (a > table_bound_)
        return Digit::from_log(std::log(std::max(raw, 1.0)));
      return Digit::from_index(a);
    }
    case Kind::LogSquare:
    case Kind::Zeta: {
      if (u >= tail_threshold_) {
        double l;
        if (kind_ == Kind::LogSquare) {
          l = norm_ / (1.0 - u);
        } else {
          l = (std::log(norm_) - std::log(beta_ - 1.0) - std::log1p(-u)) /
              (beta_ - 1.0);
        }
        const double seam = std::log(static_cast<double>(table_bound_));
        if (l <= seam) return Digit::from_index(table_bound_);
        return Digit::from_log(l);
      }
      // analytic guess, then exact bracketed search on the CDF
      double guess_log;
      if (kind_ == Kind::LogSquare) {
        guess_log = norm_ / std::max(1.0 - u, 1e-300);
      } else {
        guess_log = (std::log(norm_) - std::log(beta_ - 1.0) -
                     std::log1p(-u)) /
                    (beta_ - 1.0);
      }
      std::uint64_t hi = 2;
      if (guess_log > 0.0 &&
          guess_log < std::log(static_cast<double>(table_bound_)))
        hi = std::max<std::uint64_t>(2, static_cast<std::uint64_t>(
                                            std::exp(guess_log)));
      hi = std::min(hi, table_bound_);
      std::uint64_t lo = 1;
      while (cdf(hi) < u && hi < table_bound_) {
        lo = hi + 1;
        hi = std::min(hi * 2, table_bound_);
      }
      if (cdf(hi) < u) return Digit::from_index(table_bound_);
      while (lo < hi) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (cdf(mid) >= u)
          hi = mid;
        else
          lo = mid + 1;
      }
      return Digit::from_index(lo);
    }
    case Kind::Table: {
      if (u >= tail_threshold_) {
        const double t = std::max(1.0 - u, 1e-300);
        switch (tail_.family) {
          case TailFamily::PowerLaw: {
            const double s = tail_.param;
            const double log_coef =
                std::log(values_.back()) +
                s * std::log(static_cast<double>(values_.size()));
            const double l =
                (log_coef - std::log(s - 1.0) - std::log(t)) / (s - 1.0);
            return Digit::from_log(
                std::max(l, std::log(static_cast<double>(values_.size()) + 1.0)));
          }
          case TailFamily::Geometric: {
            const double q = tail_.param;
            const double a =
                static_cast<double>(values_.size()) +
                (std::log(t * (1.0 - q) / values_.back())) / std::log(q);
            return Digit::from_log(
                std::log(std::max(a, static_cast<double>(values_.size()) + 1.0)));
          }
          case TailFamily::None:
            // no tail mass: fall through to the last table entry
            return Digit::from_index(values_.size());
        }
      }
      const auto it =
          std::lower_bound(prefix_.begin() + 1, prefix_.end(), u);
      const auto idx = static_cast<std::uint64_t>(
          std::distance(prefix_.begin(), it));
      return Digit::from_index(std::min<std::uint64_t>(
          std::max<std::uint64_t>(idx, 1), values_.size()));
    }
    case Kind::Markov1:
      fail(ErrorCode::Internal, "markov1 draws go through sample_digit");
  }
  return Digit::from_index(1);
}

Digit DigitMeasure::sample_digit(SplitMix64& rng) const {
  if (kind_ == Kind::Markov1) {
    const int cls = rng.uniform() < class_weight_[0] ? 0 : 1;
    return sample_row(cls, rng);
  }
  return invert_cdf(rng.uniform());
}

Digit DigitMeasure::quantile(double u) const {
  if (!(u >= 0.0 && u < 1.0))
    fail(ErrorCode::InvalidArgument, "quantile needs u in [0, 1)");
  if (kind_ == Kind::Markov1)
    fail(ErrorCode::InvalidArgument,
         "quantile is defined for Bernoulli kinds only");
  return invert_cdf(u);
}

Digit DigitMeasure::sample_row(int cls, SplitMix64& rng) const {
  const double p1 = std::exp(base_->log_p_exact(1));
  const double row_p1 = p1 * (1.0 + theta_[cls]) / row_norm_[cls];
  const double u = rng.uniform();
  if (u < row_p1) return Digit::from_index(1);
  // conditional on digit >= 2 the row equals the base conditional
  const double v = (u - row_p1) / (1.0 - row_p1);
  const double u_base = p1 + v * (1.0 - p1);
  Digit d = base_->invert_cdf(std::min(u_base, 0x1.fffffffffffffp-1));
  if (d.is_exact() && d.exact() == 1) d = Digit::from_index(2);
  return d;
}

double DigitMeasure::row_log_p(int cls, const Digit& d) const {
  double out = base_->log_p(d) - std::log(row_norm_[cls]);
  if (d.is_exact() && d.exact() == 1) out += std::log1p(theta_[cls]);
  return out;
}

Digit DigitSampler::next(SplitMix64& rng) {
  if (m_->kind() != DigitMeasure::Kind::Markov1) return m_->sample_digit(rng);
  Digit d;
  if (prev_class_ < 0)
    d = m_->sample_digit(rng);
  else
    d = m_->sample_row(prev_class_, rng);
  prev_class_ = m_->digit_class(d);
  return d;
}

// ---------------------------------------------------------------------------
// cylinder and union measures

double DigitMeasure::cylinder_log_measure(std::span<const Digit> digits) const {
  if (digits.empty()) return 0.0;
  if (kind_ != Kind::Markov1) {
    double out = 0.0;
    for (const Digit& d : digits) out += log_p(d);
    return out;
  }
  double out = log_p(digits[0]);
  for (std::size_t k = 1; k < digits.size(); ++k)
    out += row_log_p(digit_class(digits[k - 1]), digits[k]);
  return out;
}

double DigitMeasure::union_log_measure(
    std::span<const Digit> prefix, const Digit& a_start,
    const std::optional<Digit>& a_end) const {
  if (a_end) {
    if (a_end->is_exact() && a_start.is_exact() &&
        a_end->exact() < a_start.exact())
      fail(ErrorCode::InvalidRange, "union needs a_end >= a_start");
    if (!a_end->is_exact() || !a_start.is_exact()) {
      if (a_end->log_value() < a_start.log_value())
        fail(ErrorCode::InvalidRange, "union needs a_end >= a_start");
    }
  }
  const double prefix_log = cylinder_log_measure(prefix);

  // Bernoulli: the last-coordinate mass is the marginal run mass
  if (kind_ != Kind::Markov1) {
    double run;
    if (a_start.is_exact() && (!a_end || a_end->is_exact())) {
      run = std::log(mass_between(
          a_start.exact(),
          a_end ? std::optional<std::uint64_t>(a_end->exact()) : std::nullopt));
    } else if (!a_end) {
      run = log_tail_P(a_start);
    } else {
      run = log_diff_exp(log_tail_P(a_start), log_tail_P(a_end->succ()));
    }
    return prefix_log + run;
  }

  // Markov1: the run mass uses the row of the last prefix digit
  const int cls = prefix.empty() ? -1 : digit_class(prefix.back());
  double run;
  auto row_tail = [&](const Digit& d) {
    if (cls < 0) return log_tail_P(d);
    return base_->log_tail_P(d) - std::log(row_norm_[cls]);
  };
  auto row_mass = [&](std::uint64_t lo, std::optional<std::uint64_t> hi) {
    if (cls < 0) return mass_between(lo, hi);
    double mass = base_->mass_between(lo, hi);
    if (lo == 1) mass += theta_[cls] * std::exp(base_->log_p_exact(1));
    return mass / row_norm_[cls];
  };
  if (a_start.is_exact() && (!a_end || a_end->is_exact())) {
    run = std::log(row_mass(a_start.exact(),
                            a_end ? std::optional<std::uint64_t>(a_end->exact())
                                  : std::nullopt));
  } else if (!a_end) {
    run = row_tail(a_start);
  } else {
    run = log_diff_exp(row_tail(a_start), row_tail(a_end->succ()));
  }
  return prefix_log + run;
}

double DigitMeasure::gibbs_log_ratio(std::span<const Digit> word) const {
  if (word.empty()) return 0.0;
  if (kind_ != Kind::Markov1) return 0.0;
  const double lhs = cylinder_log_measure(word);
  double birkhoff = 0.0;
  for (std::size_t k = 0; k < word.size(); ++k) {
    const Digit& next = k + 1 < word.size() ? word[k + 1] : word[0];
    birkhoff += row_log_p(digit_class(word[k]), next);
  }
  return lhs - birkhoff;
}

// ---------------------------------------------------------------------------
// series functionals

double DigitMeasure::entropy_partial(std::uint64_t N) const {
  KahanSum acc;
  for (std::uint64_t n = 1; n <= N; ++n) {
    const double lp = log_p_exact(n);
    const double p = std::exp(lp);
    if (p > 0.0) acc.add(-p * lp);
  }
  return acc.value();
}

double DigitMeasure::lyapunov_partial(const Partition& part,
                                      std::uint64_t N) const {
  KahanSum acc;
  for (std::uint64_t n = 1; n <= N; ++n) {
    const double p = std::exp(log_p_exact(n));
    if (p > 0.0) acc.add(-p * part.log_r_at(n));
  }
  return acc.value();
}

double DigitMeasure::trimmed_criterion_partial(const Partition& part,
                                               std::uint64_t N) const {
  KahanSum acc;
  double p_cur = std::exp(log_p_exact(1));
  for (std::uint64_t n = 1; n <= N; ++n) {
    const double p_next = std::exp(log_p_exact(n + 1));
    const double lr = part.log_r_at(n);
    acc.add(lr * lr * (p_cur * p_cur + 2.0 * p_cur * p_next));
    p_cur = p_next;
  }
  return acc.value();
}

MeasureStats DigitMeasure::series_stats(
    const Partition& part, std::span<const std::uint64_t> checkpoints) const {
  std::vector<std::uint64_t> cps(checkpoints.begin(), checkpoints.end());
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  MeasureStats st;
  if (cps.empty()) return st;
  KahanSum entropy, lyapunov, plogp, plogr, criterion;
  double p_cur = std::exp(log_p_exact(1));
  std::size_t ci = 0;
  for (std::uint64_t n = 1; n <= cps.back(); ++n) {
    const double lp = log_p_exact(n);
    const double lr = part.log_r_at(n);
    const double p = p_cur;
    const double p_next = std::exp(log_p_exact(n + 1));
    if (p > 0.0) {
      entropy.add(-p * lp);
      lyapunov.add(-p * lr);
      plogp.add(p * lp);
      plogr.add(p * lr);
      criterion.add(lr * lr * (p * p + 2.0 * p * p_next));
    }
    p_cur = p_next;
    if (n == cps[ci]) {
      st.entropy_partials.push_back({n, entropy.value()});
      st.lyapunov_partials.push_back({n, lyapunov.value()});
      st.decay_pointwise.push_back({n, lp / lr});
      st.decay_cesaro.push_back({n, plogp.value() / plogr.value()});
      st.tail_ratio.push_back(
          {n, log_tail_P(Digit::from_index(n)) / part.log_tail_R_at(n)});
      st.criterion_partials.push_back({n, criterion.value()});
      ++ci;
    }
  }
  return st;
}

VolumeLemmaResult DigitMeasure::volume_lemma_dim(
    const Partition& part, std::uint64_t probe_depth) const {
  const std::uint64_t cps[2] = {probe_depth / 10, probe_depth};
  MeasureStats st = series_stats(part, cps);
  VolumeLemmaResult res;
  const double h_lo = st.entropy_partials.front().value;
  const double h_hi = st.entropy_partials.back().value;
  const double l_lo = st.lyapunov_partials.front().value;
  const double l_hi = st.lyapunov_partials.back().value;
  res.entropy = h_hi;
  res.lyapunov = l_hi;
  res.entropy_divergent =
      (h_hi - h_lo) > kDivergenceAbsTol + kDivergenceRelTol * std::fabs(h_hi);
  res.lyapunov_divergent =
      (l_hi - l_lo) > kDivergenceAbsTol + kDivergenceRelTol * std::fabs(l_hi);
  if (!res.entropy_divergent)
    res.dimension = l_hi > 0.0 ? h_hi / l_hi : 0.0;
  return res;
}

PolyLowerBound DigitMeasure::polynomial_lower_bound_check(
    double delta, std::uint64_t n_lo, std::uint64_t n_hi) const {
  PolyLowerBound out;
  if (!(delta > 0.0)) {
    out.reason = "bound requires delta > 0";
    return out;
  }
  if (n_lo < 1 || n_hi < n_lo)
    fail(ErrorCode::InvalidArgument, "bad range");
  double best = 1e300;
  for (std::uint64_t n = n_lo; n <= n_hi; ++n)
    best = std::min(best, log_p_exact(n) +
                              (1.0 + delta) * std::log(static_cast<double>(n)));
  out.log_coef = best;
  if (best < std::log(kPolyBoundFloor)) {
    out.reason = "coefficient underflows tolerance";
    return out;
  }
  out.ok = true;
  return out;
}

// ---------------------------------------------------------------------------
// parsing

DigitMeasure DigitMeasure::parse(std::string_view spec) {
  if (spec == "logsquare") return log_square();
  if (spec.rfind("geometric:", 0) == 0) {
    const std::string arg(spec.substr(10));
    try {
      return geometric(std::stod(arg));
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, "bad geometric ratio: " + arg);
    }
  }
  if (spec.rfind("zeta:", 0) == 0) {
    const std::string arg(spec.substr(5));
    try {
      return zeta(std::stod(arg));
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, "bad zeta exponent: " + arg);
    }
  }
  if (spec.rfind("table:", 0) == 0)
    return load_table(std::string(spec.substr(6)));
  fail(ErrorCode::ParseError,
       "unknown measure spec '" + std::string(spec) +
           "' (expected geometric:<q> | logsquare | zeta:<beta> | table:<path>)");
}

DigitMeasure DigitMeasure::load_table(const std::string& path) {
  std::vector<double> values;
  TableTail tail;
  detail::load_value_table(path, &values, &tail);
  DigitMeasure m = from_table(std::move(values), tail);
  m.spec_string_ = "table:" + path;
  return m;
}

}  // namespace gibbsdim
