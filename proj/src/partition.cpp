#include "gibbsdim/partition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gibbsdim/errors.hpp"
#include "gibbsdim/logspace.hpp"
#include "gibbsdim/series.hpp"
#include "table_io.hpp"

namespace gibbsdim {

namespace {

constexpr double kMassTol = 1e-9;
constexpr double kCrossoverTol = 1e-6;
// Ranges shorter than this are summed term by term; longer ones go
// through tail differences (relative error stays benign there).
constexpr std::uint64_t kDirectSumCap = 4096;

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys,
                 double* intercept_out) {
  const std::size_t n = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / denom;
  if (intercept_out) *intercept_out = (sy - slope * sx) / n;
  return slope;
}

std::vector<std::uint64_t> geometric_grid(std::uint64_t lo, std::uint64_t hi,
                                          std::size_t max_points) {
  std::vector<std::uint64_t> grid;
  if (lo > hi) return grid;
  const double llo = std::log(static_cast<double>(lo));
  const double lhi = std::log(static_cast<double>(hi));
  for (std::size_t i = 0; i < max_points; ++i) {
    const double t = max_points == 1
                         ? llo
                         : llo + (lhi - llo) * static_cast<double>(i) /
                               static_cast<double>(max_points - 1);
    const auto n = static_cast<std::uint64_t>(std::llround(std::exp(t)));
    grid.push_back(std::min(std::max<std::uint64_t>(n, lo), hi));
  }
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace

namespace {

// silent seams between the tabulated and asymptotic evaluation paths
// would corrupt long-orbit statistics
void check_crossover(const Partition& p) {
  const auto nt = p.table_bound();
  const double exact = p.log_r(Digit::from_index(nt));
  const double asym = p.log_r(
      Digit::from_log(std::log(static_cast<double>(nt))));
  if (std::fabs(exact - asym) > kCrossoverTol)
    fail(ErrorCode::Internal, "table/asymptotic crossover seam in log_r");
}

}  // namespace

Partition Partition::gauss(std::uint64_t table_bound) {
  Partition p;
  p.kind_ = Kind::Gauss;
  p.alpha_ = 2.0;
  p.table_bound_ = table_bound;
  p.spec_string_ = "gauss";
  // r_{n+1}/r_n = n/(n+2), increasing toward 1
  p.ratio_bounds_ = {1.0 / 3.0,
                     static_cast<double>(table_bound) / (table_bound + 2.0)};
  check_crossover(p);
  return p;
}

Partition Partition::power_law(double alpha, std::uint64_t table_bound) {
  if (!(alpha > 1.0))
    fail(ErrorCode::InvalidArgument, "powerlaw partition needs alpha > 1");
  Partition p;
  p.kind_ = Kind::PowerLaw;
  p.alpha_ = alpha;
  p.table_bound_ = table_bound;
  p.norm_ = 1.0 / zeta_value(alpha);
  {
    std::ostringstream os;
    os << "powerlaw:" << alpha;
    p.spec_string_ = os.str();
  }
  p.ratio_bounds_ = {std::pow(0.5, alpha),
                     std::pow(static_cast<double>(table_bound) /
                                  (table_bound + 1.0),
                              alpha)};
  // mass identity on a sampled prefix grid
  KahanSum acc;
  std::uint64_t next_check = 1;
  for (std::uint64_t n = 1; n <= 4096; ++n) {
    acc.add(p.norm_ * std::pow(static_cast<double>(n), -alpha));
    if (n == next_check) {
      const double total = acc.value() + p.norm_ * zeta_tail(alpha, n + 1);
      if (std::fabs(total - 1.0) > kMassTol)
        fail(ErrorCode::Internal, "powerlaw partition mass identity violated");
      next_check *= 4;
    }
  }
  check_crossover(p);
  return p;
}

Partition Partition::from_table(std::vector<double> values, TableTail tail,
                                bool normalize) {
  if (values.empty())
    fail(ErrorCode::InvalidArgument, "partition table must be non-empty");
  Partition p;
  p.kind_ = Kind::Table;
  p.values_ = std::move(values);
  p.tail_ = tail;
  p.table_bound_ = p.values_.size();
  {
    std::ostringstream os;
    os << "table:<inline:" << p.values_.size() << ">";
    p.spec_string_ = os.str();
  }
  p.validate_table();
  if (normalize) {
    const double total = p.suffix_[0];
    for (double& v : p.values_) v /= total;
    p.validate_table();
  }
  const double total = p.suffix_[0];
  if (std::fabs(total - 1.0) > kMassTol)
    fail(ErrorCode::InvalidArgument,
         "partition table plus tail does not sum to 1");
  return p;
}

void Partition::validate_table() {
  const std::size_t n = values_.size();
  double lo = 1e300, hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(values_[i] > 0.0))
      fail(ErrorCode::InvalidArgument, "table values must be positive");
    if (i + 1 < n) {
      if (values_[i + 1] > values_[i] * (1.0 + 1e-12))
        fail(ErrorCode::InvalidArgument, "table values must be non-increasing");
      const double ratio = values_[i + 1] / values_[i];
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  }
  ratio_bounds_ = n > 1 ? RatioBounds{lo, hi} : RatioBounds{1.0, 1.0};

  double tail_mass = 0.0;
  switch (tail_.family) {
    case TailFamily::None:
      break;
    case TailFamily::PowerLaw: {
      if (!(tail_.param > 1.0))
        fail(ErrorCode::InvalidArgument, "powerlaw tail needs exponent > 1");
      const double coef =
          values_.back() * std::pow(static_cast<double>(n), tail_.param);
      tail_mass = coef * zeta_tail(tail_.param, n + 1);
      alpha_ = tail_.param;
      break;
    }
    case TailFamily::Geometric: {
      if (!(tail_.param > 0.0 && tail_.param < 1.0))
        fail(ErrorCode::InvalidArgument, "geometric tail needs ratio in (0,1)");
      tail_mass = values_.back() * tail_.param / (1.0 - tail_.param);
      alpha_ = std::numeric_limits<double>::infinity();
      break;
    }
  }
  if (tail_.family == TailFamily::None) {
    // least-squares log-log fit over the top decade, when resolvable
    alpha_ = std::numeric_limits<double>::quiet_NaN();
    if (n >= 100) {
      std::vector<double> xs, ys;
      for (std::size_t i = n / 10; i < n; i += std::max<std::size_t>(1, n / 200))
        if (values_[i] > 0) {
          xs.push_back(std::log(static_cast<double>(i + 1)));
          ys.push_back(std::log(values_[i]));
        }
      if (xs.size() >= 8) {
        double icept = 0.0;
        const double slope = fit_slope(xs, ys, &icept);
        double resid = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i)
          resid = std::max(resid,
                           std::fabs(ys[i] - (icept + slope * xs[i])));
        if (resid < 0.05 && slope < -1.0) alpha_ = -slope;
      }
    }
  }

  suffix_.assign(n + 1, 0.0);
  suffix_[n] = tail_mass;
  for (std::size_t i = n; i-- > 0;) suffix_[i] = suffix_[i + 1] + values_[i];
}

double Partition::tail_coef() const {
  const auto n = static_cast<double>(values_.size());
  if (tail_.family == TailFamily::PowerLaw)
    return values_.back() * std::pow(n, tail_.param);
  return values_.back();  // geometric uses last value directly
}

double Partition::table_log_r_exact(std::uint64_t n) const {
  if (n <= values_.size()) return std::log(values_[n - 1]);
  const auto N = static_cast<double>(values_.size());
  switch (tail_.family) {
    case TailFamily::PowerLaw:
      return std::log(values_.back()) +
             tail_.param * (std::log(N) - std::log(static_cast<double>(n)));
    case TailFamily::Geometric:
      return std::log(values_.back()) +
             (static_cast<double>(n) - N) * std::log(tail_.param);
    case TailFamily::None:
      fail(ErrorCode::UnsupportedTailQuery,
           "table has no tail rule beyond index " +
               std::to_string(values_.size()));
  }
  return 0.0;
}

double Partition::table_tail_mass(std::uint64_t n) const {
  const std::size_t N = values_.size();
  if (n <= N + 1) return suffix_[n - 1];
  switch (tail_.family) {
    case TailFamily::PowerLaw:
      return tail_coef() * zeta_tail(tail_.param, n);
    case TailFamily::Geometric: {
      const double q = tail_.param;
      return values_.back() * std::pow(q, static_cast<double>(n - N)) /
             (1.0 - q);
    }
    case TailFamily::None:
      fail(ErrorCode::UnsupportedTailQuery,
           "table has no tail rule beyond index " + std::to_string(N));
  }
  return 0.0;
}

double Partition::log_r_at(std::uint64_t n) const {
  switch (kind_) {
    case Kind::Gauss: {
      const auto x = static_cast<double>(n);
      return -(std::log(x) + std::log(x + 1.0));
    }
    case Kind::PowerLaw:
      return std::log(norm_) - alpha_ * std::log(static_cast<double>(n));
    case Kind::Table:
      return table_log_r_exact(n);
  }
  return 0.0;
}

double Partition::log_tail_R_at(std::uint64_t n) const {
  switch (kind_) {
    case Kind::Gauss:
      return -std::log(static_cast<double>(n));
    case Kind::PowerLaw:
      return std::log(norm_ * zeta_tail(alpha_, n));
    case Kind::Table:
      return std::log(table_tail_mass(n));
  }
  return 0.0;
}

double Partition::log_r(const Digit& d) const {
  switch (kind_) {
    case Kind::Gauss: {
      if (d.is_exact() && d.exact() <= table_bound_) {
        const auto n = static_cast<double>(d.exact());
        return -(std::log(n) + std::log(n + 1.0));
      }
      const double l = d.log_value();
      return -2.0 * l - std::log1p(std::exp(-l));
    }
    case Kind::PowerLaw:
      return std::log(norm_) - alpha_ * d.log_value();
    case Kind::Table: {
      if (d.is_exact()) return table_log_r_exact(d.exact());
      switch (tail_.family) {
        case TailFamily::PowerLaw:
          return std::log(tail_coef()) - tail_.param * d.log_value();
        case TailFamily::Geometric: {
          const double a = std::exp(d.log_value());
          const auto N = static_cast<double>(values_.size());
          return std::log(values_.back()) + (a - N) * std::log(tail_.param);
        }
        case TailFamily::None:
          fail(ErrorCode::UnsupportedTailQuery,
               "table has no tail rule for log-only digits");
      }
    }
  }
  return 0.0;
}

double Partition::log_tail_R(const Digit& d) const {
  switch (kind_) {
    case Kind::Gauss:
      return -d.log_value();  // R_n = 1/n exactly
    case Kind::PowerLaw: {
      if (d.is_exact() && d.exact() <= table_bound_)
        return std::log(norm_ * zeta_tail(alpha_, d.exact()));
      return std::log(norm_) - std::log(alpha_ - 1.0) -
             (alpha_ - 1.0) * d.log_value();
    }
    case Kind::Table: {
      if (d.is_exact()) return std::log(table_tail_mass(d.exact()));
      switch (tail_.family) {
        case TailFamily::PowerLaw:
          return std::log(tail_coef()) - std::log(tail_.param - 1.0) -
                 (tail_.param - 1.0) * d.log_value();
        case TailFamily::Geometric: {
          const double a = std::exp(d.log_value());
          const auto N = static_cast<double>(values_.size());
          const double q = tail_.param;
          return std::log(values_.back() / (1.0 - q)) +
                 (a - N) * std::log(q);
        }
        case TailFamily::None:
          fail(ErrorCode::UnsupportedTailQuery,
               "table has no tail rule for log-only digits");
      }
    }
  }
  return 0.0;
}

double Partition::mass_between(std::uint64_t a_lo,
                               std::optional<std::uint64_t> a_hi) const {
  if (a_lo == 0) fail(ErrorCode::InvalidArgument, "digits start at 1");
  if (a_hi && *a_hi < a_lo)
    fail(ErrorCode::InvalidRange, "mass_between needs a_hi >= a_lo");
  switch (kind_) {
    case Kind::Gauss: {
      const double lo = 1.0 / static_cast<double>(a_lo);
      if (!a_hi) return lo;
      return lo - 1.0 / (static_cast<double>(*a_hi) + 1.0);
    }
    case Kind::PowerLaw: {
      if (!a_hi) return norm_ * zeta_tail(alpha_, a_lo);
      if (*a_hi - a_lo <= kDirectSumCap) {
        KahanSum acc;
        for (std::uint64_t m = a_lo; m <= *a_hi; ++m)
          acc.add(std::pow(static_cast<double>(m), -alpha_));
        return norm_ * acc.value();
      }
      return norm_ * (zeta_tail(alpha_, a_lo) - zeta_tail(alpha_, *a_hi + 1));
    }
    case Kind::Table: {
      const std::uint64_t N = values_.size();
      if (a_hi && *a_hi <= N && *a_hi - a_lo <= kDirectSumCap) {
        KahanSum acc;
        for (std::uint64_t m = a_lo; m <= *a_hi; ++m) acc.add(values_[m - 1]);
        return acc.value();
      }
      const double lo_mass = table_tail_mass(a_lo);
      if (!a_hi) return lo_mass;
      return lo_mass - table_tail_mass(*a_hi + 1);
    }
  }
  return 0.0;
}

double Partition::convergence_exponent() const {
  switch (kind_) {
    case Kind::Gauss:
      return 0.5;
    case Kind::PowerLaw:
      return 1.0 / alpha_;
    case Kind::Table:
      break;
  }
  if (tail_.family == TailFamily::PowerLaw) return 1.0 / tail_.param;
  if (tail_.family == TailFamily::Geometric) return 0.0;

  // No tail rule: bisection on s. Divergence test compares the last two
  // decade increments of the partial sums of r_n^s; a non-shrinking
  // increment marks the series as still diverging.
  const std::size_t n = values_.size();
  if (n < 1000)
    fail(ErrorCode::EstimationFailed,
         "table too short to fit a convergence exponent (need >= 1000 entries)");
  auto divergent = [&](double s) {
    KahanSum inc_prev, inc_last;
    const std::size_t c1 = n / 100, c2 = n / 10;
    for (std::size_t i = c1; i < n; ++i) {
      const double t = std::exp(s * std::log(values_[i]));
      if (i < c2)
        inc_prev.add(t);
      else
        inc_last.add(t);
    }
    return inc_last.value() >= 0.95 * inc_prev.value();
  };
  double lo = 0.0, hi = 4.0;
  if (divergent(hi))
    fail(ErrorCode::EstimationFailed,
         "partial sums keep diverging up to exponent 4");
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (divergent(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TailCheckReport Partition::tail_asymptotic_check(std::uint64_t n_lo,
                                                 std::uint64_t n_hi) const {
  if (n_lo < 1 || n_hi < n_lo)
    fail(ErrorCode::InvalidArgument, "bad tail check range");
  if (n_hi > table_bound_ && kind_ != Kind::Table)
    fail(ErrorCode::InvalidArgument, "tail check range beyond table bound");
  if (kind_ == Kind::Table && tail_.family == TailFamily::None &&
      n_hi > values_.size())
    fail(ErrorCode::UnsupportedTailQuery,
         "tail check range runs past a table with no tail rule");
  if (!std::isfinite(alpha_))
    fail(ErrorCode::EstimationFailed,
         "tail check needs a finite polynomial asymptotic");

  const auto grid = geometric_grid(n_lo, n_hi, 128);
  std::vector<double> ln, lR, e;
  for (const auto n : grid) {
    const double lt = log_tail_R(Digit::from_index(n));
    ln.push_back(std::log(static_cast<double>(n)));
    lR.push_back(lt);
    e.push_back(lt + (alpha_ - 1.0) * ln.back());
  }
  TailCheckReport rep;
  double mean = 0.0;
  for (const double v : e) mean += v;
  mean /= static_cast<double>(e.size());
  rep.fitted_intercept = mean;
  for (const double v : e)
    rep.max_residual = std::max(rep.max_residual, std::fabs(v - mean));
  rep.fitted_slope = fit_slope(ln, lR, nullptr);
  rep.tolerance =
      0.01 * std::max(1.0, std::log(static_cast<double>(n_hi)) -
                               std::log(static_cast<double>(n_lo)));
  rep.pass = rep.max_residual <= rep.tolerance;
  return rep;
}

Digit Partition::invert_tail(double log_target) const {
  if (log_target >= 0.0) return Digit::from_index(1);
  double approx_log_n = 0.0;
  switch (kind_) {
    case Kind::Gauss:
      approx_log_n = -log_target;
      break;
    case Kind::PowerLaw:
      approx_log_n = (std::log(norm_) - std::log(alpha_ - 1.0) - log_target) /
                     (alpha_ - 1.0);
      break;
    case Kind::Table: {
      // binary search on the suffix array, falling through to the tail rule
      const std::uint64_t N = values_.size();
      std::uint64_t lo = 1, hi = N + 1;
      if (std::log(table_tail_mass(N + 1)) <= log_target) {
        while (lo < hi) {
          const std::uint64_t mid = lo + (hi - lo) / 2;
          if (std::log(table_tail_mass(mid)) <= log_target)
            hi = mid;
          else
            lo = mid + 1;
        }
        return Digit::from_index(lo);
      }
      switch (tail_.family) {
        case TailFamily::PowerLaw:
          approx_log_n = (std::log(tail_coef()) -
                          std::log(tail_.param - 1.0) - log_target) /
                         (tail_.param - 1.0);
          break;
        case TailFamily::Geometric: {
          const double q = tail_.param;
          const double a =
              static_cast<double>(N) +
              (log_target - std::log(values_.back() / (1.0 - q))) /
                  std::log(q);
          approx_log_n = std::log(std::max(a, static_cast<double>(N) + 1.0));
          break;
        }
        case TailFamily::None:
          fail(ErrorCode::UnsupportedTailQuery,
               "table has no tail rule beyond its last index");
      }
      break;
    }
  }
  if (approx_log_n > std::log(static_cast<double>(table_bound_)))
    return Digit::from_log(approx_log_n);
  auto n = static_cast<std::uint64_t>(
      std::max(1.0, std::floor(std::exp(approx_log_n))));
  while (n > 1 &&
         log_tail_R(Digit::from_index(n - 1)) <= log_target)
    --n;
  while (log_tail_R(Digit::from_index(n)) > log_target) ++n;
  return Digit::from_index(n);
}

Partition Partition::parse(std::string_view spec) {
  if (spec == "gauss") return gauss();
  if (spec.rfind("powerlaw:", 0) == 0) {
    const std::string arg(spec.substr(9));
    std::size_t pos = 0;
    double alpha = 0.0;
    try {
      alpha = std::stod(arg, &pos);
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, "bad powerlaw exponent: " + arg);
    }
    if (pos != arg.size())
      fail(ErrorCode::ParseError, "bad powerlaw exponent: " + arg);
    return power_law(alpha);
  }
  if (spec.rfind("table:", 0) == 0)
    return load_table(std::string(spec.substr(6)));
  fail(ErrorCode::ParseError,
       "unknown partition spec '" + std::string(spec) +
           "' (expected gauss | powerlaw:<alpha> | table:<path>)");
}

namespace detail {

void load_value_table(const std::string& path, std::vector<double>* values,
                      TableTail* tail) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open table file: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;
    const std::string body = line.substr(first);
    if (body.rfind("tail=", 0) == 0) {
      const std::string rest = body.substr(5);
      const auto colon = rest.find(':');
      if (colon == std::string::npos)
        fail(ErrorCode::ParseError,
             path + ":" + std::to_string(lineno) + ": bad tail footer");
      const std::string fam = rest.substr(0, colon);
      double param = 0.0;
      try {
        param = std::stod(rest.substr(colon + 1));
      } catch (const std::exception&) {
        fail(ErrorCode::ParseError,
             path + ":" + std::to_string(lineno) + ": bad tail parameter");
      }
      if (fam == "powerlaw")
        *tail = {TailFamily::PowerLaw, param};
      else if (fam == "geometric")
        *tail = {TailFamily::Geometric, param};
      else
        fail(ErrorCode::ParseError, path + ":" + std::to_string(lineno) +
                                        ": unknown tail family " + fam);
      continue;
    }
    const auto comma = body.find(',');
    if (comma == std::string::npos)
      fail(ErrorCode::ParseError,
           path + ":" + std::to_string(lineno) + ": expected n,value");
    std::uint64_t n = 0;
    double v = 0.0;
    try {
      n = std::stoull(body.substr(0, comma));
      v = std::stod(body.substr(comma + 1));
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError,
           path + ":" + std::to_string(lineno) + ": expected n,value");
    }
    if (n != values->size() + 1)
      fail(ErrorCode::ParseError,
           path + ":" + std::to_string(lineno) +
               ": indices must ascend contiguously from 1");
    values->push_back(v);
  }
  if (values->empty())
    fail(ErrorCode::ParseError, path + ": table file has no entries");
}

}  // namespace detail

Partition Partition::load_table(const std::string& path) {
  std::vector<double> values;
  TableTail tail;
  detail::load_value_table(path, &values, &tail);
  Partition p = from_table(std::move(values), tail);
  p.spec_string_ = "table:" + path;
  return p;
}

}  // namespace gibbsdim
