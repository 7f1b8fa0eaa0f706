#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

#include "gibbsdim/errors.hpp"
#include "gibbsdim/logspace.hpp"
#include "gibbsdim/maps.hpp"
#include "gibbsdim/runner.hpp"
#include "gibbsdim/series.hpp"

// Toolkit-level acceptance checks. Thresholds are frozen here; the
// stochastic ones were pinned by the calibration batch in
// tools/calibrate.cpp (seed 77001) and are evaluated on fresh seeds.

namespace gibbsdim {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kSeedOracle = 20260801;
constexpr std::uint64_t kSeedSymbolic = 20260802;
constexpr std::uint64_t kSeedBlowPack = 20260803;
constexpr std::uint64_t kSeedPlant = 20260804;
constexpr std::uint64_t kSeedDistortion = 20260805;
constexpr std::uint64_t kSeedSampler = 20260806;
constexpr std::uint64_t kSeedBracket = 20260807;

// packing-side estimator aggregation (frozen by calibration)
constexpr std::uint64_t kCaseBurnIn = 30000;
constexpr std::uint64_t kCaseK0 = 100;

// chi-square upper critical value at significance 1e-3 for 50 degrees
// of freedom
constexpr double kChi2Crit50 = 86.66081519040317;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

struct Timer {
  Clock::time_point t0 = Clock::now();
  double seconds() const {
    return std::chrono::duration<double>(Clock::now() - t0).count();
  }
};

CheckResult check_oracle(unsigned threads) {
  Timer timer;
  const Partition part = Partition::gauss();
  const DigitMeasure meas = DigitMeasure::geometric(0.5);
  const auto vl = meas.volume_lemma_dim(part);
  const std::uint64_t cps[1] = {100000};
  BatchOptions opt;
  opt.threads = threads;
  const auto batch = run_batch(meas, part, 100, 100000, kSeedOracle, cps, opt);
  std::vector<double> finals;
  for (const auto& s : batch) finals.push_back(s.checkpoints.back().symbolic);
  const double med = median(std::move(finals));
  const double rel = std::fabs(med - vl.dimension) / vl.dimension;
  const double wall = timer.seconds();
  const bool pass =
      !vl.entropy_divergent && rel <= 0.02 && wall < 10.0;
  return {"C1", "finite-entropy oracle: median symbolic within 2% of h/lambda",
          pass,
          "median=" + fmt(med) + " h/lambda=" + fmt(vl.dimension) +
              " rel=" + fmt(rel) + " wall=" + fmt(wall) + "s"};
}

CheckResult check_symbolic_trend(unsigned threads) {
  Timer timer;
  const Partition part = Partition::gauss();
  const DigitMeasure meas = DigitMeasure::log_square();
  const std::uint64_t cps[4] = {1000, 10000, 100000, 1000000};
  BatchOptions opt;
  opt.threads = threads;
  const auto batch =
      run_batch(meas, part, 100, 1000000, kSeedSymbolic, cps, opt);
  double med[4];
  for (int i = 0; i < 4; ++i) {
    std::vector<double> col;
    for (const auto& s : batch) col.push_back(s.checkpoints[i].symbolic);
    med[i] = median(std::move(col));
  }
  const double wall = timer.seconds();
  bool pass = wall < 120.0;
  for (int i = 1; i < 4; ++i) pass = pass && med[i] < med[i - 1];
  pass = pass && med[3] >= 0.5 && med[3] <= 0.70;
  const double x5 = (med[2] - 0.5) * std::log(1e5);
  const double x6 = (med[3] - 0.5) * std::log(1e6);
  pass = pass && x5 > 0.0 && std::fabs(x6 - x5) <= 0.5 * x5;
  std::ostringstream det;
  det << "medians=" << fmt(med[0]) << "," << fmt(med[1]) << "," << fmt(med[2])
      << "," << fmt(med[3]) << " excess*logn=" << fmt(x5) << "->" << fmt(x6)
      << " wall=" << fmt(wall) << "s";
  return {"C2", "infinite-entropy symbolic ratio decreases toward 1/2", pass,
          det.str()};
}

CheckResult check_convergence_exponent() {
  const Partition part = Partition::gauss();
  const DigitMeasure meas = DigitMeasure::log_square();
  const double s_inf = part.convergence_exponent();
  bool pass = std::fabs(s_inf - 0.5) <= 1e-2;
  const std::uint64_t cps[3] = {10000, 100000, 1000000};
  const MeasureStats st = meas.series_stats(part, cps);
  double e[3];
  for (int i = 0; i < 3; ++i) e[i] = st.decay_pointwise[i].value - 0.5;
  pass = pass && e[0] > e[1] && e[1] > e[2] && e[2] > 0.0;
  const double x5 = e[1] * std::log(1e5), x6 = e[2] * std::log(1e6);
  pass = pass && std::fabs(x6 - x5) <= 0.5 * x5;
  return {"C3", "convergence exponent 1/2 and decay-ratio excess trend", pass,
          "s_inf=" + fmt(s_inf) + " excess=" + fmt(e[0]) + "," + fmt(e[1]) +
              "," + fmt(e[2])};
}

CheckResult check_tail_ratio() {
  const Partition part = Partition::gauss();
  const DigitMeasure meas = DigitMeasure::log_square();
  std::vector<std::uint64_t> grid;
  for (double t = std::log(1e3); t <= std::log(1e6) + 1e-9;
       t += (std::log(1e6) - std::log(1e3)) / 15.0)
    grid.push_back(static_cast<std::uint64_t>(std::llround(std::exp(t))));
  bool pass = true;
  double prev = 1.0, last = 1.0;
  for (const auto n : grid) {
    const double tr = meas.log_tail_P_at(n) / part.log_tail_R_at(n);
    pass = pass && tr > 0.0 && tr < prev;
    prev = tr;
    last = tr;
  }
  pass = pass && last < 0.25;
  return {"C4", "tail decay ratio decreasing and below 0.25 at 1e6", pass,
          "ratio(1e6)=" + fmt(last)};
}

CheckResult check_trimmed_criterion() {
  const Partition part = Partition::gauss();
  const DigitMeasure meas = DigitMeasure::log_square();
  const double c5 = meas.trimmed_criterion_partial(part, 100000);
  const double c6 = meas.trimmed_criterion_partial(part, 1000000);
  const double frac = (c6 - c5) / c6;
  const bool pass = frac >= 0.0 && frac < 1e-3;
  return {"C5", "trimmed-convergence criterion series converges", pass,
          "total=" + fmt(c6) + " last-decade fraction=" + fmt(frac)};
}

struct BlowPackBatch {
  std::vector<OrbitSummary> batch;
};

BlowPackBatch run_blowpack(unsigned threads) {
  const Partition part = Partition::gauss();
  const DigitMeasure meas = DigitMeasure::log_square();
  const std::uint64_t cps[2] = {1000, 100000};
  BatchOptions opt;
  opt.threads = threads;
  opt.with_blowup = true;
  opt.with_neighbor = true;
  opt.with_case_split = true;
  opt.case_k0 = kCaseK0;
  opt.burn_in = kCaseBurnIn;
  return {run_batch(meas, part, 100, 100000, kSeedBlowPack, cps, opt)};
}

CheckResult check_blowup(const BlowPackBatch& bp) {
  std::vector<double> at3, at5;
  for (const auto& s : bp.batch) {
    at3.push_back(s.checkpoints[0].max_blowup);
    at5.push_back(s.checkpoints[1].max_blowup);
  }
  const double m3 = median(std::move(at3));
  const double m5 = median(std::move(at5));
  const bool pass = m5 >= 3.0 && m5 > m3;
  return {"C6", "blow-up statistic: median max ratio >= 3 and growing", pass,
          "median@1e3=" + fmt(m3) + " median@1e5=" + fmt(m5)};
}

CheckResult check_planted_excursion() {
  const Partition part = Partition::gauss();
  const DigitMeasure meas = DigitMeasure::log_square();
  const Orbit base = Orbit::generate(meas, part, 10000, kSeedPlant);
  double ratios[3];
  const double lstars[3] = {1e6, 1e9, 1e12};
  for (int i = 0; i < 3; ++i) {
    const Orbit planted = base.plant_excursion(10000, lstars[i]);
    ratios[i] = lower_cover_ratio(planted, 10000).ratio;
  }
  const bool pass = ratios[1] < 0.05 && ratios[2] < 1e-4 &&
                    ratios[0] > ratios[1] && ratios[1] > ratios[2];
  return {"C7", "planted excursion drives the lower-cover ratio to 0", pass,
          "ratio(1e6)=" + fmt(ratios[0]) + " ratio(1e9)=" + fmt(ratios[1]) +
              " ratio(1e12)=" + fmt(ratios[2])};
}

CheckResult check_packing(const BlowPackBatch& bp) {
  std::vector<double> neighbor, casemax;
  for (const auto& s : bp.batch) {
    const CheckpointStat& c = s.checkpoints[1];
    if (c.neighbor_n) neighbor.push_back(c.neighbor_last);
    if (std::isfinite(c.max_case_split)) casemax.push_back(c.max_case_split);
  }
  const double mn = median(neighbor);
  const double mc = median(casemax);
  const double worst = casemax.empty()
                           ? std::numeric_limits<double>::quiet_NaN()
                           : *std::max_element(casemax.begin(), casemax.end());
  const bool pass = mn >= 0.35 && mn <= 0.65 && mc <= 0.679;
  return {"C8",
          "packing side: neighbor ratio near 1/2, case-split bounded by 0.679",
          pass,
          "median_neighbor=" + fmt(mn) + " median_max_case=" + fmt(mc) +
              " batch_worst_case=" + fmt(worst)};
}

CheckResult check_ineq_scan() {
  const Partition part = Partition::gauss();
  const DigitMeasure meas = make_scan_profile_measure();
  char rhs_buf[32];
  std::snprintf(rhs_buf, sizeof rhs_buf, "%.5f", 1.1 / 1.9 + 0.05);
  try {
    const IneqReport rep =
        ineqsums_check(2.0, 0.1, 0.05, 2, 10000, 10000, meas, part);
    const bool pass = rep.k0 <= 10000 && rep.max_lhs <= rep.rhs &&
                      std::string(rhs_buf) == "0.62895";
    return {"C9", "window-sum inequality scan finds an explicit k0", pass,
            std::string("rhs=") + rhs_buf + " k0=" + std::to_string(rep.k0) +
                " max_lhs=" + fmt(rep.max_lhs) + " at (k=" +
                std::to_string(rep.arg_k) + ",n=" + std::to_string(rep.arg_n) +
                ")"};
  } catch (const Error& e) {
    return {"C9", "window-sum inequality scan finds an explicit k0", false,
            e.what()};
  }
}

CheckResult check_distortion() {
  const Partition part = Partition::gauss();
  SplitMix64 rng(kSeedDistortion);
  std::uint64_t violations = 0;
  double worst_slack = 1e300;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto depth = 1 + rng.next() % 50;
    std::vector<Digit> digits;
    digits.reserve(depth);
    for (std::uint64_t i = 0; i < depth; ++i)
      digits.push_back(Digit::from_index(1 + rng.next() % 1000));
    const double resid = distortion_residual(part, digits);
    const double bound = (static_cast<double>(depth) + 1.0) * std::log(2.0);
    if (resid > bound) ++violations;
    worst_slack = std::min(worst_slack, bound - resid);
  }
  return {"C10", "distortion residual within n log 2 + log 2", violations == 0,
          "violations=" + std::to_string(violations) +
              " min_slack=" + fmt(worst_slack)};
}

CheckResult check_sampler_law() {
  const DigitMeasure meas = DigitMeasure::log_square();
  SplitMix64 rng(kSeedSampler);
  constexpr std::uint64_t kDraws = 1000000;
  constexpr std::uint64_t kCells = 50;
  std::vector<std::uint64_t> counts(kCells + 1, 0);
  std::uint64_t beyond_table = 0;
  for (std::uint64_t i = 0; i < kDraws; ++i) {
    const Digit d = meas.sample_digit(rng);
    if (!d.is_exact()) {
      ++beyond_table;
      ++counts[kCells];
      continue;
    }
    if (d.exact() <= kCells)
      ++counts[d.exact() - 1];
    else
      ++counts[kCells];
  }
  double chi2 = 0.0;
  double mass_head = 0.0;
  for (std::uint64_t k = 1; k <= kCells; ++k) {
    const double p = std::exp(meas.log_p_at(k));
    mass_head += p;
    const double expected = kDraws * p;
    const double diff = static_cast<double>(counts[k - 1]) - expected;
    chi2 += diff * diff / expected;
  }
  {
    const double expected = kDraws * (1.0 - mass_head);
    const double diff = static_cast<double>(counts[kCells]) - expected;
    chi2 += diff * diff / expected;
  }
  const double p_tail = std::exp(meas.log_tail_P_at(meas.table_bound()));
  const double se = std::sqrt(p_tail * (1.0 - p_tail) / kDraws);
  const double tail_freq = static_cast<double>(beyond_table) / kDraws;
  const bool pass =
      chi2 <= kChi2Crit50 && std::fabs(tail_freq - p_tail) <= 3.0 * se;
  return {"C11", "sampler law: digit GOF and tail-bucket frequency", pass,
          "chi2=" + fmt(chi2) + " (crit " + fmt(kChi2Crit50) + ")" +
              " tail_freq=" + fmt(tail_freq) + " expected=" + fmt(p_tail) +
              " zscore=" + fmt((tail_freq - p_tail) / se)};
}

CheckResult check_bracket_validity() {
  const Partition part = Partition::gauss();
  const DigitMeasure meas = DigitMeasure::geometric(0.5);
  SplitMix64 rng(kSeedBracket);
  bool pass = true;
  std::string fail_detail;
  for (int trial = 0; trial < 1000 && pass; ++trial) {
    const auto depth = 1 + rng.next() % 8;
    std::vector<Digit> prefix;
    for (std::uint64_t i = 0; i < depth; ++i) prefix.push_back(meas.sample_digit(rng));
    bool exact = true;
    for (const auto& d : prefix) exact = exact && d.is_exact();
    if (!exact) continue;
    const double log_radius = std::log(1e-9) + rng.uniform() * std::log(0.9e9);
    const BallBracket b8 = ball_measure_bracket(prefix, log_radius, 8, meas, part);
    const BallBracket b12 =
        ball_measure_bracket(prefix, log_radius, 12, meas, part);
    if (!(b8.log_lo <= b8.log_hi + 1e-12) ||
        !(b12.log_lo >= b8.log_lo - 1e-9) ||
        !(b12.log_hi <= b8.log_hi + 1e-9)) {
      pass = false;
      fail_detail = " trial=" + std::to_string(trial) +
                    " lo8=" + fmt(b8.log_lo) + " hi8=" + fmt(b8.log_hi) +
                    " lo12=" + fmt(b12.log_lo) + " hi12=" + fmt(b12.log_hi);
    }
  }
  return {"C12", "ball bracket validity and cap monotonicity", pass,
          pass ? "1000 random shallow configurations" : fail_detail};
}

}  // namespace

DigitMeasure make_scan_profile_measure() {
  constexpr std::size_t kLo = 2000;
  constexpr std::size_t kHi = 21001;
  constexpr double kBeta = 1.2;
  constexpr double kAmp = 0.9;
  std::vector<double> v(kHi, 0.0);
  KahanSum seg;
  for (std::size_t k = kLo; k <= kHi; ++k) {
    v[k - 1] = kAmp * std::pow(static_cast<double>(k), -kBeta);
    seg.add(v[k - 1]);
  }
  const double coef = v[kHi - 1] * static_cast<double>(kHi) *
                      static_cast<double>(kHi);
  const double tail_mass = coef * zeta_tail(2.0, kHi + 1);
  const double head = 1.0 - seg.value() - tail_mass;
  if (head <= 0.0)
    fail(ErrorCode::Internal, "scan profile head mass went negative");
  const double per = head / static_cast<double>(kLo - 1);
  for (std::size_t k = 1; k < kLo; ++k) v[k - 1] = per;
  return DigitMeasure::from_table(std::move(v),
                                  {TailFamily::PowerLaw, 2.0},
                                  /*normalize=*/true);
}

std::vector<CheckResult> run_acceptance(const AcceptanceOptions& opt,
                                        std::ostream& log) {
  std::vector<CheckResult> out;
  auto note = [&log](const CheckResult& r) {
    log << (r.pass ? "[PASS] " : "[FAIL] ") << r.id << " " << r.name << " — "
        << r.detail << "\n";
  };
  out.push_back(check_oracle(opt.threads));
  note(out.back());
  out.push_back(check_symbolic_trend(opt.threads));
  note(out.back());
  out.push_back(check_convergence_exponent());
  note(out.back());
  out.push_back(check_tail_ratio());
  note(out.back());
  out.push_back(check_trimmed_criterion());
  note(out.back());
  const BlowPackBatch bp = run_blowpack(opt.threads);
  out.push_back(check_blowup(bp));
  note(out.back());
  out.push_back(check_planted_excursion());
  note(out.back());
  out.push_back(check_packing(bp));
  note(out.back());
  out.push_back(check_ineq_scan());
  note(out.back());
  out.push_back(check_distortion());
  note(out.back());
  out.push_back(check_sampler_law());
  note(out.back());
  out.push_back(check_bracket_validity());
  note(out.back());
  return out;
}

}  // namespace gibbsdim
