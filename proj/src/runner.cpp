#include "gibbsdim/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include "gibbsdim/errors.hpp"
#include "gibbsdim/logspace.hpp"
#include "gibbsdim/maps.hpp"

namespace gibbsdim {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

unsigned pick_threads(unsigned requested, std::uint64_t work_items) {
  unsigned t = requested ? requested : std::thread::hardware_concurrency();
  if (t == 0) t = 1;
  return static_cast<unsigned>(
      std::min<std::uint64_t>(t, std::max<std::uint64_t>(work_items, 1)));
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

const char* library_version() { return kVersion; }

// ---------------------------------------------------------------------------
// batch engine

namespace {

OrbitSummary scan_one_orbit(const DigitMeasure& measure, const Partition& part,
                            std::uint64_t orbit_id, std::uint64_t length,
                            std::uint64_t seed,
                            std::span<const std::uint64_t> cps,
                            const BatchOptions& opt) {
  OrbitSummary s;
  s.orbit_id = orbit_id;
  s.seed = seed;
  if (opt.with_freq) s.freq.counts.assign(opt.freq_cap, 0);

  OrbitScan scan(measure, part, length, seed);
  StepView v;
  ContinuantState continuants;
  double min_lower = std::numeric_limits<double>::infinity();
  double max_blowup = 0.0;
  double max_case = -std::numeric_limits<double>::infinity();
  CoverEstimate neighbor_full;
  neighbor_full.kind = EstimatorKind::NeighborUpper;
  neighbor_full.flag = EstimateFlag::DigitOneSkipped;
  neighbor_full.ratio = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t neighbor_n = 0;
  std::size_t ci = 0;
  while (scan.next(v)) {
    if (opt.gauss_length) continuants.advance(v.digit.log_value());
    if (opt.with_freq) {
      ++s.freq.total;
      if (v.digit.is_exact() && v.digit.exact() <= opt.freq_cap)
        ++s.freq.counts[v.digit.exact() - 1];
      else
        ++s.freq.overflow;
    }
    if (opt.with_blowup && v.n >= 2)
      max_blowup = std::max(max_blowup, v.cum_log_r / v.cum_log_r_prev);
    if (opt.with_lower) {
      const CoverEstimate e = lower_cover_at(v, measure, part);
      if (e.flag == EstimateFlag::Ok)
        min_lower = std::min(min_lower, e.ratio);
    }
    if (opt.with_neighbor &&
        !(v.digit.is_exact() && v.digit.exact() == 1)) {
      const CoverEstimate e = neighbor_upper_at(v, measure, part);
      if (e.flag == EstimateFlag::Ok) {
        neighbor_full = e;
        neighbor_n = v.n;
      }
    }
    if (opt.with_case_split && v.n >= std::max<std::uint64_t>(2, opt.burn_in)) {
      const CoverEstimate e =
          case_split_at(v, measure, part, opt.case_k0);
      max_case = std::max(max_case, e.ratio);
    }
    if (ci < cps.size() && v.n == cps[ci]) {
      CheckpointStat c;
      c.n = v.n;
      c.cum_log_p = v.cum_log_p;
      c.cum_log_r = v.cum_log_r;
      c.max_x = v.max_x;
      c.argmax = v.argmax;
      c.s_total = -v.cum_log_r;
      c.s_trimmed = c.s_total - v.max_x;
      c.symbolic_log_length =
          opt.gauss_length ? continuants.log_cyl_length() : v.cum_log_r;
      c.symbolic = v.cum_log_p / c.symbolic_log_length;
      const CoverEstimate low = lower_cover_at(v, measure, part);
      c.lower_cover = low.ratio;
      c.lower_full = low;
      c.min_lower_cover = min_lower;
      c.max_blowup = max_blowup;
      c.max_case_split = max_case;
      c.neighbor_last = neighbor_full.ratio;
      c.neighbor_n = neighbor_n;
      c.neighbor_full = neighbor_full;
      s.checkpoints.push_back(c);
      ++ci;
    }
  }
  return s;
}

}  // namespace

std::vector<OrbitSummary> run_batch(const DigitMeasure& measure,
                                    const Partition& part,
                                    std::uint64_t orbits, std::uint64_t length,
                                    std::uint64_t master_seed,
                                    std::span<const std::uint64_t> checkpoints,
                                    const BatchOptions& opt) {
  if (orbits < 1) fail(ErrorCode::InvalidArgument, "need at least one orbit");
  std::vector<std::uint64_t> cps(checkpoints.begin(), checkpoints.end());
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  for (const auto c : cps)
    if (c < 1 || c > length)
      fail(ErrorCode::InvalidArgument, "checkpoint outside [1, length]");

  std::vector<OrbitSummary> out(orbits);
  std::atomic<std::uint64_t> next{0};
  const unsigned threads = pick_threads(opt.threads, orbits);
  auto worker = [&]() {
    for (;;) {
      const std::uint64_t id = next.fetch_add(1);
      if (id >= orbits) return;
      out[id] = scan_one_orbit(measure, part, id, length,
                               derive_seed(master_seed, id), cps, opt);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return out;
}

// ---------------------------------------------------------------------------
// subcommands

namespace {

struct OutputSink {
  std::ofstream file;
  std::ostream* os = nullptr;
  std::string path;

  OutputSink(const std::string& out_path, std::ostream& fallback) {
    if (out_path.empty()) {
      os = &fallback;
    } else {
      path = out_path;
      file.open(out_path);
      if (!file) fail(ErrorCode::IoError, "cannot open output: " + out_path);
      os = &file;
    }
  }
  std::ostream& stream() { return *os; }
};

void write_manifest_file(const ExperimentConfig& cfg, const std::string& sub,
                         double wall_seconds,
                         const std::vector<CheckResult>& checks) {
  if (cfg.output.empty()) return;
  std::ofstream mf(cfg.output + ".manifest");
  if (!mf) return;  // manifest is best effort on top of the main output
  mf << "subcommand: " << sub << "\n";
  mf << "config: " << config_echo(cfg) << "\n";
  mf << "generator: " << SplitMix64::name() << "\n";
  mf << "version: " << kVersion << "\n";
  mf << "wall_clock_s: " << wall_seconds << "\n";
  for (const auto& c : checks)
    mf << "check " << c.id << " [" << (c.pass ? "PASS" : "FAIL") << "] "
       << c.name << ": " << c.detail << "\n";
}

void manifest_line(std::ostream& os, const std::string& sub,
                   const ExperimentConfig& cfg) {
  os << "# manifest: subcommand=" << sub << " " << config_echo(cfg)
     << " generator=" << SplitMix64::name() << " version=" << kVersion
     << "\n";
}

struct Models {
  Partition partition;
  DigitMeasure measure;
};

Models build_models(const ExperimentConfig& cfg) {
  try {
    return Models{Partition::parse(cfg.partition),
                  DigitMeasure::parse(cfg.measure)};
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument)
      fail(ErrorCode::ParseError, std::string("bad model spec: ") + e.what());
    throw;
  }
}

void dump_estimate(std::ostream& os, std::uint64_t orbit_id,
                   const CoverEstimate& e) {
  os << orbit_id << "," << e.depth << "," << estimator_kind_name(e.kind) << ","
     << g17(e.log_measure) << "," << g17(e.log_length) << "," << g17(e.ratio)
     << "," << estimate_flag_name(e.flag) << "\n";
}

int sub_orbit_stats(const ExperimentConfig& cfg, std::ostream& out,
                    std::vector<CheckResult>* checks) {
  (void)checks;
  Models mm = build_models(cfg);
  const auto cps = cfg.effective_checkpoints();
  BatchOptions opt;
  opt.with_blowup = true;
  opt.with_lower = true;
  opt.threads = cfg.threads;
  opt.burn_in = cfg.burn_in;
  const auto batch = run_batch(mm.measure, mm.partition, cfg.orbits,
                               cfg.length, cfg.seed, cps, opt);
  OutputSink sink(cfg.output, out);
  manifest_line(sink.stream(), "orbit-stats", cfg);
  sink.stream() << "orbit_id,n,cum_log_p,cum_log_r,max_X,argmax,S_trimmed\n";
  for (const auto& s : batch)
    for (const auto& c : s.checkpoints)
      sink.stream() << s.orbit_id << "," << c.n << "," << g17(c.cum_log_p)
                    << "," << g17(c.cum_log_r) << "," << g17(c.max_x) << ","
                    << c.argmax << "," << g17(c.s_trimmed) << "\n";
  return 0;
}

int sub_dimension(const ExperimentConfig& cfg, std::ostream& out,
                  std::vector<CheckResult>* checks) {
  Models mm = build_models(cfg);
  const auto cps = cfg.effective_checkpoints();
  BatchOptions opt;
  opt.gauss_length = cfg.model == "gauss";
  if (opt.gauss_length && cfg.length > ContinuantState::kDepthCap)
    fail(ErrorCode::InvalidArgument,
         "gauss-map lengths: continuant depth cap is 1e6");
  opt.with_lower = true;
  opt.with_neighbor = true;
  opt.with_case_split = true;
  opt.with_blowup = true;
  opt.case_k0 = cfg.k0;
  opt.burn_in = cfg.burn_in;
  opt.threads = cfg.threads;
  const auto batch = run_batch(mm.measure, mm.partition, cfg.orbits,
                               cfg.length, cfg.seed, cps, opt);
  OutputSink sink(cfg.output, out);
  manifest_line(sink.stream(), "dimension", cfg);
  sink.stream() << "orbit_id,n,kind,log_measure,log_length,ratio,flag\n";
  for (const auto& s : batch)
    for (const auto& c : s.checkpoints) {
      CoverEstimate sym;
      sym.depth = c.n;
      sym.kind = EstimatorKind::Symbolic;
      sym.log_measure = c.cum_log_p;
      sym.log_length = c.symbolic_log_length;
      sym.ratio = c.symbolic;
      dump_estimate(sink.stream(), s.orbit_id, sym);
      dump_estimate(sink.stream(), s.orbit_id, c.lower_full);
      dump_estimate(sink.stream(), s.orbit_id, c.neighbor_full);
    }

  // trend check: infinite-entropy measures must show decreasing medians
  const auto vl = mm.measure.volume_lemma_dim(mm.partition,
                                              std::min<std::uint64_t>(
                                                  cfg.length, 1000000));
  std::vector<double> medians;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    std::vector<double> col;
    for (const auto& s : batch) col.push_back(s.checkpoints[i].symbolic);
    medians.push_back(median(std::move(col)));
  }
  bool pass = true;
  std::ostringstream detail;
  if (vl.entropy_divergent) {
    for (std::size_t i = 1; i < medians.size(); ++i)
      pass = pass && medians[i] < medians[i - 1];
    detail << "decreasing-median trend";
  } else {
    const auto [lo, hi] = std::minmax_element(medians.begin(), medians.end());
    pass = (*hi - *lo) <= 0.05 * std::max(1e-9, std::fabs(*hi));
    detail << "stable-median trend";
  }
  detail << " medians=";
  for (std::size_t i = 0; i < medians.size(); ++i)
    detail << (i ? "," : "") << medians[i];
  if (checks)
    checks->push_back({"trend", "symbolic ratio trend", pass, detail.str()});
  return pass ? 0 : 1;
}

int sub_forced_excursion(const ExperimentConfig& cfg, std::ostream& out,
                         std::vector<CheckResult>* checks) {
  Models mm = build_models(cfg);
  if (cfg.length > 2000000)
    fail(ErrorCode::InvalidArgument,
         "forced-excursion stores full orbits; keep length <= 2e6");
  const std::uint64_t pos = cfg.position ? cfg.position : cfg.length;
  if (pos < 1 || pos > cfg.length)
    fail(ErrorCode::InvalidArgument, "plant position outside the orbit");
  const Orbit base =
      Orbit::generate(mm.measure, mm.partition, cfg.length, cfg.seed);
  OutputSink sink(cfg.output, out);
  manifest_line(sink.stream(), "forced-excursion", cfg);
  sink.stream() << "orbit_id,n,kind,log_measure,log_length,ratio,flag\n";
  const CoverEstimate before = lower_cover_ratio(base, pos);
  dump_estimate(sink.stream(), 0, before);
  const Orbit planted = base.plant_excursion(pos, cfg.lstar);
  const CoverEstimate after = lower_cover_ratio(planted, pos);
  dump_estimate(sink.stream(), 1, after);
  const bool pass = after.flag == EstimateFlag::Ok &&
                    (before.flag != EstimateFlag::Ok ||
                     after.ratio <= before.ratio + 1e-12);
  if (checks)
    checks->push_back({"excursion", "planted excursion drives the ratio down",
                       pass,
                       "before=" + g17(before.ratio) +
                           " after=" + g17(after.ratio) +
                           " lstar=" + g17(cfg.lstar)});
  return pass ? 0 : 1;
}

int sub_ineq_check(const ExperimentConfig& cfg, std::ostream& out,
                   std::vector<CheckResult>* checks) {
  Models mm = build_models(cfg);
  OutputSink sink(cfg.output, out);
  manifest_line(sink.stream(), "ineq-check", cfg);
  char rhs_buf[32];
  std::snprintf(rhs_buf, sizeof rhs_buf, "%.5f",
                (1.0 + cfg.delta) / (cfg.alpha - cfg.delta) + cfg.eta);
  try {
    const IneqReport rep =
        ineqsums_check(cfg.alpha, cfg.delta, cfg.eta, cfg.kmin, cfg.kmax,
                       cfg.nmax, mm.measure, mm.partition);
    sink.stream() << "rhs,k0,max_lhs,arg_k,arg_n\n"
                  << rhs_buf << "," << rep.k0 << "," << g17(rep.max_lhs) << ","
                  << rep.arg_k << "," << rep.arg_n << "\n";
    if (checks)
      checks->push_back({"ineq", "window-sum inequality scan", true,
                         std::string("rhs=") + rhs_buf +
                             " k0=" + std::to_string(rep.k0) +
                             " max_lhs=" + g17(rep.max_lhs)});
    return 0;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoK0Found) throw;
    sink.stream() << "rhs,k0,max_lhs,arg_k,arg_n\n"
                  << rhs_buf << ",none,,,\n";
    if (checks)
      checks->push_back({"ineq", "window-sum inequality scan", false,
                         std::string("rhs=") + rhs_buf + " " + e.what()});
    return 1;
  }
}

int sub_series_check(const ExperimentConfig& cfg, std::ostream& out,
                     std::vector<CheckResult>* checks) {
  Models mm = build_models(cfg);
  auto cps = cfg.effective_checkpoints();
  const MeasureStats st = mm.measure.series_stats(mm.partition, cps);
  OutputSink sink(cfg.output, out);
  manifest_line(sink.stream(), "series-check", cfg);
  sink.stream() << "series,n,value\n";
  auto dump = [&](const char* name, const std::vector<SeriesPoint>& pts) {
    for (const auto& pt : pts)
      sink.stream() << name << "," << pt.n << "," << g17(pt.value) << "\n";
  };
  dump("entropy", st.entropy_partials);
  dump("lyapunov", st.lyapunov_partials);
  dump("decay_pointwise", st.decay_pointwise);
  dump("decay_cesaro", st.decay_cesaro);
  dump("tail_ratio", st.tail_ratio);
  dump("criterion", st.criterion_partials);
  const auto vl = mm.measure.volume_lemma_dim(
      mm.partition, std::min<std::uint64_t>(cfg.length, 1000000));
  sink.stream() << "entropy_divergent,0," << (vl.entropy_divergent ? 1 : 0)
                << "\n";
  sink.stream() << "lyapunov_divergent,0," << (vl.lyapunov_divergent ? 1 : 0)
                << "\n";
  if (checks)
    checks->push_back({"series", "series sweep", true,
                       std::string("entropy ") +
                           (vl.entropy_divergent ? "divergent" : "convergent")});
  return 0;
}

int sub_oracle(const ExperimentConfig& cfg, std::ostream& out,
               std::vector<CheckResult>* checks) {
  if (cfg.model != "pl")
    fail(ErrorCode::InvalidArgument,
         "the finite-entropy oracle compares piecewise-linear quantities");
  Models mm = build_models(cfg);
  const auto vl = mm.measure.volume_lemma_dim(mm.partition);
  OutputSink sink(cfg.output, out);
  manifest_line(sink.stream(), "oracle", cfg);
  if (vl.entropy_divergent) {
    sink.stream() << "status,detail\n"
                  << "divergent,entropy partial sums keep growing\n";
    if (checks)
      checks->push_back({"oracle", "finite-entropy dimension oracle", false,
                         "entropy series diverges; h/lambda undefined"});
    return 1;
  }
  const auto cps = cfg.effective_checkpoints();
  BatchOptions opt;
  opt.threads = cfg.threads;
  const auto batch = run_batch(mm.measure, mm.partition, cfg.orbits,
                               cfg.length, cfg.seed, cps, opt);
  std::vector<double> finals;
  for (const auto& s : batch) finals.push_back(s.checkpoints.back().symbolic);
  const double med = median(std::move(finals));
  const double target = vl.dimension;
  const double rel = std::fabs(med - target) / target;
  sink.stream() << "median_symbolic,h_over_lambda,entropy,lyapunov,rel_err\n"
                << g17(med) << "," << g17(target) << "," << g17(vl.entropy)
                << "," << g17(vl.lyapunov) << "," << g17(rel) << "\n";
  const bool pass = rel <= 0.02;
  if (checks)
    checks->push_back({"oracle", "median symbolic vs h/lambda", pass,
                       "median=" + g17(med) + " target=" + g17(target) +
                           " rel_err=" + g17(rel)});
  return pass ? 0 : 1;
}

int sub_report(const ExperimentConfig& cfg, std::ostream& out,
               std::vector<CheckResult>* checks) {
  AcceptanceOptions opt;
  opt.threads = cfg.threads;
  const auto results = run_acceptance(opt, out);
  bool all = true;
  for (const auto& r : results) {
    out << (r.pass ? "[PASS] " : "[FAIL] ") << r.id << " " << r.name << " — "
        << r.detail << "\n";
    all = all && r.pass;
    if (checks) checks->push_back(r);
  }
  return all ? 0 : 1;
}

}  // namespace

int run_subcommand(const std::string& sub, ExperimentConfig cfg,
                   std::ostream& out, std::ostream& err) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  std::vector<CheckResult> checks;
  int code = 0;
  try {
    if (sub == "orbit-stats") code = sub_orbit_stats(cfg, out, &checks);
    else if (sub == "dimension") code = sub_dimension(cfg, out, &checks);
    else if (sub == "forced-excursion") code = sub_forced_excursion(cfg, out, &checks);
    else if (sub == "ineq-check") code = sub_ineq_check(cfg, out, &checks);
    else if (sub == "series-check") code = sub_series_check(cfg, out, &checks);
    else if (sub == "oracle") code = sub_oracle(cfg, out, &checks);
    else if (sub == "report") code = sub_report(cfg, out, &checks);
    else
      fail(ErrorCode::ParseError, "unknown subcommand '" + sub + "'");
  } catch (const Error& e) {
    const double wall =
        std::chrono::duration<double>(Clock::now() - t0).count();
    if (e.code() == ErrorCode::ParseError || e.code() == ErrorCode::IoError) {
      err << "error: " << e.what() << "\n";
      return 2;
    }
    checks.push_back({"error", error_code_name(e.code()), false, e.what()});
    write_manifest_file(cfg, sub, wall, checks);
    err << "error: " << e.what() << "\n";
    return 1;
  }
  const double wall = std::chrono::duration<double>(Clock::now() - t0).count();
  write_manifest_file(cfg, sub, wall, checks);
  return code;
}

}  // namespace gibbsdim
