#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>
#include <vector>

#include "gibbsdim/errors.hpp"
#include "gibbsdim/measure.hpp"
#include "gibbsdim/rng.hpp"

using namespace gibbsdim;

namespace {

double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max(1e-300, std::fabs(b));
}

// independent direct-summation values for the log-square family
// (normalizer by summation to 1e8 plus a midpoint integral tail)
constexpr double kC = 0.47399142654437393;
constexpr double kLogP1 = -0.706687384306384;
constexpr double kP1000Tail = 0.06861232138848916;

}  // namespace

TEST_CASE("logsquare pointwise values") {
  const DigitMeasure m = DigitMeasure::log_square();
  CHECK(m.log_p(Digit::from_index(1)) == doctest::Approx(kLogP1).epsilon(1e-12));
  CHECK(2.0 * m.log_p(Digit::from_index(2)) ==
        doctest::Approx(-4.06654797762255).epsilon(1e-12));
  // deep tail: log P ~ log c - log l
  CHECK(m.log_tail_P(Digit::from_log(1e6)) ==
        doctest::Approx(-14.562076602874042).epsilon(1e-12));
  CHECK(rel_err(std::exp(m.log_tail_P(Digit::from_index(1000))), kP1000Tail) <
        1e-8);
}

TEST_CASE("geometric pointwise values") {
  const DigitMeasure m = DigitMeasure::geometric(0.5);
  CHECK(m.log_p(Digit::from_index(7)) ==
        doctest::Approx(-7.0 * std::log(2.0)).epsilon(1e-14));
  CHECK(m.log_tail_P(Digit::from_index(4)) ==
        doctest::Approx(-3.0 * std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("normalization at crossover indices") {
  for (const auto& m :
       {DigitMeasure::log_square(), DigitMeasure::zeta(1.5),
        DigitMeasure::geometric(0.3)}) {
    double acc = 0.0;
    for (std::uint64_t n = 1; n <= 4096; ++n) {
      acc += std::exp(m.log_p_at(n));
      if ((n & (n - 1)) == 0)
        CHECK(std::fabs(acc + std::exp(m.log_tail_P_at(n + 1)) - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("log-only evaluation is the exact formula continued") {
  const DigitMeasure m = DigitMeasure::log_square();
  // a log-only digit at the log of a small index matches the exact path
  for (std::uint64_t n : {1ull, 2ull, 10ull, 1000ull}) {
    const Digit d = Digit::from_log(std::log(static_cast<double>(n)));
    CHECK(rel_err(m.log_p(d), m.log_p_at(n)) < 1e-12);
  }
  // crossover continuity at the table bound
  const auto nt = m.table_bound();
  const Digit at_bound = Digit::from_log(std::log(static_cast<double>(nt)));
  CHECK(rel_err(m.log_p(at_bound), m.log_p_at(nt)) < 1e-4);
  CHECK(rel_err(m.log_tail_P(at_bound), m.log_tail_P_at(nt)) < 1e-4);
}

TEST_CASE("cylinder measure is the exact birkhoff sum") {
  const DigitMeasure m = DigitMeasure::geometric(0.5);
  const std::vector<Digit> digits = {Digit::from_index(1), Digit::from_index(2),
                                     Digit::from_index(3)};
  CHECK(m.cylinder_log_measure(digits) ==
        doctest::Approx(-6.0 * std::log(2.0)).epsilon(1e-14));
  double manual = 0.0;
  for (const auto& d : digits) manual += m.log_p(d);
  CHECK(m.cylinder_log_measure(digits) == manual);  // bitwise additivity
  CHECK(m.cylinder_log_measure({}) == 0.0);

  const DigitMeasure ls = DigitMeasure::log_square();
  const std::vector<Digit> twos = {Digit::from_index(2), Digit::from_index(2)};
  CHECK(ls.cylinder_log_measure(twos) ==
        doctest::Approx(-4.06654797762255).epsilon(1e-12));
}

TEST_CASE("union measure") {
  const DigitMeasure geo = DigitMeasure::geometric(0.5);
  CHECK(geo.union_log_measure({}, Digit::from_index(1), std::nullopt) == 0.0);
  CHECK(geo.union_log_measure({}, Digit::from_index(4), std::nullopt) ==
        doctest::Approx(-3.0 * std::log(2.0)).epsilon(1e-14));

  const DigitMeasure ls = DigitMeasure::log_square();
  const std::vector<Digit> one = {Digit::from_index(1)};
  CHECK(ls.union_log_measure(one, Digit::from_index(1000), std::nullopt) ==
        doctest::Approx(kLogP1 + std::log(kP1000Tail)).epsilon(1e-8));

  // single-digit union equals the cylinder measure
  for (std::uint64_t a : {1ull, 2ull, 7ull, 500ull}) {
    const std::vector<Digit> pre = {Digit::from_index(3)};
    const double u =
        ls.union_log_measure(pre, Digit::from_index(a), Digit::from_index(a));
    const std::vector<Digit> cyl = {Digit::from_index(3), Digit::from_index(a)};
    CHECK(rel_err(u, ls.cylinder_log_measure(cyl)) < 1e-12);
  }
  CHECK_THROWS_AS((void)ls.union_log_measure({}, Digit::from_index(5),
                                             Digit::from_index(3)),
                  Error);
}

TEST_CASE("quantile inversion") {
  const DigitMeasure geo = DigitMeasure::geometric(0.5);
  CHECK(geo.quantile(0.3).exact() == 1);   // u < p_1 = 1/2
  CHECK(geo.quantile(0.74).exact() == 2);  // 0.5 < u <= 0.75
  CHECK(geo.quantile(0.76).exact() == 3);

  const DigitMeasure ls = DigitMeasure::log_square();
  CHECK(ls.quantile(0.2).exact() == 1);
  const Digit far = ls.quantile(1.0 - 1e-6);
  REQUIRE_FALSE(far.is_exact());
  CHECK(far.log_value() == doctest::Approx(473991.426544374).epsilon(1e-6));
  // the inverted tail digit reproduces its own quantile within 1%
  CHECK(rel_err(std::exp(ls.log_tail_P(far)), 1e-6) < 0.01);

  // exact region: quantile is the least digit with cdf >= u
  for (double u : {0.51, 0.7, 0.9, 0.96, 0.969}) {
    const Digit d = ls.quantile(u);
    REQUIRE(d.is_exact());
    const double below =
        1.0 - std::exp(ls.log_tail_P_at(d.exact()));       // cdf(d-1)
    const double at = 1.0 - std::exp(ls.log_tail_P_at(d.exact() + 1));
    CHECK(below < u);
    CHECK(at >= u);
  }
}

TEST_CASE("sampler matches the law at desk scale") {
  const DigitMeasure ls = DigitMeasure::log_square();
  SplitMix64 rng(12345);
  const int draws = 200000;
  int ones = 0, logonly = 0;
  for (int i = 0; i < draws; ++i) {
    const Digit d = ls.sample_digit(rng);
    if (!d.is_exact()) {
      ++logonly;
      continue;
    }
    if (d.exact() == 1) ++ones;
  }
  const double p1 = std::exp(ls.log_p_at(1));
  CHECK(std::fabs(static_cast<double>(ones) / draws - p1) < 0.005);
  const double p_tail = std::exp(ls.log_tail_P_at(ls.table_bound()));
  CHECK(std::fabs(static_cast<double>(logonly) / draws - p_tail) <
        4.0 * std::sqrt(p_tail / draws));
}

TEST_CASE("zeta sampling matches its head frequencies") {
  const DigitMeasure z = DigitMeasure::zeta(1.5);
  SplitMix64 rng(606060);
  const int draws = 100000;
  int ones = 0, twos = 0;
  for (int i = 0; i < draws; ++i) {
    const Digit d = z.sample_digit(rng);
    if (!d.is_exact()) continue;
    if (d.exact() == 1) ++ones;
    if (d.exact() == 2) ++twos;
  }
  CHECK(std::fabs(static_cast<double>(ones) / draws -
                  std::exp(z.log_p_at(1))) < 0.006);
  CHECK(std::fabs(static_cast<double>(twos) / draws -
                  std::exp(z.log_p_at(2))) < 0.005);
}

TEST_CASE("entropy and lyapunov partials") {
  const DigitMeasure geo = DigitMeasure::geometric(0.5);
  const Partition gp = Partition::gauss();
  CHECK(std::fabs(geo.entropy_partial(64) - 2.0 * std::log(2.0)) <= 1e-15);

  // independent direct sum for the lyapunov series
  double direct = 0.0;
  for (int n = 2000; n >= 1; --n)
    direct += std::pow(2.0, -n) *
              (std::log(static_cast<double>(n)) + std::log(n + 1.0));
  CHECK(rel_err(geo.lyapunov_partial(gp, 1000), direct) < 1e-12);
  CHECK(geo.lyapunov_partial(gp, 1000) ==
        doctest::Approx(1.5235017686053152).epsilon(1e-13));

  const DigitMeasure ls = DigitMeasure::log_square();
  CHECK(ls.entropy_partial(1000) ==
        doctest::Approx(2.176379957118942).epsilon(1e-12));
  const double h6 = ls.entropy_partial(1000000);
  CHECK(h6 == doctest::Approx(2.684036269499194).epsilon(1e-12));
  CHECK(h6 - ls.entropy_partial(1000) ==
        doctest::Approx(0.5076563123802518).epsilon(1e-9));
}

TEST_CASE("trimmed-sum criterion series") {
  const Partition gp = Partition::gauss();
  const DigitMeasure ls = DigitMeasure::log_square();
  const double c5 = ls.trimmed_criterion_partial(gp, 100000);
  const double c6 = ls.trimmed_criterion_partial(gp, 1000000);
  CHECK(c5 == doctest::Approx(0.4368628780021959).epsilon(1e-10));
  CHECK((c6 - c5) / c6 < 1e-3);

  const DigitMeasure geo = DigitMeasure::geometric(0.5);
  CHECK(geo.trimmed_criterion_partial(gp, 200) ==
        doctest::Approx(0.9367642888849562).epsilon(1e-12));

  const DigitMeasure atom =
      DigitMeasure::from_table({1.0}, {TailFamily::None, 0.0});
  const double expect = std::log(2.0) * std::log(2.0);
  CHECK(atom.trimmed_criterion_partial(gp, 1) ==
        doctest::Approx(expect).epsilon(1e-14));
  CHECK(atom.trimmed_criterion_partial(gp, 50) ==
        doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("volume lemma dimension oracle") {
  const Partition gp = Partition::gauss();
  const auto geo = DigitMeasure::geometric(0.5).volume_lemma_dim(gp);
  CHECK_FALSE(geo.entropy_divergent);
  CHECK(geo.dimension == doctest::Approx(0.9099394498169631).epsilon(1e-10));

  const auto atom = DigitMeasure::from_table({1.0}, {TailFamily::None, 0.0})
                        .volume_lemma_dim(gp);
  CHECK_FALSE(atom.entropy_divergent);
  CHECK(atom.dimension == 0.0);

  const auto ls = DigitMeasure::log_square().volume_lemma_dim(gp);
  CHECK(ls.entropy_divergent);
  CHECK(ls.lyapunov_divergent);
}

TEST_CASE("polynomial lower bound scan") {
  const DigitMeasure ls = DigitMeasure::log_square();
  const auto ok = ls.polynomial_lower_bound_check(0.1, 1000, 1000000);
  CHECK(ok.ok);
  CHECK(ok.log_coef == doctest::Approx(-4.616599962829611).epsilon(1e-9));

  const DigitMeasure geo = DigitMeasure::geometric(0.5);
  CHECK_FALSE(geo.polynomial_lower_bound_check(0.1, 10, 1000).ok);
  CHECK_FALSE(ls.polynomial_lower_bound_check(0.0, 10, 1000).ok);
}

TEST_CASE("decay ratio curves") {
  const Partition gp = Partition::gauss();
  const DigitMeasure ls = DigitMeasure::log_square();
  const std::uint64_t cps[3] = {10000, 100000, 1000000};
  const MeasureStats st = ls.series_stats(gp, cps);
  CHECK(st.decay_pointwise[0].value ==
        doctest::Approx(0.7815999735395096).epsilon(1e-12));
  CHECK(st.decay_pointwise[2].value ==
        doctest::Approx(0.7170802981323164).epsilon(1e-12));
  // excess * log n stays near-constant across the top decades
  const double e5 = (st.decay_pointwise[1].value - 0.5) * std::log(1e5);
  const double e6 = (st.decay_pointwise[2].value - 0.5) * std::log(1e6);
  CHECK(std::fabs(e6 - e5) < 0.5 * e5);

  // geometric has no decay ratio: the pointwise curve diverges
  const DigitMeasure geo = DigitMeasure::geometric(0.5);
  const std::uint64_t one[1] = {100};
  const MeasureStats gst = geo.series_stats(gp, one);
  CHECK(gst.decay_pointwise[0].value ==
        doctest::Approx(100.0 * std::log(2.0) /
                        (2.0 * std::log(100.0) + std::log(1.01)))
            .epsilon(1e-12));

  // entropy/lyapunov partials are non-decreasing
  for (std::size_t i = 1; i < st.entropy_partials.size(); ++i) {
    CHECK(st.entropy_partials[i].value >= st.entropy_partials[i - 1].value);
    CHECK(st.lyapunov_partials[i].value >= st.lyapunov_partials[i - 1].value);
    CHECK(st.criterion_partials[i].value >= st.criterion_partials[i - 1].value);
  }
}

TEST_CASE("tail ratio curve of the log-square family") {
  const Partition gp = Partition::gauss();
  const DigitMeasure ls = DigitMeasure::log_square();
  const std::uint64_t cps[4] = {1000, 10000, 100000, 1000000};
  const MeasureStats st = ls.series_stats(gp, cps);
  CHECK(st.tail_ratio[0].value ==
        doctest::Approx(0.38786596225457315).epsilon(1e-9));
  CHECK(st.tail_ratio[3].value ==
        doctest::Approx(0.24409941141356123).epsilon(1e-9));
  for (std::size_t i = 1; i < st.tail_ratio.size(); ++i)
    CHECK(st.tail_ratio[i].value < st.tail_ratio[i - 1].value);
  CHECK(st.tail_ratio[3].value < 0.25);
}

TEST_CASE("markov1 rows, marginal, and gibbs sandwich") {
  const DigitMeasure base = DigitMeasure::log_square();
  const DigitMeasure mk = DigitMeasure::markov1(base, 0.5, -0.3);
  CHECK(mk.kind() == DigitMeasure::Kind::Markov1);
  CHECK(rel_err(mk.mass_between(1, std::nullopt), 1.0) < 1e-9);
  CHECK(mk.gibbs_bounds().lo < 1.0);
  CHECK(mk.gibbs_bounds().hi > 1.0);

  SplitMix64 rng(777);
  const double log_lo = std::log(mk.gibbs_bounds().lo) - 1e-9;
  const double log_hi = std::log(mk.gibbs_bounds().hi) + 1e-9;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::uint64_t depth = 1 + rng.next() % 1000;
    DigitSampler sampler = mk.make_sampler();
    std::vector<Digit> word;
    word.reserve(depth);
    for (std::uint64_t i = 0; i < depth; ++i) word.push_back(sampler.next(rng));
    const double ratio = mk.gibbs_log_ratio(word);
    CHECK(ratio >= log_lo);
    CHECK(ratio <= log_hi);
  }

  // bernoulli measures sit at A = B = 1 exactly
  CHECK(base.gibbs_bounds().lo == 1.0);
  CHECK(base.gibbs_bounds().hi == 1.0);
  const std::vector<Digit> w = {Digit::from_index(3), Digit::from_index(1)};
  CHECK(base.gibbs_log_ratio(w) == 0.0);
}

TEST_CASE("markov1 marginal digit-1 frequency") {
  const DigitMeasure mk =
      DigitMeasure::markov1(DigitMeasure::log_square(), 0.5, -0.3);
  SplitMix64 rng(31337);
  DigitSampler sampler = mk.make_sampler();
  const int n = 200000;
  int ones = 0;
  for (int i = 0; i < n; ++i) {
    const Digit d = sampler.next(rng);
    if (d.is_exact() && d.exact() == 1) ++ones;
  }
  CHECK(std::fabs(static_cast<double>(ones) / n - std::exp(mk.log_p_at(1))) <
        0.005);
}

TEST_CASE("measure table files") {
  const char* path = "test_measure_table.csv";
  {
    std::ofstream f(path);
    f << "1,0.5\n2,0.25\n3,0.125\n4,0.125\ntail=geometric:0.5\n";
  }
  // 0.5+0.25+0.125+0.125 + tail 0.125 = 1.125: normalization is rejected
  CHECK_THROWS_AS((void)DigitMeasure::parse(std::string("table:") + path),
                  Error);
  {
    std::ofstream f(path);
    f << "1,0.5\n2,0.25\n3,0.125\ntail=geometric:0.5\n";
  }
  const DigitMeasure m = DigitMeasure::parse(std::string("table:") + path);
  CHECK(m.log_p(Digit::from_index(2)) ==
        doctest::Approx(std::log(0.25)).epsilon(1e-14));
  CHECK(m.log_p(Digit::from_index(5)) ==
        doctest::Approx(std::log(0.125 / 4.0)).epsilon(1e-12));
  std::remove(path);
}

TEST_CASE("measure parse errors") {
  CHECK_THROWS_AS((void)DigitMeasure::parse("zeta:0.9"), Error);
  CHECK_THROWS_AS((void)DigitMeasure::parse("geometric:1.5"), Error);
  CHECK_THROWS_AS((void)DigitMeasure::parse("nope"), Error);
  CHECK(DigitMeasure::parse("zeta:2.5").kind() == DigitMeasure::Kind::Zeta);
}

TEST_CASE("concurrent sampling shares the lazily filled cdf") {
  // several threads hammer one measure; the fill is internally
  // synchronized and every thread must see the same inverse cdf
  const DigitMeasure ls = DigitMeasure::log_square();
  std::vector<std::thread> pool;
  std::atomic<bool> ok{true};
  for (int t = 0; t < 4; ++t) {
    pool.emplace_back([&ls, &ok, t]() {
      SplitMix64 rng(1000 + t);
      for (int i = 0; i < 20000; ++i) {
        const Digit d = ls.sample_digit(rng);
        if (d.is_exact() && d.exact() < 1) ok = false;
      }
      // deterministic spot checks against the single-threaded answer
      if (ls.quantile(0.9).exact() != 113) ok = false;
    });
  }
  for (auto& th : pool) th.join();
  CHECK(ok.load());
}

TEST_CASE("assumption-1 ratio bounds recorded on the marginal") {
  const DigitMeasure ls = DigitMeasure::log_square();
  CHECK(ls.ratio_bounds().lo > 0.0);
  CHECK(ls.ratio_bounds().hi <= 1.0 + 1e-12);
  CHECK(ls.monotone_from() == 1);
}
