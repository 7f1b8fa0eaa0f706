#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "gibbsdim/errors.hpp"
#include "gibbsdim/estimators.hpp"
#include "gibbsdim/maps.hpp"
#include "gibbsdim/rng.hpp"
#include "gibbsdim/runner.hpp"

using namespace gibbsdim;

namespace {

double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max(1e-300, std::fabs(b));
}

}  // namespace

TEST_CASE("symbolic dimension ratios") {
  const Partition gp = Partition::gauss();
  const DigitMeasure geo = DigitMeasure::geometric(0.5);
  std::vector<double> finals;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const Orbit o = Orbit::generate(geo, gp, 10000, derive_seed(555, i));
    finals.push_back(symbolic_dimension(o, 10000).ratio);
  }
  std::sort(finals.begin(), finals.end());
  const double med = finals[finals.size() / 2];
  CHECK(rel_err(med, 0.9099394498169631) < 0.05);

  const DigitMeasure atom =
      DigitMeasure::from_table({1.0}, {TailFamily::None, 0.0});
  const Orbit o = Orbit::generate(atom, gp, 100, 1);
  const CoverEstimate e = symbolic_dimension(o, 50);
  CHECK(e.ratio == 0.0);
  CHECK(e.log_measure == 0.0);
  CHECK(e.log_length == doctest::Approx(-50.0 * std::log(2.0)));
}

TEST_CASE("symbolic dimension with the gauss-map length") {
  const Partition gp = Partition::gauss();
  const DigitMeasure geo = DigitMeasure::geometric(0.5);
  const Orbit o = Orbit::generate(geo, gp, 2000, 17);
  const CoverEstimate pl = symbolic_dimension(o, 2000);
  const CoverEstimate gm = symbolic_dimension_gauss(o, 2000);
  // lengths agree up to n log 2 + log 2, so the ratios are close
  CHECK(std::fabs(gm.log_length - pl.log_length) <=
        2001.0 * std::log(2.0));
  CHECK(rel_err(gm.ratio, pl.ratio) < 0.25);
}

TEST_CASE("lower cover ratio") {
  const Partition gp = Partition::gauss();
  const DigitMeasure ls = DigitMeasure::log_square();
  const Orbit o = Orbit::generate(ls, gp, 1000, 23);

  // matches the union measure/length exactly
  for (std::uint64_t n : {2ull, 5ull, 100ull, 999ull}) {
    const CoverEstimate e = lower_cover_ratio(o, n);
    std::vector<Digit> prefix;
    for (std::uint64_t k = 1; k < n; ++k) prefix.push_back(o.digit(k));
    const double um = ls.union_log_measure(prefix, o.digit(n), std::nullopt);
    const double ul = union_log_length(MapModel::piecewise_linear(gp), prefix,
                                       o.digit(n), std::nullopt);
    CHECK(e.log_measure == doctest::Approx(um).epsilon(1e-12));
    CHECK(e.log_length == doctest::Approx(ul).epsilon(1e-12));
    // the union contains the cylinder on both axes
    CHECK(e.log_measure >= o.cum_log_p(n));
    CHECK(e.log_length >= o.cum_log_r(n));
  }
}

TEST_CASE("lower cover degenerates on the whole space") {
  const Partition gp = Partition::gauss();
  const DigitMeasure atom =
      DigitMeasure::from_table({1.0}, {TailFamily::None, 0.0});
  const Orbit o = Orbit::generate(atom, gp, 10, 3);  // digit 1 forever
  const CoverEstimate e = lower_cover_ratio(o, 1);
  CHECK(e.flag == EstimateFlag::DegenerateWholeSpace);
  CHECK(std::isnan(e.ratio));
}

TEST_CASE("planted excursions collapse the lower cover ratio") {
  const Partition gp = Partition::gauss();
  const DigitMeasure ls = DigitMeasure::log_square();
  const Orbit base = Orbit::generate(ls, gp, 10000, 37);
  double prev = 1.0;
  for (const double lstar : {1e4, 1e6, 1e9, 1e12}) {
    const Orbit planted = base.plant_excursion(10000, lstar);
    const CoverEstimate e = lower_cover_ratio(planted, 10000);
    CHECK(e.flag == EstimateFlag::Ok);
    CHECK(e.ratio < prev);  // monotone in the excursion size
    prev = e.ratio;
  }
  CHECK(lower_cover_ratio(base.plant_excursion(10000, 1e9), 10000).ratio <
        0.05);
  CHECK(lower_cover_ratio(base.plant_excursion(10000, 1e12), 10000).ratio <
        1e-4);

  // asymptotic shape: ratio ~ (|cum_log_p| + |log tail_P|) / l* on the
  // gauss partition (tail exponent alpha - 1 = 1)
  {
    const double lstar = 1e12;
    const Orbit planted = base.plant_excursion(10000, lstar);
    const CoverEstimate e = lower_cover_ratio(planted, 10000);
    const double expected =
        -(planted.cum_log_p(9999) +
          planted.measure().log_tail_P(Digit::from_log(lstar))) /
        (lstar - planted.cum_log_r(9999));
    CHECK(e.ratio == doctest::Approx(expected).epsilon(1e-12));
    CHECK(e.ratio * lstar ==
          doctest::Approx(-planted.cum_log_p(9999) + std::log(lstar) + 0.7466)
              .epsilon(0.01));
  }
}

TEST_CASE("estimators on a power-law partition") {
  const Partition p3 = Partition::power_law(3.0);
  const DigitMeasure z = DigitMeasure::zeta(1.5);
  const Orbit o = Orbit::generate(z, p3, 3000, 515);
  std::uint64_t case1 = 0, case2 = 0;
  for (std::uint64_t n = 2; n <= 3000; ++n) {
    const CoverEstimate e = case_split_upper(o, n, 50);
    REQUIRE((e.flag == EstimateFlag::Case1 || e.flag == EstimateFlag::Case2));
    CHECK(std::isfinite(e.ratio));
    CHECK(e.ratio > 0.0);
    (e.flag == EstimateFlag::Case1 ? case1 : case2) += 1;
    const CoverEstimate low = lower_cover_at(o.step(n), z, p3);
    CHECK(low.log_measure >= o.cum_log_p(n));
    CHECK(low.log_length >= o.cum_log_r(n));
  }
  CHECK(case1 > 0);
  CHECK(case2 > 0);
}

TEST_CASE("neighbor upper ratio") {
  const Partition gp = Partition::gauss();
  const DigitMeasure geo = DigitMeasure::geometric(0.5);
  const Orbit o = Orbit::generate(geo, gp, 5000, 91);

  std::uint64_t checked = 0;
  for (std::uint64_t n = 4000; n <= 5000 && checked < 50; ++n) {
    const auto d = o.digit(n);
    if (d.exact() == 1) {
      CHECK(neighbor_upper_ratio(o, n).flag == EstimateFlag::DigitOneSkipped);
      continue;
    }
    ++checked;
    const CoverEstimate e = neighbor_upper_ratio(o, n);
    CHECK(e.flag == EstimateFlag::Ok);
    // formula: three-neighbor mass over the left-neighbor radius
    const double lm =
        o.cum_log_p(n - 1) +
        log_sum_exp(geo.log_p(Digit::from_index(d.exact() - 1)),
                    geo.log_p(d), geo.log_p(Digit::from_index(d.exact() + 1)));
    const double ll = o.cum_log_r(n - 1) +
                      gp.log_r(Digit::from_index(d.exact() + 1));
    CHECK(e.log_measure == doctest::Approx(lm).epsilon(1e-12));
    CHECK(e.log_length == doctest::Approx(ll).epsilon(1e-12));
    // comparable to the symbolic ratio at the same depth
    const double sym = symbolic_dimension(o, n).ratio;
    CHECK(e.ratio > 0.5 * sym);
    CHECK(e.ratio < 1.5 * sym);
  }
  CHECK(checked == 50);
}

TEST_CASE("case split fires exhaustively and matches its formulas") {
  const Partition gp = Partition::gauss();
  const DigitMeasure ls = DigitMeasure::log_square();
  const Orbit o = Orbit::generate(ls, gp, 2000, 1771);
  const std::uint64_t k0 = 100;
  std::uint64_t case1 = 0, case2 = 0;
  for (std::uint64_t n = 2; n <= 2000; ++n) {
    const CoverEstimate e = case_split_upper(o, n, k0);
    REQUIRE((e.flag == EstimateFlag::Case1 || e.flag == EstimateFlag::Case2));
    if (e.flag == EstimateFlag::Case1) {
      ++case1;
      CHECK(e.log_measure ==
            doctest::Approx(o.cum_log_p(n - 1) + ls.log_p_at(k0)));
      CHECK(e.log_length == doctest::Approx(o.cum_log_r(n - 1)));
    } else {
      ++case2;
      CHECK(e.log_length ==
            doctest::Approx(o.cum_log_r(n - 1) + gp.log_tail_R(o.digit(n))));
      const bool anchor_ok =
          e.cover_anchor == 0 ||
          std::exp(gp.log_tail_R_at(e.cover_anchor)) <=
              std::exp(gp.log_tail_R(o.digit(n))) +
                  std::exp(gp.log_tail_R(o.digit(n).succ())) + 1e-15;
      CHECK(anchor_ok);
    }
  }
  CHECK(case1 > 0);
  CHECK(case2 > 0);

  // k0 = a_n degenerates to case 1 at that step
  for (std::uint64_t n = 2; n <= 2000; ++n) {
    const auto& d = o.digit(n);
    if (!d.is_exact()) continue;
    const CoverEstimate e = case_split_upper(o, n, d.exact());
    CHECK(e.flag == EstimateFlag::Case1);
  }

  // a planted huge digit forces case 2
  const Orbit planted = o.plant_excursion(1500, 1e9);
  CHECK(case_split_upper(planted, 1500, k0).flag == EstimateFlag::Case2);
  CHECK(case_split_upper(planted, 1500, k0).ratio < 1e-3);

  CHECK_THROWS_AS((void)case_split_upper(o, 1, k0), Error);
}

TEST_CASE("window-sum inequality scan") {
  const Partition gp = Partition::gauss();

  SUBCASE("rhs arithmetic and preconditions") {
    const DigitMeasure geo = DigitMeasure::geometric(0.5);
    CHECK_THROWS_AS(
        (void)ineqsums_check(2.0, 0.4, 0.05, 2, 100, 100, geo, gp), Error);
    CHECK_THROWS_AS(
        (void)ineqsums_check(2.0, 0.1, 0.7, 2, 100, 100, geo, gp), Error);
    CHECK_THROWS_AS(
        (void)ineqsums_check(2.0, 0.1, 0.05, 1, 100, 100, geo, gp), Error);
  }

  SUBCASE("the log-square family admits no k0 at desk scale") {
    const DigitMeasure ls = DigitMeasure::log_square();
    try {
      (void)ineqsums_check(2.0, 0.1, 0.05, 2, 10000, 10000, ls, gp);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoK0Found);
    }
  }

  SUBCASE("the steep scan profile admits an explicit k0") {
    const DigitMeasure prof = make_scan_profile_measure();
    const IneqReport rep =
        ineqsums_check(2.0, 0.1, 0.05, 2, 10000, 10000, prof, gp);
    CHECK(rep.rhs == doctest::Approx(1.1 / 1.9 + 0.05).epsilon(1e-15));
    CHECK(rep.k0 >= 700);
    CHECK(rep.k0 <= 1000);
    CHECK(rep.max_lhs <= rep.rhs);
  }
}

TEST_CASE("ball measure bracket") {
  const Partition gp = Partition::gauss();
  const DigitMeasure geo = DigitMeasure::geometric(0.5);

  SUBCASE("whole space") {
    const BallBracket b = ball_measure_bracket({}, 0.5, 8, geo, gp);
    CHECK(b.log_lo == 0.0);
    CHECK(b.log_hi == 0.0);
  }

  SUBCASE("a ball covering the left union dominates its measure") {
    for (std::uint64_t a1 : {1ull, 2ull, 5ull}) {
      const std::vector<Digit> prefix = {Digit::from_index(a1)};
      const double log_radius = gp.log_tail_R_at(a1);
      const BallBracket b = ball_measure_bracket(prefix, log_radius, 10, geo, gp);
      const double union_mass =
          geo.union_log_measure({}, Digit::from_index(a1), std::nullopt);
      CHECK(b.log_hi >= union_mass - 1e-12);
      CHECK(b.log_lo <= b.log_hi + 1e-12);
    }
  }

  SUBCASE("deeper caps only tighten the bracket") {
    SplitMix64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
      const std::uint64_t depth = 1 + rng.next() % 6;
      std::vector<Digit> prefix;
      for (std::uint64_t i = 0; i < depth; ++i)
        prefix.push_back(geo.sample_digit(rng));
      const double log_radius = -1.0 - 20.0 * rng.uniform();
      const BallBracket a = ball_measure_bracket(prefix, log_radius, 4, geo, gp);
      const BallBracket b = ball_measure_bracket(prefix, log_radius, 9, geo, gp);
      CHECK(a.log_lo <= a.log_hi + 1e-12);
      CHECK(b.log_lo >= a.log_lo - 1e-9);
      CHECK(b.log_hi <= a.log_hi + 1e-9);
    }
  }

  SUBCASE("depth cap zero flags and stays valid") {
    const std::vector<Digit> prefix = {Digit::from_index(3),
                                       Digit::from_index(2)};
    const BallBracket b = ball_measure_bracket(prefix, -8.0, 0, geo, gp);
    CHECK(b.log_lo <= b.log_hi);
  }

  const std::vector<Digit> log_only = {Digit::from_log(40.0)};
  CHECK_THROWS_AS((void)ball_measure_bracket(log_only, -1.0, 8, geo, gp),
                  Error);
  CHECK_THROWS_AS((void)ball_measure_bracket({}, -1.0, 99, geo, gp), Error);
}

TEST_CASE("cylinder sandwich against the ball bracket") {
  const Partition gp = Partition::gauss();
  const DigitMeasure geo = DigitMeasure::geometric(0.5);
  SplitMix64 rng(909);
  for (int trial = 0; trial < 100; ++trial) {
    const Orbit o = Orbit::generate(geo, gp, 8, derive_seed(909, trial));
    bool exact = true;
    std::vector<Digit> prefix;
    for (std::uint64_t n = 1; n <= 6; ++n) {
      prefix.push_back(o.digit(n));
      exact = exact && o.digit(n).is_exact();
    }
    if (!exact) continue;
    const std::uint64_t n = 6;
    // radius between the two cylinder scales
    const double log_radius = 0.5 * (o.cum_log_r(n) + o.cum_log_r(n - 1));
    const BallBracket b = ball_measure_bracket(prefix, log_radius, 12, geo, gp);
    const double sandwich = o.cum_log_p(n) / o.cum_log_r(n - 1);
    // the smallest ratio the bracket allows must respect the sandwich
    CHECK(b.log_hi / log_radius <= sandwich + 1e-9);
  }
}
