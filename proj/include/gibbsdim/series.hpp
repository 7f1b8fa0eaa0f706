#ifndef GIBBSDIM_SERIES_HPP
#define GIBBSDIM_SERIES_HPP

#include <cmath>
#include <cstdint>

#include "gibbsdim/logspace.hpp"

// Tail sums of the built-in weight families. Euler-Maclaurin with enough
// correction terms that every tail is exact to well below the 1e-9
// normalization budget for anchors >= kSeriesSwitch.

namespace gibbsdim {

inline constexpr std::uint64_t kSeriesSwitch = 64;

// sum_{m >= a} m^-s for s > 1, a >= 1.
inline double zeta_tail(double s, std::uint64_t a) {
  auto em = [s](double x) {
    const double ix = 1.0 / x;
    double t = std::pow(x, 1.0 - s) / (s - 1.0);      // integral
    t += 0.5 * std::pow(x, -s);                        // f(a)/2
    t += s * std::pow(x, -s - 1.0) / 12.0;             // -f'(a)/12
    t -= s * (s + 1.0) * (s + 2.0) * std::pow(x, -s - 3.0) / 720.0;
    t += s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) *
         std::pow(x, -s - 5.0) / 30240.0;
    (void)ix;
    return t;
  };
  if (a >= kSeriesSwitch) return em(static_cast<double>(a));
  KahanSum head;
  for (std::uint64_t m = a; m < kSeriesSwitch; ++m)
    head.add(std::pow(static_cast<double>(m), -s));
  return head.value() + em(static_cast<double>(kSeriesSwitch));
}

inline double zeta_value(double s) { return zeta_tail(s, 1); }

// Log-square weight w(n) = 1 / ((n+1) ln^2(n+1)), n >= 1.
inline double logsquare_weight(double n) {
  const double k = n + 1.0;
  const double l = std::log(k);
  return 1.0 / (k * l * l);
}

// sum_{m >= n} w(m) = sum_{k >= n+1} 1/(k ln^2 k).
inline double logsquare_tail_unnorm(std::uint64_t n) {
  auto em = [](double k) {
    // f(x) = 1/(x ln^2 x): integral 1/ln k, then f/2 and -f'/12
    const double l = std::log(k);
    double t = 1.0 / l;
    t += 0.5 / (k * l * l);
    t += (l + 2.0) / (12.0 * k * k * l * l * l);
    return t;
  };
  if (n >= kSeriesSwitch) return em(static_cast<double>(n) + 1.0);
  KahanSum head;
  for (std::uint64_t m = n; m < kSeriesSwitch; ++m)
    head.add(logsquare_weight(static_cast<double>(m)));
  return head.value() + em(static_cast<double>(kSeriesSwitch) + 1.0);
}

}  // namespace gibbsdim

#endif
