#pragma once

#include <cmath>
#include <cstdint>
#include <map>

#include "exclusim/test_function.hpp"
#include "oracles.hpp"

// Direct line sums of the jump kernel applied to a test function.
namespace oracle {

// sum_{r > R} r^{-s}: direct sum to N, then Euler-Maclaurin for the rest
inline double tail_sum(double s, std::int64_t R) {
  static std::map<std::pair<double, std::int64_t>, double> memo;
  if (auto it = memo.find({s, R}); it != memo.end()) return it->second;
  const std::int64_t N = R + 1000;
  long double acc = 0.0L;
  for (std::int64_t r = N - 1; r > R; --r) acc += std::pow(static_cast<long double>(r), -static_cast<long double>(s));
  const long double x = static_cast<long double>(N);
  const long double em = std::pow(x, 1.0L - s) / (s - 1.0L) + 0.5L * std::pow(x, -s) +
                         s / 12.0L * std::pow(x, -s - 1.0L) -
                         s * (s + 1.0L) * (s + 2.0L) / 720.0L * std::pow(x, -s - 3.0L);
  return memo[{s, R}] = static_cast<double>(acc + em);
}

struct Brute {
  const exclusim::TestFunctionPair& G;
  std::int64_t n;
  double gamma;
  double c;

  Brute(const exclusim::TestFunctionPair& g, std::int64_t nn, double gm) : G(g), n(nn), gamma(gm), c(c_gamma(gm)) {}

  double at(const exclusim::Site& x, double s) const {
    exclusim::Point u{};
    for (int j = 0; j < G.d(); ++j) u[j] = static_cast<double>(x[j]) / static_cast<double>(n);
    return G.value(s, u);
  }

  // sum over y on the line through x in direction j, restricted to y_j in the given side filter
  template <class Filter>
  double line(const exclusim::Site& x, int j, double s, Filter keep) const {
    const double q0 = c / G.d();
    const auto R = static_cast<std::int64_t>(std::ceil(2 * G.support_radius() * n)) + std::abs(x[j]) + 2;
    const double gx = at(x, s);
    double acc = 0.0;
    for (std::int64_t r = 1; r <= R; ++r) {
      for (int sg : {-1, 1}) {
        exclusim::Site y = x;
        y[j] += sg * r;
        if (!keep(y[j])) continue;
        acc += q0 * std::pow(static_cast<double>(r), -gamma - 1) * (at(y, s) - gx);
      }
    }
    // beyond R only -G(x) survives; count the sides admitted by the filter
    exclusim::Site far_plus = x, far_minus = x;
    far_plus[j] += R + 1;
    far_minus[j] -= R + 1;
    const int sides = (keep(far_plus[j]) ? 1 : 0) + (keep(far_minus[j]) ? 1 : 0);
    return acc - sides * gx * q0 * tail_sum(gamma + 1, R);
  }

  double K_j(const exclusim::Site& x, int j, double s) const {
    return line(x, j, s, [](std::int64_t) { return true; });
  }
  double K_B(const exclusim::Site& x, double s) const {
    double v = 0.0;
    for (int j = 0; j < G.d(); ++j) v += K_j(x, j, s);
    return v;
  }
  // cross-hyperplane part of the last direction
  double K_S(const exclusim::Site& x, double s) const {
    const int j = G.d() - 1;
    const bool plus = x[j] >= 0;
    return line(x, j, s, [plus](std::int64_t y) { return plus ? y < 0 : y >= 0; });
  }
};

}  // namespace oracle
