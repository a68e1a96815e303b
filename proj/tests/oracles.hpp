#pragma once

#include <cmath>
#include <cstdint>
#include <map>

// Reference values computed in the tests themselves, independent of the library.
namespace oracle {

// sum_{r>=1} r^{-s}: partial sum to N plus the midpoint of the integral sandwich
// int_{N+1}^inf <= tail <= int_N^inf.
inline double zeta(double s, std::int64_t N = 2000000) {
  long double acc = 0.0L;
  for (std::int64_t r = N; r >= 1; --r) acc += std::pow(static_cast<long double>(r), -static_cast<long double>(s));
  const long double lo = std::pow(static_cast<long double>(N + 1), 1.0L - s) / (s - 1.0L);
  const long double hi = std::pow(static_cast<long double>(N), 1.0L - s) / (s - 1.0L);
  return static_cast<double>(acc + 0.5L * (lo + hi));
}

inline double c_gamma(double gamma) {
  static std::map<double, double> memo;
  if (auto it = memo.find(gamma); it != memo.end()) return it->second;
  return memo[gamma] = 1.0 / (2.0 * zeta(gamma + 1.0));
}

inline double bump(double u) { return std::abs(u) < 1.0 ? std::pow(1.0 - u * u, 3) : 0.0; }

}  // namespace oracle
