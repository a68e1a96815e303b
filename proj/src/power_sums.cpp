#include "exclusim/power_sums.hpp"

#include <array>
#include <cmath>

#include "exclusim/errors.hpp"

namespace exclusim {

namespace {

constexpr std::int64_t kDirectCutoff = 32;

// B_{2k} / (2k)! for k = 1..8.
constexpr std::array<double, 8> kBernoulliOverFactorial = {
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
};

// Sum_{r >= m} r^{-s} via Euler-Maclaurin, m >= kDirectCutoff.
double euler_maclaurin_tail(double s, double m) {
  const double ms = std::pow(m, -s);
  double sum = m * ms / (s - 1.0) + 0.5 * ms;
  // k-th correction: B_2k/(2k)! * s(s+1)...(s+2k-2) * m^{-s-2k+1}
  double rising = s;
  double mpow = ms / m;
  for (std::size_t k = 0; k < kBernoulliOverFactorial.size(); ++k) {
    sum += kBernoulliOverFactorial[k] * rising * mpow;
    const double a = s + 2.0 * static_cast<double>(k) + 1.0;
    rising *= a * (a + 1.0);
    mpow /= m * m;
  }
  return sum;
}

}  // namespace

double power_tail(double s, std::int64_t first) {
  if (!(s > 1.0)) throw DomainError("power_tail: exponent must exceed 1");
  if (first < 1) throw DomainError("power_tail: first index must be >= 1");
  if (first >= kDirectCutoff) {
    return euler_maclaurin_tail(s, static_cast<double>(first));
  }
  // Add small terms first.
  double sum = euler_maclaurin_tail(s, static_cast<double>(kDirectCutoff));
  for (std::int64_t r = kDirectCutoff - 1; r >= first; --r) {
    sum += std::pow(static_cast<double>(r), -s);
  }
  return sum;
}

}  // namespace exclusim
