#pragma once

#include <cstdint>

namespace exclusim {

// Sum_{r >= first} r^{-s} for s > 1 and first >= 1.
//
// Terms below a cutoff are summed directly and the remainder is evaluated
// with the Euler-Maclaurin expansion, so the result is accurate to a few ulp
// even when the tail is many orders of magnitude below the head.
double power_tail(double s, std::int64_t first);

// Riemann zeta function for real s > 1.
inline double zeta(double s) { return power_tail(s, 1); }

}  // namespace exclusim
