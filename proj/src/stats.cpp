#include "exclusim/stats.hpp"

#include <boost/math/distributions/poisson.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "exclusim/errors.hpp"

namespace exclusim {

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double standard_error(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  return sample_sd(x) / std::sqrt(static_cast<double>(x.size()));
}

double mean_square(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v * v;
  return s / static_cast<double>(x.size());
}

double t_test_zero_mean(std::span<const double> x) {
  if (x.size() < 2) throw DomainError("t_test_zero_mean: need at least two samples");
  const double m = mean(x);
  const double se = standard_error(x);
  if (se == 0.0) return m == 0.0 ? 1.0 : 0.0;
  const boost::math::students_t dist(static_cast<double>(x.size() - 1));
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(m / se)));
}

double poisson_quantile(double mean, double q) {
  if (!(mean >= 0.0) || !(q > 0.0 && q < 1.0)) throw DomainError("poisson_quantile: bad arguments");
  if (mean == 0.0) return 0.0;
  using namespace boost::math::policies;
  using Policy = policy<discrete_quantile<integer_round_up>>;
  return boost::math::quantile(boost::math::poisson_distribution<double, Policy>(mean), q);
}

bool strictly_decreasing(std::span<const double> x) {
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] < x[i - 1])) return false;
  }
  return true;
}

}  // namespace exclusim
