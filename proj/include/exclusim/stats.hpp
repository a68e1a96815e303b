#pragma once

#include <span>

namespace exclusim {

double mean(std::span<const double> x);
// unbiased sample standard deviation
double sample_sd(std::span<const double> x);
double standard_error(std::span<const double> x);
double mean_square(std::span<const double> x);

// Two-sided p-value of the one-sample t-test for zero mean. Returns 1 when
// all samples are identical and zero, 0 when identical and nonzero.
double t_test_zero_mean(std::span<const double> x);

// Smallest k with P(Poisson(mean) <= k) >= q.
double poisson_quantile(double mean, double q);

bool strictly_decreasing(std::span<const double> x);

}  // namespace exclusim
