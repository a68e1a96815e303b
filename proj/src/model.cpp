#include "exclusim/model.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "exclusim/errors.hpp"
#include "exclusim/power_sums.hpp"

namespace exclusim {

double normalization_constant(double gamma) {
  if (!(gamma >= 2.0)) throw DomainError("normalization_constant: gamma must be >= 2");
  return 1.0 / (2.0 * zeta(gamma + 1.0));
}

double sigma_squared(double gamma) {
  if (!(gamma > 2.0)) {
    throw DomainError("sigma_squared: undefined for gamma <= 2 (the time scale carries a log correction)");
  }
  return 2.0 * normalization_constant(gamma) * zeta(gamma - 1.0);
}

double kappa_gamma(double gamma, int d) {
  if (d < 1) throw DomainError("kappa_gamma: dimension must be >= 1");
  if (!(gamma >= 2.0)) throw DomainError("kappa_gamma: gamma must be >= 2");
  if (gamma == 2.0) return normalization_constant(2.0) / d;
  return sigma_squared(gamma) / (2.0 * d);
}

double theta(std::int64_t n, double gamma) {
  if (!(gamma >= 2.0)) throw DomainError("theta: gamma must be >= 2");
  if (n < 1) throw DomainError("theta: n must be >= 1");
  const double nn = static_cast<double>(n);
  if (gamma > 2.0) return nn * nn;
  if (n < 2) throw DomainError("theta: gamma = 2 requires n >= 2 (log 1 = 0)");
  return nn * nn / std::log(nn);
}

bool in_region_R0(double beta, double gamma) {
  return (beta >= 1.0 && gamma == 2.0) || (beta > 1.0 && gamma > 2.0);
}

JumpKernel::JumpKernel(int d, double gamma, std::int64_t r_max)
    : d_(d), gamma_(gamma), c_gamma_(normalization_constant(gamma)), r_max_(r_max) {
  if (d < 1 || d > kMaxDim) throw DomainError("JumpKernel: dimension out of range");
  if (r_max < 1) throw DomainError("JumpKernel: r_max must be >= 1");
  tail_mass_ = 2.0 * c_gamma_ * power_tail(gamma + 1.0, r_max + 1);
}

double JumpKernel::axis_probability(std::int64_t r) const {
  if (r == 0) throw DomainError("jump_probability: zero displacement");
  const double a = static_cast<double>(std::llabs(r));
  return c_gamma_ * std::pow(a, -gamma_ - 1.0) / d_;
}

double JumpKernel::probability(std::span<const std::int64_t> displacement) const {
  if (static_cast<int>(displacement.size()) != d_) {
    throw DomainError("jump_probability: displacement has wrong dimension");
  }
  int nonzero = 0;
  std::int64_t magnitude = 0;
  for (auto v : displacement) {
    if (v != 0) {
      ++nonzero;
      magnitude = v;
    }
  }
  if (nonzero == 0) throw DomainError("jump_probability: zero displacement");
  if (nonzero > 1) return 0.0;
  return axis_probability(magnitude);
}

double jump_probability(const JumpKernel& kernel, std::span<const std::int64_t> displacement) {
  return kernel.probability(displacement);
}

KernelSums::KernelSums(int d, double gamma, std::int64_t table_cap)
    : d_(d), gamma_(gamma), c_gamma_(normalization_constant(gamma)), scale_(c_gamma_ / d),
      cap_(std::max<std::int64_t>(table_cap, 1)) {
  if (d < 1 || d > kMaxDim) throw DomainError("KernelSums: dimension out of range");
  const auto size = static_cast<std::size_t>(cap_ + 2);
  q_.assign(size, 0.0);
  mass_tail_.assign(size, 0.0);
  first_tail_.assign(size, 0.0);
  for (std::int64_t r = 1; r <= cap_ + 1; ++r) {
    q_[r] = scale_ * std::pow(static_cast<double>(r), -gamma - 1.0);
  }
  // Backward accumulation keeps the small terms exact.
  mass_tail_[cap_ + 1] = scale_ * power_tail(gamma + 1.0, cap_ + 1);
  first_tail_[cap_ + 1] = scale_ * power_tail(gamma, cap_ + 1);
  for (std::int64_t r = cap_; r >= 1; --r) {
    mass_tail_[r] = mass_tail_[r + 1] + q_[r];
    first_tail_[r] = first_tail_[r + 1] + static_cast<double>(r) * q_[r];
  }
}

double KernelSums::q(std::int64_t r) const {
  if (r < 1) throw DomainError("KernelSums::q: r must be >= 1");
  if (r <= cap_ + 1) return q_[r];
  return scale_ * std::pow(static_cast<double>(r), -gamma_ - 1.0);
}

double KernelSums::mass_tail(std::int64_t first) const {
  if (first < 1) first = 1;
  if (first <= cap_ + 1) return mass_tail_[first];
  return scale_ * power_tail(gamma_ + 1.0, first);
}

double KernelSums::first_tail(std::int64_t first) const {
  if (first < 1) first = 1;
  if (first <= cap_ + 1) return first_tail_[first];
  return scale_ * power_tail(gamma_, first);
}

double KernelSums::second_tail(std::int64_t first) const {
  if (!(gamma_ > 2.0)) throw DomainError("second_tail: sum_r r^2 q(r) diverges for gamma <= 2");
  return scale_ * power_tail(gamma_ - 1.0, std::max<std::int64_t>(first, 1));
}

double BarrierSpec::slow_factor(std::int64_t n) const {
  return alpha * std::pow(static_cast<double>(n), -beta);
}

BondClass bond_class(std::span<const std::int64_t> x, std::span<const std::int64_t> y) {
  if (x.size() != y.size() || x.empty()) throw DomainError("bond_class: dimension mismatch");
  std::size_t differing = x.size();
  int count = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != y[i]) {
      ++count;
      differing = i;
    }
  }
  if (count == 0) throw DomainError("bond_class: a bond needs two distinct sites");
  if (count > 1) throw DomainError("bond_class: sites are not axis-aligned");
  const std::size_t last = x.size() - 1;
  if (differing != last) return BondClass::Fast;
  const bool straddles = (x[last] <= -1 && y[last] >= 0) || (y[last] <= -1 && x[last] >= 0);
  return straddles ? BondClass::Slow : BondClass::Fast;
}

double bond_rate_factor(const BarrierSpec& barrier, std::int64_t n, BondClass cls) {
  if (n < 1) throw DomainError("bond_rate_factor: n must be >= 1");
  return cls == BondClass::Slow ? barrier.slow_factor(n) : 1.0;
}

LatticeBox::LatticeBox(int d, std::int64_t n, std::int64_t half_side)
    : d_(d), n_(n), half_side_(half_side) {
  if (d < 1 || d > kMaxDim) throw DomainError("LatticeBox: dimension out of range");
  if (n < 1) throw DomainError("LatticeBox: n must be >= 1");
  if (half_side < 1) throw DomainError("LatticeBox: half side must be >= 1");
  side_ = 2 * half_side * n;
  site_count_ = 1;
  for (int i = 0; i < d; ++i) site_count_ *= side_;
}

bool LatticeBox::contains(const Site& x) const noexcept {
  for (int i = 0; i < d_; ++i) {
    if (x[i] < lo() || x[i] > hi()) return false;
  }
  return true;
}

std::int64_t LatticeBox::index(const Site& x) const {
  std::int64_t idx = 0;
  for (int i = d_ - 1; i >= 0; --i) {
    if (x[i] < lo() || x[i] > hi()) throw DomainError("LatticeBox::index: site outside box");
    idx = idx * side_ + (x[i] - lo());
  }
  return idx;
}

Site LatticeBox::site(std::int64_t index) const {
  if (index < 0 || index >= site_count_) throw DomainError("LatticeBox::site: index out of range");
  Site x{};
  for (int i = 0; i < d_; ++i) {
    x[i] = index % side_ + lo();
    index /= side_;
  }
  return x;
}

Point LatticeBox::position(const Site& x) const noexcept {
  Point u{};
  const double nn = static_cast<double>(n_);
  for (int i = 0; i < d_; ++i) u[i] = static_cast<double>(x[i]) / nn;
  return u;
}

ModelConstants model_constants(double gamma, int d, std::int64_t n) {
  ModelConstants c;
  c.c_gamma = normalization_constant(gamma);
  c.has_sigma_squared = gamma > 2.0;
  if (c.has_sigma_squared) c.sigma_squared = sigma_squared(gamma);
  c.kappa_gamma = kappa_gamma(gamma, d);
  c.theta_n = theta(n, gamma);
  return c;
}

}  // namespace exclusim
