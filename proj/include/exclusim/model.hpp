#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace exclusim {

inline constexpr int kMaxDim = 4;

// Integer lattice site; only the first d entries are meaningful.
using Site = std::array<std::int64_t, kMaxDim>;
// Point of R^d; only the first d entries are meaningful.
using Point = std::array<double, kMaxDim>;

// c_gamma = 1 / (2 sum_{r>=1} r^{-gamma-1}).
double normalization_constant(double gamma);

// sigma^2 = 2 sum_{r>=1} c_gamma r^{1-gamma}; only defined for gamma > 2.
double sigma_squared(double gamma);

// Diffusion coefficient of the limiting heat equation.
double kappa_gamma(double gamma, int d);

// Time acceleration: n^2 for gamma > 2, n^2 / ln(n) for gamma == 2.
double theta(std::int64_t n, double gamma);

// (beta, gamma) region in which the barrier decouples the two half spaces.
bool in_region_R0(double beta, double gamma);

// Heavy-tailed axis-aligned jump law p(x) = c_gamma |x|^{-gamma-1} / d.
class JumpKernel {
 public:
  JumpKernel(int d, double gamma, std::int64_t r_max);

  int d() const noexcept { return d_; }
  double gamma() const noexcept { return gamma_; }
  double c_gamma() const noexcept { return c_gamma_; }
  std::int64_t r_max() const noexcept { return r_max_; }
  // P(|jump| > r_max).
  double tail_mass() const noexcept { return tail_mass_; }

  // p(r e_j) for r >= 1, any direction j.
  double axis_probability(std::int64_t r) const;
  // p(x) for a displacement with d coordinates; zero unless axis-aligned.
  double probability(std::span<const std::int64_t> displacement) const;

 private:
  int d_;
  double gamma_;
  double c_gamma_;
  std::int64_t r_max_;
  double tail_mass_;
};

double jump_probability(const JumpKernel& kernel, std::span<const std::int64_t> displacement);

// Exact one-sided sums of the axis kernel q(r) = p(r e_j):
//   mass_tail(R)  = sum_{r>=R} q(r)
//   first_tail(R) = sum_{r>=R} r q(r)
// Tabulated up to a cap and evaluated analytically beyond it.
class KernelSums {
 public:
  KernelSums(int d, double gamma, std::int64_t table_cap);

  int d() const noexcept { return d_; }
  double gamma() const noexcept { return gamma_; }
  double c_gamma() const noexcept { return c_gamma_; }
  std::int64_t table_cap() const noexcept { return cap_; }

  double q(std::int64_t r) const;
  double mass_tail(std::int64_t first) const;
  double first_tail(std::int64_t first) const;
  // sum_{r>=first} r^2 q(r); requires gamma > 2.
  double second_tail(std::int64_t first) const;

 private:
  int d_;
  double gamma_;
  double c_gamma_;
  double scale_;  // c_gamma / d
  std::int64_t cap_;
  std::vector<double> q_;
  std::vector<double> mass_tail_;
  std::vector<double> first_tail_;
};

struct BarrierSpec {
  double alpha = 1.0;
  double beta = 0.0;

  // alpha n^{-beta}
  double slow_factor(std::int64_t n) const;
};

enum class BondClass { Fast, Slow };

// Bond classification; throws DomainError for pairs that are not axis-aligned.
BondClass bond_class(std::span<const std::int64_t> x, std::span<const std::int64_t> y);

double bond_rate_factor(const BarrierSpec& barrier, std::int64_t n, BondClass cls);

// Finite box {-L n, ..., L n - 1}^d with coordinate 0 varying fastest.
class LatticeBox {
 public:
  LatticeBox(int d, std::int64_t n, std::int64_t half_side);

  int d() const noexcept { return d_; }
  std::int64_t n() const noexcept { return n_; }
  std::int64_t half_side() const noexcept { return half_side_; }
  std::int64_t side() const noexcept { return side_; }
  std::int64_t lo() const noexcept { return -half_side_ * n_; }
  std::int64_t hi() const noexcept { return half_side_ * n_ - 1; }
  std::int64_t site_count() const noexcept { return site_count_; }

  bool contains(const Site& x) const noexcept;
  std::int64_t index(const Site& x) const;
  Site site(std::int64_t index) const;
  Point position(const Site& x) const noexcept;  // x / n

 private:
  int d_;
  std::int64_t n_;
  std::int64_t half_side_;
  std::int64_t side_;
  std::int64_t site_count_;
};

struct ModelConstants {
  double c_gamma = 0.0;
  bool has_sigma_squared = false;
  double sigma_squared = 0.0;
  double kappa_gamma = 0.0;
  double theta_n = 0.0;
};

ModelConstants model_constants(double gamma, int d, std::int64_t n);

}  // namespace exclusim
