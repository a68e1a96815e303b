#pragma once

#include <functional>
#include <string>
#include <vector>

#include "exclusim/configuration.hpp"
#include "exclusim/model.hpp"

namespace exclusim {

// 1-D factor of a separable profile.
struct ProfileFactor {
  enum class Kind { One, LeftIndicator, RightIndicator, Bump, Custom };
  Kind kind = Kind::One;
  double center = 0.0;
  double width = 1.0;
  std::function<double(double)> custom;  // Custom: supported on [lo, hi]
  double lo = 0.0;
  double hi = 0.0;

  double value(double u) const;
  bool compact() const { return kind == Kind::Bump || kind == Kind::Custom; }
  double support_lo() const;
  double support_hi() const;
};

// g(u) = base + amplitude * prod_j f_j(u_j), values in [0,1].
struct Profile {
  int d = 1;
  double base = 0.0;
  double amplitude = 0.0;
  std::vector<ProfileFactor> factors;
  std::string descriptor;

  static Profile constant(int d, double c);
  // left on u_d < 0, right on u_d >= 0
  static Profile step(int d, double left, double right);
  // base + amplitude * prod_j (1 - ((u_j - center)/width)^2)^3
  static Profile bump(int d, double base, double amplitude, double center, double width);
  // base + amplitude * f(u_d) with f supported on [lo, hi]
  static Profile custom(int d, double base, double amplitude, std::function<double(double)> f, double lo, double hi);

  double operator()(const Point& u) const;
  ProfileFn fn() const;
  // bounds on the range of g
  double lower() const;
  double upper() const;
};

// Reference profile h with the constants of the reference class: values in
// [a, b] inside (0,1), Lipschitz constant lipschitz, equal to far_value for
// |u| >= far_radius.
struct ReferenceProfile {
  Profile h;
  double a = 0.0;
  double b = 1.0;
  double lipschitz = 0.0;
  double far_radius = 0.0;
  double far_value = 0.0;
};

// Checks the three conditions on a grid of the given spacing over
// [-2 far_radius, 2 far_radius]^d; throws ConfigError naming the violated one.
void validate_reference(const ReferenceProfile& ref, double spacing = 0.01);

}  // namespace exclusim
