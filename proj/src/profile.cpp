#include "exclusim/profile.hpp"

#include <algorithm>
#include <cmath>

#include "exclusim/errors.hpp"

namespace exclusim {

double ProfileFactor::value(double u) const {
  switch (kind) {
    case Kind::One: return 1.0;
    case Kind::LeftIndicator: return u < 0.0 ? 1.0 : 0.0;
    case Kind::RightIndicator: return u >= 0.0 ? 1.0 : 0.0;
    case Kind::Bump: {
      const double z = (u - center) / width;
      if (std::abs(z) >= 1.0) return 0.0;
      const double v = 1.0 - z * z;
      return v * v * v;
    }
    case Kind::Custom: return u < lo || u > hi ? 0.0 : custom(u);
  }
  return 0.0;
}

double ProfileFactor::support_lo() const { return kind == Kind::Bump ? center - width : lo; }
double ProfileFactor::support_hi() const { return kind == Kind::Bump ? center + width : hi; }

namespace {

void check_range(const Profile& p) {
  if (p.lower() < 0.0 || p.upper() > 1.0) throw InitializationError("Profile: values leave [0,1]");
}

std::vector<ProfileFactor> ones(int d) {
  if (d < 1 || d > kMaxDim) throw DomainError("Profile: dimension out of range");
  return std::vector<ProfileFactor>(static_cast<std::size_t>(d));
}

}  // namespace

Profile Profile::constant(int d, double c) {
  Profile p{d, c, 0.0, ones(d), "constant"};
  check_range(p);
  return p;
}

Profile Profile::step(int d, double left, double right) {
  Profile p{d, right, left - right, ones(d), "step"};
  p.factors.back().kind = ProfileFactor::Kind::LeftIndicator;
  check_range(p);
  return p;
}

Profile Profile::bump(int d, double base, double amplitude, double center, double width) {
  if (!(width > 0.0)) throw DomainError("Profile::bump: width must be positive");
  Profile p{d, base, amplitude, ones(d), "bump"};
  for (auto& f : p.factors) {
    f.kind = ProfileFactor::Kind::Bump;
    f.center = center;
    f.width = width;
  }
  check_range(p);
  return p;
}

Profile Profile::custom(int d, double base, double amplitude, std::function<double(double)> f, double lo, double hi) {
  if (!(hi > lo)) throw DomainError("Profile::custom: empty support");
  Profile p{d, base, amplitude, ones(d), "custom"};
  auto& last = p.factors.back();
  last.kind = ProfileFactor::Kind::Custom;
  last.custom = std::move(f);
  last.lo = lo;
  last.hi = hi;
  return p;
}

double Profile::operator()(const Point& u) const {
  double prod = amplitude;
  for (int j = 0; j < d && prod != 0.0; ++j) prod *= factors[static_cast<std::size_t>(j)].value(u[static_cast<std::size_t>(j)]);
  return base + prod;
}

ProfileFn Profile::fn() const {
  return [p = *this](const Point& u) { return p(u); };
}

double Profile::lower() const { return std::min(base, base + amplitude); }
double Profile::upper() const { return std::max(base, base + amplitude); }

void validate_reference(const ReferenceProfile& ref, double spacing) {
  if (!(ref.a > 0.0 && ref.a < ref.b && ref.b < 1.0)) {
    throw ConfigError("reference profile: need 0 < a_h < b_h < 1");
  }
  if (!(ref.far_value >= ref.a && ref.far_value <= ref.b)) {
    throw ConfigError("reference profile: A_h must lie in [a_h, b_h]");
  }
  if (!(ref.far_radius > 0.0) || !(ref.lipschitz > 0.0) || !(spacing > 0.0)) {
    throw ConfigError("reference profile: K_h, L_h and the grid spacing must be positive");
  }
  const int d = ref.h.d;
  const double extent = 2.0 * ref.far_radius;
  spacing = std::max(spacing, 2.0 * extent / std::pow(1.0e6, 1.0 / d));
  const auto m = static_cast<std::int64_t>(std::ceil(2.0 * extent / spacing));
  std::array<std::int64_t, kMaxDim> idx{};
  auto point = [&](const std::array<std::int64_t, kMaxDim>& k) {
    Point u{};
    for (int i = 0; i < d; ++i) u[static_cast<std::size_t>(i)] = -extent + spacing * static_cast<double>(k[static_cast<std::size_t>(i)]);
    return u;
  };
  while (true) {
    const Point u = point(idx);
    const double v = ref.h(u);
    if (v < ref.a - 1e-12 || v > ref.b + 1e-12) throw ConfigError("reference profile: value outside [a_h, b_h]");
    double norm = 0.0;
    for (int i = 0; i < d; ++i) norm = std::max(norm, std::abs(u[static_cast<std::size_t>(i)]));
    if (norm >= ref.far_radius && std::abs(v - ref.far_value) > 1e-12) {
      throw ConfigError("reference profile: not equal to A_h for |u| >= K_h");
    }
    for (int i = 0; i < d; ++i) {
      auto next = idx;
      if (++next[static_cast<std::size_t>(i)] > m) continue;
      const double w = ref.h(point(next));
      if (std::abs(w - v) > ref.lipschitz * spacing * (1.0 + 1e-9)) {
        throw ConfigError("reference profile: Lipschitz ratio exceeds L_h");
      }
    }
    int i = 0;
    for (; i < d; ++i) {
      if (++idx[static_cast<std::size_t>(i)] <= m) break;
      idx[static_cast<std::size_t>(i)] = 0;
    }
    if (i == d) break;
  }
}

}  // namespace exclusim
