#include "exclusim/pde.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "exclusim/errors.hpp"

namespace exclusim {

const char* equation_name(HydroEquation eq) {
  switch (eq) {
    case HydroEquation::FreeHeat: return "free-heat";
    case HydroEquation::NeumannHyperplane: return "neumann-hyperplane";
    case HydroEquation::NeumannWithTrace: return "neumann-with-trace";
    case HydroEquation::Unsupported: return "unsupported";
  }
  return "unknown";
}

const char* test_space_name(TestSpace space) {
  switch (space) {
    case TestSpace::Dif: return "S_Dif";
    case TestSpace::Neu: return "S_Neu";
    case TestSpace::Disc: return "S_Disc";
  }
  return "unknown";
}

PDESelector select_hydrodynamic_pde(double alpha, double beta, double gamma, int d, bool entropy_bound) {
  if (!(alpha > 0.0) || !(beta >= 0.0) || !(gamma >= 2.0) || d < 1) {
    throw DomainError("select_hydrodynamic_pde: parameters outside the model ranges");
  }
  PDESelector sel;
  sel.kappa = kappa_gamma(gamma, d);
  const bool r0 = in_region_R0(beta, gamma);
  auto unsupported = [&](const char* code, const std::string& message) {
    sel.equation = HydroEquation::Unsupported;
    sel.refusal_code = code;
    sel.message = message;
    return sel;
  };
  if (beta == 1.0 && gamma > 2.0) {
    return unsupported("critical-barrier-long-range",
                       "beta = 1 with gamma > 2 is not covered by the hydrodynamic-limit case table; "
                       "the boundary condition at the barrier is not identified for this scaling");
  }
  if (!entropy_bound) {
    if (alpha == 1.0 && beta == 0.0) {
      sel.equation = HydroEquation::FreeHeat;
      sel.space = TestSpace::Dif;
    } else if (r0) {
      sel.equation = HydroEquation::NeumannHyperplane;
      sel.space = TestSpace::Neu;
    } else {
      return unsupported("no-entropy-bound",
                         "without an entropy bound the hydrodynamic-limit case table covers only "
                         "(alpha, beta) = (1, 0) and (beta, gamma) in R0; supply a reference profile");
    }
    return sel;
  }
  if (beta < 1.0) {
    sel.equation = HydroEquation::FreeHeat;
    sel.space = TestSpace::Dif;
  } else if (r0 && (d >= 2 || gamma == 2.0)) {
    sel.equation = HydroEquation::NeumannHyperplane;
    sel.space = TestSpace::Neu;
  } else {
    sel.equation = HydroEquation::NeumannWithTrace;
    sel.space = TestSpace::Disc;
  }
  return sel;
}

void require_supported(const PDESelector& selector) {
  if (selector.equation == HydroEquation::Unsupported) throw Refusal(selector.refusal_code, selector.message);
}

namespace {

constexpr double kQuadTolerance = 1e-12;
constexpr double kAccuracyLimit = 1e-8;

double gaussian(double x, double sigma) {
  return std::exp(-0.5 * x * x / (sigma * sigma)) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

// int_a^b f(v) k(v) dv for a compact factor, adaptive Gauss-Kronrod.
template <class K>
double adaptive(const ProfileFactor& f, double a, double b, K kernel) {
  if (!(b > a)) return 0.0;
  double error = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [&](double y) { return f.value(y) * kernel(y); }, a, b, 15, kQuadTolerance, &error);
  if (!(error <= kAccuracyLimit)) throw AccuracyError("heat solution quadrature did not converge", error);
  return v;
}

// int_lo^hi (1 - ((v - c)/w)^2)^3 N(u, sigma^2)(dv) in closed form, [lo, hi] inside the support.
// With v = u + sigma z the integrand is a degree 6 polynomial in z against the standard
// normal density, so only truncated normal moments are needed.
double bump_smooth(const ProfileFactor& f, double lo, double hi, double sigma, double u) {
  if (!(hi > lo)) return 0.0;
  const double za = (lo - u) / sigma, zb = (hi - u) / sigma;
  const double a0 = (u - f.center) / f.width, a1 = sigma / f.width;
  const std::array<double, 3> q{1.0 - a0 * a0, -2.0 * a0 * a1, -a1 * a1};
  std::array<double, 7> p{};
  std::array<double, 5> q2{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) q2[i + j] += q[i] * q[j];
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) p[i + j] += q2[i] * q[j];

  const double rt2 = std::numbers::sqrt2;
  auto phi = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); };
  double m0;
  if (za >= 0.0) m0 = 0.5 * (std::erfc(za / rt2) - std::erfc(zb / rt2));
  else if (zb <= 0.0) m0 = 0.5 * (std::erfc(-zb / rt2) - std::erfc(-za / rt2));
  else m0 = 1.0 - 0.5 * std::erfc(zb / rt2) - 0.5 * std::erfc(-za / rt2);
  const double pa = phi(za), pb = phi(zb);
  std::array<double, 7> m{};
  m[0] = m0;
  m[1] = pa - pb;
  double za_pow = za, zb_pow = zb;  // z^{k-1}
  for (int k = 2; k <= 6; ++k) {
    m[k] = (k - 1) * m[k - 2] - (zb_pow * pb - za_pow * pa);
    za_pow *= za;
    zb_pow *= zb;
  }
  double sum = 0.0;
  for (int k = 0; k <= 6; ++k) sum += p[k] * m[k];
  return sum;
}

// Free-space Gaussian smoothing of one factor.
double smooth_free(const ProfileFactor& f, double sigma, double u) {
  using K = ProfileFactor::Kind;
  switch (f.kind) {
    case K::One: return 1.0;
    case K::LeftIndicator: return 0.5 * std::erfc(u / (sigma * std::numbers::sqrt2));
    case K::RightIndicator: return 0.5 * std::erfc(-u / (sigma * std::numbers::sqrt2));
    case K::Bump: return bump_smooth(f, f.support_lo(), f.support_hi(), sigma, u);
    case K::Custom: {
      const double a = std::max(f.support_lo(), u - 12.0 * sigma);
      const double b = std::min(f.support_hi(), u + 12.0 * sigma);
      return adaptive(f, a, b, [&](double v) { return gaussian(u - v, sigma); });
    }
  }
  return 0.0;
}

// Half-line smoothing with even reflection about 0, on the side of u.
double smooth_neumann(const ProfileFactor& f, double sigma, double u) {
  using K = ProfileFactor::Kind;
  const bool plus = u >= 0.0;
  switch (f.kind) {
    case K::One: return 1.0;
    case K::LeftIndicator: return plus ? 0.0 : 1.0;
    case K::RightIndicator: return plus ? 1.0 : 0.0;
    case K::Bump: {
      // image term: v -> -v maps the bump to one centred at -center
      ProfileFactor mirror = f;
      mirror.center = -f.center;
      const double a = plus ? std::max(f.support_lo(), 0.0) : f.support_lo();
      const double b = plus ? f.support_hi() : std::min(f.support_hi(), 0.0);
      return bump_smooth(f, a, b, sigma, u) + bump_smooth(mirror, -b, -a, sigma, u);
    }
    case K::Custom: {
      double a = f.support_lo(), b = f.support_hi();
      if (plus) a = std::max(a, 0.0);
      else b = std::min(b, 0.0);
      // both images decay beyond 12 sigma of u or -u
      const double reach = 12.0 * sigma;
      const double lo = std::max(a, std::min(u, -u) - reach);
      const double hi = std::min(b, std::max(u, -u) + reach);
      return adaptive(f, lo, hi, [&](double v) { return gaussian(u - v, sigma) + gaussian(u + v, sigma); });
    }
  }
  return 0.0;
}

double solve(const Profile& g, double kappa, double t, const Point& u, bool neumann) {
  if (!(t >= 0.0)) throw DomainError("heat solution: t must be nonnegative");
  if (!(kappa > 0.0)) throw DomainError("heat solution: kappa must be positive");
  if (t == 0.0 || g.amplitude == 0.0) return g(u);
  const double sigma = std::sqrt(2.0 * kappa * t);
  double prod = g.amplitude;
  for (int j = 0; j < g.d && prod != 0.0; ++j) {
    const auto& f = g.factors[static_cast<std::size_t>(j)];
    const double x = u[static_cast<std::size_t>(j)];
    prod *= neumann && j == g.d - 1 ? smooth_neumann(f, sigma, x) : smooth_free(f, sigma, x);
  }
  return g.base + prod;
}

using Gauss = boost::math::quadrature::gauss<double, 10>;

// Composite Gauss-Legendre over [a, b] with the given number of panels.
template <class F>
double composite(F&& f, double a, double b, int panels) {
  if (!(b > a)) return 0.0;
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) sum += Gauss::integrate(f, a + p * h, a + (p + 1) * h);
  return sum;
}

// Sorted breakpoints of G along axis j inside [-b, b]: factor support
// edges (G is piecewise polynomial between them) and 0 on the last axis.
std::vector<double> breakpoints(const TestFunctionPair& G, int j) {
  const double b = G.support_radius();
  std::vector<double> pts{-b, b};
  if (j == G.d() - 1) pts.push_back(0.0);
  for (Side side : {Side::Minus, Side::Plus}) {
    for (const auto& t : G.branch(side)) {
      const Factor1D& f = t.factors[static_cast<std::size_t>(j)];
      for (double c : {f.center, -f.center}) {
        pts.push_back(c - f.width);
        pts.push_back(c + f.width);
        if (f.kind == Factor1D::Kind::Bump) break;
      }
    }
  }
  std::vector<double> out;
  for (double p : pts) {
    if (p >= -b && p <= b) out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Integral over the support box of G, split at the breakpoints of each axis.
template <class F>
double integrate_support(F&& f, const TestFunctionPair& G, int panels) {
  const int d = G.d();
  std::vector<std::vector<double>> cuts;
  for (int j = 0; j < d; ++j) cuts.push_back(breakpoints(G, j));
  Point u{};
  std::function<double(int)> level = [&](int j) -> double {
    auto inner = [&](double x) {
      u[static_cast<std::size_t>(j)] = x;
      return j + 1 == d ? f(u) : level(j + 1);
    };
    const auto& c = cuts[static_cast<std::size_t>(j)];
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < c.size(); ++k) sum += composite(inner, c[k], c[k + 1], panels);
    return sum;
  };
  return level(0);
}

double bulk_residual(const DensityFn& rho, const TestFunctionPair& G, const Profile& g, double kappa, double t,
                     int panels) {
  const int d = G.d();
  if (G.support_radius() == 0.0) return 0.0;
  const double end = integrate_support([&](const Point& u) { return rho(t, u) * G.value(t, u); }, G, panels);
  const double start = integrate_support([&](const Point& u) { return g(u) * G.value(0.0, u); }, G, panels);
  if (t == 0.0) return end - start;
  auto at_time = [&](double s) {
    return integrate_support(
        [&](const Point& u) {
          double lap = 0.0;
          for (int j = 0; j < d; ++j) lap += G.d2(j, s, u);
          return rho(s, u) * (kappa * lap + G.time_derivative(s, u));
        },
        G, panels);
  };
  // s = t w^2 removes the sqrt(s) behaviour near s = 0
  const double integral = composite([&](double w) { return 2.0 * t * w * at_time(t * w * w); }, 0.0, 1.0, panels);
  return end - start - integral;
}

double boundary_term(const TestFunctionPair& G, double kappa, double t, const TraceFn& traces, int panels) {
  if (t == 0.0) return 0.0;
  const Point origin{};
  auto integrand = [&](double w) {
    const double s = t * w * w;
    const auto [minus, plus] = traces(s);
    const double gm = G.normal_derivative_at_zero(Side::Minus, s, origin);
    const double gp = G.normal_derivative_at_zero(Side::Plus, s, origin);
    return 2.0 * t * w * (gm * minus - gp * plus);
  };
  return kappa * composite(integrand, 0.0, 1.0, panels);
}

}  // namespace

double heat_solution_free(const Profile& g, double kappa, double t, const Point& u) {
  return solve(g, kappa, t, u, false);
}

double heat_solution_neumann(const Profile& g, double kappa, double t, const Point& u) {
  return solve(g, kappa, t, u, true);
}

double heat_solution(HydroEquation eq, const Profile& g, double kappa, double t, const Point& u) {
  switch (eq) {
    case HydroEquation::FreeHeat: return heat_solution_free(g, kappa, t, u);
    case HydroEquation::NeumannHyperplane:
    case HydroEquation::NeumannWithTrace: return heat_solution_neumann(g, kappa, t, u);
    case HydroEquation::Unsupported: break;
  }
  throw DomainError("heat_solution: unsupported equation");
}

ResidualResult weak_residual_dif(const DensityFn& rho, const TestFunctionPair& G, const Profile& g, double kappa,
                                 double t, const ResidualOptions& options) {
  if (!(t >= 0.0)) throw DomainError("weak_residual_dif: t must be nonnegative");
  if (options.panels < 1) throw DomainError("weak_residual_dif: need at least one panel");
  const double coarse = bulk_residual(rho, G, g, kappa, t, options.panels);
  const double fine = bulk_residual(rho, G, g, kappa, t, 2 * options.panels);
  return {fine, std::abs(fine - coarse)};
}

ResidualResult weak_residual_neu(const DensityFn& rho, const TestFunctionPair& G, const Profile& g, double kappa,
                                 double t, const TraceFn& traces, const ResidualOptions& options) {
  if (G.d() != 1) throw DomainError("weak_residual_neu: boundary traces are defined for d = 1 only");
  if (!traces) throw PreconditionError("weak_residual_neu: boundary traces are required");
  if (!(t >= 0.0)) throw DomainError("weak_residual_neu: t must be nonnegative");
  if (options.panels < 1) throw DomainError("weak_residual_neu: need at least one panel");
  const double coarse =
      bulk_residual(rho, G, g, kappa, t, options.panels) + boundary_term(G, kappa, t, traces, options.panels);
  const double fine = bulk_residual(rho, G, g, kappa, t, 2 * options.panels) +
                      boundary_term(G, kappa, t, traces, 2 * options.panels);
  return {fine, std::abs(fine - coarse)};
}

double continuum_pairing(const TestFunctionPair& G, const Profile& g, HydroEquation eq, double kappa, double t,
                         int panels) {
  if (G.support_radius() == 0.0) return 0.0;
  return integrate_support([&](const Point& u) { return G.value(t, u) * heat_solution(eq, g, kappa, t, u); }, G,
                           panels);
}

}  // namespace exclusim
