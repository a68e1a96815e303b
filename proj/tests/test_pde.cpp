#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "exclusim/errors.hpp"
#include "exclusim/model.hpp"
#include "exclusim/pde.hpp"
#include "oracles.hpp"

using namespace exclusim;

namespace {

Point pt(double a, double b = 0.0) { return Point{a, b}; }

double gauss(double x, double var) { return std::exp(-x * x / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var); }

// midpoint convolution of f with the heat kernel, optionally reflected at 0
template <class F>
double convolve(F f, double kappa, double t, double u, double lo, double hi, bool reflect, int steps = 40000) {
  const double var = 2.0 * kappa * t;
  const double h = (hi - lo) / steps;
  double acc = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double v = lo + (i + 0.5) * h;
    if (reflect && (v < 0.0) != (u < 0.0)) continue;
    acc += f(v) * (gauss(u - v, var) + (reflect ? gauss(u + v, var) : 0.0));
  }
  return acc * h;
}

double bump_factor(double u, double c, double w) { return oracle::bump((u - c) / w); }

}  // namespace

TEST_CASE("selector case table") {
  struct Row {
    double alpha, beta, gamma;
    int d;
    bool entropy;
    HydroEquation eq;
  };
  const Row rows[] = {
      {1.0, 0.0, 3.0, 1, false, HydroEquation::FreeHeat},
      {1.0, 0.0, 2.0, 2, false, HydroEquation::FreeHeat},
      {2.0, 1.0, 2.0, 1, false, HydroEquation::NeumannHyperplane},
      {1.0, 1.5, 3.0, 2, false, HydroEquation::NeumannHyperplane},
      {1.0, 0.5, 3.0, 1, false, HydroEquation::Unsupported},
      {2.0, 0.0, 3.0, 1, false, HydroEquation::Unsupported},
      {1.0, 1.0, 3.0, 1, false, HydroEquation::Unsupported},
      {1.0, 1.0, 3.0, 2, true, HydroEquation::Unsupported},
      {3.0, 0.5, 3.0, 1, true, HydroEquation::FreeHeat},
      {1.0, 0.0, 2.5, 3, true, HydroEquation::FreeHeat},
      {1.0, 2.0, 3.0, 2, true, HydroEquation::NeumannHyperplane},
      {1.0, 1.0, 2.0, 1, true, HydroEquation::NeumannHyperplane},
      {1.0, 3.0, 2.0, 1, true, HydroEquation::NeumannHyperplane},
      {1.0, 2.0, 3.0, 1, true, HydroEquation::NeumannWithTrace},
      {0.5, 1.2, 4.0, 1, true, HydroEquation::NeumannWithTrace},
  };
  for (const auto& r : rows) {
    CAPTURE(r.alpha);
    CAPTURE(r.beta);
    CAPTURE(r.gamma);
    CAPTURE(r.d);
    CAPTURE(r.entropy);
    const auto sel = select_hydrodynamic_pde(r.alpha, r.beta, r.gamma, r.d, r.entropy);
    CHECK(sel.equation == r.eq);
    switch (r.eq) {
      case HydroEquation::FreeHeat: CHECK(sel.space == TestSpace::Dif); break;
      case HydroEquation::NeumannHyperplane: CHECK(sel.space == TestSpace::Neu); break;
      case HydroEquation::NeumannWithTrace: CHECK(sel.space == TestSpace::Disc); break;
      case HydroEquation::Unsupported: CHECK_THROWS_AS(require_supported(sel), Refusal); break;
    }
  }
}

TEST_CASE("selector diffusion constant") {
  // gamma = 3, d = 1: sigma^2/2 = c_3 zeta(2) = 7.5 / pi^2
  CHECK(select_hydrodynamic_pde(1, 0, 3, 1, false).kappa == doctest::Approx(7.5 / (std::numbers::pi * std::numbers::pi)).epsilon(1e-10));
  CHECK(select_hydrodynamic_pde(1, 0, 3, 2, false).kappa == doctest::Approx(3.75 / (std::numbers::pi * std::numbers::pi)).epsilon(1e-10));
  // gamma = 2: c_2 / d
  const double c2 = oracle::c_gamma(2.0);
  CHECK(select_hydrodynamic_pde(1, 0, 2, 1, false).kappa == doctest::Approx(c2).epsilon(1e-12));
  CHECK(select_hydrodynamic_pde(1, 0, 2, 2, false).kappa == doctest::Approx(c2 / 2).epsilon(1e-12));
}

TEST_CASE("refusal codes and messages") {
  try {
    require_supported(select_hydrodynamic_pde(1, 1, 3, 1, true));
    FAIL("expected refusal");
  } catch (const Refusal& e) {
    CHECK(e.code() == "critical-barrier-long-range");
    CHECK(std::string(e.what()) ==
          "beta = 1 with gamma > 2 is not covered by the hydrodynamic-limit case table; "
          "the boundary condition at the barrier is not identified for this scaling");
  }
  try {
    require_supported(select_hydrodynamic_pde(2, 0.5, 3, 1, false));
    FAIL("expected refusal");
  } catch (const Refusal& e) {
    CHECK(e.code() == "no-entropy-bound");
    CHECK(std::string(e.what()) ==
          "without an entropy bound the hydrodynamic-limit case table covers only "
          "(alpha, beta) = (1, 0) and (beta, gamma) in R0; supply a reference profile");
  }
}

TEST_CASE("selector domain") {
  CHECK_THROWS_AS(select_hydrodynamic_pde(0, 0, 3, 1, false), DomainError);
  CHECK_THROWS_AS(select_hydrodynamic_pde(1, -1, 3, 1, false), DomainError);
  CHECK_THROWS_AS(select_hydrodynamic_pde(1, 0, 1.5, 1, false), DomainError);
  CHECK_THROWS_AS(select_hydrodynamic_pde(1, 0, 3, 0, false), DomainError);
}

TEST_CASE("free heat: constants and step") {
  const double kappa = 0.3;
  const auto c = Profile::constant(2, 0.37);
  CHECK(heat_solution_free(c, kappa, 0.7, pt(0.2, -1.1)) == doctest::Approx(0.37).epsilon(1e-12));
  const auto step = Profile::step(1, 1.0, 0.0);
  for (double t : {0.01, 0.1, 1.0}) {
    for (double u : {-0.5, -0.1, 0.0, 0.05, 0.4}) {
      const double want = 0.5 * std::erfc(u / (2.0 * std::sqrt(kappa * t)));
      CHECK(heat_solution_free(step, kappa, t, pt(u)) == doctest::Approx(want).epsilon(1e-9));
    }
  }
  // t = 0 returns the data
  CHECK(heat_solution_free(step, kappa, 0.0, pt(-0.1)) == 1.0);
  CHECK(heat_solution_free(step, kappa, 0.0, pt(0.1)) == 0.0);
}

TEST_CASE("free heat: bump data against direct convolution") {
  const double kappa = 0.25, t = 0.05;
  const auto g = Profile::bump(1, 0.1, 0.6, 0.3, 0.8);
  for (double s : {1e-4, t, 2.0}) {
    for (double u : {-0.6, -0.1, 0.0, 0.3, 0.9, 1.3}) {
      const double want =
          0.1 + 0.6 * convolve([](double v) { return bump_factor(v, 0.3, 0.8); }, kappa, s, u, -0.5, 1.1, false);
      CHECK(heat_solution_free(g, kappa, s, pt(u)) == doctest::Approx(want).epsilon(1e-7));
    }
  }
  // d = 2 factorizes
  const auto g2 = Profile::bump(2, 0.0, 1.0, 0.3, 0.8);
  const double a = convolve([](double v) { return bump_factor(v, 0.3, 0.8); }, kappa, t, 0.1, -0.5, 1.1, false);
  const double b = convolve([](double v) { return bump_factor(v, 0.3, 0.8); }, kappa, t, 0.5, -0.5, 1.1, false);
  CHECK(heat_solution_free(g2, kappa, t, pt(0.1, 0.5)) == doctest::Approx(a * b).epsilon(1e-7));
}

TEST_CASE("neumann heat") {
  const double kappa = 0.25, t = 0.08;
  SUBCASE("step stays put") {
    const auto step = Profile::step(1, 1.0, 0.0);
    for (double u : {-0.3, -1e-6, 0.0, 0.2}) {
      CHECK(heat_solution_neumann(step, kappa, t, pt(u)) == doctest::Approx(u < 0 ? 1.0 : 0.0).epsilon(1e-12));
    }
    const auto step2 = Profile::step(2, 0.2, 0.7);
    CHECK(heat_solution_neumann(step2, kappa, t, pt(0.4, -0.01)) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(heat_solution_neumann(step2, kappa, t, pt(0.4, 0.01)) == doctest::Approx(0.7).epsilon(1e-12));
  }
  SUBCASE("reflected convolution") {
    const auto g = Profile::bump(1, 0.0, 1.0, 0.3, 0.8);
    auto f = [](double v) { return bump_factor(v, 0.3, 0.8); };
    for (double u : {-0.4, -0.05, 0.02, 0.3, 0.8}) {
      const double want = convolve(f, kappa, t, u, -0.5, 1.1, true);
      CHECK(heat_solution_neumann(g, kappa, t, pt(u)) == doctest::Approx(want).epsilon(1e-7));
    }
  }
  SUBCASE("even data: no difference from the free solution") {
    const auto g = Profile::bump(2, 0.2, 0.5, 0.0, 0.9);
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> U(-1.2, 1.2);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Point u = pt(U(gen), U(gen));
      worst = std::max(worst, std::abs(heat_solution_neumann(g, kappa, t, u) - heat_solution_free(g, kappa, t, u)));
    }
    CHECK(worst < 1e-6);
  }
  SUBCASE("zero normal derivative") {
    const auto g = Profile::bump(1, 0.0, 1.0, 0.3, 0.8);
    const double h = 1e-4;
    auto rho = [&](double u) { return heat_solution_neumann(g, kappa, t, pt(u)); };
    auto free = [&](double u) { return heat_solution_free(g, kappa, t, pt(u)); };
    const double dplus = (-3.0 * rho(0.0) + 4.0 * rho(h) - rho(2 * h)) / (2 * h);
    const double dminus = (3.0 * rho(-1e-12) - 4.0 * rho(-h) + rho(-2 * h)) / (2 * h);
    const double dfree = (free(h) - free(-h)) / (2 * h);
    CHECK(std::abs(dplus) < 1e-4);
    CHECK(std::abs(dminus) < 1e-4);
    CHECK(std::abs(dfree) > 0.1);
  }
  SUBCASE("mass on each side") {
    const auto g = Profile::bump(1, 0.0, 1.0, 0.3, 0.8);
    auto side_mass = [&](double lo, double hi, auto&& f) {
      const int steps = 20000;
      const double h = (hi - lo) / steps;
      double acc = 0.0;
      for (int i = 0; i < steps; ++i) acc += f(lo + (i + 0.5) * h);
      return acc * h;
    };
    auto data = [](double v) { return bump_factor(v, 0.3, 0.8); };
    auto sol = [&](double v) { return heat_solution_neumann(g, kappa, 0.2, pt(v)); };
    CHECK(side_mass(0.0, 4.0, sol) == doctest::Approx(side_mass(0.0, 1.1, data)).epsilon(1e-6));
    CHECK(side_mass(-4.0, 0.0, sol) == doctest::Approx(side_mass(-0.5, 0.0, data)).epsilon(1e-6));
    auto fsol = [&](double v) { return heat_solution_free(g, kappa, 0.2, pt(v)); };
    CHECK(side_mass(-4.0, 4.0, fsol) == doctest::Approx(0.8 * 32.0 / 35.0).epsilon(1e-6));
  }
}

TEST_CASE("solutions stay within the data range") {
  const auto g = Profile::step(2, 0.2, 0.9);
  const auto b = Profile::bump(2, 0.1, 0.7, -0.2, 0.6);
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> U(-1.5, 1.5), T(0.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const Point u = pt(U(gen), U(gen));
    const double t = T(gen);
    for (double v : {heat_solution_free(g, 0.3, t, u), heat_solution_neumann(g, 0.3, t, u)}) {
      CHECK(v >= 0.2 - 1e-12);
      CHECK(v <= 0.9 + 1e-12);
    }
    for (double v : {heat_solution_free(b, 0.3, t, u), heat_solution_neumann(b, 0.3, t, u)}) {
      CHECK(v >= 0.1 - 1e-12);
      CHECK(v <= 0.8 + 1e-12);
    }
  }
  CHECK_THROWS_AS(heat_solution(HydroEquation::Unsupported, g, 0.3, 0.1, pt(0)), DomainError);
}

TEST_CASE("continuum pairing against direct quadrature") {
  const double kappa = kappa_gamma(3.0, 1), t = 0.1;
  const auto step = Profile::step(1, 0.9, 0.1);
  const auto G = named_test_function("bump", 1);
  const int steps = 40000;
  double want = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double u = -1.0 + (i + 0.5) * 2.0 / steps;
    want += oracle::bump(u) * (0.1 + 0.8 * 0.5 * std::erfc(u / (2.0 * std::sqrt(kappa * t))));
  }
  want *= 2.0 / steps;
  CHECK(continuum_pairing(G, step, HydroEquation::FreeHeat, kappa, t) == doctest::Approx(want).epsilon(1e-7));
  // Neumann keeps the step, so the pairing is time independent
  CHECK(continuum_pairing(G, step, HydroEquation::NeumannHyperplane, kappa, t) ==
        doctest::Approx(32.0 / 35.0 * 0.5).epsilon(1e-9));
}

TEST_CASE("weak residuals") {
  const double kappa = kappa_gamma(3.0, 1), t = 0.2;
  const double tol = 1e-3;

  SUBCASE("constant density") {
    const auto g = Profile::constant(2, 0.4);
    DensityFn rho = [](double, const Point&) { return 0.4; };
    for (const auto& G : canonical_smooth_roster(2)) {
      CHECK(std::abs(weak_residual_dif(rho, G, g, kappa, t).value) < 1e-10);
    }
  }
  SUBCASE("free solution") {
    for (int d : {1, 2}) {
      const auto g = Profile::bump(d, 0.2, 0.6, 0.1, 0.7);
      const double k = kappa_gamma(3.0, d);
      DensityFn rho = [&](double s, const Point& u) { return heat_solution_free(g, k, s, u); };
      for (const auto& G : canonical_smooth_roster(d)) {
        CAPTURE(G.name());
        const auto r = weak_residual_dif(rho, G, g, k, t, {d == 1 ? 4 : 2});
        CHECK(std::abs(r.value) < tol);
      }
    }
  }
  SUBCASE("wrong equation is detected") {
    // Neumann solution tested against a smooth function with nonzero slope at the barrier
    const auto g = Profile::step(1, 1.0, 0.0);
    DensityFn rho = [&](double s, const Point& u) { return heat_solution_neumann(g, kappa, s, u); };
    const auto G = named_test_function("drift", 1);
    CHECK(std::abs(weak_residual_dif(rho, G, g, kappa, t).value) > 10 * tol);
    // and the free solution fails the Neumann formulation with its own traces
    DensityFn free = [&](double s, const Point& u) { return heat_solution_free(g, kappa, s, u); };
    TraceFn tr = [&](double s) {
      return std::pair{heat_solution_free(g, kappa, s, pt(std::nextafter(0.0, -1.0))),
                       heat_solution_free(g, kappa, s, pt(0.0))};
    };
    for (const auto& G2 : canonical_disc_roster(1, false)) {
      if (G2.neumann()) continue;
      CHECK(std::abs(weak_residual_neu(free, G2, g, kappa, t, tr).value) > 10 * tol);
    }
  }
  SUBCASE("neumann solution with exact traces") {
    const auto g = Profile::bump(1, 0.1, 0.7, 0.2, 0.9);
    DensityFn rho = [&](double s, const Point& u) { return heat_solution_neumann(g, kappa, s, u); };
    TraceFn tr = [&](double s) {
      return std::pair{heat_solution_neumann(g, kappa, s, pt(std::nextafter(0.0, -1.0))),
                       heat_solution_neumann(g, kappa, s, pt(0.0))};
    };
    for (const auto& G : canonical_disc_roster(1, false)) {
      CAPTURE(G.name());
      CHECK(std::abs(weak_residual_neu(rho, G, g, kappa, t, tr).value) < tol);
    }
    const auto step = Profile::step(1, 0.8, 0.3);
    DensityFn srho = [&](double, const Point& u) { return u[0] < 0 ? 0.8 : 0.3; };
    TraceFn str = [](double) { return std::pair{0.8, 0.3}; };
    for (const auto& G : canonical_disc_roster(1, false)) {
      CHECK(std::abs(weak_residual_neu(srho, G, step, kappa, t, str).value) < 1e-10);
    }
  }
  SUBCASE("refinement shrinks the error estimate") {
    const auto g = Profile::bump(1, 0.2, 0.6, 0.1, 0.7);
    DensityFn rho = [&](double s, const Point& u) { return heat_solution_free(g, kappa, s, u); };
    const auto G = named_test_function("mix", 1);
    const auto coarse = weak_residual_dif(rho, G, g, kappa, t, {1});
    const auto fine = weak_residual_dif(rho, G, g, kappa, t, {8});
    CHECK(fine.error_estimate <= coarse.error_estimate);
    CHECK(fine.error_estimate < tol);
  }
  SUBCASE("preconditions") {
    const auto g = Profile::constant(1, 0.5);
    DensityFn rho = [](double, const Point&) { return 0.5; };
    const auto G = canonical_disc_roster(1, false).front();
    CHECK_THROWS_AS(weak_residual_neu(rho, G, g, kappa, t, TraceFn{}), PreconditionError);
    const auto G2 = canonical_disc_roster(2, false).front();
    TraceFn tr = [](double) { return std::pair{0.5, 0.5}; };
    CHECK_THROWS_AS(weak_residual_neu(rho, G2, Profile::constant(2, 0.5), kappa, t, tr), DomainError);
    CHECK_THROWS_AS(weak_residual_dif(rho, named_test_function("bump", 1), g, kappa, -1.0), DomainError);
    CHECK_THROWS_AS(weak_residual_dif(rho, named_test_function("bump", 1), g, kappa, t, {0}), DomainError);
  }
}
