#pragma once

#include <functional>
#include <string>
#include <utility>

#include "exclusim/profile.hpp"
#include "exclusim/test_function.hpp"

namespace exclusim {

enum class HydroEquation { FreeHeat, NeumannHyperplane, NeumannWithTrace, Unsupported };
enum class TestSpace { Dif, Neu, Disc };

const char* equation_name(HydroEquation eq);
const char* test_space_name(TestSpace space);

struct PDESelector {
  HydroEquation equation = HydroEquation::Unsupported;
  double kappa = 0.0;
  TestSpace space = TestSpace::Dif;
  // set when equation == Unsupported
  std::string refusal_code;
  std::string message;
};

PDESelector select_hydrodynamic_pde(double alpha, double beta, double gamma, int d, bool entropy_bound);
// Throws Refusal(code, message) for Unsupported selections.
void require_supported(const PDESelector& selector);

// Solution of d_t rho = kappa Laplacian rho on R^d with rho_0 = g.
double heat_solution_free(const Profile& g, double kappa, double t, const Point& u);
// Same equation on each side of {u_d = 0} with zero normal derivative there.
double heat_solution_neumann(const Profile& g, double kappa, double t, const Point& u);
double heat_solution(HydroEquation eq, const Profile& g, double kappa, double t, const Point& u);

using DensityFn = std::function<double(double t, const Point& u)>;
// (rho_s(0-), rho_s(0+))
using TraceFn = std::function<std::pair<double, double>(double s)>;

struct ResidualResult {
  double value = 0.0;
  double error_estimate = 0.0;  // difference between two refinement levels
};

struct ResidualOptions {
  int panels = 4;  // Gauss-Legendre panels per smooth piece at the coarse level
};

// int rho_t G_t - int g G_0 - int_0^t int rho_s (kappa L_Delta + d_s) G_s
ResidualResult weak_residual_dif(const DensityFn& rho, const TestFunctionPair& G, const Profile& g, double kappa,
                                 double t, const ResidualOptions& options = {});
// d = 1: the same bulk terms plus kappa int_0^t [G'_s(0-) rho_s(0-) - G'_s(0+) rho_s(0+)] ds.
ResidualResult weak_residual_neu(const DensityFn& rho, const TestFunctionPair& G, const Profile& g, double kappa,
                                 double t, const TraceFn& traces, const ResidualOptions& options = {});

// int G_t(u) rho_t(u) du with rho the solution of the given equation.
double continuum_pairing(const TestFunctionPair& G, const Profile& g, HydroEquation eq, double kappa, double t,
                         int panels = 8);

}  // namespace exclusim
