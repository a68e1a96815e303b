#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "exclusim/model.hpp"
#include "exclusim/test_function.hpp"

namespace exclusim {

enum class DiscreteOp { KB, KS, R, KTilde, KStar };

enum class ContinuumOperatorTag { Laplacian, Ld, LDelta, Djj };

// Discrete operators of a test function at scale n. Every operator is linear
// and acts termwise:  op(G)(x, s) = sum_t tau_t(s) * op_t(x),
// where t runs over the minus terms followed by the plus terms. Line sums over
// the support of each factor are cached for sites in [cache_lo, cache_hi] in
// every coordinate and computed directly elsewhere. Kernel sums are exact
// (no truncation): tails enter through closed one-sided sums.
class DiscreteOperators {
 public:
  DiscreteOperators(const TestFunctionPair& G, std::int64_t n, double gamma, std::int64_t cache_lo = 1,
                    std::int64_t cache_hi = 0);

  const TestFunctionPair& G() const noexcept { return G_; }
  std::int64_t n() const noexcept { return n_; }
  const KernelSums& sums() const noexcept { return sums_; }
  std::size_t term_count() const noexcept { return terms_.size(); }
  Side term_side(std::size_t t) const { return terms_[t].side; }
  const Term& term(std::size_t t) const { return *terms_[t].term; }

  // Spatial part of one term; j is a 0-based direction.
  double term_K_j(std::size_t t, int j, const Site& x) const;
  double term_apply(DiscreteOp op, std::size_t t, const Site& x) const;
  // out[t] = term_apply(op, t, x)
  void spatial(DiscreteOp op, const Site& x, std::span<double> out) const;

  double K_j(int j, const Site& x, double s) const;
  double apply(DiscreteOp op, const Site& x, double s) const;
  double K_B(const Site& x, double s) const { return apply(DiscreteOp::KB, x, s); }
  double K_S(const Site& x, double s) const { return apply(DiscreteOp::KS, x, s); }
  double R(const Site& x, double s) const { return apply(DiscreteOp::R, x, s); }
  double K_tilde(const Site& x, double s) const { return apply(DiscreteOp::KTilde, x, s); }
  double K_star(const Site& x, double s) const { return apply(DiscreteOp::KStar, x, s); }

  // phi(x / n) and phi''(x / n) of factor j of term t
  double factor_value(std::size_t t, int j, std::int64_t x) const;
  double factor_d2(std::size_t t, int j, std::int64_t x) const;

 private:
  enum class Range { All, Neg, Pos };
  struct FactorCache {
    Factor1D factor;
    std::int64_t support_lo = 0;
    std::int64_t support_hi = -1;
    std::vector<double> val, d2, all, neg, pos;
  };
  struct TermRef {
    const Term* term;
    Side side;
    std::vector<std::size_t> factor;  // index into caches_, one per coordinate
  };

  double line_sum(const FactorCache& f, std::int64_t x, Range range) const;
  double line_sum_direct(const FactorCache& f, std::int64_t x, Range range) const;
  double value(const FactorCache& f, std::int64_t x) const;
  double other_product(const TermRef& t, int skip, const Site& x) const;
  double term_K_last(const TermRef& t, const Site& x) const;
  double term_R(const TermRef& t, const Site& x) const;
  double term_K_tilde(const TermRef& t, const Site& x) const;

  TestFunctionPair G_;
  std::int64_t n_;
  int d_;
  KernelSums sums_;
  std::int64_t cache_lo_;
  std::int64_t cache_hi_;
  std::vector<FactorCache> caches_;
  std::vector<TermRef> terms_;
};

// Pointwise wrappers (no caching).
double K_n_j(const TestFunctionPair& G, std::int64_t n, double gamma, int j, const Site& x, double s);
double K_n_B(const TestFunctionPair& G, std::int64_t n, double gamma, const Site& x, double s);
double K_n_S(const TestFunctionPair& G, std::int64_t n, double gamma, const Site& x, double s);
double R_n_d(const TestFunctionPair& G, std::int64_t n, double gamma, const Site& x, double s);
double K_tilde_n_d(const TestFunctionPair& G, std::int64_t n, double gamma, const Site& x, double s);
double K_n_star(const TestFunctionPair& G, std::int64_t n, double gamma, const Site& x, double s);

// Continuum operators; j is used only by Djj. Laplacian on a non-smooth pair
// at the hyperplane is a domain error.
double continuum_apply(ContinuumOperatorTag tag, const TestFunctionPair& G, double s, const Point& u, int j = 0);

enum class L1Route { KBToLaplacian, KStarToLDelta };

struct L1Options {
  double T = 1.0;
  int time_points = 17;
  // Replaces Theta(n); used for the negative control.
  std::optional<double> theta_override;
};

struct L1Result {
  double error = 0.0;      // lattice sum plus far-field bound
  double far_field = 0.0;  // analytic bound for sites beyond 3 b_G n
  std::int64_t sites = 0;
};

// (1/n^d) sum_x sup_s |Theta(n) D G_s(x/n) - kappa C G_s(x/n)| with the
// lattice sum over |x| <= 3 b_G n and the rest bounded analytically.
L1Result l1_convergence_error(const TestFunctionPair& G, std::int64_t n, double gamma, L1Route route,
                              const L1Options& options = {});

}  // namespace exclusim
