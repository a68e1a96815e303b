#include "exclusim/operators.hpp"

#include <algorithm>
#include <cmath>

#include "exclusim/errors.hpp"

namespace exclusim {

namespace {

std::int64_t kernel_cap(const TestFunctionPair& G, std::int64_t n, std::int64_t lo, std::int64_t hi) {
  const auto reach = static_cast<std::int64_t>(std::ceil(G.support_radius() * static_cast<double>(n)));
  const std::int64_t span = hi >= lo ? hi - lo : 0;
  return std::max<std::int64_t>(4096, 2 * reach + span + 2);
}

}  // namespace

DiscreteOperators::DiscreteOperators(const TestFunctionPair& G, std::int64_t n, double gamma, std::int64_t cache_lo,
                                     std::int64_t cache_hi)
    : G_(G),
      n_(n),
      d_(G.d()),
      sums_(G.d(), gamma, kernel_cap(G, n, cache_lo, cache_hi)),
      cache_lo_(cache_lo),
      cache_hi_(cache_hi) {
  if (n < 1) throw DomainError("DiscreteOperators: n must be positive");
  const double nd = static_cast<double>(n);
  auto find_or_add = [&](const Factor1D& f) {
    for (std::size_t i = 0; i < caches_.size(); ++i) {
      const auto& c = caches_[i].factor;
      if (c.kind == f.kind && c.center == f.center && c.width == f.width) return i;
    }
    FactorCache c;
    c.factor = f;
    c.support_lo = static_cast<std::int64_t>(std::ceil(f.lo() * nd));
    c.support_hi = static_cast<std::int64_t>(std::floor(f.hi() * nd));
    caches_.push_back(std::move(c));
    return caches_.size() - 1;
  };
  for (Side side : {Side::Minus, Side::Plus}) {
    for (const auto& t : G_.branch(side)) {
      TermRef ref{&t, side, {}};
      for (const auto& f : t.factors) ref.factor.push_back(find_or_add(f));
      terms_.push_back(std::move(ref));
    }
  }
  if (cache_hi_ < cache_lo_) return;
  const auto size = static_cast<std::size_t>(cache_hi_ - cache_lo_ + 1);
  for (auto& c : caches_) {
    c.val.resize(size);
    c.d2.resize(size);
    c.all.resize(size);
    c.neg.resize(size);
    c.pos.resize(size);
    for (std::size_t i = 0; i < size; ++i) {
      const std::int64_t x = cache_lo_ + static_cast<std::int64_t>(i);
      const double u = static_cast<double>(x) / nd;
      c.val[i] = c.factor.value(u);
      c.d2[i] = c.factor.d2(u);
      c.neg[i] = line_sum_direct(c, x, Range::Neg);
      c.pos[i] = line_sum_direct(c, x, Range::Pos);
      c.all[i] = c.neg[i] + c.pos[i];
    }
  }
}

double DiscreteOperators::line_sum_direct(const FactorCache& f, std::int64_t x, Range range) const {
  std::int64_t lo = f.support_lo;
  std::int64_t hi = f.support_hi;
  if (range == Range::Neg) hi = std::min<std::int64_t>(hi, -1);
  if (range == Range::Pos) lo = std::max<std::int64_t>(lo, 0);
  const double nd = static_cast<double>(n_);
  double sum = 0.0;
  for (std::int64_t y = lo; y <= hi; ++y) {
    if (y == x) continue;
    sum += f.factor.value(static_cast<double>(y) / nd) * sums_.q(y > x ? y - x : x - y);
  }
  return sum;
}

double DiscreteOperators::line_sum(const FactorCache& f, std::int64_t x, Range range) const {
  if (x >= cache_lo_ && x <= cache_hi_) {
    const auto i = static_cast<std::size_t>(x - cache_lo_);
    switch (range) {
      case Range::All: return f.all[i];
      case Range::Neg: return f.neg[i];
      case Range::Pos: return f.pos[i];
    }
  }
  if (range == Range::All) return line_sum_direct(f, x, Range::Neg) + line_sum_direct(f, x, Range::Pos);
  return line_sum_direct(f, x, range);
}

double DiscreteOperators::value(const FactorCache& f, std::int64_t x) const {
  if (x >= cache_lo_ && x <= cache_hi_) return f.val[static_cast<std::size_t>(x - cache_lo_)];
  return f.factor.value(static_cast<double>(x) / static_cast<double>(n_));
}

double DiscreteOperators::factor_value(std::size_t t, int j, std::int64_t x) const {
  return value(caches_[terms_[t].factor[static_cast<std::size_t>(j)]], x);
}

double DiscreteOperators::factor_d2(std::size_t t, int j, std::int64_t x) const {
  const auto& f = caches_[terms_[t].factor[static_cast<std::size_t>(j)]];
  if (x >= cache_lo_ && x <= cache_hi_) return f.d2[static_cast<std::size_t>(x - cache_lo_)];
  return f.factor.d2(static_cast<double>(x) / static_cast<double>(n_));
}

double DiscreteOperators::other_product(const TermRef& t, int skip, const Site& x) const {
  double p = t.term->coef;
  for (int i = 0; i < d_ && p != 0.0; ++i) {
    if (i != skip) p *= value(caches_[t.factor[static_cast<std::size_t>(i)]], x[static_cast<std::size_t>(i)]);
  }
  return p;
}

double DiscreteOperators::term_K_last(const TermRef& t, const Site& x) const {
  const int last = d_ - 1;
  const double p = other_product(t, last, x);
  if (p == 0.0) return 0.0;
  const auto& f = caches_[t.factor[static_cast<std::size_t>(last)]];
  const std::int64_t xd = x[static_cast<std::size_t>(last)];
  const Range own = t.side == Side::Plus ? Range::Pos : Range::Neg;
  double v = line_sum(f, xd, own);
  if (side_of_site(xd) == t.side) v -= value(f, xd) / static_cast<double>(d_);
  return p * v;
}

double DiscreteOperators::term_R(const TermRef& t, const Site& x) const {
  const int last = d_ - 1;
  const std::int64_t xd = x[static_cast<std::size_t>(last)];
  const Side xs = side_of_site(xd);
  if (xs != t.side) return 0.0;
  const double slope = caches_[t.factor[static_cast<std::size_t>(last)]].factor.d1(0.0);
  if (slope == 0.0) return 0.0;
  const double p = other_product(t, last, x);
  const double scale = slope / static_cast<double>(n_);
  return xs == Side::Plus ? p * scale * sums_.first_tail(xd + 1) : -p * scale * sums_.first_tail(-xd);
}

double DiscreteOperators::term_K_tilde(const TermRef& t, const Site& x) const {
  const int last = d_ - 1;
  const std::int64_t xd = x[static_cast<std::size_t>(last)];
  const Side xs = side_of_site(xd);
  if (xs != t.side) return 0.0;
  const double p = other_product(t, last, x);
  if (p == 0.0) return 0.0;
  const auto& f = caches_[t.factor[static_cast<std::size_t>(last)]];
  const Range own = xs == Side::Plus ? Range::Pos : Range::Neg;
  const double cross = sums_.mass_tail(xs == Side::Plus ? xd + 1 : -xd);
  const double same = line_sum(f, xd, own) - value(f, xd) * (1.0 / static_cast<double>(d_) - cross);
  return p * same - term_R(t, x);
}

double DiscreteOperators::term_K_j(std::size_t ti, int j, const Site& x) const {
  const TermRef& t = terms_[ti];
  if (j == d_ - 1) return term_K_last(t, x);
  if (side_of_site(x[static_cast<std::size_t>(d_ - 1)]) != t.side) return 0.0;
  const double p = other_product(t, j, x);
  if (p == 0.0) return 0.0;
  const auto& f = caches_[t.factor[static_cast<std::size_t>(j)]];
  const std::int64_t xj = x[static_cast<std::size_t>(j)];
  return p * (line_sum(f, xj, Range::All) - value(f, xj) / static_cast<double>(d_));
}

double DiscreteOperators::term_apply(DiscreteOp op, std::size_t ti, const Site& x) const {
  const TermRef& t = terms_[ti];
  switch (op) {
    case DiscreteOp::KB: {
      double v = 0.0;
      for (int j = 0; j < d_; ++j) v += term_K_j(ti, j, x);
      return v;
    }
    case DiscreteOp::KS: {
      const int last = d_ - 1;
      const std::int64_t xd = x[static_cast<std::size_t>(last)];
      const Side xs = side_of_site(xd);
      const double p = other_product(t, last, x);
      if (p == 0.0) return 0.0;
      const auto& f = caches_[t.factor[static_cast<std::size_t>(last)]];
      if (t.side != xs) return p * line_sum(f, xd, t.side == Side::Plus ? Range::Pos : Range::Neg);
      return -p * value(f, xd) * sums_.mass_tail(xs == Side::Plus ? xd + 1 : -xd);
    }
    case DiscreteOp::R: return term_R(t, x);
    case DiscreteOp::KTilde: return term_K_tilde(t, x);
    case DiscreteOp::KStar: {
      double v = term_K_tilde(t, x);
      for (int j = 0; j + 1 < d_; ++j) v += term_K_j(ti, j, x);
      return v;
    }
  }
  return 0.0;
}

void DiscreteOperators::spatial(DiscreteOp op, const Site& x, std::span<double> out) const {
  for (std::size_t t = 0; t < terms_.size(); ++t) out[t] = term_apply(op, t, x);
}

double DiscreteOperators::K_j(int j, const Site& x, double s) const {
  if (j < 0 || j >= d_) throw DomainError("K_n_j: direction out of range");
  double v = 0.0;
  for (std::size_t t = 0; t < terms_.size(); ++t) v += terms_[t].term->time.value(s) * term_K_j(t, j, x);
  return v;
}

double DiscreteOperators::apply(DiscreteOp op, const Site& x, double s) const {
  double v = 0.0;
  for (std::size_t t = 0; t < terms_.size(); ++t) v += terms_[t].term->time.value(s) * term_apply(op, t, x);
  return v;
}

double K_n_j(const TestFunctionPair& G, std::int64_t n, double gamma, int j, const Site& x, double s) {
  return DiscreteOperators(G, n, gamma).K_j(j, x, s);
}
double K_n_B(const TestFunctionPair& G, std::int64_t n, double gamma, const Site& x, double s) {
  return DiscreteOperators(G, n, gamma).K_B(x, s);
}
double K_n_S(const TestFunctionPair& G, std::int64_t n, double gamma, const Site& x, double s) {
  return DiscreteOperators(G, n, gamma).K_S(x, s);
}
double R_n_d(const TestFunctionPair& G, std::int64_t n, double gamma, const Site& x, double s) {
  return DiscreteOperators(G, n, gamma).R(x, s);
}
double K_tilde_n_d(const TestFunctionPair& G, std::int64_t n, double gamma, const Site& x, double s) {
  return DiscreteOperators(G, n, gamma).K_tilde(x, s);
}
double K_n_star(const TestFunctionPair& G, std::int64_t n, double gamma, const Site& x, double s) {
  return DiscreteOperators(G, n, gamma).K_star(x, s);
}

double continuum_apply(ContinuumOperatorTag tag, const TestFunctionPair& G, double s, const Point& u, int j) {
  const int d = G.d();
  switch (tag) {
    case ContinuumOperatorTag::Laplacian:
      if (!G.is_smooth() && u[static_cast<std::size_t>(d - 1)] == 0.0) {
        throw DomainError("continuum_apply: Laplacian of a split test function is undefined on the hyperplane");
      }
      [[fallthrough]];
    case ContinuumOperatorTag::LDelta: {
      double v = 0.0;
      for (int i = 0; i < d; ++i) v += G.d2(i, s, u);
      return v;
    }
    case ContinuumOperatorTag::Ld: return G.d2(d - 1, s, u);
    case ContinuumOperatorTag::Djj:
      if (j < 0 || j >= d) throw DomainError("continuum_apply: direction out of range");
      return G.d2(j, s, u);
  }
  return 0.0;
}

L1Result l1_convergence_error(const TestFunctionPair& G, std::int64_t n, double gamma, L1Route route,
                              const L1Options& options) {
  if (route == L1Route::KBToLaplacian && !G.is_smooth()) {
    throw PreconditionError("l1_convergence_error: the K_B route needs G^- = G^+");
  }
  if (route == L1Route::KStarToLDelta && gamma == 2.0 && !G.neumann()) {
    throw PreconditionError("l1_convergence_error: the K* route at gamma = 2 needs a Neumann test function");
  }
  if (options.time_points < 1) throw DomainError("l1_convergence_error: need at least one time point");
  L1Result result;
  const int d = G.d();
  const double b = G.support_radius();
  if (b == 0.0 || G.branch(Side::Minus).size() + G.branch(Side::Plus).size() == 0) return result;

  const double th = options.theta_override ? *options.theta_override : theta(n, gamma);
  const double kappa = kappa_gamma(gamma, d);
  const double nd = static_cast<double>(n);
  const auto X = static_cast<std::int64_t>(std::ceil(3.0 * b * nd));
  const DiscreteOperators ops(G, n, gamma, -X, X);
  const DiscreteOp op = route == L1Route::KBToLaplacian ? DiscreteOp::KB : DiscreteOp::KStar;

  const std::size_t T = ops.term_count();
  const int K = options.time_points;
  std::vector<double> tau(T * static_cast<std::size_t>(K));
  std::vector<double> tau_sup(T, 0.0);
  for (int k = 0; k < K; ++k) {
    const double s = K == 1 ? 0.0 : options.T * k / (K - 1);
    for (std::size_t t = 0; t < T; ++t) {
      const double v = ops.term(t).time.value(s);
      tau[static_cast<std::size_t>(k) * T + t] = v;
      tau_sup[t] = std::max(tau_sup[t], std::abs(v));
    }
  }

  std::vector<double> a(T);
  Site x{};
  for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = -X;
  double total = 0.0;
  double row = 0.0;
  std::int64_t sites = 0;
  while (true) {
    const Side xs = side_of_site(x[static_cast<std::size_t>(d - 1)]);
    bool any = false;
    for (std::size_t t = 0; t < T; ++t) {
      const double disc = ops.term_apply(op, t, x);
      double cont = 0.0;
      if (ops.term_side(t) == xs) {
        for (int j = 0; j < d; ++j) {
          double p = ops.term(t).coef * ops.factor_d2(t, j, x[static_cast<std::size_t>(j)]);
          for (int i = 0; i < d && p != 0.0; ++i) {
            if (i != j) p *= ops.factor_value(t, i, x[static_cast<std::size_t>(i)]);
          }
          cont += p;
        }
      }
      a[t] = th * disc - kappa * cont;
      any = any || a[t] != 0.0;
    }
    if (any) {
      double sup = 0.0;
      for (int k = 0; k < K; ++k) {
        double v = 0.0;
        for (std::size_t t = 0; t < T; ++t) v += tau[static_cast<std::size_t>(k) * T + t] * a[t];
        sup = std::max(sup, std::abs(v));
      }
      row += sup;
    }
    ++sites;
    int i = 0;
    for (; i < d; ++i) {
      auto& c = x[static_cast<std::size_t>(i)];
      if (++c <= X) break;
      c = -X;
      if (i == 0) {
        total += row;
        row = 0.0;
      }
    }
    if (i == d) break;
  }
  total += row;

  // Far field: sites with one coordinate beyond X.
  const double nd_d = std::pow(nd, d);
  const auto reach = static_cast<std::int64_t>(std::ceil(b * nd));
  const double escape = ops.sums().mass_tail(X + 1 - reach);
  double far = 0.0;
  double slope_mass = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    double l1 = std::abs(ops.term(t).coef) * tau_sup[t];
    double l1_star = l1;
    for (int j = 0; j < d; ++j) {
      const Factor1D& f = ops.term(t).factors[static_cast<std::size_t>(j)];
      const auto lo = static_cast<std::int64_t>(std::ceil(f.lo() * nd));
      const auto hi = static_cast<std::int64_t>(std::floor(f.hi() * nd));
      double s = 0.0;
      for (std::int64_t y = lo; y <= hi; ++y) s += std::abs(f.value(static_cast<double>(y) / nd));
      l1 *= s;
      if (j + 1 < d) l1_star *= s;
    }
    far += static_cast<double>(d) * 2.0 * escape * l1;
    if (route == L1Route::KStarToLDelta) {
      slope_mass += l1_star * std::abs(ops.term(t).factors[static_cast<std::size_t>(d - 1)].d1(0.0));
    }
  }
  far *= th / nd_d;
  if (slope_mass > 0.0) far += th / nd_d / nd * slope_mass * ops.sums().second_tail(X + 1);

  result.far_field = far;
  result.error = total / nd_d + far;
  result.sites = sites;
  return result;
}

}  // namespace exclusim
