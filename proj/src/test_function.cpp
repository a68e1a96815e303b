#include "exclusim/test_function.hpp"

#include <algorithm>
#include <cmath>

#include "exclusim/errors.hpp"

namespace exclusim {

namespace {

double bump_value(double u, double c, double w) {
  const double z = (u - c) / w;
  if (std::abs(z) >= 1.0) return 0.0;
  const double v = 1.0 - z * z;
  return v * v * v;
}

double bump_d1(double u, double c, double w) {
  const double z = (u - c) / w;
  if (std::abs(z) >= 1.0) return 0.0;
  const double v = 1.0 - z * z;
  return -6.0 * z * v * v / w;
}

double bump_d2(double u, double c, double w) {
  const double z = (u - c) / w;
  if (std::abs(z) >= 1.0) return 0.0;
  return -6.0 * (1.0 - z * z) * (1.0 - 5.0 * z * z) / (w * w);
}

bool same_factor(const Factor1D& a, const Factor1D& b) {
  return a.kind == b.kind && a.center == b.center && a.width == b.width;
}

bool same_term(const Term& a, const Term& b) {
  if (a.coef != b.coef || a.time.kind != b.time.kind || a.time.a != b.time.a || a.time.b != b.time.b) {
    return false;
  }
  if (a.factors.size() != b.factors.size()) return false;
  for (std::size_t i = 0; i < a.factors.size(); ++i) {
    if (!same_factor(a.factors[i], b.factors[i])) return false;
  }
  return true;
}

}  // namespace

Factor1D Factor1D::bump(double center, double width) {
  if (!(width > 0.0)) throw DomainError("Factor1D: width must be positive");
  return Factor1D{Kind::Bump, center, width};
}

Factor1D Factor1D::even_pair(double center, double width) {
  if (!(width > 0.0)) throw DomainError("Factor1D: width must be positive");
  return Factor1D{Kind::EvenPair, center, width};
}

double Factor1D::value(double u) const {
  if (kind == Kind::Bump) return bump_value(u, center, width);
  return bump_value(u, center, width) + bump_value(u, -center, width);
}

double Factor1D::d1(double u) const {
  if (kind == Kind::Bump) return bump_d1(u, center, width);
  return bump_d1(u, center, width) + bump_d1(u, -center, width);
}

double Factor1D::d2(double u) const {
  if (kind == Kind::Bump) return bump_d2(u, center, width);
  return bump_d2(u, center, width) + bump_d2(u, -center, width);
}

double Factor1D::lo() const {
  if (kind == Kind::Bump) return center - width;
  return -std::abs(center) - width;
}

double Factor1D::hi() const {
  if (kind == Kind::Bump) return center + width;
  return std::abs(center) + width;
}

TimeFactor TimeFactor::constant() { return TimeFactor{Kind::Const, 1.0, 0.0}; }
TimeFactor TimeFactor::exponential(double rate) { return TimeFactor{Kind::Exp, rate, 0.0}; }
TimeFactor TimeFactor::linear(double a, double b) { return TimeFactor{Kind::Linear, a, b}; }

double TimeFactor::value(double s) const {
  switch (kind) {
    case Kind::Const: return 1.0;
    case Kind::Exp: return std::exp(-a * s);
    case Kind::Linear: return a + b * s;
  }
  return 0.0;
}

double TimeFactor::derivative(double s) const {
  switch (kind) {
    case Kind::Const: return 0.0;
    case Kind::Exp: return -a * std::exp(-a * s);
    case Kind::Linear: return b;
  }
  return 0.0;
}

double TimeFactor::integral(double s0, double s1) const {
  switch (kind) {
    case Kind::Const: return s1 - s0;
    case Kind::Exp:
      if (a == 0.0) return s1 - s0;
      // exp(-a s0) - exp(-a s1) without cancellation for short intervals
      return -std::exp(-a * s0) * std::expm1(-a * (s1 - s0)) / a;
    case Kind::Linear: return a * (s1 - s0) + 0.5 * b * (s1 * s1 - s0 * s0);
  }
  return 0.0;
}

double TimeFactor::sup_abs(double s0, double s1) const {
  return std::max(std::abs(value(s0)), std::abs(value(s1)));
}

double Term::spatial(const Point& u) const {
  double v = coef;
  for (std::size_t j = 0; j < factors.size() && v != 0.0; ++j) v *= factors[j].value(u[j]);
  return v;
}

TestFunctionPair::TestFunctionPair(int d, std::vector<Term> minus, std::vector<Term> plus, std::string name)
    : d_(d), minus_(std::move(minus)), plus_(std::move(plus)), name_(std::move(name)) {
  if (d < 1 || d > kMaxDim) throw DomainError("TestFunctionPair: dimension out of range");
  for (const auto* list : {&minus_, &plus_}) {
    for (const auto& t : *list) {
      if (static_cast<int>(t.factors.size()) != d) {
        throw DomainError("TestFunctionPair: every term needs one factor per coordinate");
      }
      for (const auto& f : t.factors) b_ = std::max({b_, std::abs(f.lo()), std::abs(f.hi())});
      if (t.factors[d - 1].d1(0.0) != 0.0) neumann_ = false;
    }
  }
  smooth_ = minus_.size() == plus_.size() &&
            std::equal(minus_.begin(), minus_.end(), plus_.begin(), same_term);
}

TestFunctionPair TestFunctionPair::smooth(int d, std::vector<Term> terms, std::string name) {
  auto copy = terms;
  return TestFunctionPair(d, std::move(copy), std::move(terms), std::move(name));
}

TestFunctionPair TestFunctionPair::zero(int d, std::string name) { return TestFunctionPair(d, {}, {}, std::move(name)); }

double TestFunctionPair::value_on(Side side, double s, const Point& u) const {
  double v = 0.0;
  for (const auto& t : branch(side)) v += t.time.value(s) * t.spatial(u);
  return v;
}

double TestFunctionPair::value(double s, const Point& u) const { return value_on(side_of(u[d_ - 1]), s, u); }

double TestFunctionPair::time_derivative(double s, const Point& u) const {
  double v = 0.0;
  for (const auto& t : branch(side_of(u[d_ - 1]))) v += t.time.derivative(s) * t.spatial(u);
  return v;
}

double TestFunctionPair::d1(int j, double s, const Point& u) const {
  double v = 0.0;
  for (const auto& t : branch(side_of(u[d_ - 1]))) {
    double p = t.coef * t.time.value(s);
    for (int i = 0; i < d_; ++i) p *= i == j ? t.factors[i].d1(u[i]) : t.factors[i].value(u[i]);
    v += p;
  }
  return v;
}

double TestFunctionPair::d2_on(Side side, int j, double s, const Point& u) const {
  double v = 0.0;
  for (const auto& t : branch(side)) {
    double p = t.coef * t.time.value(s);
    for (int i = 0; i < d_; ++i) p *= i == j ? t.factors[i].d2(u[i]) : t.factors[i].value(u[i]);
    v += p;
  }
  return v;
}

double TestFunctionPair::d2(int j, double s, const Point& u) const { return d2_on(side_of(u[d_ - 1]), j, s, u); }

double TestFunctionPair::normal_derivative_at_zero(Side side, double s, const Point& u) const {
  double v = 0.0;
  for (const auto& t : branch(side)) {
    double p = t.coef * t.time.value(s) * t.factors[d_ - 1].d1(0.0);
    for (int i = 0; i + 1 < d_; ++i) p *= t.factors[i].value(u[i]);
    v += p;
  }
  return v;
}

TestFunctionPair TestFunctionPair::combine(double a, const TestFunctionPair& other, double b) const {
  if (other.d_ != d_) throw DomainError("combine: dimension mismatch");
  auto scaled = [](const std::vector<Term>& terms, double k, std::vector<Term>& out) {
    for (auto t : terms) {
      t.coef *= k;
      out.push_back(std::move(t));
    }
  };
  std::vector<Term> minus, plus;
  scaled(minus_, a, minus);
  scaled(other.minus_, b, minus);
  scaled(plus_, a, plus);
  scaled(other.plus_, b, plus);
  return TestFunctionPair(d_, std::move(minus), std::move(plus), name_ + "+" + other.name_);
}

namespace {

// Last coordinate gets `last`, the others a centered unit bump.
Term make_term(int d, double coef, TimeFactor time, Factor1D last, Factor1D other = Factor1D::bump(0.0, 1.0)) {
  Term t{coef, time, std::vector<Factor1D>(static_cast<std::size_t>(d), other)};
  t.factors[static_cast<std::size_t>(d - 1)] = last;
  return t;
}

}  // namespace

std::vector<TestFunctionPair> canonical_smooth_roster(int d) {
  std::vector<TestFunctionPair> roster;
  roster.push_back(TestFunctionPair::smooth(d, {make_term(d, 1.0, TimeFactor::constant(), Factor1D::bump(0.0, 1.0))}, "bump"));
  roster.push_back(TestFunctionPair::smooth(
      d, {make_term(d, 1.0, TimeFactor::exponential(1.0), Factor1D::bump(0.25, 0.6), Factor1D::bump(-0.2, 0.8))},
      "drift"));
  roster.push_back(TestFunctionPair::smooth(
      d,
      {make_term(d, 1.0, TimeFactor::linear(1.0, -2.0), Factor1D::bump(-0.3, 0.5)),
       make_term(d, 0.5, TimeFactor::constant(), Factor1D::bump(0.4, 0.7))},
      "mix"));
  return roster;
}

std::vector<TestFunctionPair> canonical_disc_roster(int d, bool neumann_only) {
  std::vector<TestFunctionPair> roster;
  roster.emplace_back(d, std::vector<Term>{make_term(d, 2.0, TimeFactor::constant(), Factor1D::even_pair(0.3, 0.5))},
                      std::vector<Term>{make_term(d, 1.0, TimeFactor::constant(), Factor1D::bump(0.0, 0.8))},
                      "split-neumann");
  roster.emplace_back(d, std::vector<Term>{make_term(d, 1.0, TimeFactor::exponential(0.5), Factor1D::bump(0.0, 1.0))},
                      std::vector<Term>{make_term(d, 0.5, TimeFactor::constant(), Factor1D::even_pair(0.5, 0.4))},
                      "split-even-time");
  if (neumann_only) {
    roster.emplace_back(d, std::vector<Term>{make_term(d, 1.0, TimeFactor::linear(1.0, -1.0), Factor1D::bump(0.0, 1.2))},
                        std::vector<Term>{make_term(d, 1.0, TimeFactor::constant(), Factor1D::even_pair(0.2, 0.6))},
                        "split-wide");
  } else {
    roster.emplace_back(d, std::vector<Term>{make_term(d, 1.0, TimeFactor::constant(), Factor1D::bump(-0.2, 0.6))},
                        std::vector<Term>{make_term(d, 1.0, TimeFactor::linear(1.0, 1.0), Factor1D::bump(0.3, 0.7))},
                        "split-slope");
  }
  return roster;
}

TestFunctionPair named_test_function(const std::string& name, int d) {
  if (name == "zero") return TestFunctionPair::zero(d);
  for (auto& g : canonical_smooth_roster(d)) {
    if (g.name() == name) return g;
  }
  for (bool neumann_only : {false, true}) {
    for (auto& g : canonical_disc_roster(d, neumann_only)) {
      if (g.name() == name) return g;
    }
  }
  throw ConfigError("unknown test function '" + name + "'");
}

}  // namespace exclusim
