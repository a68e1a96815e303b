#include "exclusim/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "exclusim/errors.hpp"

namespace exclusim {

double ObservableSeries::mean(std::size_t k) const {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : values) s += r[k];
  return s / static_cast<double>(values.size());
}

double ObservableSeries::se(std::size_t k) const {
  const std::size_t m = values.size();
  if (m < 2) return 0.0;
  const double mu = mean(k);
  double ss = 0.0;
  for (const auto& r : values) ss += (r[k] - mu) * (r[k] - mu);
  return std::sqrt(ss / static_cast<double>(m - 1) / static_cast<double>(m));
}

std::vector<double> ObservableSeries::column(std::size_t k) const {
  std::vector<double> c;
  c.reserve(values.size());
  for (const auto& r : values) c.push_back(r[k]);
  return c;
}

namespace {

double inv_volume(const LatticeBox& box) { return std::pow(static_cast<double>(box.n()), -box.d()); }

bool inside_support(const Point& u, int d, double support) {
  for (int i = 0; i < d; ++i) {
    if (std::abs(u[static_cast<std::size_t>(i)]) >= support) return false;
  }
  return true;
}

}  // namespace

double pair_empirical(const Configuration& cfg, const TestFunctionPair& G, double t) {
  const LatticeBox& box = cfg.box();
  const double b = G.support_radius();
  double sum = 0.0;
  for (std::int64_t idx : cfg.particles()) {
    const Point u = box.position(box.site(idx));
    if (inside_support(u, box.d(), b)) sum += G.value(t, u);
  }
  return sum * inv_volume(box);
}

double pair_empirical(const Configuration& cfg, const std::function<double(const Point&)>& f, double support) {
  const LatticeBox& box = cfg.box();
  double sum = 0.0;
  for (std::int64_t idx : cfg.particles()) {
    const Point u = box.position(box.site(idx));
    if (inside_support(u, box.d(), support)) sum += f(u);
  }
  return sum * inv_volume(box);
}

DensityField coarse_density(const Configuration& cfg, const Mesh& mesh) {
  const LatticeBox& box = cfg.box();
  if (mesh.d != box.d()) throw MeshError("coarse_density: mesh and box dimensions differ");
  if (mesh.cell_sites < 1) throw MeshError("coarse_density: cells need at least one site per axis");
  const auto shape = mesh.shape();
  const std::int64_t cells = mesh.cell_count();
  if (cells < 1) throw MeshError("coarse_density: empty window");
  std::vector<double> occupied(static_cast<std::size_t>(cells), 0.0);
  std::vector<double> sites(static_cast<std::size_t>(cells), 0.0);
  const int d = box.d();
  Site x = mesh.lo;
  while (true) {
    if (box.contains(x)) {
      std::int64_t cell = 0;
      for (int i = d - 1; i >= 0; --i) {
        const auto k = static_cast<std::size_t>(i);
        cell = cell * shape[k] + (x[k] - mesh.lo[k]) / mesh.cell_sites;
      }
      sites[static_cast<std::size_t>(cell)] += 1.0;
      if (cfg.occupied(x)) occupied[static_cast<std::size_t>(cell)] += 1.0;
    }
    int i = 0;
    for (; i < d; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (++x[k] <= mesh.hi[k]) break;
      x[k] = mesh.lo[k];
    }
    if (i == d) break;
  }
  DensityField field;
  field.d = d;
  field.shape = shape;
  const double nd = static_cast<double>(box.n());
  for (int i = 0; i < d; ++i) {
    const auto k = static_cast<std::size_t>(i);
    field.origin[k] = static_cast<double>(mesh.lo[k]) / nd;
    field.width[k] = static_cast<double>(mesh.cell_sites) / nd;
  }
  field.values.resize(static_cast<std::size_t>(cells));
  for (std::size_t c = 0; c < field.values.size(); ++c) {
    if (sites[c] == 0.0) throw MeshError("coarse_density: a mesh cell contains no box site");
    field.values[c] = occupied[c] / sites[c];
  }
  return field;
}

double boundary_average(const Configuration& cfg, std::int64_t l, BoundarySide side) {
  const LatticeBox& box = cfg.box();
  if (box.d() != 1) throw DomainError("boundary_average: defined for d = 1 only");
  if (l < 1) throw DomainError("boundary_average: l must be positive");
  if (side == BoundarySide::Right ? l > box.hi() : -l < box.lo()) {
    throw DomainError("boundary_average: l exceeds the box");
  }
  double s = 0.0;
  for (std::int64_t y = 1; y <= l; ++y) {
    Site x{};
    x[0] = side == BoundarySide::Right ? y : -y;
    s += cfg.occupied(x) ? 1.0 : 0.0;
  }
  return s / static_cast<double>(l);
}

EntropyValue relative_entropy_product(const ProfileFn& q, const ProfileFn& h, const LatticeBox& box) {
  EntropyValue out;
  double total = 0.0;
  for (std::int64_t i = 0; i < box.site_count(); ++i) {
    const Point u = box.position(box.site(i));
    const double a = q(u);
    const double b = h(u);
    if (!(a >= 0.0 && a <= 1.0)) throw DomainError("relative_entropy_product: q outside [0,1]");
    if (!(b >= 0.0 && b <= 1.0)) throw DomainError("relative_entropy_product: h outside [0,1]");
    double kl = 0.0;
    if (a > 0.0) {
      if (b == 0.0) {
        out.infinite = true;
        continue;
      }
      kl += a * std::log(a / b);
    }
    if (a < 1.0) {
      if (b == 1.0) {
        out.infinite = true;
        continue;
      }
      kl += (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
    }
    total += kl;
  }
  out.value = out.infinite ? std::numeric_limits<double>::infinity() : total;
  return out;
}

double generator_pairing(const Configuration& cfg, const DiscreteOperators& ops, const BarrierSpec& barrier,
                         double theta_n, double s) {
  const LatticeBox& box = cfg.box();
  const double damp = 1.0 - barrier.slow_factor(box.n());
  double sum = 0.0;
  for (std::int64_t idx : cfg.particles()) {
    const Site x = box.site(idx);
    sum += ops.K_B(x, s) - damp * ops.K_S(x, s);
  }
  return theta_n * inv_volume(box) * sum;
}

double generator_pairing_decomposed(const Configuration& cfg, const DiscreteOperators& ops,
                                    const BarrierSpec& barrier, double theta_n, double s) {
  const LatticeBox& box = cfg.box();
  const double slow = barrier.slow_factor(box.n());
  double sum = 0.0;
  for (std::int64_t idx : cfg.particles()) {
    const Site x = box.site(idx);
    sum += ops.K_star(x, s) + slow * ops.K_S(x, s) + ops.R(x, s);
  }
  return theta_n * inv_volume(box) * sum;
}

std::vector<std::vector<double>> box_generator_weights(const DiscreteOperators& ops, const Model& model) {
  const LatticeBox& box = model.box;
  const int d = box.d();
  if (ops.n() != box.n()) throw PreconditionError("box_generator_weights: operator and model scales differ");
  if (ops.G().support_radius() > static_cast<double>(box.half_side())) {
    throw PreconditionError("box_generator_weights: test function support exceeds the box");
  }
  if (model.kernel.r_max() < box.side() - 1) {
    throw PreconditionError("box_generator_weights: r_max must cover every in-box displacement");
  }
  const double slow = model.barrier.slow_factor(box.n());
  const double damp = 1.0 - slow;
  const double scale = model.theta * inv_volume(box);
  const KernelSums& sums = ops.sums();
  std::vector<std::vector<double>> w(ops.term_count(), std::vector<double>(static_cast<std::size_t>(box.site_count())));
  for (std::int64_t i = 0; i < box.site_count(); ++i) {
    const Site x = box.site(i);
    const Side xs = side_of_site(x[static_cast<std::size_t>(d - 1)]);
    double escape = 0.0;
    for (int j = 0; j < d; ++j) {
      const std::int64_t xj = x[static_cast<std::size_t>(j)];
      double up = sums.mass_tail(box.hi() + 1 - xj);
      double down = sums.mass_tail(xj - box.lo() + 1);
      if (j == d - 1) {
        if (xs == Side::Minus) up *= slow;
        else down *= slow;
      }
      escape += up + down;
    }
    for (std::size_t t = 0; t < ops.term_count(); ++t) {
      double v = ops.term_apply(DiscreteOp::KB, t, x) - damp * ops.term_apply(DiscreteOp::KS, t, x);
      if (ops.term_side(t) == xs) {
        double f = ops.term(t).coef;
        for (int j = 0; j < d && f != 0.0; ++j) f *= ops.factor_value(t, j, x[static_cast<std::size_t>(j)]);
        v += f * escape;
      }
      w[t][static_cast<std::size_t>(i)] = scale * v;
    }
  }
  return w;
}

double quadratic_variation_integrand(const Configuration& cfg, const TestFunctionPair& G, const Model& model,
                                     double s) {
  const LatticeBox& box = model.box;
  const int d = box.d();
  std::vector<double> g(static_cast<std::size_t>(box.site_count()));
  for (std::int64_t i = 0; i < box.site_count(); ++i) {
    g[static_cast<std::size_t>(i)] = G.value(s, box.position(box.site(i)));
  }
  const double slow = model.barrier.slow_factor(box.n());
  const std::int64_t r_max = model.kernel.r_max();
  double sum = 0.0;
  for (std::int64_t from : cfg.particles()) {
    const Site x = box.site(from);
    const double gx = g[static_cast<std::size_t>(from)];
    std::int64_t stride = 1;
    for (int j = 0; j < d; ++j) {
      const std::int64_t xj = x[static_cast<std::size_t>(j)];
      for (std::int64_t yj = box.lo(); yj <= box.hi(); ++yj) {
        const std::int64_t r = yj > xj ? yj - xj : xj - yj;
        if (r == 0 || r > r_max) continue;
        const std::int64_t to = from + (yj - xj) * stride;
        if (cfg.occupied(to)) continue;
        const double diff = g[static_cast<std::size_t>(to)] - gx;
        if (diff == 0.0) continue;
        double rate = model.kernel.axis_probability(r);
        if (j == d - 1 && (xj <= -1) != (yj <= -1)) rate *= slow;
        sum += rate * diff * diff;
      }
      stride *= box.side();
    }
  }
  const double v = inv_volume(box);
  return model.theta * v * v * sum;
}

double boundary_value_estimate(const DensityField& field, double eps, BoundarySide side) {
  if (field.d != 1) throw DomainError("boundary_value_estimate: defined for d = 1 only");
  const double h = field.width[0];
  if (!(eps >= h * (1.0 - 1e-12))) throw ResolutionError("boundary_value_estimate: eps below the mesh resolution");
  const double a = side == BoundarySide::Right ? 0.0 : -eps;
  const double b = side == BoundarySide::Right ? eps : 0.0;
  const double lo = field.origin[0];
  const double hi = lo + h * static_cast<double>(field.shape[0]);
  if (a < lo - 1e-12 * h || b > hi + 1e-12 * h) throw ResolutionError("boundary_value_estimate: window leaves the field");
  double integral = 0.0;
  for (std::int64_t c = 0; c < field.shape[0]; ++c) {
    const double c0 = lo + h * static_cast<double>(c);
    const double overlap = std::min(b, c0 + h) - std::max(a, c0);
    if (overlap > 0.0) integral += overlap * field.values[static_cast<std::size_t>(c)];
  }
  return integral / eps;
}

LinearFunctionalIntegrator::LinearFunctionalIntegrator(std::vector<TimeFactor> time,
                                                       std::vector<std::vector<double>> weights)
    : time_(std::move(time)), weights_(std::move(weights)), sums_(time_.size(), 0.0) {
  if (time_.size() != weights_.size()) throw DomainError("LinearFunctionalIntegrator: one weight table per factor");
}

void LinearFunctionalIntegrator::resync(const Configuration& cfg) {
  for (std::size_t k = 0; k < time_.size(); ++k) {
    double s = 0.0;
    for (std::int64_t idx : cfg.particles()) s += weights_[k][static_cast<std::size_t>(idx)];
    sums_[k] = s;
  }
}

void LinearFunctionalIntegrator::on_start(const Configuration& cfg, double t) {
  resync(cfg);
  last_ = t;
  integral_ = 0.0;
  times_.clear();
  integrals_.clear();
}

void LinearFunctionalIntegrator::advance(double t) {
  for (std::size_t k = 0; k < time_.size(); ++k) integral_ += sums_[k] * time_[k].integral(last_, t);
  last_ = t;
}

void LinearFunctionalIntegrator::on_jump(const Configuration&, std::int64_t from, std::int64_t to, double t) {
  advance(t);
  for (std::size_t k = 0; k < time_.size(); ++k) {
    sums_[k] += weights_[k][static_cast<std::size_t>(to)] - weights_[k][static_cast<std::size_t>(from)];
  }
}

void LinearFunctionalIntegrator::on_snapshot(const Configuration& cfg, double t) {
  advance(t);
  times_.push_back(t);
  integrals_.push_back(integral_);
  resync(cfg);
}

DynkinMartingaleObserver::DynkinMartingaleObserver(const TestFunctionPair& G, const Model& model)
    : scale_(inv_volume(model.box)) {
  const DiscreteOperators ops(G, model.n(), model.kernel.gamma(), model.box.lo(), model.box.hi());
  w_ = box_generator_weights(ops, model);
  const LatticeBox& box = model.box;
  const int d = box.d();
  for (std::size_t t = 0; t < ops.term_count(); ++t) {
    time_.push_back(ops.term(t).time);
    std::vector<double> f(static_cast<std::size_t>(box.site_count()));
    for (std::int64_t i = 0; i < box.site_count(); ++i) {
      const Site x = box.site(i);
      if (side_of_site(x[static_cast<std::size_t>(d - 1)]) != ops.term_side(t)) continue;
      double v = ops.term(t).coef * scale_;
      for (int j = 0; j < d && v != 0.0; ++j) v *= ops.factor_value(t, j, x[static_cast<std::size_t>(j)]);
      f[static_cast<std::size_t>(i)] = v;
    }
    f_.push_back(std::move(f));
  }
  P_.assign(time_.size(), 0.0);
  Q_.assign(time_.size(), 0.0);
}

void DynkinMartingaleObserver::recompute(const Configuration& cfg) {
  for (std::size_t t = 0; t < time_.size(); ++t) {
    double p = 0.0, q = 0.0;
    for (std::int64_t idx : cfg.particles()) {
      p += f_[t][static_cast<std::size_t>(idx)];
      q += w_[t][static_cast<std::size_t>(idx)];
    }
    P_[t] = p;
    Q_[t] = q;
  }
}

double DynkinMartingaleObserver::pairing(double t) const {
  double v = 0.0;
  for (std::size_t k = 0; k < time_.size(); ++k) v += time_[k].value(t) * P_[k];
  return v;
}

void DynkinMartingaleObserver::on_start(const Configuration& cfg, double t) {
  recompute(cfg);
  last_ = t;
  drift_ = 0.0;
  initial_ = pairing(t);
  times_.clear();
  values_.clear();
}

void DynkinMartingaleObserver::advance(double t) {
  for (std::size_t k = 0; k < time_.size(); ++k) {
    drift_ += P_[k] * (time_[k].value(t) - time_[k].value(last_)) + Q_[k] * time_[k].integral(last_, t);
  }
  last_ = t;
}

void DynkinMartingaleObserver::on_jump(const Configuration&, std::int64_t from, std::int64_t to, double t) {
  advance(t);
  for (std::size_t k = 0; k < time_.size(); ++k) {
    P_[k] += f_[k][static_cast<std::size_t>(to)] - f_[k][static_cast<std::size_t>(from)];
    Q_[k] += w_[k][static_cast<std::size_t>(to)] - w_[k][static_cast<std::size_t>(from)];
  }
}

void DynkinMartingaleObserver::on_snapshot(const Configuration& cfg, double t) {
  advance(t);
  recompute(cfg);
  times_.push_back(t);
  values_.push_back(pairing(t) - initial_ - drift_);
}

ObservableSeries dynkin_martingale(std::span<const Trajectory> trajectories, const TestFunctionPair& G,
                                   const Model& model) {
  const LatticeBox& box = model.box;
  const int d = box.d();
  const DiscreteOperators ops(G, model.n(), model.kernel.gamma(), box.lo(), box.hi());
  const auto w = box_generator_weights(ops, model);
  const double scale = inv_volume(box);
  std::vector<std::vector<double>> f(ops.term_count());
  for (std::size_t t = 0; t < ops.term_count(); ++t) {
    f[t].assign(static_cast<std::size_t>(box.site_count()), 0.0);
    for (std::int64_t i = 0; i < box.site_count(); ++i) {
      const Site x = box.site(i);
      if (side_of_site(x[static_cast<std::size_t>(d - 1)]) != ops.term_side(t)) continue;
      double v = ops.term(t).coef * scale;
      for (int j = 0; j < d && v != 0.0; ++j) v *= ops.factor_value(t, j, x[static_cast<std::size_t>(j)]);
      f[t][static_cast<std::size_t>(i)] = v;
    }
  }
  ObservableSeries series;
  series.name = "martingale:" + G.name();
  for (const auto& traj : trajectories) {
    if (traj.snapshots.size() != traj.times.size() || traj.times.empty()) {
      throw ResolutionError("dynkin_martingale: trajectory lacks stored snapshots");
    }
    if (series.times.empty()) series.times = traj.times;
    std::vector<double> pairing, integrand;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      const auto& occ = traj.snapshots[k];
      const double s = traj.times[k];
      double pv = 0.0, iv = 0.0;
      for (std::size_t t = 0; t < ops.term_count(); ++t) {
        double p = 0.0, q = 0.0;
        for (std::size_t i = 0; i < occ.size(); ++i) {
          if (occ[i]) {
            p += f[t][i];
            q += w[t][i];
          }
        }
        const TimeFactor& tau = ops.term(t).time;
        pv += tau.value(s) * p;
        iv += tau.derivative(s) * p + tau.value(s) * q;
      }
      pairing.push_back(pv);
      integrand.push_back(iv);
    }
    std::vector<double> m(traj.times.size(), 0.0);
    double integral = 0.0;
    for (std::size_t k = 1; k < traj.times.size(); ++k) {
      integral += 0.5 * (integrand[k] + integrand[k - 1]) * (traj.times[k] - traj.times[k - 1]);
      m[k] = pairing[k] - pairing[0] - integral;
    }
    series.values.push_back(std::move(m));
  }
  return series;
}

}  // namespace exclusim
