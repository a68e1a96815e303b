#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "exclusim/configuration.hpp"
#include "exclusim/density_field.hpp"
#include "exclusim/operators.hpp"
#include "exclusim/simulator.hpp"
#include "exclusim/test_function.hpp"

namespace exclusim {

// values[r][k]: replica r at times[k].
struct ObservableSeries {
  std::string name;
  std::vector<double> times;
  std::vector<std::vector<double>> values;

  std::size_t replicas() const noexcept { return values.size(); }
  double mean(std::size_t k) const;
  // unbiased sample standard deviation over replicas divided by sqrt(replicas)
  double se(std::size_t k) const;
  std::vector<double> column(std::size_t k) const;
};

// n^{-d} sum_x eta(x) G(t, x/n), restricted to |x| < b_G n.
double pair_empirical(const Configuration& cfg, const TestFunctionPair& G, double t);
// Same pairing for an arbitrary function supported in the max-norm ball of radius `support`.
double pair_empirical(const Configuration& cfg, const std::function<double(const Point&)>& f, double support);

DensityField coarse_density(const Configuration& cfg, const Mesh& mesh);

enum class BoundarySide { Left, Right };

// d = 1: (1/l) sum_{y=1}^{l} eta(y) (right) or (1/l) sum_{y=-l}^{-1} eta(y) (left).
double boundary_average(const Configuration& cfg, std::int64_t l, BoundarySide side);

struct EntropyValue {
  double value = 0.0;
  bool infinite = false;
};

// sum_x KL(Bernoulli(q(x/n)) || Bernoulli(h(x/n))) over the box.
EntropyValue relative_entropy_product(const ProfileFn& q, const ProfileFn& h, const LatticeBox& box);

// Theta(n) L_n <pi, G_s> on the infinite lattice:
// (Theta / n^d) sum_x eta(x) [K_B - (1 - alpha n^-beta) K_S] G_s(x/n).
double generator_pairing(const Configuration& cfg, const DiscreteOperators& ops, const BarrierSpec& barrier,
                         double theta_n, double s);
// Same quantity through K* + alpha n^-beta K_S + R.
double generator_pairing_decomposed(const Configuration& cfg, const DiscreteOperators& ops,
                                    const BarrierSpec& barrier, double theta_n, double s);

// Per-site weights W_t(x) with  Theta L_box <pi, G_s> = sum_t tau_t(s) sum_x eta(x) W_t(x)
// for the generator of the simulated (box-restricted) dynamics. One table per
// term of ops, indexed by box site index.
std::vector<std::vector<double>> box_generator_weights(const DiscreteOperators& ops, const Model& model);

// Theta [L <pi,G_s>^2 - 2 <pi,G_s> L <pi,G_s>] for the box dynamics:
// Theta n^{-2d} sum_{x occupied, y empty} r(x,y) p(y-x) (G(y) - G(x))^2.
double quadratic_variation_integrand(const Configuration& cfg, const TestFunctionPair& G, const Model& model,
                                     double s);

// d = 1: (1/eps) int over (-eps, 0) or (0, eps) of the field.
double boundary_value_estimate(const DensityField& field, double eps, BoundarySide side);

// Tracks V(s) = sum_t tau_t(s) sum_x eta(x) w_t(x) along a trajectory and
// records int_0^t V ds at each snapshot. Event exact: V is constant between jumps.
class LinearFunctionalIntegrator : public Observer {
 public:
  LinearFunctionalIntegrator(std::vector<TimeFactor> time, std::vector<std::vector<double>> weights);

  void on_start(const Configuration& cfg, double t) override;
  void on_jump(const Configuration& cfg, std::int64_t from, std::int64_t to, double t) override;
  void on_snapshot(const Configuration& cfg, double t) override;

  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<double>& integrals() const noexcept { return integrals_; }

 private:
  void advance(double t);
  void resync(const Configuration& cfg);
  std::vector<TimeFactor> time_;
  std::vector<std::vector<double>> weights_;
  std::vector<double> sums_;
  double last_ = 0.0;
  double integral_ = 0.0;
  std::vector<double> times_;
  std::vector<double> integrals_;
};

// Event-exact Dynkin martingale
//   M_t = <pi_t,G_t> - <pi_0,G_0> - int_0^t <pi_s, d_s G_s> ds - int_0^t Theta L <pi_s,G_s> ds
// for the box dynamics, recorded at each snapshot.
class DynkinMartingaleObserver : public Observer {
 public:
  DynkinMartingaleObserver(const TestFunctionPair& G, const Model& model);

  void on_start(const Configuration& cfg, double t) override;
  void on_jump(const Configuration& cfg, std::int64_t from, std::int64_t to, double t) override;
  void on_snapshot(const Configuration& cfg, double t) override;

  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  void advance(double t);
  void recompute(const Configuration& cfg);
  double pairing(double t) const;
  double scale_ = 0.0;  // n^{-d}
  std::vector<TimeFactor> time_;
  std::vector<std::vector<double>> f_;  // n^{-d} * spatial part per term
  std::vector<std::vector<double>> w_;  // box generator weights per term
  std::vector<double> P_, Q_;
  double initial_ = 0.0;
  double last_ = 0.0;
  double drift_ = 0.0;  // accumulated time-derivative and generator integrals
  std::vector<double> times_, values_;
};

// Martingale series from stored snapshots only: the time integrals use the
// trapezoidal rule on the snapshot grid. Needs stored snapshots.
ObservableSeries dynkin_martingale(std::span<const Trajectory> trajectories, const TestFunctionPair& G,
                                   const Model& model);

}  // namespace exclusim
