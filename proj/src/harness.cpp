#include "exclusim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "exclusim/errors.hpp"
#include "exclusim/observables.hpp"
#include "exclusim/operators.hpp"
#include "exclusim/pde.hpp"
#include "exclusim/simulator.hpp"
#include "exclusim/stats.hpp"
#include "exclusim/test_function.hpp"

namespace exclusim {

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min(jobs, count);
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

namespace {

enum Tag : std::uint64_t { kConvergence = 1, kFlux = 2, kReplacement = 3, kSimulate = 4 };

const char* tag_name(Tag tag) {
  switch (tag) {
    case kConvergence: return "convergence";
    case kFlux: return "flux";
    case kReplacement: return "replacement";
    case kSimulate: return "simulate";
  }
  return "?";
}

class SnapshotCallback : public Observer {
 public:
  explicit SnapshotCallback(std::function<void(const Configuration&, double)> fn) : fn_(std::move(fn)) {}
  void on_snapshot(const Configuration& cfg, double t) override { fn_(cfg, t); }

 private:
  std::function<void(const Configuration&, double)> fn_;
};

std::string fmt(double x) { return format_number(x); }

// short form for verdict names
std::string tag(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

std::string n_label(std::int64_t n) { return "n=" + std::to_string(n); }

std::vector<double> snapshot_grid(const ExperimentConfig& cfg) {
  std::vector<double> t{0.0};
  for (double s : cfg.snapshots) {
    if (s > t.back()) t.push_back(s);
  }
  return t;
}

std::vector<TestFunctionPair> load_test_functions(const ExperimentConfig& cfg) {
  std::vector<TestFunctionPair> out;
  for (const auto& name : cfg.test_functions) {
    try {
      out.push_back(named_test_function(name, cfg.d));
    } catch (const std::exception& e) {
      throw ConfigError("test function '" + name + "': " + e.what());
    }
  }
  return out;
}

void require_space(TestSpace space, const TestFunctionPair& G) {
  const bool ok = space == TestSpace::Disc || (space == TestSpace::Dif && G.is_smooth()) ||
                  (space == TestSpace::Neu && G.neumann());
  if (!ok) {
    throw ConfigError("test function '" + G.name() + "' is not in the test space " + test_space_name(space) +
                      " of the selected equation");
  }
}

void require_box(const ExperimentConfig& cfg, const std::vector<TestFunctionPair>& Gs) {
  for (const auto& G : Gs) {
    if (G.support_radius() > static_cast<double>(cfg.half_side)) {
      throw ConfigError("test function '" + G.name() + "' is not supported inside the box; raise half_side");
    }
  }
}

struct Windows {
  std::vector<std::int64_t> left, right;
  std::vector<Site> left_sites, right_sites;
};

// Last coordinate in [-w n, -1] or [0, w n - 1], others in [-w n, w n - 1].
Windows make_windows(const LatticeBox& box, double window) {
  const int d = box.d();
  const std::int64_t w = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::llround(window * box.n())));
  Windows out;
  for (std::int64_t i = 0; i < box.site_count(); ++i) {
    const Site x = box.site(i);
    bool inside = true;
    for (int j = 0; j < d - 1; ++j) inside = inside && x[j] >= -w && x[j] < w;
    if (!inside) continue;
    const std::int64_t xd = x[d - 1];
    if (xd >= -w && xd < 0) {
      out.left.push_back(i);
      out.left_sites.push_back(x);
    } else if (xd >= 0 && xd < w) {
      out.right.push_back(i);
      out.right_sites.push_back(x);
    }
  }
  return out;
}

double window_density(const Configuration& cfg, const std::vector<std::int64_t>& sites) {
  if (sites.empty()) return 0.0;
  std::int64_t c = 0;
  for (auto i : sites) c += cfg.occupied(i) ? 1 : 0;
  return static_cast<double>(c) / static_cast<double>(sites.size());
}

double lattice_average(const std::vector<Site>& sites, const LatticeBox& box,
                       const std::function<double(const Point&)>& f) {
  if (sites.empty()) return 0.0;
  double s = 0.0;
  for (const auto& x : sites) s += f(box.position(x));
  return s / static_cast<double>(sites.size());
}

// Largest n |dev| among the t = 0 rows.
double calibrate_C(const std::vector<std::int64_t>& ns, const std::vector<double>& dev0) {
  double C = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) C = std::max(C, static_cast<double>(ns[i]) * std::abs(dev0[i]));
  return C;
}

// E <pi_0, G_0> under the product measure with marginals g(x/n).
double lattice_expectation(const LatticeBox& box, const Profile& g, const TestFunctionPair& G) {
  double s = 0.0;
  for (std::int64_t i = 0; i < box.site_count(); ++i) {
    const Point u = box.position(box.site(i));
    s += g(u) * G.value(0.0, u);
  }
  return s / std::pow(static_cast<double>(box.n()), box.d());
}

Model model_for(const ExperimentConfig& cfg, std::int64_t n) {
  return make_model(cfg.d, cfg.gamma, BarrierSpec{cfg.alpha, cfg.beta}, n, cfg.half_side);
}

std::uint64_t stream_key(const RunOptions& opts, Tag tag, std::int64_t n, int r) {
  return derive_stream_key(opts.seed, {static_cast<std::uint64_t>(tag), static_cast<std::uint64_t>(n),
                                       static_cast<std::uint64_t>(r)});
}

void record_streams(Report& rep, const RunOptions& opts, Tag tag, std::int64_t n, int replicas) {
  for (int r = 0; r < replicas; ++r) rep.streams.push_back({tag_name(tag), n, r, stream_key(opts, tag, n, r)});
}

// Initializes from g, attaches the observers and runs to T.
Trajectory run_replica(const ExperimentConfig& cfg, const Model& model, const Profile& g, Tag tag, std::int64_t n,
                       int r, const RunOptions& opts, std::vector<Observer*> observers, bool store = false) {
  RngStream rng(stream_key(opts, tag, n, r));
  Configuration conf = init_from_profile(g.fn(), model.box, rng);
  SimulateOptions so;
  so.store_snapshots = store;
  return simulate(conf, model, cfg.T, cfg.snapshots, observers, rng, so);
}

void check_conservation(Report& rep, const std::vector<Trajectory>& trajs, std::int64_t n) {
  bool ok = true;
  for (const auto& tr : trajs) {
    for (auto c : tr.particle_counts) ok = ok && c == tr.particle_counts.front();
  }
  rep.verdict("conservation:" + n_label(n), ok, ok ? "particle count constant" : "particle count changed");
}

std::string side_name(int s) { return s == 0 ? "left" : "right"; }

}  // namespace

Report run_convergence_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  const PDESelector sel = select_hydrodynamic_pde(cfg.alpha, cfg.beta, cfg.gamma, cfg.d, cfg.entropy_bound());
  require_supported(sel);
  const auto Gs = load_test_functions(cfg);
  for (const auto& G : Gs) require_space(sel.space, G);
  require_box(cfg, Gs);

  Report rep;
  rep.experiment = "convergence";
  rep.extra = {{"equation", equation_name(sel.equation)}, {"kappa", sel.kappa}};
  const auto times = snapshot_grid(cfg);
  const std::size_t K = times.size(), NG = Gs.size();

  std::vector<std::vector<double>> reference(NG, std::vector<double>(K));
  for (std::size_t g = 0; g < NG; ++g) {
    for (std::size_t k = 0; k < K; ++k) {
      reference[g][k] = continuum_pairing(Gs[g], cfg.profile, sel.equation, sel.kappa, times[k]);
    }
  }

  // delta[g][i][k], bias/se likewise
  std::vector<std::vector<std::vector<double>>> delta(NG), bias(NG), bias_se(NG);
  for (std::size_t g = 0; g < NG; ++g) {
    delta[g].assign(cfg.n.size(), std::vector<double>(K));
    bias[g] = bias_se[g] = delta[g];
  }

  std::vector<std::vector<double>> initial_dev(NG);
  for (std::size_t i = 0; i < cfg.n.size(); ++i) {
    const std::int64_t n = cfg.n[i];
    const Model model = model_for(cfg, n);
    // pairing[r][g][k]
    std::vector<std::vector<std::vector<double>>> pairing(
        static_cast<std::size_t>(cfg.replicas), std::vector<std::vector<double>>(NG, std::vector<double>(K)));
    std::vector<Trajectory> trajs(static_cast<std::size_t>(cfg.replicas));
    parallel_for(cfg.replicas, opts.jobs, [&](int r) {
      auto& out = pairing[static_cast<std::size_t>(r)];
      std::size_t k = 0;
      SnapshotCallback cb([&](const Configuration& conf, double t) {
        for (std::size_t g = 0; g < NG; ++g) out[g][k] = pair_empirical(conf, Gs[g], t);
        ++k;
      });
      trajs[static_cast<std::size_t>(r)] = run_replica(cfg, model, cfg.profile, kConvergence, n, r, opts, {&cb});
    });
    record_streams(rep, opts, kConvergence, n, cfg.replicas);
    check_conservation(rep, trajs, n);

    for (std::size_t g = 0; g < NG; ++g) {
      const std::string& name = Gs[g].name();
      for (std::size_t k = 0; k < K; ++k) {
        std::vector<double> dev, absdev;
        for (int r = 0; r < cfg.replicas; ++r) {
          const double v = pairing[static_cast<std::size_t>(r)][g][k];
          rep.add(r, n, times[k], "pair:" + name, v);
          dev.push_back(v - reference[g][k]);
          absdev.push_back(std::abs(v - reference[g][k]));
        }
        delta[g][i][k] = mean(absdev);
        bias[g][i][k] = mean(dev);
        bias_se[g][i][k] = standard_error(dev);
        rep.add(-1, n, times[k], "reference:" + name, reference[g][k]);
        rep.add(-1, n, times[k], "delta:" + name, delta[g][i][k], standard_error(absdev));
        rep.add(-1, n, times[k], "bias:" + name, bias[g][i][k], bias_se[g][i][k]);
      }
      const double expected = lattice_expectation(model.box, cfg.profile, Gs[g]);
      initial_dev[g].push_back(bias[g][i][0] + reference[g][0] - expected);
      rep.add(-1, n, 0.0, "lattice_expectation:" + name, expected);
    }
  }

  const std::size_t last = K - 1;
  for (std::size_t g = 0; g < NG; ++g) {
    const std::string& name = Gs[g].name();
    std::vector<double> final_delta, dev0;
    std::string ladder;
    for (std::size_t i = 0; i < cfg.n.size(); ++i) {
      final_delta.push_back(delta[g][i][last]);
      dev0.push_back(bias[g][i][0]);
      ladder += (i ? " " : "") + fmt(delta[g][i][last]);
    }
    rep.verdict("delta-decreasing:" + name, strictly_decreasing(final_delta), "delta(t=T) along the ladder: " + ladder);
    rep.verdict("delta-final:" + name, final_delta.back() < cfg.final_delta,
                fmt(final_delta.back()) + " < " + fmt(cfg.final_delta));

    bool init_ok = true;
    for (std::size_t i = 0; i < cfg.n.size(); ++i) {
      init_ok = init_ok && std::abs(initial_dev[g][i]) <= cfg.k_se * bias_se[g][i][0] + 1e-12;
    }
    rep.verdict("initial-sampling:" + name, init_ok, "t = 0 pairing within k SE of its lattice expectation");

    const double C = calibrate_C(cfg.n, dev0);
    bool ok = true;
    std::string worst;
    for (std::size_t i = 0; i < cfg.n.size(); ++i) {
      for (std::size_t k = 1; k < K; ++k) {
        const double bound = cfg.k_se * bias_se[g][i][k] + C / static_cast<double>(cfg.n[i]);
        if (std::abs(bias[g][i][k]) > bound) {
          ok = false;
          worst = n_label(cfg.n[i]) + " t=" + fmt(times[k]) + " |bias|=" + fmt(std::abs(bias[g][i][k])) +
                  " > " + fmt(bound);
        }
      }
    }
    rep.verdict("bias:" + name, ok, ok ? "within k SE + C/n with C = " + fmt(C) : worst);
  }
  return rep;
}

Report run_barrier_flux_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  const PDESelector sel = select_hydrodynamic_pde(cfg.alpha, cfg.beta, cfg.gamma, cfg.d, cfg.entropy_bound());
  if (sel.equation == HydroEquation::Unsupported && sel.refusal_code == "critical-barrier-long-range") {
    require_supported(sel);
  }
  if (!in_region_R0(cfg.beta, cfg.gamma) && !cfg.control) {
    throw Refusal("not-decoupling",
                  "the barrier experiment needs (beta, gamma) in R0, where the hyperplane decouples the two "
                  "half spaces; set control = true for a comparison run outside R0");
  }
  if (cfg.control && !(cfg.alpha == 1.0 && cfg.beta == 0.0)) {
    throw Refusal("no-entropy-bound", "the control run compares with the free heat equation and needs "
                                      "(alpha, beta) = (1, 0)");
  }
  const HydroEquation eq = cfg.control ? HydroEquation::FreeHeat : HydroEquation::NeumannHyperplane;
  const double kappa = kappa_gamma(cfg.gamma, cfg.d);

  Report rep;
  rep.experiment = "flux";
  rep.extra = {{"equation", equation_name(eq)}, {"kappa", kappa}, {"control", cfg.control}};
  const auto times = snapshot_grid(cfg);
  const std::size_t K = times.size();

  // [side][i][k]
  std::vector<std::vector<std::vector<double>>> dev(2), dev_se(2);
  for (int s = 0; s < 2; ++s) dev[s].assign(cfg.n.size(), std::vector<double>(K)), dev_se[s] = dev[s];
  std::vector<double> net_dev, net_se;

  for (std::size_t i = 0; i < cfg.n.size(); ++i) {
    const std::int64_t n = cfg.n[i];
    const Model model = model_for(cfg, n);
    const Windows win = make_windows(model.box, cfg.window);
    std::vector<std::array<double, 2>> target(K);
    for (std::size_t k = 0; k < K; ++k) {
      auto rho = [&](const Point& u) { return heat_solution(eq, cfg.profile, kappa, times[k], u); };
      target[k] = {lattice_average(win.left_sites, model.box, rho), lattice_average(win.right_sites, model.box, rho)};
    }

    const auto R = static_cast<std::size_t>(cfg.replicas);
    std::vector<std::vector<std::array<double, 2>>> dens(R, std::vector<std::array<double, 2>>(K));
    std::vector<Trajectory> trajs(R);
    parallel_for(cfg.replicas, opts.jobs, [&](int r) {
      auto& out = dens[static_cast<std::size_t>(r)];
      std::size_t k = 0;
      SnapshotCallback cb([&](const Configuration& conf, double) {
        out[k] = {window_density(conf, win.left), window_density(conf, win.right)};
        ++k;
      });
      trajs[static_cast<std::size_t>(r)] = run_replica(cfg, model, cfg.profile, kFlux, n, r, opts, {&cb});
    });
    record_streams(rep, opts, kFlux, n, cfg.replicas);
    check_conservation(rep, trajs, n);

    for (std::size_t k = 0; k < K; ++k) {
      for (int s = 0; s < 2; ++s) {
        std::vector<double> v, dv;
        for (std::size_t r = 0; r < R; ++r) {
          rep.add(static_cast<int>(r), n, times[k], "window:" + side_name(s), dens[r][k][s]);
          v.push_back(dens[r][k][s]);
          dv.push_back(dens[r][k][s] - target[k][s]);
        }
        dev[s][i][k] = mean(dv);
        dev_se[s][i][k] = standard_error(dv);
        rep.add(-1, n, times[k], "window:" + side_name(s), mean(v), standard_error(v));
        rep.add(-1, n, times[k], "target:" + side_name(s), target[k][s]);
      }
    }

    std::int64_t slow_attempts = 0, slow_accepted = 0;
    std::vector<double> net, up, down;
    const double vol = std::pow(static_cast<double>(n), cfg.d);
    for (std::size_t r = 0; r < R; ++r) {
      const auto& tally = trajs[r].tally;
      slow_attempts += tally.slow_attempts;
      slow_accepted += tally.slow_accepted;
      up.push_back(static_cast<double>(tally.crossings_up));
      down.push_back(static_cast<double>(tally.crossings_down));
      net.push_back(static_cast<double>(tally.crossings_up - tally.crossings_down) / vol);
      rep.add(static_cast<int>(r), n, cfg.T, "crossings_up", up.back());
      rep.add(static_cast<int>(r), n, cfg.T, "crossings_down", down.back());
    }
    rep.add(-1, n, cfg.T, "net_transport", mean(net), standard_error(net));
    if (cfg.T > 0.0) {
      const double rate = (mean(up) + mean(down)) / cfg.T / std::pow(static_cast<double>(n), cfg.d - 1);
      rep.add(-1, n, cfg.T, "crossing_rate", rate);
    }
    rep.add(-1, n, cfg.T, "slow_attempts", static_cast<double>(slow_attempts));
    rep.add(-1, n, cfg.T, "slow_accepted", static_cast<double>(slow_accepted));

    const double p_accept = model.barrier.slow_factor(n) / model.rate_bound();
    const double bound = poisson_quantile(p_accept * static_cast<double>(slow_attempts), 0.999);
    rep.verdict("thinning-bound:" + n_label(n), static_cast<double>(slow_accepted) <= bound,
                std::to_string(slow_accepted) + " accepted of " + std::to_string(slow_attempts) +
                    " slow attempts, bound " + fmt(bound));

    if (cfg.d == 1) {
      // mass moved across the hyperplane predicted by the PDE on the box
      double predicted = 0.0;
      for (std::int64_t x = 0; x <= model.box.hi(); ++x) {
        Point u{};
        u[0] = static_cast<double>(x) / static_cast<double>(n);
        predicted += heat_solution(eq, cfg.profile, kappa, cfg.T, u) - cfg.profile(u);
      }
      predicted /= vol;
      rep.add(-1, n, cfg.T, "net_transport_predicted", predicted);
      net_dev.push_back(mean(net) - predicted);
      net_se.push_back(standard_error(net));
    }
  }

  for (int s = 0; s < 2; ++s) {
    std::vector<double> dev0;
    for (std::size_t i = 0; i < cfg.n.size(); ++i) dev0.push_back(dev[s][i][0]);
    const double C = calibrate_C(cfg.n, dev0);
    bool ok = true;
    std::string worst;
    for (std::size_t i = 0; i < cfg.n.size(); ++i) {
      for (std::size_t k = 0; k < K; ++k) {
        const double bound = cfg.k_se * dev_se[s][i][k] + C / static_cast<double>(cfg.n[i]);
        if (std::abs(dev[s][i][k]) > bound) {
          ok = false;
          worst = n_label(cfg.n[i]) + " t=" + fmt(times[k]) + " |dev|=" + fmt(std::abs(dev[s][i][k])) + " > " +
                  fmt(bound);
        }
      }
    }
    rep.verdict("window:" + side_name(s), ok, ok ? "within k SE + C/n of the lattice-averaged solution" : worst);
  }
  if (cfg.d == 1) {
    bool ok = true;
    for (std::size_t i = 0; i < net_dev.size(); ++i) {
      ok = ok && std::abs(net_dev[i]) <= cfg.k_se * net_se[i] + 1.0 / static_cast<double>(cfg.n[i]);
    }
    rep.verdict("net-transport", ok, "net mass across the hyperplane within k SE + 1/n of the prediction");
  }
  return rep;
}

Report run_operator_convergence(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto& oc = cfg.operators;
  Report rep;
  rep.experiment = "operators";
  std::string table = "gamma,d,n,operator,test_function,error,far_field\n";

  struct Case {
    double gamma;
    int d;
    TestFunctionPair G;
    L1Route route;
    bool control;
  };
  std::vector<Case> cases;
  for (double gamma : oc.gammas) {
    for (int d : oc.dims) {
      for (auto& G : canonical_smooth_roster(d)) cases.push_back({gamma, d, G, L1Route::KBToLaplacian, false});
      for (auto& G : canonical_disc_roster(d, gamma == 2.0)) {
        cases.push_back({gamma, d, G, L1Route::KStarToLDelta, false});
      }
      if (oc.negative_control && gamma == 2.0) {
        cases.push_back({gamma, d, canonical_smooth_roster(d).front(), L1Route::KBToLaplacian, true});
      }
    }
  }

  const std::size_t N = oc.n.size();
  std::vector<std::vector<L1Result>> results(cases.size(), std::vector<L1Result>(N));
  parallel_for(static_cast<int>(cases.size() * N), opts.jobs, [&](int idx) {
    const auto& c = cases[static_cast<std::size_t>(idx) / N];
    const std::int64_t n = oc.n[static_cast<std::size_t>(idx) % N];
    L1Options lo;
    lo.T = oc.T;
    lo.time_points = oc.time_points;
    if (c.control) lo.theta_override = static_cast<double>(n) * static_cast<double>(n);
    results[static_cast<std::size_t>(idx) / N][static_cast<std::size_t>(idx) % N] =
        l1_convergence_error(c.G, n, c.gamma, c.route, lo);
  });

  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const auto& c = cases[ci];
    const std::string op = c.route == L1Route::KBToLaplacian ? "KB" : "KStar";
    const std::string label = op + ":" + c.G.name() + ":gamma=" + tag(c.gamma) + ":d=" + std::to_string(c.d) +
                              (c.control ? ":control" : "");
    std::vector<double> err;
    for (std::size_t i = 0; i < N; ++i) {
      const auto& r = results[ci][i];
      err.push_back(r.error);
      rep.add(-1, oc.n[i], oc.T, "l1:" + label, r.error);
      table += fmt(c.gamma) + "," + std::to_string(c.d) + "," + std::to_string(oc.n[i]) + "," + op +
               (c.control ? "-control" : "") + "," + c.G.name() + "," + fmt(r.error) + "," + fmt(r.far_field) + "\n";
    }
    std::string ladder;
    for (double e : err) ladder += (ladder.empty() ? "" : " ") + fmt(e);
    if (c.control) {
      rep.verdict("negative-control:" + label, !strictly_decreasing(err) || err.back() > err.front(),
                  "wrong time scale must not converge: " + ladder);
      continue;
    }
    rep.verdict("decreasing:" + label, strictly_decreasing(err), ladder);
    if (c.gamma > 2.0 && N >= 2) {
      rep.verdict("rate:" + label, err.back() <= oc.final_ratio * err.front(),
                  fmt(err.back()) + " <= " + fmt(oc.final_ratio) + " x " + fmt(err.front()));
    }
  }
  if (!opts.out_dir.empty()) write_text_file(opts.out_dir + "/operators.csv", table);
  return rep;
}

Report run_replacement_residual(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (!cfg.entropy_bound()) {
    throw Refusal("no-entropy-bound",
                  "the replacement residual needs an entropy-bound initialization; supply a reference profile");
  }
  const PDESelector sel = select_hydrodynamic_pde(cfg.alpha, cfg.beta, cfg.gamma, cfg.d, true);
  require_supported(sel);
  const bool small_beta = cfg.beta < 1.0;
  const bool boundary = cfg.beta > 1.0 && cfg.gamma > 2.0 && cfg.d == 1;
  if (!small_beta && !boundary) {
    throw Refusal("replacement-regime",
                  "the replacement residual is defined for beta in [0, 1), or for beta > 1 with gamma > 2 in d = 1");
  }
  const auto Gs = load_test_functions(cfg);
  if (small_beta) {
    for (const auto& G : Gs) require_space(TestSpace::Dif, G);
  }
  require_box(cfg, Gs);
  const ReferenceProfile& ref = *cfg.reference;

  Report rep;
  rep.experiment = "replacement";
  rep.extra = {{"regime", small_beta ? "small-beta" : "boundary"}};
  const auto times = snapshot_grid(cfg);
  const std::size_t K = times.size(), NG = Gs.size();
  const std::vector<double> eps = small_beta ? std::vector<double>{0.0} : cfg.epsilons;
  const std::size_t NE = eps.size();
  const double kappa = kappa_gamma(cfg.gamma, cfg.d);

  // abs_mean[g][e][i] at the last snapshot
  std::vector<std::vector<std::vector<double>>> abs_mean(NG, std::vector<std::vector<double>>(NE));
  std::vector<double> entropy;

  for (std::size_t i = 0; i < cfg.n.size(); ++i) {
    const std::int64_t n = cfg.n[i];
    const Model model = model_for(cfg, n);
    const LatticeBox& box = model.box;
    const double vol = std::pow(static_cast<double>(n), cfg.d);

    const EntropyValue H = relative_entropy_product(cfg.profile.fn(), ref.h.fn(), box);
    entropy.push_back(H.infinite ? std::numeric_limits<double>::infinity() : H.value / vol);
    rep.add(-1, n, 0.0, "entropy_per_volume", entropy.back());

    // weights[g][e] per term per site
    std::vector<std::vector<std::vector<std::vector<double>>>> weights(NG, std::vector<std::vector<std::vector<double>>>(NE));
    std::vector<std::vector<TimeFactor>> tf(NG);
    for (std::size_t g = 0; g < NG; ++g) {
      const DiscreteOperators ops(Gs[g], n, cfg.gamma, box.lo(), box.hi());
      for (std::size_t t = 0; t < ops.term_count(); ++t) tf[g].push_back(ops.term(t).time);
      const double scale = model.theta / vol;
      for (std::size_t e = 0; e < NE; ++e) {
        std::vector<std::vector<double>> w(ops.term_count(), std::vector<double>(static_cast<std::size_t>(box.site_count())));
        for (std::size_t t = 0; t < ops.term_count(); ++t) {
          for (std::int64_t idx = 0; idx < box.site_count(); ++idx) {
            const Site x = box.site(idx);
            w[t][static_cast<std::size_t>(idx)] =
                scale * ops.term_apply(small_beta ? DiscreteOp::KS : DiscreteOp::R, t, x);
          }
          if (boundary) {
            const auto l = static_cast<std::int64_t>(std::ceil(eps[e] * static_cast<double>(n)));
            const Term& term = ops.term(t);
            const double slope = term.coef * term.factors[0].d1(0.0);
            const bool plus = ops.term_side(t) == Side::Plus;
            for (std::int64_t y = 1; y <= l; ++y) {
              Site s{};
              s[0] = plus ? y : -y;
              if (!box.contains(s)) continue;
              w[t][static_cast<std::size_t>(box.index(s))] += (plus ? -1.0 : 1.0) * kappa * slope / static_cast<double>(l);
            }
          }
        }
        weights[g][e] = std::move(w);
      }
    }

    const auto R = static_cast<std::size_t>(cfg.replicas);
    // integral[r][g][e][k]
    std::vector<std::vector<std::vector<std::vector<double>>>> integral(
        R, std::vector<std::vector<std::vector<double>>>(NG, std::vector<std::vector<double>>(NE)));
    parallel_for(cfg.replicas, opts.jobs, [&](int r) {
      std::vector<std::unique_ptr<LinearFunctionalIntegrator>> integ;
      std::vector<Observer*> obs;
      for (std::size_t g = 0; g < NG; ++g) {
        for (std::size_t e = 0; e < NE; ++e) {
          integ.push_back(std::make_unique<LinearFunctionalIntegrator>(tf[g], weights[g][e]));
          obs.push_back(integ.back().get());
        }
      }
      run_replica(cfg, model, cfg.profile, kReplacement, n, r, opts, obs);
      for (std::size_t g = 0; g < NG; ++g) {
        for (std::size_t e = 0; e < NE; ++e) integral[static_cast<std::size_t>(r)][g][e] = integ[g * NE + e]->integrals();
      }
    });
    record_streams(rep, opts, kReplacement, n, cfg.replicas);

    for (std::size_t g = 0; g < NG; ++g) {
      for (std::size_t e = 0; e < NE; ++e) {
        const std::string name = "residual:" + Gs[g].name() + (boundary ? ":eps=" + tag(eps[e]) : "");
        for (std::size_t k = 0; k < K; ++k) {
          std::vector<double> a;
          for (std::size_t r = 0; r < R; ++r) {
            const double v = integral[r][g][e][k];
            rep.add(static_cast<int>(r), n, times[k], name, v);
            a.push_back(std::abs(v));
          }
          rep.add(-1, n, times[k], "abs_" + name, mean(a), standard_error(a));
          if (k + 1 == K) abs_mean[g][e].push_back(mean(a));
        }
      }
    }
  }

  if (small_beta) {
    for (std::size_t g = 0; g < NG; ++g) {
      std::string ladder;
      for (double v : abs_mean[g][0]) ladder += (ladder.empty() ? "" : " ") + fmt(v);
      rep.verdict("residual-decreasing:" + Gs[g].name(), strictly_decreasing(abs_mean[g][0]), ladder);
    }
  }
  const auto [lo, hi] = std::minmax_element(entropy.begin(), entropy.end());
  bool bounded = std::all_of(entropy.begin(), entropy.end(), [](double h) { return std::isfinite(h); });
  if (bounded && *hi > 0.0) bounded = *lo > 0.0 && *hi / *lo <= 2.0;
  rep.verdict("entropy-bounded", bounded, "H/n^d in [" + fmt(*lo) + ", " + fmt(*hi) + "]");
  return rep;
}

Report run_simulation(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto Gs = load_test_functions(cfg);
  require_box(cfg, Gs);
  const bool stationary = cfg.profile.amplitude == 0.0 || cfg.profile.factors.empty();
  const double level = cfg.profile.base;

  Report rep;
  rep.experiment = "simulate";
  const auto times = snapshot_grid(cfg);
  const std::size_t K = times.size(), NG = Gs.size();
  std::vector<TrajectoryRow> traj_rows;
  std::vector<std::vector<double>> msq(NG);  // E[M_T^2] per G along the ladder

  for (std::size_t i = 0; i < cfg.n.size(); ++i) {
    const std::int64_t n = cfg.n[i];
    const Model model = model_for(cfg, n);
    const Windows win = make_windows(model.box, cfg.window);
    const auto R = static_cast<std::size_t>(cfg.replicas);
    std::vector<std::vector<std::vector<double>>> pair(R, std::vector<std::vector<double>>(NG, std::vector<double>(K)));
    std::vector<std::vector<std::vector<double>>> mart = pair;
    std::vector<std::vector<std::array<double, 2>>> dens(R, std::vector<std::array<double, 2>>(K));
    std::vector<Trajectory> trajs(R);

    parallel_for(cfg.replicas, opts.jobs, [&](int r) {
      const auto ru = static_cast<std::size_t>(r);
      std::size_t k = 0;
      SnapshotCallback cb([&](const Configuration& conf, double t) {
        for (std::size_t g = 0; g < NG; ++g) pair[ru][g][k] = pair_empirical(conf, Gs[g], t);
        dens[ru][k] = {window_density(conf, win.left), window_density(conf, win.right)};
        ++k;
      });
      std::vector<std::unique_ptr<DynkinMartingaleObserver>> dyn;
      std::vector<Observer*> obs{&cb};
      if (cfg.martingale) {
        for (const auto& G : Gs) {
          dyn.push_back(std::make_unique<DynkinMartingaleObserver>(G, model));
          obs.push_back(dyn.back().get());
        }
      }
      trajs[ru] = run_replica(cfg, model, cfg.profile, kSimulate, n, r, opts, obs, cfg.dump_snapshots);
      for (std::size_t g = 0; g < dyn.size(); ++g) mart[ru][g] = dyn[g]->values();
    });
    record_streams(rep, opts, kSimulate, n, cfg.replicas);
    check_conservation(rep, trajs, n);

    for (std::size_t r = 0; r < R; ++r) {
      const int ri = static_cast<int>(r);
      for (std::size_t k = 0; k < K; ++k) {
        const std::string suffix = ":" + n_label(n);
        traj_rows.push_back({ri, times[k], "particle_count" + suffix,
                             static_cast<double>(trajs[r].particle_counts[k])});
        for (int s = 0; s < 2; ++s) traj_rows.push_back({ri, times[k], "window:" + side_name(s) + suffix, dens[r][k][s]});
        for (std::size_t g = 0; g < NG; ++g) {
          traj_rows.push_back({ri, times[k], "pair:" + Gs[g].name() + suffix, pair[r][g][k]});
          if (cfg.martingale) traj_rows.push_back({ri, times[k], "martingale:" + Gs[g].name() + suffix, mart[r][g][k]});
        }
      }
      if (cfg.dump_snapshots && !opts.out_dir.empty()) {
        for (std::size_t k = 0; k < trajs[r].snapshots.size(); ++k) {
          const std::string path = opts.out_dir + "/snapshots/" + n_label(n) + "_r" + std::to_string(r) + "_k" +
                                   std::to_string(k) + ".bin";
          std::ostringstream bin;
          write_snapshot_binary(bin, model.box, trajs[r].snapshots[k]);
          write_text_file(path, bin.str());
        }
      }
    }

    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t g = 0; g < NG; ++g) {
        std::vector<double> p;
        for (std::size_t r = 0; r < R; ++r) p.push_back(pair[r][g][k]);
        rep.add(-1, n, times[k], "pair:" + Gs[g].name(), mean(p), standard_error(p));
      }
      for (int s = 0; s < 2; ++s) {
        std::vector<double> v;
        for (std::size_t r = 0; r < R; ++r) v.push_back(dens[r][k][s]);
        rep.add(-1, n, times[k], "window:" + side_name(s), mean(v), standard_error(v));
        if (stationary) {
          const double se = standard_error(v);
          const bool ok = std::abs(mean(v) - level) <= cfg.k_se * se;
          if (!ok) {
            rep.verdict("stationary:" + side_name(s) + ":" + n_label(n) + ":t=" + tag(times[k]), false,
                        "|" + fmt(mean(v)) + " - " + fmt(level) + "| > " + fmt(cfg.k_se * se));
          }
        }
      }
    }
    if (stationary) rep.verdict("stationary:" + n_label(n), true, "window densities checked at every snapshot");

    if (cfg.martingale) {
      for (std::size_t g = 0; g < NG; ++g) {
        const std::string& name = Gs[g].name();
        bool ok = true;
        std::string worst;
        for (std::size_t k = 0; k < K; ++k) {
          std::vector<double> m;
          for (std::size_t r = 0; r < R; ++r) m.push_back(mart[r][g][k]);
          const double mu = mean(m), se = standard_error(m);
          rep.add(-1, n, times[k], "martingale:" + name, mu, se);
          rep.add(-1, n, times[k], "martingale_sq:" + name, mean_square(m), 0.0);
          if (std::abs(mu) > cfg.k_se * se) {
            ok = false;
            worst = "t=" + tag(times[k]) + " |mean|=" + fmt(std::abs(mu)) + " > " + fmt(cfg.k_se * se);
          }
          if (k + 1 == K) msq[g].push_back(mean_square(m));
        }
        rep.verdict("martingale-mean:" + name + ":" + n_label(n), ok, ok ? "within k SE at every snapshot" : worst);
      }
    }
  }

  if (cfg.martingale) {
    for (std::size_t g = 0; g < NG; ++g) {
      bool ok = true;
      std::string ladder;
      for (std::size_t i = 0; i < msq[g].size(); ++i) {
        if (i > 0 && msq[g][i] > msq[g][i - 1]) ok = false;
        ladder += (i ? " " : "") + fmt(msq[g][i]);
      }
      rep.verdict("martingale-square:" + Gs[g].name(), ok, "E[M_T^2] along the ladder: " + ladder);
    }
  }
  if (!opts.out_dir.empty()) {
    std::ostringstream csv;
    write_trajectory_csv(csv, traj_rows);
    write_text_file(opts.out_dir + "/trajectories.csv", csv.str());
  }
  return rep;
}

Report run_pde_report(const ExperimentConfig& cfg, const RunOptions& opts) {
  const PDESelector sel = select_hydrodynamic_pde(cfg.alpha, cfg.beta, cfg.gamma, cfg.d, cfg.entropy_bound());
  require_supported(sel);
  const auto Gs = load_test_functions(cfg);
  for (const auto& G : Gs) require_space(sel.space, G);

  Report rep;
  rep.experiment = "pde";
  rep.extra = {{"equation", equation_name(sel.equation)}, {"kappa", sel.kappa}};
  const auto times = snapshot_grid(cfg);
  auto rho = [&](double t, const Point& u) { return heat_solution(sel.equation, cfg.profile, sel.kappa, t, u); };

  if (!opts.out_dir.empty()) {
    const int P = std::max(2, cfg.pde.points);
    const int dims = std::min(cfg.d, 2);
    std::string header = "t";
    for (int j = 0; j < cfg.d; ++j) header += ",u" + std::to_string(j + 1);
    std::string csv = header + ",rho\n";
    const std::int64_t total = dims == 1 ? P : static_cast<std::int64_t>(P) * P;
    for (double t : times) {
      for (std::int64_t m = 0; m < total; ++m) {
        Point u{};
        const double h = 2.0 * cfg.pde.extent / (P - 1);
        u[cfg.d - 1] = -cfg.pde.extent + h * static_cast<double>(m % P);
        if (dims == 2) u[0] = -cfg.pde.extent + h * static_cast<double>(m / P);
        csv += fmt(t);
        for (int j = 0; j < cfg.d; ++j) csv += "," + fmt(u[j]);
        csv += "," + fmt(rho(t, u)) + "\n";
      }
    }
    write_text_file(opts.out_dir + "/pde_grid.csv", csv);
  }

  ResidualOptions ro;
  ro.panels = cfg.d == 1 ? 4 : 2;
  const double below = std::nextafter(0.0, -1.0);
  TraceFn traces = [&](double s) {
    Point lo{}, hi{};
    lo[0] = below;
    return std::pair{rho(s, lo), rho(s, hi)};
  };
  for (const auto& G : Gs) {
    for (std::size_t k = 1; k < times.size(); ++k) {
      const double t = times[k];
      ResidualResult res;
      if (sel.equation == HydroEquation::FreeHeat || cfg.d > 1) {
        res = weak_residual_dif(rho, G, cfg.profile, sel.kappa, t, ro);
      } else {
        res = weak_residual_neu(rho, G, cfg.profile, sel.kappa, t, traces, ro);
      }
      rep.add(-1, 0, t, "residual:" + G.name(), res.value, res.error_estimate);
      const bool ok = std::abs(res.value) < cfg.pde.tolerance;
      rep.verdict("residual:" + G.name() + ":t=" + tag(t), ok,
                  "|F| = " + fmt(std::abs(res.value)) + " (tolerance " + fmt(cfg.pde.tolerance) + ")");
    }
  }
  return rep;
}

Report run_experiment(const std::string& name, const ExperimentConfig& cfg, const RunOptions& opts) {
  if (name == "convergence") return run_convergence_experiment(cfg, opts);
  if (name == "flux") return run_barrier_flux_experiment(cfg, opts);
  if (name == "operators") return run_operator_convergence(cfg, opts);
  if (name == "replacement") return run_replacement_residual(cfg, opts);
  if (name == "simulate") return run_simulation(cfg, opts);
  if (name == "pde") return run_pde_report(cfg, opts);
  throw ConfigError("unknown experiment '" + name + "'");
}

}  // namespace exclusim
