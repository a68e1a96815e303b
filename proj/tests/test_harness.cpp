#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include "exclusim/errors.hpp"
#include "exclusim/harness.hpp"

using namespace exclusim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small(json extra = json::object()) {
  json j = {{"d", 1},
            {"gamma", 3.0},
            {"n", {16, 32}},
            {"T", 0.05},
            {"replicas", 4},
            {"half_side", 2},
            {"test_functions", {"bump"}},
            {"profile", {{"kind", "constant"}, {"value", 0.4}}}};
  j.update(extra);
  return parse_config(j);
}

std::string refusal_code(const std::string& name, const ExperimentConfig& cfg) {
  try {
    run_experiment(name, cfg, RunOptions{1, 1, {}});
  } catch (const Refusal& e) {
    return e.code();
  }
  return "";
}

// exact name, or a name extended by ":..."
bool has_verdict(const Report& rep, const std::string& name) {
  for (const auto& v : rep.verdicts) {
    if (v.name == name || v.name.rfind(name + ":", 0) == 0) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("parallel_for visits every index once") {
  for (int jobs : {1, 3, 0}) {
    std::vector<std::atomic<int>> hits(50);
    parallel_for(50, jobs, [&](int i) { hits[static_cast<std::size_t>(i)]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
  parallel_for(0, 2, [](int) { FAIL("no work expected"); });
  CHECK_THROWS_AS(parallel_for(10, 2,
                               [](int i) {
                                 if (i == 4) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}

TEST_CASE("refusals") {
  CHECK(refusal_code("flux", small({{"beta", 1.0}})) == "critical-barrier-long-range");
  CHECK(refusal_code("convergence", small({{"beta", 1.0}})) == "critical-barrier-long-range");
  CHECK(refusal_code("flux", small({{"beta", 0.5}})) == "not-decoupling");
  CHECK(refusal_code("flux", small({{"beta", 0.5}, {"control", true}})) == "no-entropy-bound");
  CHECK(refusal_code("convergence", small({{"alpha", 2.0}})) == "no-entropy-bound");
  CHECK(refusal_code("replacement", small({{"beta", 0.5}})) == "no-entropy-bound");
  const json ref = {{"profile", {{"kind", "constant"}, {"value", 0.4}}}, {"a_h", 0.3}, {"b_h", 0.5}, {"A_h", 0.4}};
  CHECK(refusal_code("replacement", small({{"beta", 2.0}, {"gamma", 2.0}, {"reference", ref}})) ==
        "replacement-regime");
  CHECK_THROWS_AS(run_experiment("nonsense", small(), RunOptions{}), ConfigError);
}

TEST_CASE("simulation report") {
  const auto cfg = small();
  const auto rep = run_simulation(cfg, RunOptions{3, 1, {}});
  CHECK(rep.experiment == "simulate");
  CHECK(has_verdict(rep, "conservation"));
  CHECK(has_verdict(rep, "stationary"));
  for (const auto& v : rep.verdicts) {
    CAPTURE(v.name);
    CAPTURE(v.detail);
    if (v.name.rfind("conservation", 0) == 0) CHECK(v.passed);
  }
  // one stream per (n, replica), all distinct
  CHECK(rep.streams.size() == 8);
  std::set<std::uint64_t> keys;
  for (const auto& s : rep.streams) keys.insert(s.key);
  CHECK(keys.size() == 8);
}

TEST_CASE("same seed gives identical reports") {
  const auto cfg = small({{"profile", {{"kind", "step"}, {"left", 0.8}, {"right", 0.2}}}});
  const auto a = report_csv({run_simulation(cfg, RunOptions{11, 1, {}})});
  const auto b = report_csv({run_simulation(cfg, RunOptions{11, 3, {}})});
  const auto c = report_csv({run_simulation(cfg, RunOptions{12, 1, {}})});
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("side files") {
  const auto dir = fs::temp_directory_path() / "exclusim_test_harness";
  fs::remove_all(dir);
  auto cfg = small({{"dump_snapshots", true}, {"replicas", 2}});
  run_simulation(cfg, RunOptions{5, 1, dir.string()});
  CHECK(fs::exists(dir / "trajectories.csv"));
  std::ifstream in(dir / "trajectories.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "replica,t,observable_name,value");
  bool any_bin = false;
  for (const auto& e : fs::recursive_directory_iterator(dir)) any_bin = any_bin || e.path().extension() == ".bin";
  CHECK(any_bin);
}

TEST_CASE("small experiments run end to end") {
  SUBCASE("convergence") {
    const auto rep = run_convergence_experiment(small({{"profile", {{"kind", "step"}, {"left", 1.0}, {"right", 0.0}}}}),
                                                RunOptions{2, 1, {}});
    CHECK(has_verdict(rep, "delta-final:bump"));
    CHECK(has_verdict(rep, "initial-sampling:bump"));
  }
  SUBCASE("flux") {
    const auto rep = run_barrier_flux_experiment(
        small({{"beta", 2.0}, {"profile", {{"kind", "step"}, {"left", 0.9}, {"right", 0.1}}}}), RunOptions{2, 1, {}});
    CHECK(has_verdict(rep, "thinning-bound"));
    CHECK(has_verdict(rep, "window:left"));
  }
  SUBCASE("pde") {
    const auto rep = run_pde_report(small({{"beta", 2.0}, {"gamma", 2.0}}), RunOptions{});
    CHECK_FALSE(rep.verdicts.empty());
    CHECK(rep.passed());
  }
}
