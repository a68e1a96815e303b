#include <chrono>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "exclusim/config.hpp"
#include "exclusim/errors.hpp"
#include "exclusim/harness.hpp"
#include "exclusim/report.hpp"

using namespace exclusim;

int main(int argc, char** argv) {
  CLI::App app{"exclusim: long-jump exclusion with a slow barrier"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  std::string out;
  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "run replicas and check conservation, stationarity and the martingale"},
      {"operators", "discrete operator ladder against the continuum operators"},
      {"pde", "solution grid and weak residuals of the selected equation"},
      {"convergence", "empirical pairings against the continuum solution"},
      {"flux", "window densities and crossings at the barrier"},
      {"replacement", "replacement residuals under an entropy bound"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "experiment config (JSON)");
    sub->add_option("--seed", seed, "master seed; overrides EXCLUSIM_SEED and the config");
    sub->add_option("--jobs", jobs, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", out, "output directory; overrides the config");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) {
      cfg = load_config(config_path);
    } else {
      cfg = parse_config(nlohmann::json::object());
    }
    cfg.experiment = command;
    if (!out.empty()) cfg.out = out;
    RunOptions opts;
    opts.seed = resolve_seed(seed, cfg.seed);
    opts.jobs = jobs;
    opts.out_dir = cfg.out;

    const auto start = std::chrono::steady_clock::now();
    Report rep = run_experiment(command, cfg, opts);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    emit_reports({rep}, cfg, opts.seed, wall, {cfg.out + "/report.csv", cfg.out + "/summary.json"});

    for (const auto& v : rep.verdicts) {
      std::printf("%s %s: %s\n", v.passed ? "PASS" : "FAIL", v.name.c_str(), v.detail.c_str());
    }
    std::printf("%s: %s (%.1f s, seed %llu, output in %s)\n", command.c_str(), rep.passed() ? "passed" : "failed",
                wall, static_cast<unsigned long long>(opts.seed), cfg.out.c_str());
    return rep.passed() ? 0 : 1;
  } catch (const Refusal& r) {
    std::fprintf(stderr, "refused [%s]: %s\n", r.code().c_str(), r.what());
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
