#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "exclusim/config.hpp"
#include "exclusim/report.hpp"

namespace exclusim {

struct RunOptions {
  std::uint64_t seed = 0;
  int jobs = 0;         // 0: hardware concurrency
  std::string out_dir;  // empty: no side files
};

// Runs fn(0..count-1) on at most `jobs` threads; results must be written to
// per-index slots. The first exception is rethrown after all workers stop.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

// All of these throw Refusal for parameter regions outside the case table.
Report run_convergence_experiment(const ExperimentConfig& cfg, const RunOptions& opts);
Report run_barrier_flux_experiment(const ExperimentConfig& cfg, const RunOptions& opts);
Report run_operator_convergence(const ExperimentConfig& cfg, const RunOptions& opts);
Report run_replacement_residual(const ExperimentConfig& cfg, const RunOptions& opts);
Report run_simulation(const ExperimentConfig& cfg, const RunOptions& opts);
Report run_pde_report(const ExperimentConfig& cfg, const RunOptions& opts);

// Dispatch on the subcommand name (simulate, operators, pde, convergence, flux, replacement).
Report run_experiment(const std::string& name, const ExperimentConfig& cfg, const RunOptions& opts);

}  // namespace exclusim
