#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "exclusim/profile.hpp"

namespace exclusim {

struct OperatorLadderConfig {
  std::vector<double> gammas{2.0, 3.0};
  std::vector<int> dims{1, 2};
  std::vector<std::int64_t> n{50, 100, 200, 400};
  double T = 1.0;
  int time_points = 17;
  double final_ratio = 0.25;  // required error(n_last)/error(n_first) for gamma > 2
  bool negative_control = true;
};

struct PdeGridConfig {
  int points = 101;
  double extent = 2.0;
  double tolerance = 1e-3;
};

struct ExperimentConfig {
  std::string experiment = "convergence";
  int d = 1;
  double gamma = 3.0;
  double alpha = 1.0;
  double beta = 0.0;
  std::vector<std::int64_t> n{32, 64, 128};
  double T = 0.1;
  std::vector<double> snapshots{0.0, 0.05, 0.1};
  nlohmann::json profile_spec = {{"kind", "step"}, {"left", 1.0}, {"right", 0.0}};
  Profile profile = Profile::step(1, 1.0, 0.0);
  std::optional<nlohmann::json> reference_spec;
  std::optional<ReferenceProfile> reference;
  std::vector<std::string> test_functions{"bump", "drift", "mix"};
  int replicas = 30;
  std::uint64_t seed = 20240611;
  double window = 1.0;
  std::int64_t half_side = 4;
  double k_se = 4.0;
  double final_delta = 0.05;
  std::vector<double> epsilons{0.05, 0.1, 0.2};
  bool control = false;
  bool martingale = true;
  bool dump_snapshots = false;
  std::string out = "out";
  OperatorLadderConfig operators;
  PdeGridConfig pde;

  bool entropy_bound() const { return reference.has_value(); }
};

Profile parse_profile(int d, const nlohmann::json& spec);
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
// Config echo with every default spelled out.
nlohmann::json to_json(const ExperimentConfig& cfg);

// --seed flag, then EXCLUSIM_SEED, then the config value.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::uint64_t config_seed);

}  // namespace exclusim
