#include "exclusim/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>

#include "exclusim/errors.hpp"

namespace exclusim {

using nlohmann::json;

namespace {

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

double number(const json& j, const char* key, double fallback) {
  double v = fallback;
  read(j, key, v);
  return v;
}

}  // namespace

Profile parse_profile(int d, const json& spec) {
  if (!spec.is_object() || !spec.contains("kind")) throw ConfigError("profile: expected an object with 'kind'");
  const auto kind = spec.at("kind").get<std::string>();
  try {
    if (kind == "constant") return Profile::constant(d, number(spec, "value", 0.5));
    if (kind == "step") return Profile::step(d, number(spec, "left", 1.0), number(spec, "right", 0.0));
    if (kind == "bump") {
      return Profile::bump(d, number(spec, "base", 0.5), number(spec, "amplitude", 0.3), number(spec, "center", 0.0),
                           number(spec, "width", 0.5));
    }
  } catch (const InitializationError& e) {
    throw ConfigError(std::string("profile: ") + e.what());
  }
  throw ConfigError("profile: unknown kind '" + kind + "'");
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  ExperimentConfig c;
  read(j, "experiment", c.experiment);
  read(j, "d", c.d);
  read(j, "gamma", c.gamma);
  read(j, "alpha", c.alpha);
  read(j, "beta", c.beta);
  read(j, "n", c.n);
  read(j, "T", c.T);
  if (j.contains("snapshots")) {
    read(j, "snapshots", c.snapshots);
  } else {
    c.snapshots = c.T > 0.0 ? std::vector<double>{0.0, 0.5 * c.T, c.T} : std::vector<double>{0.0};
  }
  read(j, "test_functions", c.test_functions);
  read(j, "replicas", c.replicas);
  read(j, "seed", c.seed);
  read(j, "window", c.window);
  c.half_side = static_cast<std::int64_t>(std::ceil(4.0 * c.window));
  read(j, "half_side", c.half_side);
  read(j, "k_se", c.k_se);
  read(j, "final_delta", c.final_delta);
  read(j, "epsilons", c.epsilons);
  read(j, "control", c.control);
  read(j, "martingale", c.martingale);
  read(j, "dump_snapshots", c.dump_snapshots);
  read(j, "out", c.out);

  if (c.d < 1 || c.d > kMaxDim) throw ConfigError("config: d must be in 1..4");
  if (!(c.gamma >= 2.0)) throw ConfigError("config: gamma must be >= 2");
  if (!(c.alpha > 0.0)) throw ConfigError("config: alpha must be positive");
  if (!(c.beta >= 0.0)) throw ConfigError("config: beta must be nonnegative");
  if (!(c.T >= 0.0)) throw ConfigError("config: T must be nonnegative");
  if (c.replicas < 1) throw ConfigError("config: replicas must be positive");
  if (c.half_side < 1) throw ConfigError("config: half_side must be positive");
  for (auto n : c.n) {
    if (n < 1) throw ConfigError("config: every n must be positive");
    if (c.gamma == 2.0 && n < 2) throw ConfigError("config: gamma = 2 needs n >= 2");
  }
  for (std::size_t i = 0; i < c.snapshots.size(); ++i) {
    if (c.snapshots[i] < 0.0 || c.snapshots[i] > c.T) throw ConfigError("config: snapshot outside [0, T]");
    if (i > 0 && !(c.snapshots[i] > c.snapshots[i - 1])) throw ConfigError("config: snapshots must increase");
  }
  if (j.contains("profile")) c.profile_spec = j.at("profile");
  c.profile = parse_profile(c.d, c.profile_spec);

  if (j.contains("reference") && !j.at("reference").is_null()) {
    const json& r = j.at("reference");
    c.reference_spec = r;
    ReferenceProfile ref;
    if (!r.contains("profile")) throw ConfigError("reference: missing 'profile'");
    ref.h = parse_profile(c.d, r.at("profile"));
    ref.a = number(r, "a_h", ref.h.lower());
    ref.b = number(r, "b_h", ref.h.upper());
    ref.lipschitz = number(r, "L_h", 1.0);
    ref.far_radius = number(r, "K_h", 1.0);
    ref.far_value = number(r, "A_h", ref.h.base);
    validate_reference(ref);
    c.reference = ref;
  }

  if (j.contains("operators")) {
    const json& o = j.at("operators");
    read(o, "gammas", c.operators.gammas);
    read(o, "dims", c.operators.dims);
    read(o, "n", c.operators.n);
    read(o, "T", c.operators.T);
    read(o, "time_points", c.operators.time_points);
    read(o, "final_ratio", c.operators.final_ratio);
    read(o, "negative_control", c.operators.negative_control);
  }
  if (j.contains("pde")) {
    const json& p = j.at("pde");
    read(p, "points", c.pde.points);
    read(p, "extent", c.pde.extent);
    read(p, "tolerance", c.pde.tolerance);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j = {{"experiment", c.experiment},
            {"d", c.d},
            {"gamma", c.gamma},
            {"alpha", c.alpha},
            {"beta", c.beta},
            {"n", c.n},
            {"T", c.T},
            {"snapshots", c.snapshots},
            {"profile", c.profile_spec},
            {"reference", c.reference_spec ? *c.reference_spec : json(nullptr)},
            {"entropy_bound", c.entropy_bound()},
            {"test_functions", c.test_functions},
            {"replicas", c.replicas},
            {"seed", c.seed},
            {"window", c.window},
            {"half_side", c.half_side},
            {"k_se", c.k_se},
            {"final_delta", c.final_delta},
            {"epsilons", c.epsilons},
            {"control", c.control},
            {"martingale", c.martingale},
            {"dump_snapshots", c.dump_snapshots},
            {"out", c.out},
            {"operators",
             {{"gammas", c.operators.gammas},
              {"dims", c.operators.dims},
              {"n", c.operators.n},
              {"T", c.operators.T},
              {"time_points", c.operators.time_points},
              {"final_ratio", c.operators.final_ratio},
              {"negative_control", c.operators.negative_control}}},
            {"pde", {{"points", c.pde.points}, {"extent", c.pde.extent}, {"tolerance", c.pde.tolerance}}}};
  return j;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::uint64_t config_seed) {
  if (flag) return *flag;
  if (const char* env = std::getenv("EXCLUSIM_SEED"); env != nullptr && *env != '\0') {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("EXCLUSIM_SEED is not an unsigned integer: ") + env);
    }
  }
  return config_seed;
}

}  // namespace exclusim
