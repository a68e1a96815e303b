#include "exclusim/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "exclusim/errors.hpp"
#include "exclusim/model.hpp"

namespace exclusim {

using nlohmann::json;

bool Report::passed() const {
  for (const auto& v : verdicts) {
    if (!v.passed) return false;
  }
  return true;
}

void Report::add(int replica, std::int64_t n, double t, std::string name, double value, double se) {
  rows.push_back({experiment, replica, n, t, std::move(name), value, se});
}

void Report::verdict(std::string name, bool ok, std::string detail) {
  verdicts.push_back({std::move(name), ok, std::move(detail)});
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

std::string report_csv(const std::vector<Report>& reports) {
  std::string out = kReportHeader;
  out += '\n';
  for (const auto& rep : reports) {
    for (const auto& r : rep.rows) {
      out += csv_field(r.experiment) + ',' + std::to_string(r.replica) + ',' + std::to_string(r.n) + ',' +
             format_number(r.t) + ',' + csv_field(r.name) + ',' + format_number(r.value) + ',' +
             format_number(r.se) + '\n';
    }
  }
  return out;
}

json constants_json(const ExperimentConfig& cfg) {
  json c;
  c["c_gamma"] = normalization_constant(cfg.gamma);
  c["sigma_squared"] = cfg.gamma > 2.0 ? json(sigma_squared(cfg.gamma)) : json(nullptr);
  c["kappa_gamma"] = kappa_gamma(cfg.gamma, cfg.d);
  json per_n = json::array();
  for (auto n : cfg.n) {
    const std::int64_t r_max = 2 * cfg.half_side * n;
    JumpKernel kernel(cfg.d, cfg.gamma, r_max);
    per_n.push_back({{"n", n},
                     {"theta_n", theta(n, cfg.gamma)},
                     {"slow_factor", BarrierSpec{cfg.alpha, cfg.beta}.slow_factor(n)},
                     {"r_max", r_max},
                     {"tail_mass", kernel.tail_mass()}});
  }
  c["ladder"] = per_n;
  return c;
}

json summary_json(const std::vector<Report>& reports, const ExperimentConfig& cfg, std::uint64_t seed,
                  double wall_clock_seconds) {
  json verdicts = json::array();
  json streams = json::array();
  json extras = json::object();
  bool all = true;
  for (const auto& rep : reports) {
    for (const auto& v : rep.verdicts) {
      verdicts.push_back({{"experiment", rep.experiment}, {"name", v.name}, {"passed", v.passed}, {"detail", v.detail}});
      all = all && v.passed;
    }
    for (const auto& s : rep.streams) {
      streams.push_back({{"tag", s.tag}, {"n", s.n}, {"replica", s.replica}, {"key", s.key}});
    }
    if (!rep.extra.empty()) extras[rep.experiment] = rep.extra;
  }
  json j;
  j["config"] = to_json(cfg);
  j["constants"] = constants_json(cfg);
  j["verdicts"] = verdicts;
  j["passed"] = all;
  j["seeds"] = {{"master", seed}, {"streams", streams}};
  j["wall_clock_seconds"] = finite_or_null(wall_clock_seconds);
  if (!extras.empty()) j["details"] = extras;
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::error_code ec;
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  if (ec) throw IoError("cannot create directory '" + parent.string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

void emit_reports(const std::vector<Report>& reports, const ExperimentConfig& cfg, std::uint64_t seed,
                  double wall_clock_seconds, const ReportPaths& paths) {
  write_text_file(paths.csv, report_csv(reports));
  write_text_file(paths.json, summary_json(reports, cfg, seed, wall_clock_seconds).dump(2) + "\n");
}

}  // namespace exclusim
