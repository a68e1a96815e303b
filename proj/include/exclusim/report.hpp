#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "exclusim/config.hpp"

namespace exclusim {

// replica = -1 marks an aggregate over replicas.
struct ReportRow {
  std::string experiment;
  int replica = -1;
  std::int64_t n = 0;
  double t = 0.0;
  std::string name;
  double value = 0.0;
  double se = 0.0;
};

struct Verdict {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct StreamKey {
  std::string tag;
  std::int64_t n = 0;
  int replica = 0;
  std::uint64_t key = 0;
};

struct Report {
  std::string experiment;
  std::vector<ReportRow> rows;
  std::vector<Verdict> verdicts;
  std::vector<StreamKey> streams;
  nlohmann::json extra = nlohmann::json::object();

  bool passed() const;
  void add(int replica, std::int64_t n, double t, std::string name, double value, double se = 0.0);
  void verdict(std::string name, bool passed, std::string detail = {});
};

inline constexpr const char* kReportHeader = "experiment,replica,n,t,name,value,se";

struct ReportPaths {
  std::string csv;
  std::string json;
};

// Model constants for every n of the ladder.
nlohmann::json constants_json(const ExperimentConfig& cfg);
nlohmann::json summary_json(const std::vector<Report>& reports, const ExperimentConfig& cfg, std::uint64_t seed,
                            double wall_clock_seconds);
std::string report_csv(const std::vector<Report>& reports);
// Writes both files; throws IoError naming the path on failure.
void emit_reports(const std::vector<Report>& reports, const ExperimentConfig& cfg, std::uint64_t seed,
                  double wall_clock_seconds, const ReportPaths& paths);

// %.17g
std::string format_number(double x);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace exclusim
