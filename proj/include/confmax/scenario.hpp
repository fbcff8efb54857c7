#pragma once

#include "confmax/sphere_model.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace confmax {

using Json = nlohmann::json;

// Schema violations and unusable parameters; maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunFlags {
  std::optional<std::uint64_t> seed;
  double tolerance_scale = 1.0;
  std::optional<int> schedule_max_exp;
};

struct NamedSet {
  std::string name;
  SampledSet set;
};

struct ScenarioResult {
  int exit_code = 0;  // 0 pass, 1 assertion failure, 2 config error
  Json report;
  std::vector<NamedSet> point_sets;
};

constexpr const char* kToolVersion = "confmax 1.0.0";

// Validates and runs one scenario. Never throws for config or numerical
// failures; those are reported in the result.
ScenarioResult run_scenario(const Json& config, const RunFlags& flags = {});

// Serialized report without the wall-clock field (for determinism checks).
std::string report_fingerprint(const Json& report);

// Loads the config, runs it and writes <out_dir>/<name>.report.json plus any
// point clouds. Returns the exit code.
int run_config_file(const std::string& config_path, const std::string& out_dir, const RunFlags& flags,
                    std::string* report_path = nullptr);

void write_atomic(const std::string& path, const std::string& content);
std::string format17(double x);
// Writes path and the chart projection to path with ".csv" replaced by ".chart.csv".
void write_point_csv(const SampledSet& set, const std::string& path);
SampledSet read_point_csv(const std::string& path);
std::string chart_path(const std::string& csv_path);

}  // namespace confmax
