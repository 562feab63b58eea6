#pragma once

#include "adot/evaluation.hpp"
#include "adot/global_solver.hpp"
#include "adot/synthetic_data.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace adot::cli {

/// Invalid configuration. The message starts with "<file>:<line>:<col>:" or
/// "--set <path>:" so the offending entry can be found.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PowerData {
  double epsilon = 0.25;
  Eigen::Index n = 500;
  std::uint64_t seed = 0;
};

struct PlotSettings {
  std::string result;  // result document of a solve run
  int bins = 40;
  int grid_points = 400;
  int snapshots = 5;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string out = "out";
  bool header = false;

  /// Either generated datasets (source/target or power) or CSV inputs.
  std::optional<DatasetSpec> source;
  std::optional<DatasetSpec> target;
  std::optional<PowerData> power;
  std::string source_csv;
  std::string target_csv;

  GlobalConfig global;
  SuiteConfig benchmark;
  PlotSettings plots;
};

/// `path=value` pairs; the value is parsed as YAML (`k_list=[1,10]` works).
using Overrides = std::vector<std::pair<std::string, std::string>>;

RunConfig load_config(const std::string& path, const Overrides& overrides = {});
RunConfig parse_config(const std::string& text, const std::string& origin,
                       const Overrides& overrides = {});

/// Effective configuration as YAML, keys in a fixed order.
std::string dump_config(const RunConfig& cfg);

}  // namespace adot::cli
