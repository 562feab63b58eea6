#pragma once

#include "adot/global_solver.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace adot::cli {

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kGeneratorVersion = "0.1.0";

nlohmann::json to_json(const PotentialParams& p);
nlohmann::json to_json(const DiscriminatorParams& g);
PotentialParams potential_from_json(const nlohmann::json& j);
DiscriminatorParams discriminator_from_json(const nlohmann::json& j);

struct StallInfo {
  int step = -1;
  int sweep = -1;
  std::string message;
};

struct SolveRecord {
  std::string config_yaml;
  std::string source_path;
  std::string target_path;
  std::string transported_path;
  std::optional<TransportResult> result;
  std::optional<StallInfo> stall;
};

nlohmann::json result_document(const SolveRecord& record);

/// Fields emit-plots needs back from a result document.
struct LoadedResult {
  std::string source_path;
  std::string target_path;
  ComposedMap composed;
  DiscriminatorParams discriminator;
};

/// Throws IoError for a missing file, a wrong format_version or a result
/// without a map (stalled run).
LoadedResult load_result(const std::string& path);

}  // namespace adot::cli
