#pragma once

#include "adot/feature_space.hpp"
#include "adot/global_solver.hpp"
#include "adot/synthetic_data.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace adot {

struct MetricsReport {
  double weighted_l2 = 0.0;
  double linf = 0.0;
  std::optional<double> monotone_min_slope;  // 1D only
  double cost = 0.0;
  double kl_final = std::numeric_limits<double>::quiet_NaN();
};

using PointMap = std::function<SampleSet(const SampleSet&)>;

/// Weighted L2 over `x` and sup-norm over `grid` of T - T*. The slope is the
/// smallest forward difference of T along a 1D grid.
MetricsReport map_error_metrics(const PointMap& map, const ReferenceMap& ref, const SampleSet& x,
                                const SampleSet& grid);
MetricsReport map_error_metrics(const ComposedMap& composed, const ReferenceMap& ref,
                                const SampleSet& x, const SampleSet& grid);

/// `points` uniform values over [min - pad·std, max + pad·std] of `samples`
/// (one-dimensional samples only).
SampleSet evaluation_grid(const SampleSet& samples, int points = 400, double pad = 0.5);

/// (1/n) Σ f_k(Tx_i) - (1/m) Σ f_k(y_j) for every feature.
Vector feature_mean_gap(const std::vector<SmoothFunction>& features, const SampleSet& tx,
                        const SampleSet& y);

enum class SweepKind { Steps, Samples };

std::string_view to_string(SweepKind kind);

struct SuiteConfig {
  double epsilon = 0.25;
  std::vector<int> k_list;
  std::vector<Eigen::Index> n_list;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  Eigen::Index n_for_k = 500;
  int k_for_n = 10;
  GlobalConfig base;
  int grid_points = 400;
  /// Worker threads for independent cells; 0 runs them in order on the caller.
  int threads = 0;
  bool timing = true;
};

struct SuiteRow {
  SweepKind sweep = SweepKind::Steps;
  double param = 0.0;
  std::uint64_t seed = 0;
  MetricsReport metrics;
  double runtime_s = std::numeric_limits<double>::quiet_NaN();
  bool sparse = false;  // n < 15
  std::string error;
};

struct SuiteAggregate {
  SweepKind sweep = SweepKind::Steps;
  double param = 0.0;
  double weighted_l2 = 0.0;
  double linf = 0.0;
  double cost = 0.0;
  double runtime_s = std::numeric_limits<double>::quiet_NaN();
  int runs = 0;
  int failures = 0;
};

struct SuiteResult {
  std::vector<SuiteRow> rows;
  std::vector<SuiteAggregate> aggregates;
};

/// One power-map run: n source points, K local steps.
SuiteRow power_benchmark_cell(SweepKind sweep, Eigen::Index n, int k, std::uint64_t seed,
                              const SuiteConfig& cfg);

/// K-sweep at n = n_for_k, then n-sweep at K = k_for_n; rows ordered by
/// (sweep, param, seed) regardless of threading.
SuiteResult convergence_suite(const SuiteConfig& cfg);

std::vector<SuiteAggregate> aggregate_rows(const std::vector<SuiteRow>& rows);

}  // namespace adot
