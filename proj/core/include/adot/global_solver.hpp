#pragma once

#include "adot/feature_space.hpp"
#include "adot/local_solver.hpp"
#include "adot/objective.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace adot {

enum class Pairing { IndexOrder, SortedCoordinate, RandomWithReplacement };

std::string_view to_string(Pairing pairing);
/// Accepts "index", "sorted", "random".
Pairing parse_pairing(std::string_view name);

/// SortedCoordinate in 1D, IndexOrder when n = m, RandomWithReplacement otherwise.
Pairing default_pairing(Eigen::Index n, Eigen::Index m, int dim);

/// σ: source row -> target row.
std::vector<Eigen::Index> pair_samples(const SampleSet& x, const SampleSet& y, Pairing pairing,
                                       std::uint64_t seed);

/// z_0..z_N, each with the row count of the source.
struct Trajectory {
  std::vector<SampleSet> steps;

  int intervals() const { return static_cast<int>(steps.size()) - 1; }
};

/// φ_1..φ_N; the global map is ∇φ_N ∘ … ∘ ∇φ_1.
struct ComposedMap {
  std::vector<PotentialParams> locals;
};

struct GlobalConfig {
  int steps = 10;
  int max_sweeps = 5;
  double sweep_tol = 1e-3;
  std::optional<Pairing> pairing;
  SolverConfig local;
  FeatureConfig features;
  AscentConfig kl;
  std::uint64_t seed = 0;
  /// Re-solve a non-converged local step with quadratic features only.
  bool quadratic_fallback = true;

  void validate() const;
};

Trajectory init_intermediates(const SampleSet& x, const SampleSet& y, const GlobalConfig& cfg);

/// Applies one local map ∇φ row by row.
SampleSet apply_potential(const PotentialParams& potential, const SampleSet& points);

struct LocalSummary {
  int step = 0;
  SolveStatus status = SolveStatus::Converged;
  int iterations = 0;
  int rejected_steps = 0;
  double final_grad_norm = 0.0;
  double final_core = 0.0;
  double min_jacobian_eigenvalue = 1.0;
  bool saturated = false;
  bool degenerate_centers = false;
  bool quadratic_fallback = false;
  std::vector<double> lagrangian_trace;
};

struct ForwardResult {
  ComposedMap map;
  Trajectory trajectory;
  std::vector<StartPoint> solutions;  // (α_t, β_t) for warm starts
  std::vector<LocalSummary> summaries;
};

/// Solves z_{t-1} -> z_t for t = 1..N (Y itself for t = N) and pushes z_{t-1}
/// through each new map. StallError is rethrown with `step` set.
ForwardResult forward_sweep(const Trajectory& traj, const SampleSet& y, const GlobalConfig& cfg,
                            const std::vector<StartPoint>& warm = {}, int sweep = 1);

/// z_t = ((N-t)/N) z_0 + (t/N) z_N for 0 < t < N.
Trajectory backward_sweep(const Trajectory& traj);

struct SweepRecord {
  int sweep = 0;
  double relative_change = 0.0;
  std::vector<LocalSummary> locals;
};

struct TransportResult {
  ComposedMap composed;
  Trajectory trajectory;
  int sweeps = 0;
  bool sweeps_converged = false;
  bool locals_converged = true;  // every local solve of the last sweep met its tolerance
  double kl_initial = 0.0;
  double kl_final = 0.0;
  double cost = 0.0;
  std::vector<SweepRecord> history;
  DiscriminatorParams final_discriminator;
};

TransportResult sbgot(const SampleSet& x, const SampleSet& y, const GlobalConfig& cfg);

SampleSet apply_map(const ComposedMap& composed, const SampleSet& points);

/// (1/n) Σ ‖T(x_i) - x_i‖².
double transport_cost(const ComposedMap& composed, const SampleSet& x);

/// Variational KL between `z` and `y` after a β-only ascent within the
/// configured g family.
AscentResult estimate_kl(const SampleSet& z, const SampleSet& y, const GlobalConfig& cfg);

}  // namespace adot
