#pragma once

#include "adot/feature_space.hpp"
#include "adot/objective.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace adot {

/// (I + ηH) was too ill-conditioned to solve reliably.
class NeedsSmallerEta : public std::runtime_error {
 public:
  NeedsSmallerEta(const std::string& what, double rcond)
      : std::runtime_error(what), rcond_(rcond) {}
  double rcond() const { return rcond_; }

 private:
  double rcond_;
};

/// γ - η (I + ηH)⁻¹ G, solved by LU with partial pivoting.
/// Throws NeedsSmallerEta when the reciprocal condition estimate is below 1e-14.
Vector implicit_step(const Vector& gamma, const Vector& G, const Matrix& H, double eta);

struct SolverConfig {
  double eta0 = 0.1;
  double eta_min = 1e-8;
  double eta_max = 1e6;
  double grow = 2.0;
  double shrink = 0.5;
  double tolerance = 1e-7;
  int max_iter = 300;
  /// Relative slack in the rejection test, absorbs round-off near a saddle.
  double rejection_slack = 1e-12;
  /// Also reject steps that push the smallest eigenvalue of ∇²φ on the source
  /// points below convexity_floor (or lower it further when already below).
  bool monotone_guard = true;
  double convexity_floor = 0.0;
  /// Replace the αα and ββ blocks of H by their absolute values (|Λ| in the
  /// eigenbasis) before the implicit step.
  bool absolute_curvature = false;
  /// Reject steps that multiply ‖G‖ by more than this; 0 disables the test.
  double grad_growth = 4.0;
  PenaltyConfig penalty;
  /// Seeds the jitter of the initial bump centers.
  std::uint64_t seed = 0;

  void validate() const;
};

/// ConvexityBound: every retry down to eta_min was refused only by the
/// monotone guard; the last accepted iterate is kept.
enum class SolveStatus { Converged, MaxIterations, Stalled, ConvexityBound };

std::string_view to_string(SolveStatus status);

struct LocalDiagnostics {
  bool saturated = false;
  bool degenerate_centers = false;
  bool regularized_init = false;
  /// min over the source points of the smallest eigenvalue of ∇²φ.
  double min_jacobian_eigenvalue = 1.0;
  /// L[α, β] - L[identity, β] under the final discriminator (≤ 0 expected).
  double identity_gap = 0.0;
};

struct LocalSolution {
  Vector alpha;
  Vector beta;
  /// Structured parameters, set for Gaussian feature spaces.
  std::optional<PotentialParams> potential;
  std::optional<DiscriminatorParams> discriminator;

  SolveStatus status = SolveStatus::MaxIterations;
  int iterations = 0;
  double final_grad_norm = 0.0;
  double final_eta = 0.0;
  int rejected_steps = 0;
  std::vector<double> lagrangian_trace;  // penalized value per iterate
  std::vector<double> core_trace;
  std::vector<double> grad_norm_trace;
  LocalDiagnostics diagnostics;
  PenaltyConfig penalty;  // as resolved for this problem
};

/// Persistent rejection at eta_min. Carries the partial solution and trace.
class StallError : public std::runtime_error {
 public:
  StallError(const std::string& what, LocalSolution partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const LocalSolution& partial() const { return partial_; }
  int step = -1;
  int sweep = -1;

 private:
  LocalSolution partial_;
};

struct StartPoint {
  Vector alpha;
  Vector beta;
  bool regularized = false;
};

/// Identity map, Gaussian-moment discriminator and inactive bumps placed near
/// the sample means (jitter of 0.1·std, seeded).
StartPoint initial_point(const FeatureSpace& space, const SampleSet& x, const SampleSet& y,
                         std::uint64_t seed);

/// Sample-based local transport by implicit twisted gradient descent.
LocalSolution sblot(const FeatureSpace& space, const SampleSet& x, const SampleSet& y,
                    const SolverConfig& cfg, const std::optional<StartPoint>& warm = std::nullopt);

}  // namespace adot
