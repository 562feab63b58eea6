#pragma once

#include "adot/feature_space.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace adot {

/// Regularization of the adaptive bumps.
///
/// Unset `epsilon` / `diameter` are derived from the samples of each local
/// problem (see resolve_penalty). `origin` is the point the centering term
/// pulls bump centers towards; empty means the coordinate origin.
struct PenaltyConfig {
  double lambda = 1e-3;
  std::optional<double> epsilon;
  std::optional<double> diameter;
  Vector origin;
  /// Lower bound on the resolved ε as a fraction of D.
  double epsilon_floor = 0.03;

  bool resolved() const { return epsilon.has_value() && diameter.has_value(); }
  void validate() const;
};

/// Fills unset fields from the pooled samples: ε = max(2 × median
/// nearest-neighbour distance, epsilon_floor·D), D = diagonal of the bounding
/// box, origin = box midpoint.
PenaltyConfig resolve_penalty(const PenaltyConfig& cfg, const SampleSet& x, const SampleSet& y);

double median_nearest_neighbor_distance(const SampleSet& points);

/// Raw bump penalties (without λ) and their derivatives in the flat layout.
struct PenaltyTerms {
  double phi = 0.0;
  double g = 0.0;
  Vector grad_alpha;
  Vector grad_beta;
  Matrix hess_alpha;
  Matrix hess_beta;
  bool degenerate = false;  // two centers closer than the floor distance
};

PenaltyTerms penalty_terms(const ParamLayout& layout, const Vector& alpha, const Vector& beta,
                           const PenaltyConfig& cfg, bool derivatives);

/// λ·[P(g-bumps) + gbar·P(φ-bumps)].
double penalty(const PotentialParams& alpha, const DiscriminatorParams& beta,
               const PenaltyConfig& cfg, double gbar, bool* degenerate = nullptr);

/// Thrown when e^g or a derivative overflows. `sample` indexes the source
/// set when `in_target` is false, the target set otherwise.
class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(const std::string& what, Eigen::Index sample, bool in_target)
      : std::runtime_error(what), sample_(sample), in_target_(in_target) {}
  Eigen::Index sample() const { return sample_; }
  bool in_target() const { return in_target_; }

 private:
  Eigen::Index sample_;
  bool in_target_;
};

/// g is clamped here before exponentiation.
inline constexpr double kExpClamp = 50.0;

struct LagrangianValue {
  double core = 0.0;   // mean g(T(x)) - mean e^g(y)
  double total = 0.0;  // core + λ·gbar·P_φ - λ·P_g
  double gbar = 0.0;   // mean ‖∇g(T(x))‖ used for the φ penalty
  double penalty_phi = 0.0;
  double penalty_g = 0.0;
  bool saturated = false;
  bool degenerate = false;
};

/// Penalized sample Lagrangian. When `gbar` is given it replaces the mean
/// ‖∇g(T(x))‖ of the current point.
LagrangianValue lagrangian(const FeatureSpace& space, const Vector& alpha, const Vector& beta,
                           const SampleSet& x, const SampleSet& y, const PenaltyConfig& cfg,
                           std::optional<double> gbar = std::nullopt);

LagrangianValue lagrangian(const PotentialParams& alpha, const DiscriminatorParams& beta,
                           const SampleSet& x, const SampleSet& y, const PenaltyConfig& cfg);

struct TwistedDerivatives {
  Vector G;  // (∇_α L, -∇_β L)
  Matrix H;  // [[L_αα, L_αβ], [-L_αβᵀ, -L_ββ]]
  LagrangianValue value;
};

/// The φ penalty weight gbar is treated as a constant; pass it to freeze it
/// at another point (it is recomputed from the current point otherwise).
TwistedDerivatives twisted_derivatives(const FeatureSpace& space, const Vector& alpha,
                                       const Vector& beta, const SampleSet& x,
                                       const SampleSet& y, const PenaltyConfig& cfg,
                                       std::optional<double> gbar = std::nullopt);

/// 1 + mean g(z) - mean e^g(y).
double kl_estimate(const FeatureSpace& space, const Vector& beta, const SampleSet& z,
                   const SampleSet& y);
double kl_estimate(const DiscriminatorParams& beta, const SampleSet& z, const SampleSet& y);

struct DiscriminatorInit {
  DiscriminatorParams params;
  bool regularized = false;  // a covariance needed a ridge
};

/// The log-density ratio of the Gaussians fitted to x and y (moments use 1/n).
DiscriminatorInit init_discriminator(const SampleSet& x, const SampleSet& y);

struct AscentConfig {
  double eta0 = 0.1;
  double eta_min = 1e-8;
  double eta_max = 1e3;
  double tolerance = 1e-9;
  int max_iter = 500;
};

struct AscentResult {
  Vector beta;
  double kl = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
};

/// Maximizes mean g(z) - mean e^g(y) - λP_g over β, using the implicit stepper.
/// `z` holds already transported points.
AscentResult maximize_discriminator(const FeatureSpace& space, const Vector& beta0,
                                    const SampleSet& z, const SampleSet& y,
                                    const PenaltyConfig& cfg, const AscentConfig& ascent = {});

}  // namespace adot
