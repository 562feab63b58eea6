#pragma once

#include "adot/types.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace adot {

struct GaussianSpec {
  Vector mean;
  Matrix covariance;
};

struct MixtureSpec {
  std::vector<double> weights;
  std::vector<GaussianSpec> components;
};

/// Uniform on the planar annulus r_inner <= |z - center| <= r_outer.
struct AnnulusSpec {
  Vector center;
  double r_inner = 0.0;
  double r_outer = 1.0;
};

/// Source side of the power-map pair: X ~ N(0, 1) in one dimension.
struct PowerPairSpec {
  double epsilon = 0.25;
};

struct DatasetSpec {
  std::variant<GaussianSpec, MixtureSpec, AnnulusSpec, PowerPairSpec> kind;
  Eigen::Index n = 0;
  std::uint64_t seed = 0;

  int dim() const;
  void validate() const;
};

/// Deterministic in (spec, seed). Gaussians are drawn as mean + L z with L the
/// Cholesky factor of the covariance, so two Gaussian specs sharing a seed
/// produce affinely related arrays.
SampleSet generate(const DatasetSpec& spec);

struct AffineMap {
  Matrix A;
  Vector b;
};

struct PowerMap {
  double epsilon = 0.25;
};

struct ShiftMap {
  Vector a;
};

using ReferenceMap = std::variant<AffineMap, PowerMap, ShiftMap>;

/// Closed-form reference map. PowerMap acts coordinate-wise as
/// (1+ε) x |x|^(ε-1), extended by 0 at the origin.
Vector reference_eval(const ReferenceMap& ref, const Eigen::Ref<const Vector>& x);
SampleSet reference_apply(const ReferenceMap& ref, const SampleSet& points);

double power_map(double x, double epsilon);

struct PowerPair {
  SampleSet x;
  SampleSet y;
  ReferenceMap ref;
};

PowerPair power_pair(Eigen::Index n, double epsilon, std::uint64_t seed);

}  // namespace adot
