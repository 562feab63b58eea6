#include "adot/evaluation.hpp"
#include "adot/local_solver.hpp"
#include "adot/synthetic_data.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace adot;

namespace {

SampleSet normal_sample(Eigen::Index n, int d, std::uint64_t seed) {
  return generate(DatasetSpec{GaussianSpec{Vector::Zero(d), Matrix::Identity(d, d)}, n, seed});
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Philox4x32 rng(seed);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

}  // namespace

TEST(ImplicitStep, ZeroHessianIsGradientStep) {
  const Vector gamma = random_matrix(5, 1, 1).col(0);
  const Vector g = random_matrix(5, 1, 2).col(0);
  const Vector out = implicit_step(gamma, g, Matrix::Zero(5, 5), 0.3);
  EXPECT_LT((out - (gamma - 0.3 * g)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ImplicitStep, SmallEtaQuadraticDeviation) {
  const Vector gamma = random_matrix(4, 1, 3).col(0);
  const Vector g = random_matrix(4, 1, 4).col(0);
  const Matrix h = random_matrix(4, 4, 5);
  double prev = 0.0;
  for (double eta : {1e-2, 1e-3, 1e-4}) {
    const double dev = (implicit_step(gamma, g, h, eta) - (gamma - eta * g)).norm();
    if (prev > 0.0) EXPECT_NEAR(std::log10(prev / dev), 2.0, 0.05);
    prev = dev;
  }
}

TEST(ImplicitStep, LargeEtaIsNewton) {
  const Vector gamma = random_matrix(4, 1, 6).col(0);
  const Vector g = random_matrix(4, 1, 7).col(0);
  const Matrix h = random_matrix(4, 4, 8) + 3.0 * Matrix::Identity(4, 4);
  const Vector newton = gamma - h.fullPivLu().solve(g);
  const Vector out = implicit_step(gamma, g, h, 1e6);
  EXPECT_LT((out - newton).norm() / (newton - gamma).norm(), 1e-4);
}

TEST(ImplicitStep, SingularSystemNeedsSmallerEta) {
  Matrix h = Matrix::Zero(2, 2);
  h(0, 0) = -1.0;
  EXPECT_THROW(implicit_step(Vector::Zero(2), Vector::Ones(2), h, 1.0), NeedsSmallerEta);
}

TEST(SolverConfig, Validation) {
  SolverConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.shrink = 1.5;
  EXPECT_THROW(cfg.validate(), ContractError);
  cfg = SolverConfig{};
  cfg.eta0 = 1e9;
  EXPECT_THROW(cfg.validate(), ContractError);
}

TEST(Sblot, IdenticalSamplesFixedPoint) {
  const SampleSet x = normal_sample(100, 1, 21);
  const auto space = make_feature_space(FeatureConfig{}, 1);
  const LocalSolution sol = sblot(space, x, x, SolverConfig{});
  EXPECT_EQ(sol.status, SolveStatus::Converged);
  const auto mask = space.alpha_displacement_mask();
  for (Eigen::Index k = 0; k < sol.alpha.size(); ++k)
    if (mask[static_cast<std::size_t>(k)]) EXPECT_LT(std::abs(sol.alpha(k)), 1e-6);
  EXPECT_NEAR(sol.core_trace.back(), -1.0, 1e-6);
}

TEST(Sblot, ShiftRecovered) {
  const SampleSet x = normal_sample(300, 1, 22);
  const SampleSet y = (x.array() + 2.0).matrix();
  const auto space = make_feature_space(FeatureConfig{}, 1);
  const LocalSolution sol = sblot(space, x, y, SolverConfig{});
  ASSERT_TRUE(sol.potential.has_value());
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    worst = std::max(worst, std::abs(transport_map(*sol.potential, x.row(i).transpose())(0) - y(i, 0)));
  EXPECT_LT(worst, 0.05);
}

TEST(Sblot, AffineDilationRecovered) {
  const SampleSet x = normal_sample(300, 1, 23);
  const SampleSet y = 2.0 * x;
  const auto space = make_feature_space(FeatureConfig{}, 1);
  const LocalSolution sol = sblot(space, x, y, SolverConfig{});
  ASSERT_TRUE(sol.potential.has_value());
  const ComposedMap composed{{*sol.potential}};
  const ReferenceMap ref = AffineMap{Matrix::Constant(1, 1, 2.0), Vector::Zero(1)};
  const MetricsReport m = map_error_metrics(composed, ref, x, evaluation_grid(x));
  EXPECT_LT(m.weighted_l2, 1e-3);
}

TEST(Sblot, AcceptedStepsSatisfyMinimaxRule) {
  const SampleSet x = normal_sample(80, 1, 24);
  const SampleSet y = (1.3 * x.array() + 0.4).matrix();
  const auto space = make_feature_space(FeatureConfig{}, 1);
  const LocalSolution sol = sblot(space, x, y, SolverConfig{});
  // The trace records accepted iterates only; the grad-norm trace must end below tolerance.
  EXPECT_EQ(sol.lagrangian_trace.size(), sol.grad_norm_trace.size());
  EXPECT_EQ(sol.status, SolveStatus::Converged);
  EXPECT_LT(sol.final_grad_norm, SolverConfig{}.tolerance);
  EXPECT_LE(sol.diagnostics.identity_gap, 1e-9);
}

TEST(Sblot, Deterministic) {
  const SampleSet x = normal_sample(60, 2, 25);
  const SampleSet y = (x.array() * 1.2 + 0.3).matrix();
  const auto space = make_feature_space(FeatureConfig{}, 2);
  const LocalSolution a = sblot(space, x, y, SolverConfig{});
  const LocalSolution b = sblot(space, x, y, SolverConfig{});
  EXPECT_EQ(a.lagrangian_trace, b.lagrangian_trace);
  EXPECT_EQ(a.alpha, b.alpha);
  EXPECT_EQ(a.beta, b.beta);
}

TEST(Sblot, MaxIterationsFlagged) {
  const SampleSet x = normal_sample(60, 1, 26);
  const SampleSet y = (x.array() + 1.0).matrix();
  const auto space = make_feature_space(FeatureConfig{}, 1);
  SolverConfig cfg;
  cfg.max_iter = 2;
  const LocalSolution sol = sblot(space, x, y, cfg);
  EXPECT_EQ(sol.status, SolveStatus::MaxIterations);
  EXPECT_EQ(sol.iterations, 2);
}

TEST(Sblot, DimensionMismatchRejected) {
  const auto space = make_feature_space(FeatureConfig{}, 1);
  EXPECT_THROW(sblot(space, normal_sample(10, 1, 1), normal_sample(10, 2, 2), SolverConfig{}),
               ContractError);
}
