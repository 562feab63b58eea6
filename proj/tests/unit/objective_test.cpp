#include "adot/global_solver.hpp"
#include "adot/objective.hpp"
#include "adot/synthetic_data.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace adot;

namespace {

PenaltyConfig no_penalty() {
  PenaltyConfig pc;
  pc.lambda = 0.0;
  pc.epsilon = 0.1;
  pc.diameter = 10.0;
  return pc;
}

SampleSet column(std::initializer_list<double> v) {
  SampleSet s(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double e : v) s(i++, 0) = e;
  return s;
}

}  // namespace

TEST(Lagrangian, ZeroParametersGiveMinusOne) {
  const GaussianFeatureSpace space(2, 1, 2, ScaleKind::Isotropic, ScaleKind::Isotropic);
  const auto game = oracle::random_game(space, 1);
  const ParamLayout& layout = space.layout();
  PotentialParams p = layout.unflatten_potential(game.alpha);
  DiscriminatorParams g = layout.unflatten_discriminator(game.beta);
  p.A0.setZero();
  p.a1.setZero();
  for (auto& b : p.bumps) b.amplitude = 0.0;
  g.B0.setZero();
  g.b1.setZero();
  g.b2 = 0.0;
  for (auto& b : g.bumps) b.amplitude = 0.0;
  const auto v = lagrangian(space, layout.flatten(p), layout.flatten(g), game.x, game.y, no_penalty());
  EXPECT_EQ(v.core, -1.0);
  EXPECT_EQ(v.total, -1.0);
}

TEST(Lagrangian, LinearDiscriminatorAtOrigin) {
  DiscriminatorParams g = DiscriminatorParams::zero(1);
  g.b1(0) = 1.0;
  const auto v = lagrangian(PotentialParams::identity(1), g, column({0.0}), column({0.0}), no_penalty());
  EXPECT_DOUBLE_EQ(v.core, -1.0);
}

TEST(Lagrangian, DirectArithmetic) {
  DiscriminatorParams g = DiscriminatorParams::zero(1);
  g.b1(0) = 1.0;
  const auto v = lagrangian(PotentialParams::identity(1), g, column({1.0, -1.0}), column({2.0, -2.0}),
                            no_penalty());
  EXPECT_NEAR(v.core, -0.5 * (std::exp(2.0) + std::exp(-2.0)), 1e-14);
  EXPECT_NEAR(v.core, -3.7622, 1e-4);
}

TEST(Lagrangian, SaturationFlag) {
  DiscriminatorParams g = DiscriminatorParams::zero(1);
  g.b2 = 60.0;
  const auto v = lagrangian(PotentialParams::identity(1), g, column({0.0}), column({0.0}), no_penalty());
  EXPECT_TRUE(v.saturated);
  EXPECT_TRUE(std::isfinite(v.core));
  EXPECT_DOUBLE_EQ(v.core, 60.0 - std::exp(kExpClamp));
}

TEST(Penalty, NoBumpsIsZero) {
  PenaltyConfig pc;
  pc.lambda = 1.0;
  pc.epsilon = 0.1;
  pc.diameter = 1.0;
  EXPECT_EQ(penalty(PotentialParams::identity(2), DiscriminatorParams::zero(2), pc, 3.0), 0.0);
}

TEST(Penalty, SingleBumpFourTerms) {
  const double eps = 0.2;
  PenaltyConfig pc;
  pc.lambda = 1.0;
  pc.epsilon = eps;
  pc.diameter = 1.0;
  DiscriminatorParams g = DiscriminatorParams::zero(1);
  g.bumps.push_back({1.0, Vector::Zero(1), ScaleForm::isotropic(1.0 / eps, 1)});
  EXPECT_NEAR(penalty(PotentialParams::identity(1), g, pc, 0.0), std::exp(1.0) + eps * eps, 1e-12);
}

TEST(Penalty, PairTermDirectFormula) {
  const double eps = 0.2, d = 2.0, s = 1.0;
  PenaltyConfig pc;
  pc.lambda = 1.0;
  pc.epsilon = eps;
  pc.diameter = d;
  DiscriminatorParams g = DiscriminatorParams::zero(1);
  g.bumps.push_back({1.0, Vector::Zero(1), ScaleForm::isotropic(s, 1)});
  g.bumps.push_back({1.0, Vector::Constant(1, eps * d), ScaleForm::isotropic(s, 1)});
  const double single = std::exp(std::pow(eps * s, 2)) + 1.0 / std::pow(d * s, 2);
  const double centering = std::pow(eps * d / d, 2);
  const double pair = eps * eps / std::pow(eps * d, 2);
  EXPECT_NEAR(penalty(PotentialParams::identity(1), g, pc, 0.0), 2 * single + centering + pair, 1e-12);
}

TEST(Penalty, CoincidentCentersFlagged) {
  PenaltyConfig pc;
  pc.lambda = 1.0;
  pc.epsilon = 0.2;
  pc.diameter = 1.0;
  DiscriminatorParams g = DiscriminatorParams::zero(1);
  g.bumps.push_back({1.0, Vector::Zero(1), ScaleForm::isotropic(1.0, 1)});
  g.bumps.push_back({1.0, Vector::Zero(1), ScaleForm::isotropic(1.0, 1)});
  bool degenerate = false;
  const double p = penalty(PotentialParams::identity(1), g, pc, 0.0, &degenerate);
  EXPECT_TRUE(degenerate);
  EXPECT_TRUE(std::isfinite(p));
}

TEST(Penalty, IncreasingBeyondResolution) {
  PenaltyConfig pc;
  pc.lambda = 1.0;
  pc.epsilon = 0.2;
  pc.diameter = 1.0;
  double last = 0.0;
  for (double s = 5.0; s < 50.0; s += 1.0) {
    DiscriminatorParams g = DiscriminatorParams::zero(1);
    g.bumps.push_back({1.0, Vector::Zero(1), ScaleForm::isotropic(s, 1)});
    const double p = penalty(PotentialParams::identity(1), g, pc, 0.0);
    EXPECT_GT(p, last);
    last = p;
  }
}

TEST(TwistedDerivatives, MatchedSamplesZeroBetaGradient) {
  const GaussianFeatureSpace space(1, 1, 2, ScaleKind::Directional, ScaleKind::Directional);
  const auto game = oracle::random_game(space, 2);
  const ParamLayout& layout = space.layout();
  PotentialParams p = PotentialParams::identity(1);
  p.bumps = layout.unflatten_potential(game.alpha).bumps;
  for (auto& b : p.bumps) b.amplitude = 0.0;
  DiscriminatorParams g = layout.unflatten_discriminator(game.beta);
  g.B0.setZero();
  g.b1.setZero();
  g.b2 = 0.0;
  for (auto& b : g.bumps) b.amplitude = 0.0;
  PenaltyConfig pc = no_penalty();
  const auto td = twisted_derivatives(space, layout.flatten(p), layout.flatten(g), game.x, game.x, pc);
  const Vector beta_block = td.G.tail(space.beta_size());
  const auto mask = space.beta_linear_mask();
  for (Eigen::Index k = 0; k < beta_block.size(); ++k)
    if (mask[static_cast<std::size_t>(k)]) EXPECT_NEAR(beta_block(k), 0.0, 1e-15);
}

TEST(TwistedDerivatives, PenalizedMatchesDifferences) {
  const ScaleKind kinds[] = {ScaleKind::FullMatrix, ScaleKind::Isotropic, ScaleKind::Directional,
                             ScaleKind::Diagonal};
  for (int d = 1; d <= 2; ++d)
    for (ScaleKind kind : kinds)
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const GaussianFeatureSpace space(d, 2, 2, kind, kind);
        const auto game = oracle::random_game(space, 500 + seed);
        const auto td = twisted_derivatives(space, game.alpha, game.beta, game.x, game.y, game.penalty);
        const Vector gfd = oracle::fd_twisted_gradient(space, game.alpha, game.beta, game.x, game.y,
                                                        game.penalty, td.value.gbar);
        EXPECT_LT(oracle::relative_error(gfd, td.G), 1e-5) << to_string(kind) << " d=" << d;
      }
}

TEST(TwistedDerivatives, LinearBetaBlockConcave) {
  const GaussianFeatureSpace space(2, 1, 2, ScaleKind::Isotropic, ScaleKind::Isotropic);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto game = oracle::random_game(space, 40 + seed);
    PenaltyConfig pc = game.penalty;
    pc.lambda = 0.0;
    const auto td = twisted_derivatives(space, game.alpha, game.beta, game.x, game.y, pc);
    const auto a = space.alpha_size();
    const Matrix bb = td.H.bottomRightCorner(space.beta_size(), space.beta_size());
    const auto mask = space.beta_linear_mask();
    std::vector<Eigen::Index> idx;
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(mask.size()); ++k)
      if (mask[static_cast<std::size_t>(k)]) idx.push_back(k);
    Matrix sub(idx.size(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j) sub(i, j) = bb(idx[i], idx[j]);
    // H's ββ block is −∇²_ββ L, which is PSD on the linear coordinates.
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(sub).eigenvalues().minCoeff(), -1e-10);
    (void)a;
  }
}

TEST(KlEstimate, ZeroDiscriminator) {
  const GaussianFeatureSpace space(1, 0, 0, ScaleKind::Directional, ScaleKind::Directional);
  SampleSet z = column({0.1, 2.0, -3.0});
  SampleSet y = column({5.0, 6.0});
  EXPECT_EQ(kl_estimate(space, Vector::Zero(space.beta_size()), z, y), 0.0);
}

TEST(KlEstimate, IdenticalSamplesMaximizeAtZero) {
  const SampleSet z = generate(DatasetSpec{GaussianSpec{Vector::Zero(1), Matrix::Identity(1, 1)}, 300, 3});
  GlobalConfig cfg;
  const AscentResult r = estimate_kl(z, z, cfg);
  EXPECT_NEAR(r.kl, 0.0, 1e-8);
}

TEST(KlEstimate, GaussianClosedForm) {
  const SampleSet z = generate(DatasetSpec{GaussianSpec{Vector::Zero(1), Matrix::Identity(1, 1)}, 2000, 11});
  const SampleSet y =
      generate(DatasetSpec{GaussianSpec{Vector::Zero(1), Matrix::Constant(1, 1, 4.0)}, 2000, 12});
  GlobalConfig cfg;
  cfg.features.g_bumps = 0;
  const double oracle = 0.5 * (0.25 + std::log(4.0) - 1.0);
  EXPECT_NEAR(oracle, 0.3181, 1e-4);
  EXPECT_NEAR(estimate_kl(z, y, cfg).kl, oracle, 0.05);
}

TEST(InitDiscriminator, EqualMomentsGiveZero) {
  const SampleSet x = column({-1.0, 0.0, 1.0});
  const DiscriminatorInit init = init_discriminator(x, x);
  EXPECT_NEAR(init.params.B0.norm(), 0.0, 1e-14);
  EXPECT_NEAR(init.params.b1.norm(), 0.0, 1e-14);
  EXPECT_NEAR(init.params.b2, 0.0, 1e-14);
}

TEST(InitDiscriminator, MeanShift) {
  // 1/n moments: mean 0 and variance 1 for x, mean 2 variance 1 for y.
  const SampleSet x = column({-1.0, 1.0});
  const SampleSet y = column({1.0, 3.0});
  const DiscriminatorParams g = init_discriminator(x, y).params;
  EXPECT_NEAR(g.B0(0, 0), 0.0, 1e-14);
  EXPECT_NEAR(g.b1(0), -2.0, 1e-14);
  EXPECT_NEAR(g.b2, 2.0, 1e-14);
}

TEST(InitDiscriminator, VarianceRatio) {
  const SampleSet x = column({-1.0, 1.0});
  const SampleSet y = column({-2.0, 2.0});
  const DiscriminatorParams g = init_discriminator(x, y).params;
  EXPECT_NEAR(g.B0(0, 0), -0.75, 1e-14);
  EXPECT_NEAR(eval_discriminator(g, Vector::Constant(1, 2.0)), -0.375 * 4.0, 1e-14);
}

TEST(InitDiscriminator, SingularCovarianceRegularized) {
  SampleSet x(4, 2);
  x << 0, 0, 1, 1, 2, 2, 3, 3;
  const DiscriminatorInit init = init_discriminator(x, x);
  EXPECT_TRUE(init.regularized);
  EXPECT_TRUE(init.params.B0.allFinite());
}

TEST(ResolvePenalty, DerivedFromSamples) {
  const SampleSet x = column({0.0, 1.0, 2.0, 3.0});
  const SampleSet y = column({0.5, 1.5, 2.5, 3.5});
  PenaltyConfig pc;
  pc.epsilon_floor = 0.0;
  const PenaltyConfig r = resolve_penalty(pc, x, y);
  EXPECT_DOUBLE_EQ(*r.diameter, 3.5);
  EXPECT_DOUBLE_EQ(*r.epsilon, 1.0);
  EXPECT_DOUBLE_EQ(r.origin(0), 1.75);
}
