#include "adot/global_solver.hpp"
#include "adot/local_solver.hpp"
#include "adot/objective.hpp"
#include "adot/synthetic_data.hpp"

#include <benchmark/benchmark.h>

using namespace adot;

namespace {

SampleSet normal(int d, Eigen::Index n, std::uint64_t seed) {
  return generate(DatasetSpec{GaussianSpec{Vector::Zero(d), Matrix::Identity(d, d)}, n, seed});
}

void BM_TwistedDerivatives(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const Eigen::Index n = state.range(1);
  const auto space = make_feature_space(FeatureConfig{}, d);
  const SampleSet x = normal(d, n, 1);
  const SampleSet y = (2.0 * x.array() + 1.0).matrix();
  const StartPoint start = initial_point(space, x, y, 0);
  const PenaltyConfig pc = resolve_penalty(PenaltyConfig{}, x, y);
  for (auto _ : state)
    benchmark::DoNotOptimize(twisted_derivatives(space, start.alpha, start.beta, x, y, pc));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_TwistedDerivatives)->Args({1, 100})->Args({1, 500})->Args({2, 100})->Args({2, 500});

void BM_ImplicitStep(benchmark::State& state) {
  const Eigen::Index size = state.range(0);
  const Matrix m = Matrix::Random(size, size);
  const Matrix h = m * m.transpose();
  const Vector gamma = Vector::Random(size);
  const Vector g = Vector::Random(size);
  for (auto _ : state) benchmark::DoNotOptimize(implicit_step(gamma, g, h, 0.1));
}
BENCHMARK(BM_ImplicitStep)->Arg(16)->Arg(64)->Arg(128);

void BM_LocalSolve(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto space = make_feature_space(FeatureConfig{}, d);
  const SampleSet x = normal(d, 300, 2);
  const SampleSet y = (2.0 * x.array() + 1.0).matrix();
  for (auto _ : state) benchmark::DoNotOptimize(sblot(space, x, y, SolverConfig{}));
}
BENCHMARK(BM_LocalSolve)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_PowerTransport(benchmark::State& state) {
  const PowerPair pair = power_pair(state.range(0), 0.25, 0);
  GlobalConfig cfg;
  cfg.steps = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(sbgot(pair.x, pair.y, cfg));
}
BENCHMARK(BM_PowerTransport)->Args({100, 5})->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_Generate(benchmark::State& state) {
  MixtureSpec m{{0.5, 0.5},
                {GaussianSpec{Vector::Constant(2, -2.0), Matrix::Identity(2, 2)},
                 GaussianSpec{Vector::Constant(2, 2.0), Matrix::Identity(2, 2)}}};
  const DatasetSpec spec{m, state.range(0), 3};
  for (auto _ : state) benchmark::DoNotOptimize(generate(spec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Generate)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
