#include "adot/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <thread>

namespace adot {

MetricsReport map_error_metrics(const PointMap& map, const ReferenceMap& ref, const SampleSet& x,
                                const SampleSet& grid) {
  require(x.rows() >= 1, "map_error_metrics: empty sample");
  require(grid.rows() >= 1 && grid.cols() == x.cols(), "map_error_metrics: bad grid");
  MetricsReport out;
  const SampleSet tx = map(x);
  out.weighted_l2 = (tx - reference_apply(ref, x)).rowwise().squaredNorm().mean();
  out.cost = (tx - x).rowwise().squaredNorm().mean();

  const SampleSet tg = map(grid);
  out.linf = (tg - reference_apply(ref, grid)).rowwise().norm().maxCoeff();
  if (grid.cols() == 1 && grid.rows() >= 2) {
    double slope = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k + 1 < grid.rows(); ++k) {
      const double h = grid(k + 1, 0) - grid(k, 0);
      if (h > 0.0) slope = std::min(slope, (tg(k + 1, 0) - tg(k, 0)) / h);
    }
    out.monotone_min_slope = slope;
  }
  return out;
}

MetricsReport map_error_metrics(const ComposedMap& composed, const ReferenceMap& ref,
                                const SampleSet& x, const SampleSet& grid) {
  return map_error_metrics([&](const SampleSet& p) { return apply_map(composed, p); }, ref, x,
                           grid);
}

SampleSet evaluation_grid(const SampleSet& samples, int points, double pad) {
  require(samples.cols() == 1, "evaluation_grid: one-dimensional samples only");
  require(samples.rows() >= 1 && points >= 2, "evaluation_grid: need samples and >= 2 points");
  const double lo = samples.minCoeff();
  const double hi = samples.maxCoeff();
  const double mean = samples.mean();
  const double sd = std::sqrt((samples.array() - mean).square().mean());
  const Vector values = Vector::LinSpaced(points, lo - pad * sd, hi + pad * sd);
  return SampleSet(values);
}

Vector feature_mean_gap(const std::vector<SmoothFunction>& features, const SampleSet& tx,
                        const SampleSet& y) {
  require(tx.rows() >= 1 && y.rows() >= 1, "feature_mean_gap: empty sample");
  require(tx.cols() == y.cols(), "feature_mean_gap: dimension mismatch");
  Vector out = Vector::Zero(static_cast<Eigen::Index>(features.size()));
  for (std::size_t k = 0; k < features.size(); ++k) {
    double sx = 0.0;
    for (Eigen::Index i = 0; i < tx.rows(); ++i) sx += features[k].value(tx.row(i).transpose());
    double sy = 0.0;
    for (Eigen::Index j = 0; j < y.rows(); ++j) sy += features[k].value(y.row(j).transpose());
    out(static_cast<Eigen::Index>(k)) =
        sx / static_cast<double>(tx.rows()) - sy / static_cast<double>(y.rows());
  }
  return out;
}

std::string_view to_string(SweepKind kind) { return kind == SweepKind::Steps ? "K" : "n"; }

SuiteRow power_benchmark_cell(SweepKind sweep, Eigen::Index n, int k, std::uint64_t seed,
                              const SuiteConfig& cfg) {
  SuiteRow row;
  row.sweep = sweep;
  row.param = sweep == SweepKind::Steps ? k : static_cast<double>(n);
  row.seed = seed;
  row.sparse = n < 15;
  const auto start = std::chrono::steady_clock::now();
  try {
    const PowerPair pair = power_pair(n, cfg.epsilon, seed);
    GlobalConfig global = cfg.base;
    global.steps = k;
    global.seed = seed;
    const TransportResult result = sbgot(pair.x, pair.y, global);
    SampleSet pooled(2 * n, 1);
    pooled << pair.x, pair.y;
    row.metrics = map_error_metrics(result.composed, pair.ref, pair.x,
                                    evaluation_grid(pooled, cfg.grid_points, 0.5));
    row.metrics.kl_final = result.kl_final;
  } catch (const std::exception& e) {
    row.error = e.what();
    row.metrics.weighted_l2 = row.metrics.linf = row.metrics.cost =
        std::numeric_limits<double>::quiet_NaN();
  }
  if (cfg.timing)
    row.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::vector<SuiteAggregate> aggregate_rows(const std::vector<SuiteRow>& rows) {
  std::vector<SuiteAggregate> out;
  for (const auto& row : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const SuiteAggregate& a) {
      return a.sweep == row.sweep && a.param == row.param;
    });
    if (it == out.end()) {
      out.push_back({row.sweep, row.param, 0.0, 0.0, 0.0, 0.0, 0, 0});
      it = out.end() - 1;
    }
    if (!row.error.empty()) {
      ++it->failures;
      continue;
    }
    ++it->runs;
    it->weighted_l2 += row.metrics.weighted_l2;
    it->linf += row.metrics.linf;
    it->cost += row.metrics.cost;
    it->runtime_s += row.runtime_s;
  }
  for (auto& a : out) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double r = a.runs;
    a.weighted_l2 = a.runs ? a.weighted_l2 / r : nan;
    a.linf = a.runs ? a.linf / r : nan;
    a.cost = a.runs ? a.cost / r : nan;
    a.runtime_s = a.runs ? a.runtime_s / r : nan;
  }
  return out;
}

SuiteResult convergence_suite(const SuiteConfig& cfg) {
  require(!cfg.seeds.empty(), "convergence_suite: no seeds");
  require(!cfg.k_list.empty() || !cfg.n_list.empty(), "convergence_suite: empty sweep lists");
  struct Cell {
    SweepKind sweep;
    Eigen::Index n;
    int k;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (int k : cfg.k_list)
    for (auto seed : cfg.seeds) cells.push_back({SweepKind::Steps, cfg.n_for_k, k, seed});
  for (auto n : cfg.n_list)
    for (auto seed : cfg.seeds) cells.push_back({SweepKind::Samples, n, cfg.k_for_n, seed});

  SuiteResult out;
  out.rows.resize(cells.size());
  auto run = [&](std::size_t i) {
    const Cell& c = cells[i];
    out.rows[i] = power_benchmark_cell(c.sweep, c.n, c.k, c.seed, cfg);
  };
  const int threads = std::min<int>(cfg.threads, static_cast<int>(cells.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) run(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  out.aggregates = aggregate_rows(out.rows);
  return out;
}

}  // namespace adot
