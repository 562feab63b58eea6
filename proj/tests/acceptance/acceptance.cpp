// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//
//   adot_acceptance [--only N]... [--known-failure N]...
//
// Exit status is 0 when every failing criterion was listed with --known-failure.

#include "adot/evaluation.hpp"
#include "adot/global_solver.hpp"
#include "adot/local_solver.hpp"
#include "adot/synthetic_data.hpp"
#include "adot_cli/commands.hpp"
#include "adot_cli/config.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace adot;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string timing(double t, double limit) { return num(t) + " s (< " + num(limit) + " s)"; }

SampleSet gaussian(const Vector& mean, const Matrix& cov, Eigen::Index n, std::uint64_t seed) {
  return generate(DatasetSpec{GaussianSpec{mean, cov}, n, seed});
}

SampleSet transported(const FeatureSpace& space, const LocalSolution& sol, const SampleSet& x) {
  auto ev = space.bind(sol.alpha, sol.beta);
  SampleSet out(x.rows(), x.cols());
  Vector t;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    ev->transport(x.row(i).transpose(), t);
    out.row(i) = t.transpose();
  }
  return out;
}

SmoothFunction monomial(int power) {
  return {[power](const Vector& x) { return std::pow(x(0), power); },
          [power](const Vector& x) { return Vector::Constant(1, power * std::pow(x(0), power - 1)); },
          [power](const Vector& x) {
            return Matrix::Constant(1, 1, power < 2 ? 0.0 : power * (power - 1) * std::pow(x(0), power - 2));
          }};
}

Outcome derivatives() {
  Clock clock;
  const ScaleKind kinds[] = {ScaleKind::Isotropic, ScaleKind::Directional, ScaleKind::Diagonal,
                             ScaleKind::FullMatrix};
  double worst_g = 0.0, worst_h = 0.0;
  for (int d = 1; d <= 2; ++d)
    for (ScaleKind kind : kinds)
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const GaussianFeatureSpace space(d, 2, 2, kind, kind);
        const auto game = oracle::random_game(space, 1000 + seed);
        const auto td = twisted_derivatives(space, game.alpha, game.beta, game.x, game.y, game.penalty);
        const double gbar = td.value.gbar;
        worst_g = std::max(worst_g, oracle::relative_error(
            oracle::fd_twisted_gradient(space, game.alpha, game.beta, game.x, game.y, game.penalty, gbar), td.G));
        worst_h = std::max(worst_h, oracle::relative_error(
            oracle::fd_twisted_hessian(space, game.alpha, game.beta, game.x, game.y, game.penalty, gbar), td.H));
      }
  const double t = clock.seconds();
  return {worst_g < 1e-5 && worst_h < 1e-4 && t < 30.0,
          "max rel err G " + num(worst_g) + " (< 1e-05), H " + num(worst_h) + " (< 0.0001), " +
              timing(t, 30)};
}

Outcome saddle_value() {
  Clock clock;
  const SampleSet x = gaussian(Vector::Zero(1), Matrix::Identity(1, 1), 200, 5);
  const auto space = make_feature_space(FeatureConfig{}, 1);
  const LocalSolution sol = sblot(space, x, x, SolverConfig{});
  const auto mask = space.alpha_displacement_mask();
  double alpha_max = 0.0;
  for (Eigen::Index k = 0; k < sol.alpha.size(); ++k)
    if (mask[static_cast<std::size_t>(k)]) alpha_max = std::max(alpha_max, std::abs(sol.alpha(k)));
  const double core = lagrangian(space, sol.alpha, sol.beta, x, x, sol.penalty).core;
  const double kl = estimate_kl(transported(space, sol, x), x, GlobalConfig{}).kl;
  const double t = clock.seconds();
  const bool ok = sol.status == SolveStatus::Converged && std::abs(core + 1.0) <= 1e-6 &&
                  std::abs(kl) <= 1e-6 && alpha_max < 1e-6 && t < 10.0;
  return {ok, std::string(to_string(sol.status)) + ", core " + num(core) + " (-1 +- 1e-06), KL " +
                  num(kl) + " (0 +- 1e-06), |alpha|max " + num(alpha_max) + " (< 1e-06), " +
                  timing(t, 10)};
}

Outcome gaussian_exactness() {
  Clock c1;
  const SampleSet x1 = gaussian(Vector::Zero(1), Matrix::Identity(1, 1), 500, 9);
  const SampleSet y1 = gaussian(Vector::Constant(1, 2.0), Matrix::Constant(1, 1, 4.0), 500, 9);
  const auto s1 = make_feature_space(FeatureConfig{}, 1);
  const LocalSolution sol1 = sblot(s1, x1, y1, SolverConfig{});
  const AffineMap ref1{Matrix::Constant(1, 1, 2.0), Vector::Constant(1, 2.0)};
  const double e1 = map_error_metrics(ComposedMap{{*sol1.potential}}, ref1, x1, x1).weighted_l2;
  const double t1 = c1.seconds();

  Clock c2;
  Vector mean(2);
  mean << 2.0, -1.0;
  const Matrix cov = Vector(Eigen::Vector2d(4.0, 2.25)).asDiagonal();
  const SampleSet x2 = gaussian(Vector::Zero(2), Matrix::Identity(2, 2), 500, 9);
  const SampleSet y2 = gaussian(mean, cov, 500, 9);
  const auto s2 = make_feature_space(FeatureConfig{}, 2);
  const LocalSolution sol2 = sblot(s2, x2, y2, SolverConfig{});
  const Matrix lin = Vector(Eigen::Vector2d(2.0, 1.5)).asDiagonal();
  const double e2 =
      map_error_metrics(ComposedMap{{*sol2.potential}}, AffineMap{lin, mean}, x2, x2).weighted_l2;
  const double t2 = c2.seconds();
  return {e1 < 1e-2 && e2 < 5e-2 && t1 < 60.0 && t2 < 60.0,
          "1D weighted L2 " + num(e1) + " (< 0.01) in " + timing(t1, 60) + ", 2D " + num(e2) +
              " (< 0.05) in " + timing(t2, 60)};
}

SuiteConfig power_suite() {
  SuiteConfig cfg;
  cfg.seeds = {0, 1, 2, 3, 4};
  cfg.threads = cli::threads_from_env();
  cfg.timing = false;
  cfg.k_list = {};
  cfg.n_list = {};
  return cfg;
}

const SuiteAggregate* find(const SuiteResult& r, SweepKind sweep, double param) {
  for (const auto& a : r.aggregates)
    if (a.sweep == sweep && a.param == param) return &a;
  return nullptr;
}

Outcome power_benchmark() {
  Clock clock;
  SuiteConfig cfg = power_suite();
  cfg.k_list = {1, 10};
  const SuiteResult r = convergence_suite(cfg);
  const auto* k1 = find(r, SweepKind::Steps, 1);
  const auto* k10 = find(r, SweepKind::Steps, 10);
  const double t = clock.seconds();
  const int failures = k1->failures + k10->failures;
  const bool ok = failures == 0 && k10->weighted_l2 <= 5e-2 && k10->linf <= 0.2 &&
                  k10->weighted_l2 <= k1->weighted_l2 / 3.0 && t < 600.0;
  return {ok, "K=10 mean weighted L2 " + num(k10->weighted_l2) + " (<= 0.05), mean Linf " +
                  num(k10->linf) + " (<= 0.2), K=1 weighted L2 " + num(k1->weighted_l2) +
                  " (K=10 <= K=1/3), failed runs " + std::to_string(failures) + ", " +
                  timing(t, 600)};
}

Outcome sample_trend() {
  Clock clock;
  SuiteConfig cfg = power_suite();
  cfg.n_list = {25, 100, 500};
  const SuiteResult r = convergence_suite(cfg);
  std::vector<double> e;
  int failures = 0;
  for (double n : {25.0, 100.0, 500.0}) {
    const auto* a = find(r, SweepKind::Samples, n);
    e.push_back(a->weighted_l2);
    failures += a->failures;
  }
  const double t = clock.seconds();
  const bool trend = e[1] <= 2.0 * e[0] && e[2] <= 2.0 * e[1];
  const bool ok = failures == 0 && trend && e[2] <= 5e-2 && t < 600.0;
  return {ok, "mean weighted L2 n=25 " + num(e[0]) + ", n=100 " + num(e[1]) + ", n=500 " +
                  num(e[2]) + " (each <= 2x previous, n=500 <= 0.05), failed runs " +
                  std::to_string(failures) + ", " + timing(t, 600)};
}

Outcome monotone_map() {
  const PowerPair pair = power_pair(500, 0.25, 0);
  GlobalConfig cfg;
  cfg.steps = 10;
  cfg.seed = 0;
  const TransportResult r = sbgot(pair.x, pair.y, cfg);
  const MetricsReport m =
      map_error_metrics(r.composed, pair.ref, pair.x, evaluation_grid(pair.x, 200, 0.0));
  const double slope = m.monotone_min_slope.value_or(-1.0);
  return {slope >= -1e-6, "min forward-difference slope " + num(slope) + " (>= -1e-06)"};
}

Outcome linear_mode() {
  const SampleSet x = gaussian(Vector::Zero(1), Matrix::Identity(1, 1), 200, 21);
  const SampleSet y = gaussian(Vector::Constant(1, 0.1), Matrix::Constant(1, 1, 1.21), 200, 22);
  const auto lm = make_linear_feature_space({monomial(1), monomial(2)}, {monomial(1), monomial(2)}, x);
  SolverConfig cfg;
  cfg.tolerance = 1e-10;
  const LocalSolution sol = sblot(*lm.space, x, y, cfg);
  const double gap =
      feature_mean_gap(lm.space->features(), transported(*lm.space, sol, x), y).cwiseAbs().maxCoeff();
  return {sol.status == SolveStatus::Converged && gap < 1e-5,
          std::string(to_string(sol.status)) + ", max feature mean gap " + num(gap) + " (< 1e-05)"};
}

Outcome kl_calibration() {
  Clock clock;
  const SampleSet z = gaussian(Vector::Zero(1), Matrix::Identity(1, 1), 2000, 31);
  const SampleSet y = gaussian(Vector::Zero(1), Matrix::Constant(1, 1, 4.0), 2000, 32);
  GlobalConfig cfg;
  cfg.features.g_bumps = 0;
  const double kl = estimate_kl(z, y, cfg).kl;
  const double oracle = 0.5 * (0.25 + std::log(4.0) - 1.0);
  const double t = clock.seconds();
  return {std::abs(kl - oracle) <= 0.05 && t < 30.0,
          "estimate " + num(kl) + " vs " + num(oracle) + " (+- 0.05), " + timing(t, 30)};
}

std::string config_dir() {
  const char* dir = std::getenv("ADOT_CONFIG_DIR");
  return dir ? dir : "configs";
}

Outcome qualitative() {
  Clock clock;
  const char* names[] = {"mixture2_1d", "mixture3_1d", "annulus_2d", "mixture2_2d"};
  bool ok = true;
  std::string detail;
  for (const char* name : names) {
    const cli::RunConfig cfg = cli::load_config(config_dir() + "/" + name + ".yaml");
    const SampleSet x = generate(*cfg.source);
    const SampleSet y = generate(*cfg.target);
    detail += std::string(detail.empty() ? "" : "; ") + name + " N=" + std::to_string(cfg.global.steps);
    try {
      const TransportResult r = sbgot(x, y, cfg.global);
      const double ratio = r.kl_final / r.kl_initial;
      ok = ok && r.kl_final <= 0.1 * r.kl_initial;
      detail += " KL " + num(r.kl_initial) + " -> " + num(r.kl_final) + " (ratio " + num(ratio) +
                " <= 0.1)";
      if (const auto* ring = std::get_if<AnnulusSpec>(&cfg.target->kind)) {
        const SampleSet z = apply_map(r.composed, x);
        std::vector<double> radii(static_cast<std::size_t>(z.rows()));
        for (Eigen::Index i = 0; i < z.rows(); ++i)
          radii[static_cast<std::size_t>(i)] = (z.row(i).transpose() - ring->center).norm();
        std::sort(radii.begin(), radii.end());
        const double p5 = radii[radii.size() * 5 / 100];
        const double p95 = radii[radii.size() * 95 / 100];
        const double lo = ring->r_inner - 0.2, hi = ring->r_outer + 0.2;
        ok = ok && p5 >= lo && p95 <= hi;
        detail += ", radius p5 " + num(p5) + " p95 " + num(p95) + " (in [" + num(lo) + ", " +
                  num(hi) + "])";
      }
    } catch (const StallError& e) {
      ok = false;
      detail += std::string(" stalled: ") + e.what();
    }
  }
  const double t = clock.seconds();
  ok = ok && t < 900.0;
  return {ok, detail + "; " + timing(t, 900)};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream bytes;
    bytes << in.rdbuf();
    out[fs::relative(entry.path(), dir).string()] = bytes.str();
  }
  return out;
}

Outcome reproducibility() {
  const fs::path root = fs::temp_directory_path() / "adot_acceptance_repro";
  fs::remove_all(root);
  const std::string dir = config_dir();
  struct Run {
    std::string name;
    std::string config;
    cli::Overrides overrides;
    std::vector<int (*)(const cli::RunConfig&)> commands;
  };
  const std::vector<Run> runs = {
      {"shift", "shift.yaml", {}, {cli::cmd_gen_data, cli::cmd_solve, cli::cmd_emit_plots}},
      {"mixture2_1d",
       "mixture2_1d.yaml",
       {{"data.source.n", "80"}, {"data.target.n", "80"}, {"solve.steps", "4"}},
       {cli::cmd_gen_data, cli::cmd_solve, cli::cmd_emit_plots}},
      {"annulus_2d",
       "annulus_2d.yaml",
       {{"data.source.n", "60"}, {"data.target.n", "60"}, {"solve.steps", "3"}, {"solve.max_sweeps", "2"}},
       {cli::cmd_gen_data, cli::cmd_solve, cli::cmd_emit_plots}},
      {"power",
       "power_k_sweep.yaml",
       {{"benchmark.k_list", "[1, 2]"}, {"benchmark.n_list", "[25]"}, {"benchmark.seeds", "[0, 1]"},
        {"benchmark.n_for_k", "60"}, {"benchmark.k_for_n", "2"}},
       {cli::cmd_benchmark}},
  };
  int files = 0;
  std::vector<std::string> differing;
  for (const auto& run : runs) {
    const fs::path out = root / run.name;
    cli::Overrides ov = run.overrides;
    ov.emplace_back("out", out.string());
    ov.emplace_back("plots.result", (out / "result.json").string());
    const cli::RunConfig cfg = cli::load_config(dir + "/" + run.config, ov);
    std::map<std::string, std::string> first;
    for (int pass = 0; pass < 2; ++pass) {
      std::ostringstream chatter;
      auto* saved = std::cout.rdbuf(chatter.rdbuf());
      for (auto* command : run.commands) command(cfg);
      std::cout.rdbuf(saved);
      if (pass == 0) {
        first = snapshot(out);
        continue;
      }
      const auto second = snapshot(out);
      files += static_cast<int>(second.size());
      if (second != first) differing.push_back(run.name);
    }
  }
  fs::remove_all(root);
  std::string detail = std::to_string(files) + " artifacts compared";
  for (const auto& d : differing) detail += ", differs: " + d;
  return {differing.empty() && files > 0, detail};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, known;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if ((arg == "--only" || arg == "--known-failure") && i + 1 < argc) {
      (arg == "--only" ? only : known).insert(std::atoi(argv[++i]));
    } else {
      std::cerr << "usage: adot_acceptance [--only N]... [--known-failure N]...\n";
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"derivative correctness", derivatives},
      {"saddle value on identical samples", saddle_value},
      {"Gaussian exactness", gaussian_exactness},
      {"power-map benchmark", power_benchmark},
      {"sample-count trend", sample_trend},
      {"monotone composed map", monotone_map},
      {"linear-mode feature matching", linear_mode},
      {"KL calibration", kl_calibration},
      {"qualitative pipeline runs", qualitative},
      {"reproducibility", reproducibility},
  };

  int unexpected = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::string tag = o.pass ? "PASS" : "FAIL";
    if (!o.pass && known.count(id)) tag += " (known)";
    std::cout << tag << " " << id << " " << criteria[k].first << ": " << o.detail << std::endl;
    if (!o.pass && !known.count(id)) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
