#include "adot/global_solver.hpp"

#include "adot/random.hpp"

#include <algorithm>
#include <numeric>

namespace adot {

std::string_view to_string(Pairing pairing) {
  switch (pairing) {
    case Pairing::IndexOrder: return "index";
    case Pairing::SortedCoordinate: return "sorted";
    case Pairing::RandomWithReplacement: return "random";
  }
  return "unknown";
}

Pairing parse_pairing(std::string_view name) {
  if (name == "index") return Pairing::IndexOrder;
  if (name == "sorted") return Pairing::SortedCoordinate;
  if (name == "random") return Pairing::RandomWithReplacement;
  throw ContractError("unknown pairing '" + std::string(name) + "'");
}

Pairing default_pairing(Eigen::Index n, Eigen::Index m, int dim) {
  if (dim == 1) return Pairing::SortedCoordinate;
  if (n == m) return Pairing::IndexOrder;
  return Pairing::RandomWithReplacement;
}

std::vector<Eigen::Index> pair_samples(const SampleSet& x, const SampleSet& y, Pairing pairing,
                                       std::uint64_t seed) {
  require(x.rows() >= 1 && y.rows() >= 1, "pairing needs nonempty samples");
  require(x.cols() == y.cols(), "pairing: dimension mismatch");
  const Eigen::Index n = x.rows();
  const Eigen::Index m = y.rows();
  std::vector<Eigen::Index> sigma(static_cast<std::size_t>(n));
  switch (pairing) {
    case Pairing::IndexOrder:
      require(n == m, "index pairing needs n = m");
      std::iota(sigma.begin(), sigma.end(), 0);
      break;
    case Pairing::SortedCoordinate: {
      // Rank i of x goes to quantile i/n of y, ordered by the first coordinate.
      std::vector<Eigen::Index> ox(static_cast<std::size_t>(n));
      std::vector<Eigen::Index> oy(static_cast<std::size_t>(m));
      std::iota(ox.begin(), ox.end(), 0);
      std::iota(oy.begin(), oy.end(), 0);
      std::stable_sort(ox.begin(), ox.end(), [&](auto a, auto b) { return x(a, 0) < x(b, 0); });
      std::stable_sort(oy.begin(), oy.end(), [&](auto a, auto b) { return y(a, 0) < y(b, 0); });
      for (Eigen::Index r = 0; r < n; ++r) sigma[ox[r]] = oy[(r * m) / n];
      break;
    }
    case Pairing::RandomWithReplacement: {
      Philox4x32 rng(seed, 0x3c6ef372ULL);
      for (auto& s : sigma) {
        s = static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(m));
        if (s >= m) s = m - 1;
      }
      break;
    }
  }
  return sigma;
}

void GlobalConfig::validate() const {
  require(steps >= 1, "global.steps must be >= 1");
  require(max_sweeps >= 1, "global.max_sweeps must be >= 1");
  require(sweep_tol > 0.0, "global.sweep_tol must be > 0");
  local.validate();
  features.validate();
}

Trajectory init_intermediates(const SampleSet& x, const SampleSet& y, const GlobalConfig& cfg) {
  require(cfg.steps >= 1, "global.steps must be >= 1");
  require(x.rows() >= 1 && y.rows() >= 1, "init_intermediates: empty sample");
  require(x.cols() == y.cols(), "init_intermediates: dimension mismatch");
  const Pairing pairing = cfg.pairing.value_or(default_pairing(x.rows(), y.rows(), static_cast<int>(x.cols())));
  const auto sigma = pair_samples(x, y, pairing, cfg.seed);
  SampleSet paired(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) paired.row(i) = y.row(sigma[static_cast<std::size_t>(i)]);

  Trajectory traj;
  traj.steps.resize(static_cast<std::size_t>(cfg.steps) + 1);
  traj.steps.front() = x;
  traj.steps.back() = paired;
  return backward_sweep(traj);
}

Trajectory backward_sweep(const Trajectory& traj) {
  require(traj.steps.size() >= 2, "trajectory needs at least two steps");
  Trajectory out = traj;
  const int n = out.intervals();
  const SampleSet& z0 = out.steps.front();
  const SampleSet& zn = out.steps.back();
  require(z0.rows() == zn.rows() && z0.cols() == zn.cols(), "trajectory endpoints differ in shape");
  for (int t = 1; t < n; ++t) {
    const double w = static_cast<double>(t) / n;
    out.steps[static_cast<std::size_t>(t)] = (static_cast<double>(n - t) / n) * z0 + w * zn;
  }
  return out;
}

SampleSet apply_potential(const PotentialParams& potential, const SampleSet& points) {
  std::vector<ScaleKind> kinds;
  for (const auto& b : potential.bumps) kinds.push_back(b.scale.kind());
  const GaussianFeatureSpace space(ParamLayout(potential.dim(), kinds, {}));
  require(points.cols() == potential.dim(), "apply_potential: dimension mismatch");
  auto eval = space.bind(space.layout().flatten(potential), Vector::Zero(space.beta_size()));
  SampleSet out(points.rows(), points.cols());
  Vector t(points.cols());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    eval->transport(points.row(i).transpose(), t);
    out.row(i) = t.transpose();
  }
  return out;
}

namespace {

// Lifts a quadratic-only solution into `space`, keeping the inactive bumps of
// the cold start point.
LocalSolution embed_quadratic(const GaussianFeatureSpace& space,
                              const GaussianFeatureSpace& quadratic, const SampleSet& x,
                              const SampleSet& y, std::uint64_t seed, LocalSolution sol) {
  const ParamLayout& full = space.layout();
  const StartPoint cold = initial_point(space, x, y, seed);
  PotentialParams phi = full.unflatten_potential(cold.alpha);
  DiscriminatorParams g = full.unflatten_discriminator(cold.beta);
  const PotentialParams qphi = quadratic.layout().unflatten_potential(sol.alpha);
  const DiscriminatorParams qg = quadratic.layout().unflatten_discriminator(sol.beta);
  phi.A0 = qphi.A0;
  phi.a1 = qphi.a1;
  g.B0 = qg.B0;
  g.b1 = qg.b1;
  g.b2 = qg.b2;
  sol.alpha = full.flatten(phi);
  sol.beta = full.flatten(g);
  sol.potential = std::move(phi);
  sol.discriminator = std::move(g);
  return sol;
}

}  // namespace

ForwardResult forward_sweep(const Trajectory& traj, const SampleSet& y, const GlobalConfig& cfg,
                            const std::vector<StartPoint>& warm, int sweep) {
  cfg.validate();
  const int n = traj.intervals();
  require(n >= 1, "forward_sweep: trajectory has no intervals");
  require(warm.empty() || static_cast<int>(warm.size()) == n, "forward_sweep: warm start size");
  const int dim = static_cast<int>(traj.steps.front().cols());
  const GaussianFeatureSpace space = make_feature_space(cfg.features, dim);
  FeatureConfig plain = cfg.features;
  plain.phi_bumps = 0;
  plain.g_bumps = 0;
  const GaussianFeatureSpace quadratic = make_feature_space(plain, dim);

  ForwardResult out;
  out.trajectory = traj;
  for (int t = 1; t <= n; ++t) {
    const SampleSet& source = out.trajectory.steps[static_cast<std::size_t>(t - 1)];
    const SampleSet& target = t < n ? out.trajectory.steps[static_cast<std::size_t>(t)] : y;
    SolverConfig local = cfg.local;
    local.seed = cfg.seed * 1000003ULL + static_cast<std::uint64_t>(t);
    std::optional<StartPoint> start;
    if (!warm.empty()) start = warm[static_cast<std::size_t>(t - 1)];

    LocalSolution sol;
    bool fallback = false;
    try {
      try {
        sol = sblot(space, source, target, local, start);
      } catch (const StallError&) {
        if (!start) throw;
        sol = sblot(space, source, target, local);
      }
      if (start && sol.status != SolveStatus::Converged) {
        LocalSolution cold = sblot(space, source, target, local);
        if (cold.status == SolveStatus::Converged) sol = std::move(cold);
      }
      if (sol.status != SolveStatus::Converged && cfg.quadratic_fallback) {
        LocalSolution quad = sblot(quadratic, source, target, local);
        if (quad.status == SolveStatus::Converged) {
          sol = embed_quadratic(space, quadratic, source, target, local.seed, std::move(quad));
          fallback = true;
        }
      }
    } catch (StallError& e) {
      e.step = t;
      e.sweep = sweep;
      throw;
    }
    out.trajectory.steps[static_cast<std::size_t>(t)] = apply_potential(*sol.potential, source);
    out.map.locals.push_back(*sol.potential);
    out.solutions.push_back({sol.alpha, sol.beta, false});

    LocalSummary summary;
    summary.step = t;
    summary.status = sol.status;
    summary.quadratic_fallback = fallback;
    summary.iterations = sol.iterations;
    summary.rejected_steps = sol.rejected_steps;
    summary.final_grad_norm = sol.final_grad_norm;
    summary.final_core = sol.core_trace.back();
    summary.min_jacobian_eigenvalue = sol.diagnostics.min_jacobian_eigenvalue;
    summary.saturated = sol.diagnostics.saturated;
    summary.degenerate_centers = sol.diagnostics.degenerate_centers;
    summary.lagrangian_trace = sol.lagrangian_trace;
    out.summaries.push_back(std::move(summary));
  }
  return out;
}

SampleSet apply_map(const ComposedMap& composed, const SampleSet& points) {
  SampleSet out = points;
  for (const auto& local : composed.locals) out = apply_potential(local, out);
  return out;
}

double transport_cost(const ComposedMap& composed, const SampleSet& x) {
  require(x.rows() >= 1, "transport_cost: empty sample");
  const SampleSet moved = apply_map(composed, x);
  return (moved - x).rowwise().squaredNorm().mean();
}

AscentResult estimate_kl(const SampleSet& z, const SampleSet& y, const GlobalConfig& cfg) {
  FeatureConfig features = cfg.features;
  features.phi_bumps = 0;
  const GaussianFeatureSpace space = make_feature_space(features, static_cast<int>(z.cols()));
  const StartPoint start = initial_point(space, z, y, cfg.seed);
  const PenaltyConfig penalty = resolve_penalty(cfg.local.penalty, z, y);
  return maximize_discriminator(space, start.beta, z, y, penalty, cfg.kl);
}

TransportResult sbgot(const SampleSet& x, const SampleSet& y, const GlobalConfig& cfg) {
  cfg.validate();
  TransportResult out;
  out.kl_initial = estimate_kl(x, y, cfg).kl;

  Trajectory traj = init_intermediates(x, y, cfg);
  std::vector<StartPoint> warm;
  SampleSet previous = traj.steps.back();
  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    if (sweep > 1) traj = backward_sweep(traj);
    ForwardResult fwd = forward_sweep(traj, y, cfg, warm, sweep);
    traj = std::move(fwd.trajectory);
    out.composed = std::move(fwd.map);
    warm = std::move(fwd.solutions);
    out.sweeps = sweep;

    const SampleSet& current = traj.steps.back();
    const double scale = std::max(previous.norm(), 1e-300);
    SweepRecord record{sweep, (current - previous).norm() / scale, std::move(fwd.summaries)};
    out.locals_converged = std::all_of(record.locals.begin(), record.locals.end(),
                                       [](const auto& s) { return s.status == SolveStatus::Converged; });
    const bool done = record.relative_change < cfg.sweep_tol;
    out.history.push_back(std::move(record));
    previous = current;
    if (done) {
      out.sweeps_converged = true;
      break;
    }
  }
  out.trajectory = std::move(traj);

  const SampleSet& moved = out.trajectory.steps.back();
  FeatureConfig features = cfg.features;
  features.phi_bumps = 0;
  const GaussianFeatureSpace space = make_feature_space(features, static_cast<int>(x.cols()));
  const AscentResult kl = estimate_kl(moved, y, cfg);
  out.kl_final = kl.kl;
  out.final_discriminator = space.layout().unflatten_discriminator(kl.beta);
  out.cost = transport_cost(out.composed, x);
  return out;
}

}  // namespace adot
