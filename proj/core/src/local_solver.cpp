#include "adot/local_solver.hpp"

#include "adot/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace adot {

Vector implicit_step(const Vector& gamma, const Vector& G, const Matrix& H, double eta) {
  require(gamma.size() == G.size() && H.rows() == G.size() && H.cols() == G.size(),
          "implicit_step: dimension mismatch");
  require(eta > 0.0, "implicit_step: eta must be > 0");
  Matrix system = eta * H;
  system.diagonal().array() += 1.0;
  const Eigen::PartialPivLU<Matrix> lu(system);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14))
    throw NeedsSmallerEta("implicit system is ill-conditioned (rcond " + std::to_string(rcond) + ")",
                          rcond);
  Vector step = lu.solve(G);
  if (!step.allFinite()) throw NeedsSmallerEta("implicit system produced a non-finite step", rcond);
  return gamma - eta * step;
}

void SolverConfig::validate() const {
  require(eta_min > 0.0 && eta_min <= eta0 && eta0 <= eta_max,
          "solver: need 0 < eta_min <= eta0 <= eta_max");
  require(shrink > 0.0 && shrink < 1.0, "solver.shrink must be in (0, 1)");
  require(grow > 1.0, "solver.grow must be > 1");
  require(tolerance > 0.0, "solver.tolerance must be > 0");
  require(max_iter >= 1, "solver.max_iter must be >= 1");
  require(rejection_slack >= 0.0, "solver.rejection_slack must be >= 0");
  require(grad_growth == 0.0 || grad_growth > 1.0, "solver.grad_growth must be 0 or > 1");
  require(convexity_floor < 1.0, "solver.convexity_floor must be < 1");
  penalty.validate();
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::Stalled: return "stalled";
    case SolveStatus::ConvexityBound: return "convexity_bound";
  }
  return "unknown";
}

namespace {

Vector axis_std(const SampleSet& s) {
  const Eigen::RowVectorXd mean = s.colwise().mean();
  Vector out = ((s.rowwise() - mean).array().square().colwise().sum() /
                static_cast<double>(s.rows()))
                   .sqrt()
                   .transpose();
  for (Eigen::Index k = 0; k < out.size(); ++k)
    if (!(out(k) > 0.0) || !std::isfinite(out(k))) out(k) = 1.0;
  return out;
}

// Width of roughly one standard deviation per axis.
void place_bump(const BumpSlot& slot, const Vector& mean, const Vector& sigma, Philox4x32& rng,
                Vector& flat) {
  const auto d = mean.size();
  flat(slot.amplitude) = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) flat(slot.center + k) = mean(k) + 0.1 * sigma(k) * rng.normal();
  auto s = flat.segment(slot.scale, slot.scale_count);
  switch (slot.kind) {
    case ScaleKind::Isotropic: s(0) = 1.0 / sigma.array().square().mean(); break;
    case ScaleKind::Directional:
    case ScaleKind::Diagonal: s = sigma.cwiseInverse(); break;
    case ScaleKind::FullMatrix:
      s.setZero();
      for (Eigen::Index k = 0; k < d; ++k) s(k * d + k) = 1.0 / sigma(k);
      break;
  }
}

}  // namespace

StartPoint initial_point(const FeatureSpace& space, const SampleSet& x, const SampleSet& y,
                         std::uint64_t seed) {
  require(x.cols() == space.dim() && y.cols() == space.dim(), "initial_point: dimension mismatch");
  StartPoint out;
  out.alpha = Vector::Zero(space.alpha_size());
  out.beta = Vector::Zero(space.beta_size());
  const ParamLayout* layout = space.gaussian_layout();
  if (!layout) return out;

  const auto init = init_discriminator(x, y);
  out.regularized = init.regularized;
  const int d = layout->dim();
  Eigen::Index k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) out.beta(k++) = init.params.B0(i, j);
  out.beta.segment(layout->b1_offset(), d) = init.params.b1;
  out.beta(layout->b2_offset()) = init.params.b2;

  Philox4x32 rng(seed, 0x6a09e667ULL);
  const Vector mx = x.colwise().mean().transpose();
  const Vector my = y.colwise().mean().transpose();
  const Vector sx = axis_std(x);
  const Vector sy = axis_std(y);
  for (const auto& slot : layout->phi_slots()) place_bump(slot, mx, sx, rng, out.alpha);
  for (const auto& slot : layout->g_slots()) place_bump(slot, my, sy, rng, out.beta);
  return out;
}

namespace {

double lowest_jacobian_eigenvalue(const FeatureSpace& space, const Vector& alpha,
                                  const Vector& beta, const SampleSet& x) {
  auto eval = space.bind(alpha, beta);
  double lowest = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Matrix j = eval->transport_jacobian(x.row(i).transpose());
    if (j.rows() == 1) {
      lowest = std::min(lowest, j(0, 0));
      continue;
    }
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(j, Eigen::EigenvaluesOnly);
    lowest = std::min(lowest, eig.eigenvalues().minCoeff());
  }
  return lowest;
}

Matrix absolute_block(const Matrix& block) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (block + block.transpose()));
  return eig.eigenvectors() * eig.eigenvalues().cwiseAbs().asDiagonal() *
         eig.eigenvectors().transpose();
}

Matrix absolute_blocks(const Matrix& h, Eigen::Index a) {
  Matrix out = h;
  const Eigen::Index b = h.rows() - a;
  if (a > 0) out.topLeftCorner(a, a) = absolute_block(h.topLeftCorner(a, a));
  if (b > 0) out.bottomRightCorner(b, b) = absolute_block(h.bottomRightCorner(b, b));
  return out;
}

void finish(const FeatureSpace& space, const SampleSet& x, const SampleSet& y,
            LocalSolution& sol) {
  if (const ParamLayout* layout = space.gaussian_layout()) {
    sol.potential = layout->unflatten_potential(sol.alpha);
    sol.discriminator = layout->unflatten_discriminator(sol.beta);
  }
  sol.diagnostics.min_jacobian_eigenvalue = lowest_jacobian_eigenvalue(space, sol.alpha, sol.beta, x);

  Vector identity = sol.alpha;
  const auto mask = space.alpha_displacement_mask();
  for (Eigen::Index k = 0; k < identity.size(); ++k)
    if (mask[static_cast<std::size_t>(k)]) identity(k) = 0.0;
  const double at_solution = lagrangian(space, sol.alpha, sol.beta, x, y, sol.penalty).core;
  const double at_identity = lagrangian(space, identity, sol.beta, x, y, sol.penalty).core;
  sol.diagnostics.identity_gap = at_solution - at_identity;
}

}  // namespace

LocalSolution sblot(const FeatureSpace& space, const SampleSet& x, const SampleSet& y,
                    const SolverConfig& cfg, const std::optional<StartPoint>& warm) {
  cfg.validate();
  require(x.rows() >= 1 && y.rows() >= 1, "sblot: sample sets must be nonempty");
  require(x.cols() == space.dim() && y.cols() == space.dim(), "sblot: dimension mismatch");

  LocalSolution sol;
  sol.penalty = resolve_penalty(cfg.penalty, x, y);
  const StartPoint start = warm ? *warm : initial_point(space, x, y, cfg.seed);
  require(start.alpha.size() == space.alpha_size() && start.beta.size() == space.beta_size(),
          "sblot: start point does not match the feature space");
  require(space.admissible(start.alpha, start.beta), "sblot: start point is not admissible");
  sol.alpha = start.alpha;
  sol.beta = start.beta;
  sol.diagnostics.regularized_init = start.regularized;

  const Eigen::Index a = space.alpha_size();
  const Eigen::Index b = space.beta_size();
  double eta = cfg.eta0;
  Vector gamma(a + b);

  TwistedDerivatives td = twisted_derivatives(space, sol.alpha, sol.beta, x, y, sol.penalty);
  for (;;) {
    sol.final_grad_norm = td.G.norm();
    sol.lagrangian_trace.push_back(td.value.total);
    sol.core_trace.push_back(td.value.core);
    sol.grad_norm_trace.push_back(sol.final_grad_norm);
    sol.diagnostics.saturated = sol.diagnostics.saturated || td.value.saturated;
    sol.diagnostics.degenerate_centers = td.value.degenerate;

    if (sol.final_grad_norm < cfg.tolerance) {
      sol.status = SolveStatus::Converged;
      break;
    }
    if (sol.iterations >= cfg.max_iter) {
      sol.status = SolveStatus::MaxIterations;
      break;
    }

    gamma << sol.alpha, sol.beta;
    const double gbar = td.value.gbar;
    const Matrix H = cfg.absolute_curvature ? absolute_blocks(td.H, a) : td.H;
    const double convexity =
        cfg.monotone_guard ? lowest_jacobian_eigenvalue(space, sol.alpha, sol.beta, x) : 0.0;
    for (;;) {
      bool accept = false;
      bool guarded = false;
      Vector next;
      try {
        next = implicit_step(gamma, td.G, H, eta);
      } catch (const NeedsSmallerEta&) {
        next.resize(0);
      }
      if (next.size() != 0) {
        const Vector alpha1 = next.head(a);
        const Vector beta1 = next.tail(b);
        if (space.admissible(alpha1, beta1)) {
          const LagrangianValue next_value =
              lagrangian(space, alpha1, beta1, x, y, sol.penalty, gbar);
          const double both = next_value.total;
          const double old_alpha = lagrangian(space, sol.alpha, beta1, x, y, sol.penalty, gbar).total;
          const double old_beta = lagrangian(space, alpha1, sol.beta, x, y, sol.penalty, gbar).total;
          const double slack = cfg.rejection_slack * (1.0 + std::abs(both));
          accept = !next_value.saturated && std::isfinite(both) && std::isfinite(old_alpha) &&
                   std::isfinite(old_beta) && both <= old_alpha + slack && both >= old_beta - slack;
          if (accept && cfg.monotone_guard) {
            const double next_convexity = lowest_jacobian_eigenvalue(space, alpha1, beta1, x);
            accept = next_convexity > cfg.convexity_floor || next_convexity >= convexity;
            guarded = !accept;
          }
          std::optional<TwistedDerivatives> trial;
          if (accept && cfg.grad_growth > 0.0) {
            trial = twisted_derivatives(space, alpha1, beta1, x, y, sol.penalty);
            const double norm = trial->G.norm();
            accept = std::isfinite(norm) &&
                     norm <= std::max(cfg.grad_growth * sol.final_grad_norm, cfg.tolerance);
          }
          if (accept) {
            sol.alpha = alpha1;
            sol.beta = beta1;
            td = trial ? std::move(*trial)
                       : twisted_derivatives(space, sol.alpha, sol.beta, x, y, sol.penalty);
          }
        }
      }
      if (accept) {
        eta = std::min(eta * cfg.grow, cfg.eta_max);
        break;
      }
      ++sol.rejected_steps;
      if (eta <= cfg.eta_min && guarded) {
        sol.status = SolveStatus::ConvexityBound;
        break;
      }
      if (eta <= cfg.eta_min) {
        sol.status = SolveStatus::Stalled;
        sol.final_eta = eta;
        finish(space, x, y, sol);
        throw StallError("local solve stalled at eta_min after " + std::to_string(sol.iterations) +
                             " iterations (|G| = " + std::to_string(sol.final_grad_norm) + ")",
                         std::move(sol));
      }
      eta = std::max(eta * cfg.shrink, cfg.eta_min);
    }
    if (sol.status == SolveStatus::ConvexityBound) break;
    ++sol.iterations;
  }
  sol.final_eta = eta;
  finish(space, x, y, sol);
  return sol;
}

}  // namespace adot
