#include "adot/objective.hpp"

#include "adot/local_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace adot {

void PenaltyConfig::validate() const {
  require(std::isfinite(lambda) && lambda >= 0.0, "penalty.lambda must be >= 0");
  if (epsilon) require(*epsilon > 0.0, "penalty.epsilon must be > 0");
  if (diameter) require(*diameter > 0.0, "penalty.diameter must be > 0");
  require(epsilon_floor >= 0.0 && epsilon_floor < 1.0, "penalty.epsilon_floor must be in [0, 1)");
  if (epsilon && diameter) require(*epsilon < *diameter, "penalty.epsilon must be < diameter");
}

double median_nearest_neighbor_distance(const SampleSet& points) {
  const Eigen::Index n = points.rows();
  if (n < 2) return 0.0;
  std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  if (points.cols() == 1) {
    std::vector<double> v(points.data(), points.data() + n);
    std::sort(v.begin(), v.end());
    // Exact duplicates are skipped so a repeated point does not report 0.
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = i - 1; j >= 0; --j) {
        if (v[j] < v[i]) {
          best = v[i] - v[j];
          break;
        }
      }
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (v[j] > v[i]) {
          best = std::min(best, v[j] - v[i]);
          break;
        }
      }
      nearest[i] = best;
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double dist = (points.row(i) - points.row(j)).norm();
        if (dist == 0.0) continue;
        nearest[i] = std::min(nearest[i], dist);
        nearest[j] = std::min(nearest[j], dist);
      }
    }
  }
  nearest.erase(std::remove_if(nearest.begin(), nearest.end(),
                               [](double v) { return !std::isfinite(v); }),
                nearest.end());
  if (nearest.empty()) return 0.0;
  auto mid = nearest.begin() + static_cast<std::ptrdiff_t>(nearest.size() / 2);
  std::nth_element(nearest.begin(), mid, nearest.end());
  double upper = *mid;
  if (nearest.size() % 2 == 1) return upper;
  const double lower = *std::max_element(nearest.begin(), mid);
  return 0.5 * (lower + upper);
}

PenaltyConfig resolve_penalty(const PenaltyConfig& cfg, const SampleSet& x, const SampleSet& y) {
  require(x.cols() == y.cols(), "resolve_penalty: dimension mismatch");
  PenaltyConfig out = cfg;
  SampleSet pooled(x.rows() + y.rows(), x.cols());
  pooled << x, y;
  const Eigen::RowVectorXd lo = pooled.colwise().minCoeff();
  const Eigen::RowVectorXd hi = pooled.colwise().maxCoeff();
  double diameter = (hi - lo).norm();
  if (!(diameter > 0.0)) diameter = 1.0;
  if (!out.diameter) out.diameter = diameter;
  if (!out.epsilon) {
    double eps = std::max(2.0 * median_nearest_neighbor_distance(pooled),
                          out.epsilon_floor * *out.diameter);
    if (!(eps > 0.0) || eps >= *out.diameter) eps = 1e-3 * *out.diameter;
    out.epsilon = eps;
  }
  if (out.origin.size() == 0) out.origin = (0.5 * (lo + hi)).transpose();
  out.validate();
  return out;
}

// ---------------------------------------------------------------- penalty

namespace {

struct PlayerPenalty {
  double value = 0.0;
  bool degenerate = false;
};

PlayerPenalty player_penalty(const std::vector<BumpSlot>& slots, const Vector& flat, int dim,
                             double eps, double diam, const Vector& origin, Vector* grad,
                             Matrix* hess) {
  PlayerPenalty out;
  const double e2 = eps * eps;
  const double d2 = diam * diam;
  for (const auto& slot : slots) {
    const auto s = flat.segment(slot.scale, slot.scale_count);
    const double rho = s.squaredNorm();
    const double f1 = std::exp(e2 * rho);
    const Vector rel = flat.segment(slot.center, dim) - origin;
    out.value += f1 + 1.0 / (d2 * rho) + rel.squaredNorm() / d2;
    if (!grad) continue;

    grad->segment(slot.scale, slot.scale_count) += (2.0 * e2 * f1 - 2.0 / (d2 * rho * rho)) * s;
    grad->segment(slot.center, dim) += (2.0 / d2) * rel;
    auto hs = hess->block(slot.scale, slot.scale, slot.scale_count, slot.scale_count);
    hs += (4.0 * e2 * e2 * f1 + 8.0 / (d2 * rho * rho * rho)) * (s * s.transpose());
    hs.diagonal().array() += 2.0 * e2 * f1 - 2.0 / (d2 * rho * rho);
    hess->block(slot.center, slot.center, dim, dim).diagonal().array() += 2.0 / d2;
  }

  const double floor = 1e-8 * diam;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    for (std::size_t j = i + 1; j < slots.size(); ++j) {
      const Vector delta = flat.segment(slots[i].center, dim) - flat.segment(slots[j].center, dim);
      const double r2 = delta.squaredNorm();
      if (std::sqrt(r2) < floor) {
        out.value += e2 / (floor * floor);
        out.degenerate = true;
        continue;
      }
      out.value += e2 / r2;
      if (!grad) continue;
      const Vector gi = (-2.0 * e2 / (r2 * r2)) * delta;
      grad->segment(slots[i].center, dim) += gi;
      grad->segment(slots[j].center, dim) -= gi;
      Matrix k = (8.0 * e2 / (r2 * r2 * r2)) * (delta * delta.transpose());
      k.diagonal().array() -= 2.0 * e2 / (r2 * r2);
      hess->block(slots[i].center, slots[i].center, dim, dim) += k;
      hess->block(slots[j].center, slots[j].center, dim, dim) += k;
      hess->block(slots[i].center, slots[j].center, dim, dim) -= k;
      hess->block(slots[j].center, slots[i].center, dim, dim) -= k;
    }
  }
  return out;
}

}  // namespace

PenaltyTerms penalty_terms(const ParamLayout& layout, const Vector& alpha, const Vector& beta,
                           const PenaltyConfig& cfg, bool derivatives) {
  const int d = layout.dim();
  const Vector origin = cfg.origin.size() == 0 ? Vector::Zero(d) : cfg.origin;
  require(origin.size() == d, "penalty: origin dimension mismatch");
  PenaltyTerms out;
  if (derivatives) {
    out.grad_alpha = Vector::Zero(layout.alpha_size());
    out.grad_beta = Vector::Zero(layout.beta_size());
    out.hess_alpha = Matrix::Zero(layout.alpha_size(), layout.alpha_size());
    out.hess_beta = Matrix::Zero(layout.beta_size(), layout.beta_size());
  }
  if (layout.phi_slots().empty() && layout.g_slots().empty()) return out;
  require(cfg.resolved(), "penalty: epsilon and diameter must be resolved");
  const auto phi = player_penalty(layout.phi_slots(), alpha, d, *cfg.epsilon, *cfg.diameter, origin,
                                  derivatives ? &out.grad_alpha : nullptr,
                                  derivatives ? &out.hess_alpha : nullptr);
  const auto g = player_penalty(layout.g_slots(), beta, d, *cfg.epsilon, *cfg.diameter, origin,
                                derivatives ? &out.grad_beta : nullptr,
                                derivatives ? &out.hess_beta : nullptr);
  out.phi = phi.value;
  out.g = g.value;
  out.degenerate = phi.degenerate || g.degenerate;
  return out;
}

namespace {

std::vector<ScaleKind> kinds_of(const std::vector<GaussianBump>& bumps) {
  std::vector<ScaleKind> out;
  for (const auto& b : bumps) out.push_back(b.scale.kind());
  return out;
}

}  // namespace

double penalty(const PotentialParams& alpha, const DiscriminatorParams& beta,
               const PenaltyConfig& cfg, double gbar, bool* degenerate) {
  require(gbar >= 0.0, "penalty: gbar must be >= 0");
  const ParamLayout layout(alpha.dim(), kinds_of(alpha.bumps), kinds_of(beta.bumps));
  const auto terms = penalty_terms(layout, layout.flatten(alpha), layout.flatten(beta), cfg, false);
  if (degenerate) *degenerate = terms.degenerate;
  return cfg.lambda * (terms.g + gbar * terms.phi);
}

// -------------------------------------------------------------- lagrangian

namespace {

void check_samples(const FeatureSpace& space, const SampleSet& x, const SampleSet& y) {
  require(x.rows() >= 1 && y.rows() >= 1, "sample sets must be nonempty");
  require(x.cols() == space.dim() && y.cols() == space.dim(), "sample dimension mismatch");
}

double clamped_exp(double g, bool& saturated) {
  if (g > kExpClamp) {
    saturated = true;
    return std::exp(kExpClamp);
  }
  return std::exp(g);
}

}  // namespace

LagrangianValue lagrangian(const FeatureSpace& space, const Vector& alpha, const Vector& beta,
                           const SampleSet& x, const SampleSet& y, const PenaltyConfig& cfg,
                           std::optional<double> gbar) {
  check_samples(space, x, y);
  auto eval = space.bind(alpha, beta);
  LagrangianValue out;
  Vector t(space.dim());
  Vector grad(space.dim());
  double sum_g = 0.0;
  double sum_grad = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    eval->transport(x.row(i).transpose(), t);
    sum_g += eval->discriminator(t);
    if (!gbar) {
      eval->discriminator_gradient(t, grad);
      sum_grad += grad.norm();
    }
  }
  double sum_exp = 0.0;
  for (Eigen::Index j = 0; j < y.rows(); ++j)
    sum_exp += clamped_exp(eval->discriminator(y.row(j).transpose()), out.saturated);

  out.core = sum_g / static_cast<double>(x.rows()) - sum_exp / static_cast<double>(y.rows());
  out.gbar = gbar ? *gbar : sum_grad / static_cast<double>(x.rows());
  out.total = out.core;
  if (const ParamLayout* layout = space.gaussian_layout()) {
    const auto terms = penalty_terms(*layout, alpha, beta, cfg, false);
    out.penalty_phi = terms.phi;
    out.penalty_g = terms.g;
    out.degenerate = terms.degenerate;
    out.total += cfg.lambda * (out.gbar * terms.phi - terms.g);
  }
  return out;
}

LagrangianValue lagrangian(const PotentialParams& alpha, const DiscriminatorParams& beta,
                           const SampleSet& x, const SampleSet& y, const PenaltyConfig& cfg) {
  const GaussianFeatureSpace space(
      ParamLayout(alpha.dim(), kinds_of(alpha.bumps), kinds_of(beta.bumps)));
  const auto& layout = space.layout();
  return lagrangian(space, layout.flatten(alpha), layout.flatten(beta), x, y, cfg);
}

TwistedDerivatives twisted_derivatives(const FeatureSpace& space, const Vector& alpha,
                                       const Vector& beta, const SampleSet& x,
                                       const SampleSet& y, const PenaltyConfig& cfg,
                                       std::optional<double> gbar) {
  check_samples(space, x, y);
  const Eigen::Index a = space.alpha_size();
  const Eigen::Index b = space.beta_size();
  auto eval = space.bind(alpha, beta);

  Vector grad_a = Vector::Zero(a);
  Vector grad_b = Vector::Zero(b);
  Matrix l_aa = Matrix::Zero(a, a);
  Matrix l_ab = Matrix::Zero(a, b);
  Matrix l_bb = Matrix::Zero(b, b);
  LagrangianValue value;

  const double inv_n = 1.0 / static_cast<double>(x.rows());
  const double inv_m = 1.0 / static_cast<double>(y.rows());

  SourceTerms st;
  double sum_g = 0.0;
  double sum_grad = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    eval->source_terms(x.row(i).transpose(), st, true);
    if (!std::isfinite(st.g) || !st.grad_z.allFinite() || !st.d2_alpha.allFinite())
      throw NonFiniteError("non-finite discriminator value at source sample " + std::to_string(i),
                           i, false);
    sum_g += st.g;
    sum_grad += st.grad_z.norm();
    grad_a.noalias() += st.dT_dalpha.transpose() * st.grad_z;
    grad_b += st.dg_dbeta;
    l_aa += st.d2_alpha;
    l_ab += st.d2_alpha_beta;
    l_bb += st.d2g_dbeta;
  }
  grad_a *= inv_n;
  grad_b *= inv_n;
  l_aa *= inv_n;
  l_ab *= inv_n;
  l_bb *= inv_n;

  TargetTerms tt;
  double sum_exp = 0.0;
  for (Eigen::Index j = 0; j < y.rows(); ++j) {
    eval->target_terms(y.row(j).transpose(), tt, true);
    if (!std::isfinite(tt.g))
      throw NonFiniteError("non-finite discriminator value at target sample " + std::to_string(j),
                           j, true);
    if (tt.g > kExpClamp) {
      value.saturated = true;
      sum_exp += std::exp(kExpClamp);
      continue;
    }
    const double eg = std::exp(tt.g);
    sum_exp += eg;
    grad_b -= (eg * inv_m) * tt.dg_dbeta;
    l_bb -= inv_m * tt.d2exp_dbeta;
    if (!tt.d2exp_dbeta.allFinite())
      throw NonFiniteError("non-finite e^g curvature at target sample " + std::to_string(j), j,
                           true);
  }

  value.core = sum_g * inv_n - sum_exp * inv_m;
  value.gbar = gbar ? *gbar : sum_grad * inv_n;
  value.total = value.core;
  if (const ParamLayout* layout = space.gaussian_layout()) {
    const auto terms = penalty_terms(*layout, alpha, beta, cfg, true);
    value.penalty_phi = terms.phi;
    value.penalty_g = terms.g;
    value.degenerate = terms.degenerate;
    value.total += cfg.lambda * (value.gbar * terms.phi - terms.g);
    grad_a += (cfg.lambda * value.gbar) * terms.grad_alpha;
    l_aa += (cfg.lambda * value.gbar) * terms.hess_alpha;
    grad_b -= cfg.lambda * terms.grad_beta;
    l_bb -= cfg.lambda * terms.hess_beta;
  }

  TwistedDerivatives out;
  out.G.resize(a + b);
  out.G << grad_a, -grad_b;
  out.H.resize(a + b, a + b);
  out.H.topLeftCorner(a, a) = l_aa;
  out.H.topRightCorner(a, b) = l_ab;
  out.H.bottomLeftCorner(b, a) = -l_ab.transpose();
  out.H.bottomRightCorner(b, b) = -l_bb;
  out.value = value;
  return out;
}

// ---------------------------------------------------------------------- KL

double kl_estimate(const FeatureSpace& space, const Vector& beta, const SampleSet& z,
                   const SampleSet& y) {
  check_samples(space, z, y);
  auto eval = space.bind(Vector::Zero(space.alpha_size()), beta);
  double sum_g = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) sum_g += eval->discriminator(z.row(i).transpose());
  bool saturated = false;
  double sum_exp = 0.0;
  for (Eigen::Index j = 0; j < y.rows(); ++j)
    sum_exp += clamped_exp(eval->discriminator(y.row(j).transpose()), saturated);
  return 1.0 + sum_g / static_cast<double>(z.rows()) - sum_exp / static_cast<double>(y.rows());
}

double kl_estimate(const DiscriminatorParams& beta, const SampleSet& z, const SampleSet& y) {
  const GaussianFeatureSpace space(ParamLayout(beta.dim(), {}, kinds_of(beta.bumps)));
  return kl_estimate(space, space.layout().flatten(beta), z, y);
}

namespace {

struct Moments {
  Vector mean;
  Matrix precision;
  bool regularized = false;
};

Moments fit_gaussian(const SampleSet& s) {
  const auto n = static_cast<double>(s.rows());
  const int d = static_cast<int>(s.cols());
  Moments out;
  out.mean = s.colwise().mean().transpose();
  const SampleSet centered = s.rowwise() - out.mean.transpose();
  Matrix cov = (centered.transpose() * centered) / n;
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    double ridge = 1e-8 * cov.trace() / d;
    if (!(ridge > 0.0)) ridge = 1e-8;
    cov.diagonal().array() += ridge;
    out.regularized = true;
  }
  out.precision = cov.llt().solve(Matrix::Identity(d, d));
  out.precision = 0.5 * (out.precision + out.precision.transpose()).eval();
  return out;
}

}  // namespace

DiscriminatorInit init_discriminator(const SampleSet& x, const SampleSet& y) {
  require(x.rows() >= 1 && y.rows() >= 1, "init_discriminator: empty sample");
  require(x.cols() == y.cols(), "init_discriminator: dimension mismatch");
  const Moments mx = fit_gaussian(x);
  const Moments my = fit_gaussian(y);
  DiscriminatorInit out;
  out.params = DiscriminatorParams::zero(static_cast<int>(x.cols()));
  out.params.B0 = my.precision - mx.precision;
  out.params.b1 = mx.precision * mx.mean - my.precision * my.mean;
  out.params.b2 = 0.5 * (my.mean.dot(my.precision * my.mean) - mx.mean.dot(mx.precision * mx.mean));
  out.regularized = mx.regularized || my.regularized;
  return out;
}

// ------------------------------------------------------- β-only ascent

namespace {

struct BetaObjective {
  double value = 0.0;  // core - λP_g
  double core = 0.0;
  Vector grad;
  Matrix hess;
};

BetaObjective beta_objective(const FeatureSpace& space, const Vector& beta, const SampleSet& z,
                             const SampleSet& y, const PenaltyConfig& cfg, bool derivatives) {
  const Eigen::Index b = space.beta_size();
  auto eval = space.bind(Vector::Zero(space.alpha_size()), beta);
  BetaObjective out;
  if (derivatives) {
    out.grad = Vector::Zero(b);
    out.hess = Matrix::Zero(b, b);
  }
  const double inv_n = 1.0 / static_cast<double>(z.rows());
  const double inv_m = 1.0 / static_cast<double>(y.rows());
  TargetTerms tt;
  double sum_g = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    if (!derivatives) {
      sum_g += eval->discriminator(z.row(i).transpose());
      continue;
    }
    eval->target_terms(z.row(i).transpose(), tt, true);
    sum_g += tt.g;
    out.grad += inv_n * tt.dg_dbeta;
    out.hess += inv_n * tt.d2g_dbeta;
  }
  double sum_exp = 0.0;
  for (Eigen::Index j = 0; j < y.rows(); ++j) {
    if (!derivatives) {
      const double g = eval->discriminator(y.row(j).transpose());
      sum_exp += std::exp(std::min(g, kExpClamp));
      continue;
    }
    eval->target_terms(y.row(j).transpose(), tt, true);
    if (tt.g > kExpClamp) {
      sum_exp += std::exp(kExpClamp);
      continue;
    }
    const double eg = std::exp(tt.g);
    sum_exp += eg;
    out.grad -= (eg * inv_m) * tt.dg_dbeta;
    out.hess -= inv_m * tt.d2exp_dbeta;
  }
  out.core = sum_g * inv_n - sum_exp * inv_m;
  out.value = out.core;
  if (const ParamLayout* layout = space.gaussian_layout(); layout && !layout->g_slots().empty()) {
    const Vector alpha = Vector::Zero(space.alpha_size());
    const auto terms = penalty_terms(*layout, alpha, beta, cfg, derivatives);
    out.value -= cfg.lambda * terms.g;
    if (derivatives) {
      out.grad -= cfg.lambda * terms.grad_beta;
      out.hess -= cfg.lambda * terms.hess_beta;
    }
  }
  return out;
}

}  // namespace

AscentResult maximize_discriminator(const FeatureSpace& space, const Vector& beta0,
                                    const SampleSet& z, const SampleSet& y,
                                    const PenaltyConfig& cfg, const AscentConfig& ascent) {
  check_samples(space, z, y);
  require(beta0.size() == space.beta_size(), "maximize_discriminator: β has the wrong length");
  const Vector alpha0 = Vector::Zero(space.alpha_size());
  AscentResult out;
  out.beta = beta0;
  double eta = ascent.eta0;
  auto current = beta_objective(space, out.beta, z, y, cfg, true);
  for (;;) {
    out.grad_norm = current.grad.norm();
    if (!std::isfinite(out.grad_norm)) break;
    if (out.grad_norm < ascent.tolerance) {
      out.converged = true;
      break;
    }
    if (out.iterations >= ascent.max_iter) break;

    // Descent on -F: G = -∇F, H = -∇²F.
    bool accepted = false;
    while (!accepted) {
      Vector next;
      bool ok = true;
      try {
        next = implicit_step(out.beta, -current.grad, -current.hess, eta);
      } catch (const NeedsSmallerEta&) {
        ok = false;
      }
      if (ok && space.admissible(alpha0, next)) {
        const auto trial = beta_objective(space, next, z, y, cfg, false);
        if (std::isfinite(trial.value) &&
            trial.value >= current.value - 1e-12 * (1.0 + std::abs(current.value))) {
          out.beta = next;
          accepted = true;
          eta = std::min(2.0 * eta, ascent.eta_max);
          break;
        }
      }
      if (eta <= ascent.eta_min) break;
      eta = std::max(0.5 * eta, ascent.eta_min);
    }
    if (!accepted) break;
    ++out.iterations;
    current = beta_objective(space, out.beta, z, y, cfg, true);
  }
  out.kl = 1.0 + current.core;
  return out;
}

}  // namespace adot
