#include "adot/feature_space.hpp"

#include "bump_kernel.hpp"

#include <cmath>

namespace adot {

std::string_view to_string(ScaleKind kind) {
  switch (kind) {
    case ScaleKind::FullMatrix: return "full";
    case ScaleKind::Isotropic: return "isotropic";
    case ScaleKind::Directional: return "directional";
    case ScaleKind::Diagonal: return "diagonal";
  }
  return "unknown";
}

ScaleKind parse_scale_kind(std::string_view name) {
  if (name == "full" || name == "full_matrix") return ScaleKind::FullMatrix;
  if (name == "isotropic") return ScaleKind::Isotropic;
  if (name == "directional") return ScaleKind::Directional;
  if (name == "diagonal") return ScaleKind::Diagonal;
  throw ContractError("unknown scale form '" + std::string(name) + "'");
}

// ---------------------------------------------------------------- ScaleForm

ScaleForm::ScaleForm(ScaleKind kind, int dim, Vector params)
    : kind_(kind), dim_(dim), params_(std::move(params)) {
  require(dim >= 1, "scale form dimension must be positive");
  require(params_.size() == param_count(kind, dim), "scale form parameter count mismatch");
}

int ScaleForm::param_count(ScaleKind kind, int dim) {
  switch (kind) {
    case ScaleKind::FullMatrix: return dim * dim;
    case ScaleKind::Isotropic: return 1;
    case ScaleKind::Directional:
    case ScaleKind::Diagonal: return dim;
  }
  return 0;
}

ScaleForm ScaleForm::full_matrix(const Matrix& v) {
  require(v.rows() == v.cols(), "full-matrix scale must be square");
  const int d = static_cast<int>(v.rows());
  Vector flat(d * d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) flat(r * d + c) = v(r, c);
  return ScaleForm(ScaleKind::FullMatrix, d, std::move(flat));
}

ScaleForm ScaleForm::isotropic(double v, int dim) {
  return ScaleForm(ScaleKind::Isotropic, dim, Vector::Constant(1, v));
}

ScaleForm ScaleForm::directional(const Vector& v) {
  return ScaleForm(ScaleKind::Directional, static_cast<int>(v.size()), v);
}

ScaleForm ScaleForm::diagonal(const Vector& diag) {
  return ScaleForm(ScaleKind::Diagonal, static_cast<int>(diag.size()), diag);
}

ScaleForm ScaleForm::from_params(ScaleKind kind, int dim, Vector params) {
  return ScaleForm(kind, dim, std::move(params));
}

Matrix ScaleForm::quadratic_form() const {
  return detail::quadratic_form_derivatives(kind_, dim_, params_).q;
}

bool ScaleForm::nondegenerate() const {
  switch (kind_) {
    case ScaleKind::Isotropic: return params_(0) > 0.0;
    case ScaleKind::Directional: return dim_ == 1 && params_(0) != 0.0;
    case ScaleKind::Diagonal: return (params_.array() != 0.0).all();
    case ScaleKind::FullMatrix: {
      const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
          v(params_.data(), dim_, dim_);
      return std::abs(v.determinant()) > 0.0;
    }
  }
  return false;
}

// ------------------------------------------------------------- structured

double GaussianBump::value(const Eigen::Ref<const Vector>& x) const {
  const Vector u = x - center;
  return amplitude * std::exp(-0.5 * u.dot(scale.quadratic_form() * u));
}

Vector GaussianBump::gradient(const Eigen::Ref<const Vector>& x) const {
  const Vector u = x - center;
  const Matrix q = scale.quadratic_form();
  return -amplitude * std::exp(-0.5 * u.dot(q * u)) * (q * u);
}

PotentialParams PotentialParams::identity(int dim) {
  return {Matrix::Zero(dim, dim), Vector::Zero(dim), {}};
}

void PotentialParams::symmetrize() {
  A0.triangularView<Eigen::StrictlyLower>() = A0.transpose().triangularView<Eigen::StrictlyLower>();
}

DiscriminatorParams DiscriminatorParams::zero(int dim) {
  return {Matrix::Zero(dim, dim), Vector::Zero(dim), 0.0, {}};
}

void DiscriminatorParams::symmetrize() {
  B0.triangularView<Eigen::StrictlyLower>() = B0.transpose().triangularView<Eigen::StrictlyLower>();
}

Vector transport_map(const PotentialParams& alpha, const Eigen::Ref<const Vector>& x) {
  require(x.size() == alpha.dim(), "transport_map: dimension mismatch");
  Vector out = x + alpha.A0.selfadjointView<Eigen::Upper>() * x + alpha.a1;
  for (const auto& bump : alpha.bumps) out += bump.gradient(x);
  return out;
}

Matrix transport_jacobian(const PotentialParams& alpha, const Eigen::Ref<const Vector>& x) {
  const int d = alpha.dim();
  Matrix out = Matrix::Identity(d, d);
  out += alpha.A0.selfadjointView<Eigen::Upper>();
  for (const auto& bump : alpha.bumps) {
    detail::BumpKernel kernel(d, bump.scale.kind(), bump.amplitude, bump.center,
                              bump.scale.params());
    kernel.at(x, false);
    kernel.add_hessian(out);
  }
  return out;
}

double eval_discriminator(const DiscriminatorParams& beta, const Eigen::Ref<const Vector>& z) {
  require(z.size() == beta.dim(), "eval_discriminator: dimension mismatch");
  double out = 0.5 * z.dot(beta.B0.selfadjointView<Eigen::Upper>() * z) + beta.b1.dot(z) + beta.b2;
  for (const auto& bump : beta.bumps) out += bump.value(z);
  return out;
}

Vector discriminator_gradient(const DiscriminatorParams& beta, const Eigen::Ref<const Vector>& z) {
  Vector out = beta.B0.selfadjointView<Eigen::Upper>() * z + beta.b1;
  for (const auto& bump : beta.bumps) out += bump.gradient(z);
  return out;
}

// ------------------------------------------------------------- ParamLayout

ParamLayout::ParamLayout(int dim, std::vector<ScaleKind> phi_bumps, std::vector<ScaleKind> g_bumps)
    : dim_(dim) {
  require(dim >= 1, "dimension must be positive");
  Eigen::Index offset = sym_size() + dim;
  for (ScaleKind kind : phi_bumps) {
    BumpSlot slot{kind, offset, offset + 1, offset + 1 + dim, ScaleForm::param_count(kind, dim)};
    offset += slot.size(dim);
    phi_.push_back(slot);
  }
  alpha_size_ = offset;

  offset = sym_size() + dim + 1;
  for (ScaleKind kind : g_bumps) {
    BumpSlot slot{kind, offset, offset + 1, offset + 1 + dim, ScaleForm::param_count(kind, dim)};
    offset += slot.size(dim);
    g_.push_back(slot);
  }
  beta_size_ = offset;
}

std::pair<int, int> ParamLayout::sym_index(Eigen::Index k) const {
  int row = 0;
  Eigen::Index remaining = k;
  while (remaining >= dim_ - row) {
    remaining -= dim_ - row;
    ++row;
  }
  return {row, row + static_cast<int>(remaining)};
}

namespace {

void write_sym(const Matrix& m, Eigen::Ref<Vector> out, int dim) {
  Eigen::Index k = 0;
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) out(k++) = m(i, j);
}

Matrix read_sym(const Eigen::Ref<const Vector>& flat, int dim) {
  Matrix m(dim, dim);
  Eigen::Index k = 0;
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) m(i, j) = m(j, i) = flat(k++);
  return m;
}

void write_bump(const GaussianBump& bump, const BumpSlot& slot, Eigen::Ref<Vector> out, int dim) {
  require(bump.center.size() == dim, "bump center dimension mismatch");
  require(bump.scale.kind() == slot.kind, "bump scale form does not match layout");
  out(slot.amplitude) = bump.amplitude;
  out.segment(slot.center, dim) = bump.center;
  out.segment(slot.scale, slot.scale_count) = bump.scale.params();
}

GaussianBump read_bump(const Eigen::Ref<const Vector>& flat, const BumpSlot& slot, int dim) {
  return {flat(slot.amplitude), flat.segment(slot.center, dim),
          ScaleForm::from_params(slot.kind, dim, flat.segment(slot.scale, slot.scale_count))};
}

}  // namespace

Vector ParamLayout::flatten(const PotentialParams& alpha) const {
  require(alpha.dim() == dim_ && alpha.A0.rows() == dim_, "potential dimension mismatch");
  require(alpha.bumps.size() == phi_.size(), "potential bump count does not match layout");
  Vector out(alpha_size_);
  write_sym(alpha.A0, out.head(sym_size()), dim_);
  out.segment(a1_offset(), dim_) = alpha.a1;
  for (std::size_t k = 0; k < phi_.size(); ++k) write_bump(alpha.bumps[k], phi_[k], out, dim_);
  return out;
}

Vector ParamLayout::flatten(const DiscriminatorParams& beta) const {
  require(beta.dim() == dim_ && beta.B0.rows() == dim_, "discriminator dimension mismatch");
  require(beta.bumps.size() == g_.size(), "discriminator bump count does not match layout");
  Vector out(beta_size_);
  write_sym(beta.B0, out.head(sym_size()), dim_);
  out.segment(b1_offset(), dim_) = beta.b1;
  out(b2_offset()) = beta.b2;
  for (std::size_t k = 0; k < g_.size(); ++k) write_bump(beta.bumps[k], g_[k], out, dim_);
  return out;
}

PotentialParams ParamLayout::unflatten_potential(const Eigen::Ref<const Vector>& alpha) const {
  require(alpha.size() == alpha_size_, "α has the wrong length for this layout");
  PotentialParams out{read_sym(alpha.head(sym_size()), dim_), alpha.segment(a1_offset(), dim_), {}};
  for (const auto& slot : phi_) out.bumps.push_back(read_bump(alpha, slot, dim_));
  return out;
}

DiscriminatorParams ParamLayout::unflatten_discriminator(const Eigen::Ref<const Vector>& beta) const {
  require(beta.size() == beta_size_, "β has the wrong length for this layout");
  DiscriminatorParams out{read_sym(beta.head(sym_size()), dim_), beta.segment(b1_offset(), dim_),
                          beta(b2_offset()), {}};
  for (const auto& slot : g_) out.bumps.push_back(read_bump(beta, slot, dim_));
  return out;
}

std::vector<bool> ParamLayout::beta_linear_mask() const {
  std::vector<bool> mask(static_cast<std::size_t>(beta_size_), false);
  for (Eigen::Index k = 0; k <= b2_offset(); ++k) mask[k] = true;
  for (const auto& slot : g_) mask[slot.amplitude] = true;
  return mask;
}

std::vector<bool> ParamLayout::alpha_amplitude_mask() const {
  std::vector<bool> mask(static_cast<std::size_t>(alpha_size_), false);
  for (Eigen::Index k = 0; k < a1_offset() + dim_; ++k) mask[k] = true;
  for (const auto& slot : phi_) mask[slot.amplitude] = true;
  return mask;
}

// ----------------------------------------------------------- FeatureSpace

bool FeatureSpace::admissible(const Vector& alpha, const Vector& beta) const {
  return alpha.allFinite() && beta.allFinite();
}

DerivativeBundle derivative_bundle(const FeatureSpace& space, const Vector& alpha,
                                   const Vector& beta, const Eigen::Ref<const Vector>& x) {
  DerivativeBundle out;
  auto evaluator = space.bind(alpha, beta);
  evaluator->source_terms(x, out.source, true);
  evaluator->target_terms(x, out.target, true);
  return out;
}

namespace {

class GaussianEvaluator final : public FeatureEvaluator {
 public:
  GaussianEvaluator(const ParamLayout& layout, bool gauss_newton, const Vector& alpha,
                    const Vector& beta)
      : layout_(layout), gauss_newton_(gauss_newton), d_(layout.dim()) {
    require(alpha.size() == layout.alpha_size(), "α has the wrong length for this layout");
    require(beta.size() == layout.beta_size(), "β has the wrong length for this layout");
    jac_ = Matrix::Identity(d_, d_) + read_sym(alpha.head(layout.sym_size()), d_);
    a1_ = alpha.segment(layout.a1_offset(), d_);
    b0_ = read_sym(beta.head(layout.sym_size()), d_);
    b1_ = beta.segment(layout.b1_offset(), d_);
    b2_ = beta(layout.b2_offset());
    for (const auto& slot : layout.phi_slots()) {
      phi_.emplace_back(d_, slot.kind, alpha(slot.amplitude), alpha.segment(slot.center, d_),
                        alpha.segment(slot.scale, slot.scale_count));
    }
    for (const auto& slot : layout.g_slots()) {
      g_.emplace_back(d_, slot.kind, beta(slot.amplitude), beta.segment(slot.center, d_),
                      beta.segment(slot.scale, slot.scale_count));
    }
    hz_.resize(d_, d_);
    gz_beta_.resize(d_, layout.beta_size());
  }

  void transport(const Eigen::Ref<const Vector>& x, Vector& out) override {
    out.resize(d_);
    out.noalias() = jac_ * x;
    out += a1_;
    for (auto& k : phi_) {
      k.at(x, false);
      k.add_gradient(out);
    }
  }

  Matrix transport_jacobian(const Eigen::Ref<const Vector>& x) override {
    Matrix out = jac_;
    for (auto& k : phi_) {
      k.at(x, false);
      k.add_hessian(out);
    }
    return out;
  }

  double discriminator(const Eigen::Ref<const Vector>& z) override {
    double out = 0.5 * z.dot(b0_ * z) + b1_.dot(z) + b2_;
    for (auto& k : g_) {
      k.at(z, false);
      out += k.value();
    }
    return out;
  }

  void discriminator_gradient(const Eigen::Ref<const Vector>& z, Vector& out) override {
    out.resize(d_);
    out.noalias() = b0_ * z;
    out += b1_;
    for (auto& k : g_) {
      k.at(z, false);
      k.add_gradient(out);
    }
  }

  void source_terms(const Eigen::Ref<const Vector>& x, SourceTerms& out,
                    bool second_order) override {
    const Eigen::Index a = layout_.alpha_size();
    const Eigen::Index b = layout_.beta_size();

    // T and ∂T/∂α; φ kernels keep their state at x for the weighted Hessian.
    out.transported.resize(d_);
    out.transported.noalias() = jac_ * x;
    out.transported += a1_;
    out.dT_dalpha.setZero(d_, a);
    sym_jacobian(x, out.dT_dalpha.leftCols(layout_.sym_size()));
    out.dT_dalpha.block(0, layout_.a1_offset(), d_, d_).setIdentity();
    for (std::size_t k = 0; k < phi_.size(); ++k) {
      const auto& slot = layout_.phi_slots()[k];
      phi_[k].at(x, true);
      phi_[k].add_gradient(out.transported);
      phi_[k].gradient_theta_jacobian(out.dT_dalpha.middleCols(slot.amplitude, slot.size(d_)));
    }

    const Vector& t = out.transported;
    discriminator_at(t, second_order);
    out.g = g_value_;
    out.grad_z = g_grad_;
    discriminator_beta_gradient(t, out.dg_dbeta);

    if (!second_order) return;

    out.d2g_dbeta.setZero(b, b);
    discriminator_beta_hessian(out.d2g_dbeta);

    discriminator_spatial_hessian(t);
    discriminator_gradient_beta_jacobian(t);

    out.d2_alpha.resize(a, a);
    tmp_.noalias() = hz_ * out.dT_dalpha;
    out.d2_alpha.noalias() = out.dT_dalpha.transpose() * tmp_;
    if (!gauss_newton_) {
      for (std::size_t k = 0; k < phi_.size(); ++k) {
        const auto& slot = layout_.phi_slots()[k];
        const Eigen::Index n = slot.size(d_);
        block_.resize(n, n);
        phi_[k].weighted_theta_hessian(out.grad_z, block_);
        out.d2_alpha.block(slot.amplitude, slot.amplitude, n, n) += block_;
      }
    }
    out.d2_alpha_beta.resize(a, b);
    out.d2_alpha_beta.noalias() = out.dT_dalpha.transpose() * gz_beta_;
  }

  void target_terms(const Eigen::Ref<const Vector>& y, TargetTerms& out,
                    bool second_order) override {
    const Eigen::Index b = layout_.beta_size();
    discriminator_at(y, second_order);
    out.g = g_value_;
    discriminator_beta_gradient(y, out.dg_dbeta);
    if (!second_order) return;
    out.d2g_dbeta.setZero(b, b);
    discriminator_beta_hessian(out.d2g_dbeta);
    const double eg = std::exp(out.g);
    out.d2exp_dbeta.resize(b, b);
    out.d2exp_dbeta.noalias() = eg * (out.dg_dbeta * out.dg_dbeta.transpose());
    out.d2exp_dbeta += eg * out.d2g_dbeta;
  }

 private:
  static Matrix read_sym(const Eigen::Ref<const Vector>& flat, int dim) {
    Matrix m(dim, dim);
    Eigen::Index k = 0;
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) m(i, j) = m(j, i) = flat(k++);
    return m;
  }

  // Columns ∂(M x)/∂θ_ij = E_ij x for a symmetric M.
  void sym_jacobian(const Eigen::Ref<const Vector>& x, Eigen::Ref<Matrix> out) const {
    Eigen::Index k = 0;
    for (int i = 0; i < d_; ++i) {
      for (int j = i; j < d_; ++j, ++k) {
        out(i, k) += x(j);
        if (i != j) out(j, k) += x(i);
      }
    }
  }

  void discriminator_at(const Eigen::Ref<const Vector>& z, bool param_hessian) {
    g_value_ = 0.5 * z.dot(b0_ * z) + b1_.dot(z) + b2_;
    g_grad_.resize(d_);
    g_grad_.noalias() = b0_ * z;
    g_grad_ += b1_;
    for (auto& k : g_) {
      k.at(z, param_hessian);
      g_value_ += k.value();
      k.add_gradient(g_grad_);
    }
  }

  void discriminator_beta_gradient(const Eigen::Ref<const Vector>& z, Vector& out) {
    out.resize(layout_.beta_size());
    Eigen::Index k = 0;
    for (int i = 0; i < d_; ++i)
      for (int j = i; j < d_; ++j, ++k) out(k) = (i == j) ? 0.5 * z(i) * z(i) : z(i) * z(j);
    out.segment(layout_.b1_offset(), d_) = z;
    out(layout_.b2_offset()) = 1.0;
    for (std::size_t m = 0; m < g_.size(); ++m) {
      const auto& slot = layout_.g_slots()[m];
      g_[m].theta_gradient(out.segment(slot.amplitude, slot.size(d_)));
    }
  }

  void discriminator_beta_hessian(Matrix& out) {
    for (std::size_t m = 0; m < g_.size(); ++m) {
      const auto& slot = layout_.g_slots()[m];
      const Eigen::Index n = slot.size(d_);
      g_[m].theta_hessian(out.block(slot.amplitude, slot.amplitude, n, n));
    }
  }

  void discriminator_spatial_hessian(const Eigen::Ref<const Vector>&) {
    hz_ = b0_;
    for (auto& k : g_) k.add_hessian(hz_);
  }

  void discriminator_gradient_beta_jacobian(const Eigen::Ref<const Vector>& z) {
    gz_beta_.setZero();
    sym_jacobian(z, gz_beta_.leftCols(layout_.sym_size()));
    gz_beta_.block(0, layout_.b1_offset(), d_, d_).setIdentity();
    for (std::size_t m = 0; m < g_.size(); ++m) {
      const auto& slot = layout_.g_slots()[m];
      g_[m].gradient_theta_jacobian(gz_beta_.middleCols(slot.amplitude, slot.size(d_)));
    }
  }

  const ParamLayout& layout_;
  bool gauss_newton_;
  int d_;
  Matrix jac_;
  Vector a1_;
  Matrix b0_;
  Vector b1_;
  double b2_ = 0.0;
  std::vector<detail::BumpKernel> phi_;
  std::vector<detail::BumpKernel> g_;

  double g_value_ = 0.0;
  Vector g_grad_;
  Matrix hz_;
  Matrix gz_beta_;
  Matrix tmp_;
  Matrix block_;
};

}  // namespace

GaussianFeatureSpace::GaussianFeatureSpace(ParamLayout layout, bool gauss_newton)
    : layout_(std::move(layout)), gauss_newton_(gauss_newton) {}

GaussianFeatureSpace::GaussianFeatureSpace(int dim, int phi_bumps, int g_bumps,
                                           ScaleKind phi_kind, ScaleKind g_kind,
                                           bool gauss_newton)
    : GaussianFeatureSpace(
          ParamLayout(dim, std::vector<ScaleKind>(static_cast<std::size_t>(phi_bumps), phi_kind),
                      std::vector<ScaleKind>(static_cast<std::size_t>(g_bumps), g_kind)),
          gauss_newton) {
  require(phi_bumps >= 0 && g_bumps >= 0, "bump counts must be non-negative");
}

std::unique_ptr<FeatureEvaluator> GaussianFeatureSpace::bind(const Vector& alpha,
                                                             const Vector& beta) const {
  return std::make_unique<GaussianEvaluator>(layout_, gauss_newton_, alpha, beta);
}

bool GaussianFeatureSpace::admissible(const Vector& alpha, const Vector& beta) const {
  if (!FeatureSpace::admissible(alpha, beta)) return false;
  auto check = [&](const std::vector<BumpSlot>& slots, const Vector& flat) {
    for (const auto& slot : slots) {
      const auto s = flat.segment(slot.scale, slot.scale_count);
      if (slot.kind == ScaleKind::Isotropic && s(0) <= 0.0) return false;
      if (s.squaredNorm() == 0.0) return false;
    }
    return true;
  };
  return check(layout_.phi_slots(), alpha) && check(layout_.g_slots(), beta);
}

std::vector<bool> GaussianFeatureSpace::alpha_displacement_mask() const {
  return layout_.alpha_amplitude_mask();
}

void FeatureConfig::validate() const {
  require(phi_bumps >= 0, "features.phi_bumps must be >= 0");
  require(g_bumps >= 0, "features.g_bumps must be >= 0");
}

ScaleKind default_scale_kind(int dim) {
  return dim == 1 ? ScaleKind::Directional : ScaleKind::Isotropic;
}

GaussianFeatureSpace make_feature_space(const FeatureConfig& cfg, int dim) {
  cfg.validate();
  return GaussianFeatureSpace(dim, cfg.phi_bumps, cfg.g_bumps,
                              cfg.phi_kind.value_or(default_scale_kind(dim)),
                              cfg.g_kind.value_or(default_scale_kind(dim)), cfg.gauss_newton);
}

// ----------------------------------------------------------- linear mode

namespace {

class LinearEvaluator final : public FeatureEvaluator {
 public:
  LinearEvaluator(const LinearFeatureSpace& space, const Vector& alpha, const Vector& beta)
      : space_(space), alpha_(alpha), beta_(beta), d_(space.dim()) {
    require(alpha.size() == space.alpha_size(), "α has the wrong length for this space");
    require(beta.size() == space.beta_size(), "β has the wrong length for this space");
  }

  void transport(const Eigen::Ref<const Vector>& x, Vector& out) override {
    const Vector xv = x;
    out = xv;
    for (std::size_t k = 0; k < space_.potentials().size(); ++k)
      out += alpha_(k) * space_.potentials()[k].gradient(xv);
  }

  Matrix transport_jacobian(const Eigen::Ref<const Vector>& x) override {
    const Vector xv = x;
    Matrix out = Matrix::Identity(d_, d_);
    for (std::size_t k = 0; k < space_.potentials().size(); ++k)
      out += alpha_(k) * space_.potentials()[k].hessian(xv);
    return out;
  }

  double discriminator(const Eigen::Ref<const Vector>& z) override {
    const Vector zv = z;
    double out = 0.0;
    for (std::size_t k = 0; k < space_.features().size(); ++k)
      out += beta_(k) * space_.features()[k].value(zv);
    return out;
  }

  void discriminator_gradient(const Eigen::Ref<const Vector>& z, Vector& out) override {
    const Vector zv = z;
    out = Vector::Zero(d_);
    for (std::size_t k = 0; k < space_.features().size(); ++k)
      out += beta_(k) * space_.features()[k].gradient(zv);
  }

  void source_terms(const Eigen::Ref<const Vector>& x, SourceTerms& out,
                    bool second_order) override {
    const Vector xv = x;
    const auto& phis = space_.potentials();
    const auto& fs = space_.features();
    const Eigen::Index a = space_.alpha_size();
    const Eigen::Index b = space_.beta_size();

    out.dT_dalpha.resize(d_, a);
    for (Eigen::Index k = 0; k < a; ++k) out.dT_dalpha.col(k) = phis[k].gradient(xv);
    out.transported = xv + out.dT_dalpha * alpha_;
    const Vector& t = out.transported;

    Matrix grad_f(d_, b);
    out.dg_dbeta.resize(b);
    for (Eigen::Index k = 0; k < b; ++k) {
      out.dg_dbeta(k) = fs[k].value(t);
      grad_f.col(k) = fs[k].gradient(t);
    }
    out.g = out.dg_dbeta.dot(beta_);
    out.grad_z = grad_f * beta_;
    if (!second_order) return;

    Matrix hz = Matrix::Zero(d_, d_);
    for (Eigen::Index k = 0; k < b; ++k) hz += beta_(k) * fs[k].hessian(t);
    out.d2_alpha = out.dT_dalpha.transpose() * hz * out.dT_dalpha;
    out.d2_alpha_beta = out.dT_dalpha.transpose() * grad_f;
    out.d2g_dbeta.setZero(b, b);
  }

  void target_terms(const Eigen::Ref<const Vector>& y, TargetTerms& out,
                    bool second_order) override {
    const Vector yv = y;
    const Eigen::Index b = space_.beta_size();
    out.dg_dbeta.resize(b);
    for (Eigen::Index k = 0; k < b; ++k) out.dg_dbeta(k) = space_.features()[k].value(yv);
    out.g = out.dg_dbeta.dot(beta_);
    if (!second_order) return;
    out.d2g_dbeta.setZero(b, b);
    out.d2exp_dbeta = std::exp(out.g) * (out.dg_dbeta * out.dg_dbeta.transpose());
  }

 private:
  const LinearFeatureSpace& space_;
  Vector alpha_;
  Vector beta_;
  int d_;
};

}  // namespace

LinearFeatureSpace::LinearFeatureSpace(int dim, std::vector<SmoothFunction> features,
                                       std::vector<SmoothFunction> potentials)
    : dim_(dim), features_(std::move(features)), potentials_(std::move(potentials)) {
  require(dim >= 1, "dimension must be positive");
  require(!features_.empty() && features_.size() == potentials_.size(),
          "linear mode needs K >= 1 features and as many potentials");
}

std::unique_ptr<FeatureEvaluator> LinearFeatureSpace::bind(const Vector& alpha,
                                                           const Vector& beta) const {
  return std::make_unique<LinearEvaluator>(*this, alpha, beta);
}

CompatibilityReport compatibility_matrix(const LinearFeatureSpace& space, const SampleSet& x) {
  require(x.cols() == space.dim(), "compatibility_matrix: dimension mismatch");
  require(x.rows() >= 1, "compatibility_matrix: empty sample");
  const auto k = static_cast<Eigen::Index>(space.features().size());
  CompatibilityReport out;
  out.matrix = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Vector xi = x.row(i).transpose();
    for (Eigen::Index r = 0; r < k; ++r) {
      const Vector gp = space.potentials()[r].gradient(xi);
      for (Eigen::Index c = 0; c < k; ++c) out.matrix(r, c) += gp.dot(space.features()[c].gradient(xi));
    }
  }
  out.matrix /= static_cast<double>(x.rows());
  const Eigen::JacobiSVD<Matrix> svd(out.matrix);
  const auto& sv = svd.singularValues();
  out.reciprocal_condition = sv(0) > 0.0 ? sv(sv.size() - 1) / sv(0) : 0.0;
  out.singular = out.reciprocal_condition < 1e-12;
  return out;
}

LinearModeSpace make_linear_feature_space(std::vector<SmoothFunction> features,
                                          std::vector<SmoothFunction> potentials,
                                          const SampleSet& x) {
  auto space = std::make_shared<const LinearFeatureSpace>(static_cast<int>(x.cols()),
                                                          std::move(features),
                                                          std::move(potentials));
  auto report = compatibility_matrix(*space, x);
  return {std::move(space), std::move(report)};
}

}  // namespace adot
