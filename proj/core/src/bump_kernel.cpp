#include "bump_kernel.hpp"

#include <cmath>

namespace adot::detail {

QuadraticFormDerivatives quadratic_form_derivatives(ScaleKind kind, int dim,
                                                    const Eigen::Ref<const Vector>& s) {
  QuadraticFormDerivatives out;
  const int ns = ScaleForm::param_count(kind, dim);
  out.first.assign(static_cast<std::size_t>(ns), Matrix::Zero(dim, dim));
  auto unit_outer = [dim](int a, int b) {
    Matrix m = Matrix::Zero(dim, dim);
    m(a, b) += 1.0;
    m(b, a) += 1.0;
    return m;
  };

  switch (kind) {
    case ScaleKind::Isotropic:
      out.q = s(0) * Matrix::Identity(dim, dim);
      out.first[0] = Matrix::Identity(dim, dim);
      break;
    case ScaleKind::Directional:
      out.q = s * s.transpose();
      for (int k = 0; k < dim; ++k) {
        out.first[k].row(k) += s.transpose();
        out.first[k].col(k) += s;
        for (int l = k; l < dim; ++l) out.second.push_back({k, l, unit_outer(k, l)});
      }
      break;
    case ScaleKind::Diagonal:
      out.q = s.array().square().matrix().asDiagonal();
      for (int k = 0; k < dim; ++k) {
        out.first[k](k, k) = 2.0 * s(k);
        Matrix m = Matrix::Zero(dim, dim);
        m(k, k) = 2.0;
        out.second.push_back({k, k, std::move(m)});
      }
      break;
    case ScaleKind::FullMatrix: {
      const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
          v(s.data(), dim, dim);
      out.q = v.transpose() * v;
      for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) {
          Matrix& m = out.first[r * dim + c];
          m.row(c) += v.row(r);
          m.col(c) += v.row(r).transpose();
        }
      }
      // ∂²Q/∂V_rc ∂V_r'c' = δ_rr' (e_c e_c'ᵀ + e_c' e_cᵀ)
      for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) {
          for (int c2 = c; c2 < dim; ++c2) {
            out.second.push_back({r * dim + c, r * dim + c2, unit_outer(c, c2)});
          }
        }
      }
      break;
    }
  }
  return out;
}

BumpKernel::BumpKernel(int dim, ScaleKind kind, double amplitude,
                       const Eigen::Ref<const Vector>& center, const Eigen::Ref<const Vector>& scale)
    : dim_(dim),
      ns_(ScaleForm::param_count(kind, dim)),
      amp_(amplitude),
      center_(center),
      form_(quadratic_form_derivatives(kind, dim, scale)),
      u_(dim),
      qp_(dim + ns_),
      qpp_(dim + ns_, dim + ns_),
      hp_(dim + ns_),
      hpp_(dim + ns_, dim + ns_) {}

void BumpKernel::at(const Eigen::Ref<const Vector>& x, bool param_hessian) {
  u_ = x - center_;
  auto qu = qp_.head(dim_);
  qu.noalias() = 2.0 * form_.q * u_;
  q_ = 0.5 * u_.dot(qu);
  e_ = std::exp(-0.5 * q_);
  for (int k = 0; k < ns_; ++k) qp_(dim_ + k) = u_.dot(form_.first[k] * u_);

  if (!param_hessian) return;
  qpp_.setZero();
  qpp_.topLeftCorner(dim_, dim_) = 2.0 * form_.q;
  for (int k = 0; k < ns_; ++k) {
    qpp_.col(dim_ + k).head(dim_).noalias() = 2.0 * form_.first[k] * u_;
    qpp_.row(dim_ + k).head(dim_) = qpp_.col(dim_ + k).head(dim_).transpose();
  }
  for (const auto& s : form_.second) {
    const double value = u_.dot(s.value * u_);
    qpp_(dim_ + s.k, dim_ + s.l) = value;
    qpp_(dim_ + s.l, dim_ + s.k) = value;
  }
}

void BumpKernel::add_gradient(Eigen::Ref<Vector> out) const {
  out += (-0.5 * amp_ * e_) * qp_.head(dim_);
}

void BumpKernel::add_hessian(Eigen::Ref<Matrix> out) const {
  const auto qu = qp_.head(dim_);
  out += amp_ * (0.25 * e_ * qu * qu.transpose() - e_ * form_.q);
}

void BumpKernel::theta_gradient(Eigen::Ref<Vector> out) const {
  const double e1 = -0.5 * e_;
  out(0) = e_;
  for (int p = 0; p < dim_ + ns_; ++p) out(1 + p) = sign(p) * amp_ * e1 * qp_(p);
}

void BumpKernel::theta_hessian(Eigen::Ref<Matrix> out) const {
  const double e1 = -0.5 * e_;
  const double e2 = 0.25 * e_;
  const int np = dim_ + ns_;
  out(0, 0) = 0.0;
  for (int p = 0; p < np; ++p) {
    out(0, 1 + p) = out(1 + p, 0) = sign(p) * e1 * qp_(p);
    for (int r = 0; r < np; ++r) {
      out(1 + p, 1 + r) = sign(p) * sign(r) * amp_ * (e2 * qp_(p) * qp_(r) + e1 * qpp_(p, r));
    }
  }
}

void BumpKernel::gradient_theta_jacobian(Eigen::Ref<Matrix> out) const {
  const double e1 = -0.5 * e_;
  const double e2 = 0.25 * e_;
  const auto qu = qp_.head(dim_);
  out.col(0) = e1 * qu;
  for (int p = 0; p < dim_ + ns_; ++p) {
    out.col(1 + p) = sign(p) * amp_ * (e2 * qp_(p) * qu + e1 * qpp_.col(p).head(dim_));
  }
}

void BumpKernel::weighted_theta_hessian(const Eigen::Ref<const Vector>& w, Eigen::Ref<Matrix> out) {
  const double e1 = -0.5 * e_;
  const double e2 = 0.25 * e_;
  const double e3 = -0.125 * e_;
  const int np = dim_ + ns_;

  // h(p) = w · ∇_u q = 2 wᵀ Q u
  const double h = w.dot(qp_.head(dim_));
  hp_.head(dim_).noalias() = 2.0 * form_.q * w;
  hpp_.setZero();
  for (int k = 0; k < ns_; ++k) {
    hp_(dim_ + k) = 2.0 * w.dot(form_.first[k] * u_);
    hpp_.col(dim_ + k).head(dim_).noalias() = 2.0 * form_.first[k] * w;
    hpp_.row(dim_ + k).head(dim_) = hpp_.col(dim_ + k).head(dim_).transpose();
  }
  for (const auto& s : form_.second) {
    const double value = 2.0 * w.dot(s.value * u_);
    hpp_(dim_ + s.k, dim_ + s.l) = value;
    hpp_(dim_ + s.l, dim_ + s.k) = value;
  }

  out(0, 0) = 0.0;
  for (int p = 0; p < np; ++p) {
    out(0, 1 + p) = out(1 + p, 0) = sign(p) * (e2 * h * qp_(p) + e1 * hp_(p));
    for (int r = 0; r < np; ++r) {
      const double v = e3 * h * qp_(p) * qp_(r) + e2 * h * qpp_(p, r) +
                       e2 * (qp_(p) * hp_(r) + hp_(p) * qp_(r)) + e1 * hpp_(p, r);
      out(1 + p, 1 + r) = sign(p) * sign(r) * amp_ * v;
    }
  }
}

}  // namespace adot::detail
