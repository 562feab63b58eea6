#pragma once

#include "adot/feature_space.hpp"

#include <vector>

namespace adot::detail {

/// Q(s), ∂Q/∂s_k and the nonzero ∂²Q/∂s_k∂s_l of a scale form.
struct QuadraticFormDerivatives {
  struct Second {
    int k;
    int l;
    Matrix value;
  };
  Matrix q;
  std::vector<Matrix> first;
  std::vector<Second> second;  // k <= l only
};

QuadraticFormDerivatives quadratic_form_derivatives(ScaleKind kind, int dim,
                                                    const Eigen::Ref<const Vector>& s);

/// Derivatives of a·exp(-q(u, s)/2), u = x - c, with respect to x and to the
/// bump parameters θ = (a, c, s).
///
/// Everything is expressed through q and its partials in p = (u, s); the
/// center enters with a sign flip since ∂/∂c = -∂/∂u.
class BumpKernel {
 public:
  BumpKernel(int dim, ScaleKind kind, double amplitude, const Eigen::Ref<const Vector>& center,
             const Eigen::Ref<const Vector>& scale);

  int dim() const { return dim_; }
  int theta_size() const { return 1 + dim_ + ns_; }

  /// Evaluates at x. `param_hessian` additionally fills ∂²q/∂p².
  void at(const Eigen::Ref<const Vector>& x, bool param_hessian);

  double value() const { return amp_ * e_; }
  double envelope() const { return e_; }
  /// ∇_x of the bump (a E' ∇_u q).
  void add_gradient(Eigen::Ref<Vector> out) const;
  /// ∇²_x of the bump.
  void add_hessian(Eigen::Ref<Matrix> out) const;
  /// ∂/∂θ of the bump value.
  void theta_gradient(Eigen::Ref<Vector> out) const;
  /// ∂²/∂θ² of the bump value. Requires param_hessian.
  void theta_hessian(Eigen::Ref<Matrix> out) const;
  /// ∂(∇_x bump)/∂θ, a d × |θ| block. Requires param_hessian.
  void gradient_theta_jacobian(Eigen::Ref<Matrix> out) const;
  /// ∂²(w · ∇_x bump)/∂θ² for fixed w. Requires param_hessian.
  void weighted_theta_hessian(const Eigen::Ref<const Vector>& w, Eigen::Ref<Matrix> out);

 private:
  double sign(int p) const { return p < dim_ ? -1.0 : 1.0; }

  int dim_;
  int ns_;
  double amp_;
  Vector center_;
  QuadraticFormDerivatives form_;

  // per-point state
  Vector u_;
  double q_ = 0.0;
  double e_ = 0.0;
  Vector qp_;   // ∂q/∂p, p = (u, s)
  Matrix qpp_;  // ∂²q/∂p²
  Vector hp_;
  Matrix hpp_;
};

}  // namespace adot::detail
