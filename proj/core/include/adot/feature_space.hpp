#pragma once

#include "adot/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace adot {

enum class ScaleKind { FullMatrix, Isotropic, Directional, Diagonal };

std::string_view to_string(ScaleKind kind);
/// Accepts "full", "isotropic", "directional", "diagonal".
ScaleKind parse_scale_kind(std::string_view name);

/// Shape of a Gaussian bump exp(-q(x - c) / 2).
///
/// The raw parameters `s` are stored flat (row-major for the full matrix).
/// The induced quadratic form is q(u) = uᵀ Q(s) u with
///   FullMatrix  Q = VᵀV            (q = ‖V u‖²)
///   Isotropic   Q = v I            (q = v ‖u‖²)
///   Directional Q = v vᵀ           (q = (v·u)²)
///   Diagonal    Q = diag(D)²       (q = ‖D u‖²)
class ScaleForm {
 public:
  ScaleForm() = default;

  static ScaleForm full_matrix(const Matrix& v);
  static ScaleForm isotropic(double v, int dim);
  static ScaleForm directional(const Vector& v);
  static ScaleForm diagonal(const Vector& diag);
  static ScaleForm from_params(ScaleKind kind, int dim, Vector params);

  static int param_count(ScaleKind kind, int dim);

  ScaleKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const Vector& params() const { return params_; }
  Vector& params() { return params_; }

  Matrix quadratic_form() const;
  /// Frobenius norm for FullMatrix, |v| for Isotropic, Euclidean norm otherwise.
  /// In every case this equals the norm of the raw parameter vector.
  double magnitude() const { return params_.norm(); }
  bool nondegenerate() const;

 private:
  ScaleForm(ScaleKind kind, int dim, Vector params);

  ScaleKind kind_ = ScaleKind::Isotropic;
  int dim_ = 0;
  Vector params_;
};

struct GaussianBump {
  double amplitude = 0.0;
  Vector center;
  ScaleForm scale;

  double value(const Eigen::Ref<const Vector>& x) const;
  Vector gradient(const Eigen::Ref<const Vector>& x) const;
};

/// φ(x) = ½ xᵀ(I + A0)x + a1·x + Σ bumps.
struct PotentialParams {
  Matrix A0;
  Vector a1;
  std::vector<GaussianBump> bumps;

  static PotentialParams identity(int dim);
  int dim() const { return static_cast<int>(a1.size()); }
  /// Copies the upper triangle of A0 onto the lower one.
  void symmetrize();
};

/// g(z) = ½ zᵀB0 z + b1·z + b2 + Σ bumps.
struct DiscriminatorParams {
  Matrix B0;
  Vector b1;
  double b2 = 0.0;
  std::vector<GaussianBump> bumps;

  static DiscriminatorParams zero(int dim);
  int dim() const { return static_cast<int>(b1.size()); }
  void symmetrize();
};

/// ∇φ(x). Exact analytic gradient of the potential.
Vector transport_map(const PotentialParams& alpha, const Eigen::Ref<const Vector>& x);
/// ∇²φ(x), the spatial Jacobian of the transport map.
Matrix transport_jacobian(const PotentialParams& alpha, const Eigen::Ref<const Vector>& x);
double eval_discriminator(const DiscriminatorParams& beta, const Eigen::Ref<const Vector>& z);
Vector discriminator_gradient(const DiscriminatorParams& beta, const Eigen::Ref<const Vector>& z);

/// Position of one bump's degrees of freedom inside a flat parameter block.
struct BumpSlot {
  ScaleKind kind = ScaleKind::Isotropic;
  Eigen::Index amplitude = 0;
  Eigen::Index center = 0;
  Eigen::Index scale = 0;
  int scale_count = 0;
  Eigen::Index size(int dim) const { return 1 + dim + scale_count; }
};

/// Index map between structured parameters and the flat vector γ = (α, β).
///
/// α = [ A0 upper triangle | a1 | per φ-bump (amplitude, center, scale) ]
/// β = [ B0 upper triangle | b1 | b2 | per g-bump (amplitude, center, scale) ]
///
/// Offsets are local to the α or β block. Symmetric matrices contribute their
/// d(d+1)/2 upper-triangular entries, row by row.
class ParamLayout {
 public:
  ParamLayout() = default;
  ParamLayout(int dim, std::vector<ScaleKind> phi_bumps, std::vector<ScaleKind> g_bumps);

  int dim() const { return dim_; }
  Eigen::Index alpha_size() const { return alpha_size_; }
  Eigen::Index beta_size() const { return beta_size_; }
  Eigen::Index sym_size() const { return static_cast<Eigen::Index>(dim_) * (dim_ + 1) / 2; }

  Eigen::Index a0_offset() const { return 0; }
  Eigen::Index a1_offset() const { return sym_size(); }
  Eigen::Index b0_offset() const { return 0; }
  Eigen::Index b1_offset() const { return sym_size(); }
  Eigen::Index b2_offset() const { return sym_size() + dim_; }

  const std::vector<BumpSlot>& phi_slots() const { return phi_; }
  const std::vector<BumpSlot>& g_slots() const { return g_; }

  /// (row, col) of the k-th symmetric coordinate, row <= col.
  std::pair<int, int> sym_index(Eigen::Index k) const;

  Vector flatten(const PotentialParams& alpha) const;
  Vector flatten(const DiscriminatorParams& beta) const;
  PotentialParams unflatten_potential(const Eigen::Ref<const Vector>& alpha) const;
  DiscriminatorParams unflatten_discriminator(const Eigen::Ref<const Vector>& beta) const;

  /// True for β coordinates in which g is linear: B0, b1, b2 and bump amplitudes.
  std::vector<bool> beta_linear_mask() const;
  std::vector<bool> alpha_amplitude_mask() const;

 private:
  int dim_ = 0;
  std::vector<BumpSlot> phi_;
  std::vector<BumpSlot> g_;
  Eigen::Index alpha_size_ = 0;
  Eigen::Index beta_size_ = 0;
};

/// First- and second-order quantities for one source point x, T = ∇φ(x).
struct SourceTerms {
  Vector transported;    // T
  double g = 0.0;        // g(T)
  Vector grad_z;         // ∇_z g(T)
  Matrix dT_dalpha;      // d × a
  Vector dg_dbeta;       // ∂g(T)/∂β
  Matrix d2_alpha;       // ∂²(g∘T)/∂α²
  Matrix d2_alpha_beta;  // ∂²(g∘T)/∂α∂β
  Matrix d2g_dbeta;      // ∂²g(T)/∂β²
};

/// Quantities for one target point y.
struct TargetTerms {
  double g = 0.0;
  Vector dg_dbeta;
  Matrix d2g_dbeta;
  Matrix d2exp_dbeta;  // e^g (∂g ∂gᵀ + ∂²g), unclamped
};

struct DerivativeBundle {
  SourceTerms source;
  TargetTerms target;
};

/// A (φ, g) family bound to concrete parameter values. Holds scratch space,
/// so one evaluator must not be shared between threads.
class FeatureEvaluator {
 public:
  virtual ~FeatureEvaluator() = default;

  virtual void transport(const Eigen::Ref<const Vector>& x, Vector& out) = 0;
  virtual Matrix transport_jacobian(const Eigen::Ref<const Vector>& x) = 0;
  virtual double discriminator(const Eigen::Ref<const Vector>& z) = 0;
  virtual void discriminator_gradient(const Eigen::Ref<const Vector>& z, Vector& out) = 0;
  /// With second_order == false only T, g, grad_z, dT_dalpha and dg_dbeta are filled.
  virtual void source_terms(const Eigen::Ref<const Vector>& x, SourceTerms& out,
                            bool second_order) = 0;
  virtual void target_terms(const Eigen::Ref<const Vector>& y, TargetTerms& out,
                            bool second_order) = 0;
};

/// Parametric families for the potential φ_α and the discriminator g_β.
class FeatureSpace {
 public:
  virtual ~FeatureSpace() = default;

  virtual int dim() const = 0;
  virtual Eigen::Index alpha_size() const = 0;
  virtual Eigen::Index beta_size() const = 0;
  virtual std::unique_ptr<FeatureEvaluator> bind(const Vector& alpha,
                                                 const Vector& beta) const = 0;

  /// Bump structure when the space carries adaptive Gaussians, null otherwise.
  virtual const ParamLayout* gaussian_layout() const { return nullptr; }
  /// Coordinates along which g is linear (used by concavity checks).
  virtual std::vector<bool> beta_linear_mask() const {
    return std::vector<bool>(static_cast<std::size_t>(beta_size()), true);
  }
  /// Parameters that describe a valid function (e.g. isotropic scale > 0).
  virtual bool admissible(const Vector& alpha, const Vector& beta) const;
  /// Coordinates of α that must vanish for the map to be the identity.
  virtual std::vector<bool> alpha_displacement_mask() const {
    return std::vector<bool>(static_cast<std::size_t>(alpha_size()), true);
  }
};

DerivativeBundle derivative_bundle(const FeatureSpace& space, const Vector& alpha,
                                   const Vector& beta, const Eigen::Ref<const Vector>& x);

/// Quadratic polynomials plus adaptive Gaussian bumps for both players.
class GaussianFeatureSpace final : public FeatureSpace {
 public:
  explicit GaussianFeatureSpace(ParamLayout layout, bool gauss_newton = false);
  GaussianFeatureSpace(int dim, int phi_bumps, int g_bumps, ScaleKind phi_kind,
                       ScaleKind g_kind, bool gauss_newton = false);

  int dim() const override { return layout_.dim(); }
  Eigen::Index alpha_size() const override { return layout_.alpha_size(); }
  Eigen::Index beta_size() const override { return layout_.beta_size(); }
  std::unique_ptr<FeatureEvaluator> bind(const Vector& alpha,
                                         const Vector& beta) const override;
  const ParamLayout* gaussian_layout() const override { return &layout_; }
  std::vector<bool> beta_linear_mask() const override { return layout_.beta_linear_mask(); }
  bool admissible(const Vector& alpha, const Vector& beta) const override;
  std::vector<bool> alpha_displacement_mask() const override;

  const ParamLayout& layout() const { return layout_; }
  /// When set, the ∂²T/∂α² · ∇g term is dropped from ∂²(g∘T)/∂α².
  bool gauss_newton() const { return gauss_newton_; }

 private:
  ParamLayout layout_;
  bool gauss_newton_ = false;
};

/// Bump counts and scale forms of a Gaussian feature space.
struct FeatureConfig {
  int phi_bumps = 1;
  int g_bumps = 2;
  /// Unset means default_scale_kind(dim).
  std::optional<ScaleKind> phi_kind;
  std::optional<ScaleKind> g_kind;
  bool gauss_newton = false;

  void validate() const;
};

/// Directional in one dimension, Isotropic otherwise.
ScaleKind default_scale_kind(int dim);

GaussianFeatureSpace make_feature_space(const FeatureConfig& cfg, int dim);

/// A smooth scalar function with analytic gradient and Hessian.
struct SmoothFunction {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;
};

/// g(z) = Σ β_k f_k(z), φ(x) = |x|²/2 + Σ α_k φ_k(x).
class LinearFeatureSpace final : public FeatureSpace {
 public:
  LinearFeatureSpace(int dim, std::vector<SmoothFunction> features,
                     std::vector<SmoothFunction> potentials);

  int dim() const override { return dim_; }
  Eigen::Index alpha_size() const override { return static_cast<Eigen::Index>(potentials_.size()); }
  Eigen::Index beta_size() const override { return static_cast<Eigen::Index>(features_.size()); }
  std::unique_ptr<FeatureEvaluator> bind(const Vector& alpha,
                                         const Vector& beta) const override;

  const std::vector<SmoothFunction>& features() const { return features_; }
  const std::vector<SmoothFunction>& potentials() const { return potentials_; }

 private:
  int dim_;
  std::vector<SmoothFunction> features_;
  std::vector<SmoothFunction> potentials_;
};

struct CompatibilityReport {
  Matrix matrix;  // C_kk' = (1/n) Σ_i ∇φ_k(x_i)·∇f_k'(x_i)
  double reciprocal_condition = 0.0;
  bool singular = false;
};

CompatibilityReport compatibility_matrix(const LinearFeatureSpace& space, const SampleSet& x);

struct LinearModeSpace {
  std::shared_ptr<const LinearFeatureSpace> space;
  CompatibilityReport compatibility;
};

/// Builds the linear-mode families and reports whether the features are
/// compatible with the potentials on the sample `x` (singularity is a
/// diagnostic, not an error).
LinearModeSpace make_linear_feature_space(std::vector<SmoothFunction> features,
                                          std::vector<SmoothFunction> potentials,
                                          const SampleSet& x);

}  // namespace adot
