#include "adot/synthetic_data.hpp"

#include "adot/random.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace adot {

namespace {

void validate_gaussian(const GaussianSpec& g) {
  require(g.mean.size() >= 1, "gaussian mean must be nonempty");
  require(g.covariance.rows() == g.mean.size() && g.covariance.cols() == g.mean.size(),
          "gaussian covariance must be d×d");
  require(g.covariance.isApprox(g.covariance.transpose(), 1e-12), "covariance must be symmetric");
  require(g.covariance.llt().info() == Eigen::Success, "covariance must be positive definite");
}

Matrix cholesky(const Matrix& cov) {
  const Eigen::LLT<Matrix> llt(cov);
  require(llt.info() == Eigen::Success, "covariance must be positive definite");
  return llt.matrixL();
}

void draw_gaussian(const Vector& mean, const Matrix& chol, Philox4x32& rng,
                   Eigen::Ref<Eigen::RowVectorXd> row) {
  Vector z(mean.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = rng.normal();
  row = (mean + chol * z).transpose();
}

}  // namespace

int DatasetSpec::dim() const {
  struct Visitor {
    int operator()(const GaussianSpec& g) const { return static_cast<int>(g.mean.size()); }
    int operator()(const MixtureSpec& m) const {
      return m.components.empty() ? 0 : static_cast<int>(m.components.front().mean.size());
    }
    int operator()(const AnnulusSpec&) const { return 2; }
    int operator()(const PowerPairSpec&) const { return 1; }
  };
  return std::visit(Visitor{}, kind);
}

void DatasetSpec::validate() const {
  require(n >= 1, "dataset n must be >= 1");
  struct Visitor {
    void operator()(const GaussianSpec& g) const { validate_gaussian(g); }
    void operator()(const MixtureSpec& m) const {
      require(!m.components.empty(), "mixture needs at least one component");
      require(m.weights.size() == m.components.size(), "mixture needs one weight per component");
      for (double w : m.weights) require(w >= 0.0, "mixture weights must be non-negative");
      const double total = std::accumulate(m.weights.begin(), m.weights.end(), 0.0);
      require(std::abs(total - 1.0) <= 1e-12, "mixture weights must sum to 1");
      for (const auto& c : m.components) {
        validate_gaussian(c);
        require(c.mean.size() == m.components.front().mean.size(),
                "mixture components must share a dimension");
      }
    }
    void operator()(const AnnulusSpec& a) const {
      require(a.center.size() == 2, "annulus is two-dimensional");
      require(a.r_inner >= 0.0 && a.r_inner < a.r_outer, "annulus needs 0 <= r_inner < r_outer");
    }
    void operator()(const PowerPairSpec& p) const {
      require(p.epsilon > 0.0, "power pair epsilon must be > 0");
    }
  };
  std::visit(Visitor{}, kind);
}

SampleSet generate(const DatasetSpec& spec) {
  spec.validate();
  Philox4x32 rng(spec.seed, 0);
  SampleSet out(spec.n, spec.dim());

  if (const auto* g = std::get_if<GaussianSpec>(&spec.kind)) {
    const Matrix chol = cholesky(g->covariance);
    for (Eigen::Index i = 0; i < spec.n; ++i) draw_gaussian(g->mean, chol, rng, out.row(i));
  } else if (const auto* m = std::get_if<MixtureSpec>(&spec.kind)) {
    std::vector<Matrix> chols;
    for (const auto& c : m->components) chols.push_back(cholesky(c.covariance));
    for (Eigen::Index i = 0; i < spec.n; ++i) {
      const double u = rng.uniform();
      std::size_t k = 0;
      double acc = m->weights[0];
      while (u >= acc && k + 1 < m->weights.size()) acc += m->weights[++k];
      // Zero-weight components are never selected, even at the boundary.
      while (m->weights[k] == 0.0 && k > 0) --k;
      draw_gaussian(m->components[k].mean, chols[k], rng, out.row(i));
    }
  } else if (const auto* a = std::get_if<AnnulusSpec>(&spec.kind)) {
    const double r0 = a->r_inner * a->r_inner;
    const double r1 = a->r_outer * a->r_outer;
    for (Eigen::Index i = 0; i < spec.n; ++i) {
      const double angle = 2.0 * std::numbers::pi * rng.uniform();
      const double r = std::sqrt(r0 + rng.uniform() * (r1 - r0));
      out(i, 0) = a->center(0) + r * std::cos(angle);
      out(i, 1) = a->center(1) + r * std::sin(angle);
    }
  } else {
    for (Eigen::Index i = 0; i < spec.n; ++i) out(i, 0) = rng.normal();
  }
  return out;
}

double power_map(double x, double epsilon) {
  if (x == 0.0) return 0.0;
  return (1.0 + epsilon) * x * std::pow(std::abs(x), epsilon - 1.0);
}

Vector reference_eval(const ReferenceMap& ref, const Eigen::Ref<const Vector>& x) {
  if (const auto* a = std::get_if<AffineMap>(&ref)) {
    require(a->A.cols() == x.size() && a->b.size() == a->A.rows(), "affine map dimension mismatch");
    return a->A * x + a->b;
  }
  if (const auto* s = std::get_if<ShiftMap>(&ref)) {
    require(s->a.size() == x.size(), "shift dimension mismatch");
    return x + s->a;
  }
  const double eps = std::get<PowerMap>(ref).epsilon;
  Vector out(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) out(k) = power_map(x(k), eps);
  return out;
}

SampleSet reference_apply(const ReferenceMap& ref, const SampleSet& points) {
  SampleSet out(points.rows(), points.cols());
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    out.row(i) = reference_eval(ref, points.row(i).transpose()).transpose();
  return out;
}

PowerPair power_pair(Eigen::Index n, double epsilon, std::uint64_t seed) {
  require(epsilon > 0.0, "power_pair: epsilon must be > 0");
  PowerPair out;
  out.x = generate(DatasetSpec{PowerPairSpec{epsilon}, n, seed});
  out.ref = PowerMap{epsilon};
  out.y = reference_apply(out.ref, out.x);
  return out;
}

}  // namespace adot
