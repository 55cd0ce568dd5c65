#ifndef GOSPHERE_SPHERE_HPP
#define GOSPHERE_SPHERE_HPP

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "gosphere/expr.hpp"

namespace gosphere::sphere {

/// Two-chart stereographic atlas for S^n (unit sphere in R^{n+1}).
/// Chart 0 projects from the north pole (covers everything but N, with the
/// south pole at the chart origin); chart 1 projects from the south pole.
/// Both transitions are x -> x/|x|^2. Integrators switch at |x| = 2; chart
/// formulas stay well-conditioned to |x| ~ 3.
struct Atlas {
  static constexpr double kSwitchRadius = 2.0;
  static constexpr double kMaxRadius = 3.0;

  static Eigen::VectorXd to_sphere(int chart, const Eigen::VectorXd& x);
  static Eigen::VectorXd to_chart(int chart, const Eigen::VectorXd& p);
  /// d(to_sphere)/dx, an (n+1) x n matrix.
  static Eigen::MatrixXd to_sphere_jacobian(int chart, const Eigen::VectorXd& x);
  /// d(to_chart)/dp restricted to the tangent space, n x (n+1).
  static Eigen::MatrixXd to_chart_jacobian(int chart, const Eigen::VectorXd& p);
  /// Chart in which |x| <= 1.
  static int preferred_chart(const Eigen::VectorXd& p);
  static Eigen::VectorXd transition(const Eigen::VectorXd& x);
  static Eigen::MatrixXd transition_jacobian(const Eigen::VectorXd& x);
};

/// A Finsler metric on S^n presented in the stereographic atlas.
class ChartMetric {
 public:
  virtual ~ChartMetric() = default;
  virtual int sphere_dim() const = 0;
  /// F(x, y) in the given chart. y need not be F-normalized.
  virtual double eval(int chart, const Eigen::VectorXd& x, const Eigen::VectorXd& y) const = 0;
  /// F at an ambient point/tangent pair (w tangent to the sphere at p).
  double eval_ambient(const Eigen::VectorXd& p, const Eigen::VectorXd& w) const;
  virtual bool reversible_hint() const { return false; }
};

/// Metric defined by an ambient formula F(p, w); chart evaluation pulls
/// back through the atlas, so chart consistency is automatic.
class AmbientMetric : public ChartMetric {
 public:
  double eval(int chart, const Eigen::VectorXd& x, const Eigen::VectorXd& y) const final;
  virtual double ambient(const Eigen::VectorXd& p, const Eigen::VectorXd& w) const = 0;
};

/// The round unit-sphere metric, F = |w|; flag curvature 1.
class RoundMetric final : public AmbientMetric {
 public:
  explicit RoundMetric(int sphere_dim) : n_(sphere_dim) {}
  int sphere_dim() const override { return n_; }
  double ambient(const Eigen::VectorXd&, const Eigen::VectorXd& w) const override {
    return w.norm();
  }
  bool reversible_hint() const override { return true; }

 private:
  int n_;
};

/// Reversible non-Riemannian perturbation of the round metric:
/// F = (|w|^4 + delta * sum w_i^4)^(1/4).
class QuarticMetric final : public AmbientMetric {
 public:
  QuarticMetric(int sphere_dim, double delta) : n_(sphere_dim), delta_(delta) {}
  int sphere_dim() const override { return n_; }
  double ambient(const Eigen::VectorXd&, const Eigen::VectorXd& w) const override {
    const double q = w.squaredNorm();
    return std::pow(q * q + delta_ * w.array().square().square().sum(), 0.25);
  }
  bool reversible_hint() const override { return true; }

 private:
  int n_;
  double delta_;
};

/// Vector field on the sphere given by its ambient values.
class VectorField {
 public:
  virtual ~VectorField() = default;
  virtual int sphere_dim() const = 0;
  virtual Eigen::VectorXd ambient(const Eigen::VectorXd& p) const = 0;
  /// Push-forward into a chart: J_chart(p(x)) . V(p(x)).
  Eigen::VectorXd chart_value(int chart, const Eigen::VectorXd& x) const;
};

/// V(p) = A p with A antisymmetric: a Killing field of the round metric
/// with the exact flow exp(tA).
class LinearKillingField final : public VectorField {
 public:
  explicit LinearKillingField(Eigen::MatrixXd a);
  int sphere_dim() const override { return static_cast<int>(a_.rows()) - 1; }
  Eigen::VectorXd ambient(const Eigen::VectorXd& p) const override { return a_ * p; }
  const Eigen::MatrixXd& matrix() const { return a_; }
  Eigen::MatrixXd flow(double t) const;

 private:
  Eigen::MatrixXd a_;
};

/// s * V for an existing field (e.g. the reversed wind -V).
class ScaledVectorField final : public VectorField {
 public:
  ScaledVectorField(std::shared_ptr<const VectorField> base, double scale)
      : base_(std::move(base)), scale_(scale) {}
  int sphere_dim() const override { return base_->sphere_dim(); }
  Eigen::VectorXd ambient(const Eigen::VectorXd& p) const override {
    return scale_ * base_->ambient(p);
  }

 private:
  std::shared_ptr<const VectorField> base_;
  double scale_;
};

/// The Hopf field on S^3: block-diagonal rotation, unit length everywhere.
LinearKillingField hopf_field();
/// Rotation generator in the (i,j) coordinate plane of R^{n+1}.
LinearKillingField rotation_field(int sphere_dim, int i, int j);

/// Vector field with expression components over ambient coordinates
/// x1..x_{n+1}; tangency is checked by sampling at construction.
class ExprVectorField final : public VectorField {
 public:
  ExprVectorField(int sphere_dim, std::vector<expr::Ast> components);
  int sphere_dim() const override { return n_; }
  Eigen::VectorXd ambient(const Eigen::VectorXd& p) const override;

 private:
  int n_;
  std::vector<expr::Ast> components_;
};

/// A curve on the sphere, ambient samples with velocities.
struct CurveSample {
  double t = 0.0;
  Eigen::VectorXd p;
  Eigen::VectorXd v;
};

struct Curve {
  int sphere_dim = 0;
  std::vector<CurveSample> samples;
  double max_speed_drift = 0.0;  // filled by the geodesic integrator
};

}  // namespace gosphere::sphere

#endif
