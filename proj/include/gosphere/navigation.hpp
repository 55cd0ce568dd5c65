#ifndef GOSPHERE_NAVIGATION_HPP
#define GOSPHERE_NAVIGATION_HPP

#include <Eigen/Core>
#include <memory>

#include "gosphere/norms.hpp"
#include "gosphere/sphere.hpp"

namespace gosphere::navigation {

/// Single-fiber navigation datum (F, eps V): deforms the Minkowski norm F by
/// the fixed wind vector eps V. Requires F(-eps V) < 1.
struct NavigationDatum {
  NavigationDatum(norms::MinkowskiNorm base_norm, Eigen::VectorXd field, double scale);
  norms::MinkowskiNorm base;
  Eigen::VectorXd V;
  double epsilon;
};

/// F~(w): the unique t > 0 with F(w - t eps V) = t, by safeguarded Newton to
/// relative 1e-13 inside the bracket (0, F(w)/(1 - F(-eps V))].
double navigate_eval(const NavigationDatum& datum, const Eigen::VectorXd& w);

/// Wraps the deformed metric as a MinkowskiNorm of family tag custom.
norms::MinkowskiNorm navigated_norm(const NavigationDatum& datum);

/// Closed-form Randers data of the navigation datum (h, W), h Riemannian:
///   F~ = alpha + beta,
///   alpha^2 = ((1-lambda)<y,y>_h + <y,W>_h^2) / (1-lambda)^2,
///   beta    = -<y,W>_h / (1-lambda),     lambda = <W,W>_h < 1.
struct RandersData {
  Eigen::MatrixXd h;
  Eigen::VectorXd W;
  double lambda = 0.0;
  Eigen::MatrixXd alpha_matrix;  // SPD matrix of alpha^2
  Eigen::VectorXd beta;
};

RandersData randers_from_navigation(const Eigen::MatrixXd& h, const Eigen::VectorXd& W);

/// alpha + beta evaluation of RandersData as a MinkowskiNorm.
norms::MinkowskiNorm randers_norm(const RandersData& data);

/// Chart metric for the navigation of the round sphere by a wind field,
/// evaluated through the closed Randers form (fast path; no root finding).
class RandersSphereMetric final : public sphere::AmbientMetric {
 public:
  RandersSphereMetric(int sphere_dim, std::shared_ptr<const sphere::VectorField> wind,
                      double epsilon);
  int sphere_dim() const override { return n_; }
  double ambient(const Eigen::VectorXd& p, const Eigen::VectorXd& w) const override;
  double epsilon() const { return eps_; }
  const sphere::VectorField& wind() const { return *wind_; }

 private:
  int n_;
  std::shared_ptr<const sphere::VectorField> wind_;
  double eps_;
};

/// Generic navigated chart metric: F~ solves F(x, y - t eps V(x)) = t by the
/// safeguarded Newton iteration fiberwise. Works on any base chart metric,
/// so navigations compose.
class NavigatedChartMetric final : public sphere::ChartMetric {
 public:
  NavigatedChartMetric(std::shared_ptr<const sphere::ChartMetric> base,
                       std::shared_ptr<const sphere::VectorField> wind, double epsilon);
  int sphere_dim() const override { return base_->sphere_dim(); }
  double eval(int chart, const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override;

 private:
  std::shared_ptr<const sphere::ChartMetric> base_;
  std::shared_ptr<const sphere::VectorField> wind_;
  double eps_;
};

/// max over samples of |F(rho_t p, Drho_t w) - F(p, w)| / F(p, w) for the
/// linear flow of V: the sampled Killing-invariance test.
double killing_invariance_residual(const sphere::ChartMetric& metric,
                                   const sphere::LinearKillingField& V, int samples,
                                   std::uint64_t seed = sampling::kDefaultSeed);

/// Killing transport of a curve: c~(t) = rho_t(c(t)) with rho the flow of
/// eps V; velocities are transported analytically. Verifies the sampled
/// Killing property of V for the base metric first (NotKillingError).
sphere::Curve killing_transport(const sphere::Curve& c, const sphere::ChartMetric& base_metric,
                                const sphere::LinearKillingField& V, double epsilon);

}  // namespace gosphere::navigation

#endif
