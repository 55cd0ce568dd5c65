#ifndef GOSPHERE_CURVATURE_HPP
#define GOSPHERE_CURVATURE_HPP

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <vector>

#include "gosphere/navigation.hpp"
#include "gosphere/sampling.hpp"
#include "gosphere/sphere.hpp"

namespace gosphere::curvature {

/// Spray coefficients G^i(x,y) = 1/4 g^{il} ([F^2]_{x^k y^l} y^k - [F^2]_{x^l}),
/// central differences throughout; 2-homogeneous in y.
Eigen::VectorXd spray_coefficients(const sphere::ChartMetric& metric, int chart,
                                   const Eigen::VectorXd& x, const Eigen::VectorXd& y);

struct GeodesicOptions {
  double step = 2e-3;       // initial RK4 substep (refined to divide sample_dt)
  double sample_dt = 5e-3;  // spacing of recorded samples
  // F-speed drift allowed per sample segment; <= 0 picks
  // max(1e-10, 1e-8 * sample_dt), just above the finite-difference noise
  // floor of the spray evaluation.
  double segment_drift_tol = 0.0;
  int max_halvings = 5;
};

/// Integrates x'' = -2G(x, x') from the ambient initial condition with chart
/// switching at |x| = 2. Requires F(p0, w0) = 1 within 1e-9. Samples are
/// recorded on the uniform grid including t = T exactly. Substeps halve
/// adaptively until each segment conserves the F-speed to segment_drift_tol;
/// a segment that cannot reach the tolerance raises IntegrationError.
sphere::Curve geodesic(const sphere::ChartMetric& metric, const Eigen::VectorXd& p0,
                       const Eigen::VectorXd& w0, double T, const GeodesicOptions& opts = {});

/// Scales an ambient tangent vector to unit F-speed.
Eigen::VectorXd unit_initial(const sphere::ChartMetric& metric, const Eigen::VectorXd& p0,
                             const Eigen::VectorXd& w0);

/// Flag curvature K(x, y, span{y,u}); u is projected g_y-orthogonal to y.
double flag_curvature(const sphere::ChartMetric& metric, int chart, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& y, const Eigen::VectorXd& u);
double flag_curvature_ambient(const sphere::ChartMetric& metric, const Eigen::VectorXd& p,
                              const Eigen::VectorXd& w, const Eigen::VectorXd& u);

struct ClosedGeodesicRecord {
  int direction = +1;      // sign of the flow
  double length = 0.0;     // F-length of one prime period
  double period = 0.0;     // parameter time of the first return
  double return_miss = 0.0;
  double speed_spread = 0.0;  // relative spread of F(c') along the orbit
};

struct ClosedGeodesicOptions {
  double step = 1e-3;
  double horizon = 40.0;
  double return_tol = 1e-6;
};

/// Integrates the flow of (direction * V) from p0, accumulating F-length,
/// and refines the first return to p0. V must be Killing of constant
/// F-length along the orbit (sampled).
ClosedGeodesicRecord closed_geodesic_length(const sphere::ChartMetric& metric,
                                            const sphere::VectorField& V, int direction,
                                            const Eigen::VectorXd& p0,
                                            const ClosedGeodesicOptions& opts = {});

struct TuneResult {
  double epsilon_prime = 0.0;
  double lambda_at_epsilon = 0.0;  // prime length at epsilon_prime
  int orientation = +1;            // sign s: the tuned wind is eps * (s V)
  double lambda_minus = 0.0;       // lambda(0), the shorter prime length
  double lambda_plus = 0.0;
};

/// Monotone bisection for lambda(eps) = target (default 2 pi) over the
/// navigation data (F, eps V), with V oriented so lambda increases.
/// Requires lambda(0) = lambda_minus <= target.
TuneResult tune_epsilon(std::shared_ptr<const sphere::ChartMetric> metric,
                        const sphere::LinearKillingField& V, const Eigen::VectorXd& p0,
                        double target = 6.283185307179586476925287,
                        const ClosedGeodesicOptions& opts = {});

struct DistanceOptions {
  int directions = 720;          // shooting net (S^2 default; scaled use for higher n)
  double horizon = 6.783185307179586;  // 2 pi + 0.5
  double hit_tol = 1e-4;
  double coarse_step = 1e-2;
  double fine_step = 5e-3;
};

/// Directed distance d_F(p1, p2) by geodesic shooting over a direction net
/// with golden-section refinement of the best candidates.
double distance(const sphere::ChartMetric& metric, const Eigen::VectorXd& p1,
                const Eigen::VectorXd& p2, const DistanceOptions& opts = {});

struct AntipodalReport {
  double max_spread = 0.0;             // endpoint disagreement at time pi
  double max_psi2_displacement = 0.0;  // |psi^2(x) - x|
  bool constant_curvature_ok = false;  // spread within 1e-3
  std::vector<Eigen::VectorXd> points;
  std::vector<Eigen::VectorXd> psi_points;
};

/// For sampled x, psi(x) := common endpoint of unit-speed geodesics at time
/// pi (agreement over a direction net is the constant-curvature proxy);
/// also reports whether psi^2 = id on the samples.
AntipodalReport antipodal_check(const sphere::ChartMetric& metric, int point_samples,
                                int directions, std::uint64_t seed = sampling::kDefaultSeed);

struct KillingCriticalReport {
  double grad_norm = 0.0;      // |d/dx F(x, X(x))| at p
  double ode_residual = 0.0;   // geodesic-equation residual of the integral curve
};

/// Numerical check of the Killing-critical-point lemma: the integral curve
/// of X through p is a geodesic iff p is a critical point of F(X(.)).
KillingCriticalReport killing_critical_check(const sphere::ChartMetric& metric,
                                             const sphere::VectorField& X,
                                             const Eigen::VectorXd& p);

struct CurveODEReport {
  double max_ode_residual = 0.0;
  double max_unit_speed_drift = 0.0;
};

/// Residual of the geodesic ODE along a sampled curve (finite differences
/// of the recorded velocities) plus the drift of F(c') from 1.
CurveODEReport geodesic_residual(const sphere::ChartMetric& metric, const sphere::Curve& c);

/// Chart-consistency of F under the transition map, sampled away from the
/// poles; returns the worst relative mismatch.
double chart_consistency_residual(const sphere::ChartMetric& metric, int samples,
                                  std::uint64_t seed = sampling::kDefaultSeed);

struct FlagSample {
  Eigen::VectorXd p, y, u;  // ambient point, flagpole, transverse edge
};

std::vector<FlagSample> random_flags(int sphere_dim, int count,
                                     std::uint64_t seed = sampling::kDefaultSeed);

/// CSV rows "t,chart,x1,...,xn" with each sample written in its preferred
/// chart.
std::string curve_to_csv(const sphere::Curve& c);

}  // namespace gosphere::curvature

#endif
