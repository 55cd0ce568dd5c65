#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <memory>

#include "gosphere/curvature.hpp"
#include "gosphere/errors.hpp"

using namespace gosphere;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kPi = 3.14159265358979323846;

// x-independent flat metric, for spray/curvature baselines.
class FlatChartMetric final : public sphere::ChartMetric {
 public:
  explicit FlatChartMetric(int n) : n_(n) {}
  int sphere_dim() const override { return n_; }
  double eval(int, const VectorXd&, const VectorXd& y) const override { return y.norm(); }

 private:
  int n_;
};

// Christoffel oracle for the round metric in a stereographic chart:
// conformal factor phi = log(2/(1+|x|^2)), G^i = (phi_k y^k) y^i - 1/2 phi_i |y|^2.
VectorXd round_spray_oracle(const VectorXd& x, const VectorXd& y) {
  const double s = 1.0 + x.squaredNorm();
  const VectorXd dphi = -2.0 * x / s;
  return (dphi.dot(y)) * y - 0.5 * y.squaredNorm() * dphi;
}

std::shared_ptr<navigation::RandersSphereMetric> randers_s2(double eps) {
  auto wind = std::make_shared<sphere::LinearKillingField>(sphere::rotation_field(2, 0, 1));
  return std::make_shared<navigation::RandersSphereMetric>(2, wind, eps);
}

}  // namespace

TEST_CASE("curvature: spray coefficients") {
  SUBCASE("flat metric has zero spray") {
    FlatChartMetric flat(2);
    VectorXd x(2), y(2);
    x << 0.3, -0.8;
    y << 1.0, 0.4;
    CHECK(curvature::spray_coefficients(flat, 0, x, y).norm() < 1e-10);
  }

  SUBCASE("round sphere matches the Christoffel oracle") {
    sphere::RoundMetric round(2);
    sampling::Rng rng(3);
    for (int k = 0; k < 6; ++k) {
      VectorXd x = rng.unit_vector(2) * rng.uniform(0.1, 1.5);
      VectorXd y = rng.unit_vector(2) * rng.uniform(0.5, 1.5);
      VectorXd got = curvature::spray_coefficients(round, 0, x, y);
      VectorXd want = round_spray_oracle(x, y);
      CHECK((got - want).norm() <= 1e-6 * std::max(1.0, want.norm()));
    }
  }

  SUBCASE("2-homogeneity in y") {
    auto metric = randers_s2(0.3);
    VectorXd x(2), y(2);
    x << 0.4, 0.2;
    y << 0.8, -0.5;
    VectorXd g1 = curvature::spray_coefficients(*metric, 0, x, y);
    VectorXd g2 = curvature::spray_coefficients(*metric, 0, x, 2 * y);
    CHECK((g2 - 4 * g1).norm() <= 1e-8 * std::max(1.0, g1.norm()));
  }

  SUBCASE("chart boundary signal") {
    sphere::RoundMetric round(2);
    VectorXd x(2), y(2);
    x << 4.0, 0.0;
    y << 1.0, 0.0;
    CHECK_THROWS_AS(curvature::spray_coefficients(round, 0, x, y), ChartBoundaryError);
  }
}

TEST_CASE("curvature: geodesics of the round sphere are great circles") {
  sphere::RoundMetric round(2);
  VectorXd p0(3), w0(3);
  p0 << 1, 0, 0;
  w0 << 0, 0.3, 0.954;  // heads toward the poles: exercises chart switching
  w0 -= w0.dot(p0) * p0;
  w0 = curvature::unit_initial(round, p0, w0);

  auto curve = curvature::geodesic(round, p0, w0, 2 * kPi, {2e-3, kPi / 16});
  CHECK(curve.max_speed_drift < 1e-7);
  for (const auto& s : curve.samples) {
    VectorXd expect = std::cos(s.t) * p0 + std::sin(s.t) * w0;
    CHECK((s.p - expect).norm() < 1e-6);
  }
  CHECK((curve.samples.back().p - p0).norm() < 1e-6);  // period 2 pi

  CHECK_THROWS_AS(curvature::geodesic(round, p0, 2 * w0, 1.0), PreconditionError);
}

TEST_CASE("curvature: speed conservation over long horizons and coarse steps") {
  sphere::RoundMetric round(2);
  VectorXd p0(3), w0(3);
  p0 << 0.48, 0.6, -0.64;
  p0.normalize();
  w0 << 1.0, -0.2, 0.6;
  w0 -= w0.dot(p0) * p0;
  w0 = curvature::unit_initial(round, p0, w0);

  // T = 50 at the default step
  auto longrun = curvature::geodesic(round, p0, w0, 50.0, {2e-3, 0.5});
  CHECK(longrun.max_speed_drift < 1e-7);

  // an over-coarse requested step is halved until the drift tolerance holds
  auto coarse = curvature::geodesic(round, p0, w0, 2.0, {0.15, 0.25});
  CHECK(coarse.max_speed_drift < 1e-7);
  CHECK((coarse.samples.back().p -
         (std::cos(2.0) * p0 + std::sin(2.0) * w0)).norm() < 1e-6);
}

TEST_CASE("curvature: distance on S^3 via simplex refinement") {
  sphere::RoundMetric round(3);
  VectorXd a(4), b(4);
  a << 1, 0, 0, 0;
  b << 0.2, 0.7, -0.4, 0.5;
  b.normalize();
  curvature::DistanceOptions opts;
  opts.directions = 300;
  const double d = curvature::distance(round, a, b, opts);
  CHECK(std::abs(d - std::acos(a.dot(b))) < 2e-3);
}

TEST_CASE("curvature: flat metric integrates straight lines") {
  FlatChartMetric flat(2);
  // run the chart integrator directly in one chart: straight line
  VectorXd p0(3);
  p0 << 0, 0, -1;  // chart-0 origin
  VectorXd w0 = curvature::unit_initial(flat, p0, VectorXd::Unit(3, 0));
  auto curve = curvature::geodesic(flat, p0, w0, 0.5, {2e-3, 0.05});
  // straight line in chart coordinates: x(t) = t v with |v| = F(v) = 1
  for (const auto& s : curve.samples) {
    VectorXd x = sphere::Atlas::to_chart(0, s.p);
    CHECK(std::abs(x.norm() - s.t) < 1e-9);
  }
}

TEST_CASE("curvature: flag curvature") {
  SUBCASE("round sphere has K = 1 for every flag") {
    sphere::RoundMetric round(2);
    for (const auto& flag : curvature::random_flags(2, 10, 5)) {
      const double k = curvature::flag_curvature_ambient(round, flag.p, flag.y, flag.u);
      CHECK(std::abs(k - 1.0) < 2e-4);
    }
    sphere::RoundMetric round3(3);
    for (const auto& flag : curvature::random_flags(3, 4, 7)) {
      const double k = curvature::flag_curvature_ambient(round3, flag.p, flag.y, flag.u);
      CHECK(std::abs(k - 1.0) < 2e-4);
    }
  }

  SUBCASE("flat metric has K = 0") {
    FlatChartMetric flat(2);
    VectorXd x(2), y(2), u(2);
    x << 0.2, 0.1;
    y << 1.0, 0.3;
    u << -0.3, 1.0;
    CHECK(std::abs(curvature::flag_curvature(flat, 0, x, y, u)) < 1e-6);
  }

  SUBCASE("degenerate flag is rejected") {
    sphere::RoundMetric round(2);
    VectorXd x(2), y(2);
    x << 0.2, 0.1;
    y << 1.0, 0.3;
    CHECK_THROWS_AS(curvature::flag_curvature(round, 0, x, y, 2 * y), InvalidInputError);
  }

  SUBCASE("quartic perturbation does not have K = 1") {
    sphere::QuarticMetric quartic(2, 0.2);
    double dev = 0.0;
    for (const auto& flag : curvature::random_flags(2, 6, 9))
      dev = std::max(dev,
                     std::abs(curvature::flag_curvature_ambient(quartic, flag.p, flag.y, flag.u) -
                              1.0));
    CHECK(dev > 1e-3);
  }

  SUBCASE("Killing navigation preserves flag curvature (and K = 1)") {
    sphere::RoundMetric round(2);
    auto metric = randers_s2(0.3);
    const auto& wind = metric->wind();
    for (const auto& flag : curvature::random_flags(2, 10, 11)) {
      const double k0 = curvature::flag_curvature_ambient(round, flag.p, flag.y, flag.u);
      // y~ = y + F(y) V(x), P~ = span{y~, u}
      VectorXd ytilde = flag.y + round.eval_ambient(flag.p, flag.y) * 0.3 * wind.ambient(flag.p);
      const double k1 = curvature::flag_curvature_ambient(*metric, flag.p, ytilde, flag.u);
      CHECK(std::abs(k0 - k1) < 1e-3);
      CHECK(std::abs(k1 - 1.0) < 5e-4);
    }
  }
}

TEST_CASE("curvature: killing transport produces F~-geodesics") {
  sphere::RoundMetric round(2);
  auto rot = sphere::rotation_field(2, 0, 1);
  const double eps = 0.25;
  auto metric = randers_s2(eps);

  VectorXd p0(3), w0(3);
  p0 << 0.6, -0.64, 0.48;
  p0.normalize();
  w0 << 0.3, 0.7, 0.55;
  w0 -= w0.dot(p0) * p0;
  w0 = curvature::unit_initial(round, p0, w0);

  auto base = curvature::geodesic(round, p0, w0, 3.0, {1e-3, 1e-3});
  auto transported = navigation::killing_transport(base, round, rot, eps);

  auto report = curvature::geodesic_residual(*metric, transported);
  CHECK(report.max_ode_residual < 1e-5);
  CHECK(report.max_unit_speed_drift < 1e-7);

  // transported geodesic equals the directly integrated one pointwise
  auto direct = curvature::geodesic(*metric, p0, transported.samples.front().v, 3.0, {1e-3, 1e-3});
  double worst = 0.0;
  for (std::size_t i = 0; i < direct.samples.size(); ++i)
    worst = std::max(worst, (direct.samples[i].p - transported.samples[i].p).norm());
  CHECK(worst < 1e-5);
}

TEST_CASE("curvature: closed geodesics of the Hopf flow on S^3") {
  auto hopf = sphere::hopf_field();
  VectorXd p0(4);
  p0 << 1, 0, 0, 0;

  sphere::RoundMetric round(3);
  auto plus = curvature::closed_geodesic_length(round, hopf, +1, p0);
  auto minus = curvature::closed_geodesic_length(round, hopf, -1, p0);
  CHECK(std::abs(plus.length - 2 * kPi) < 1e-6);
  CHECK(std::abs(minus.length - 2 * kPi) < 1e-6);
  CHECK(plus.return_miss < 1e-6);

  const double eps = 0.3;
  auto wind = std::make_shared<sphere::LinearKillingField>(hopf);
  navigation::RandersSphereMetric randers(3, wind, eps);
  auto lam_plus = curvature::closed_geodesic_length(randers, hopf, +1, p0);
  auto lam_minus = curvature::closed_geodesic_length(randers, hopf, -1, p0);
  // flow composition: lambda = 2 pi / (1 +- eps)
  CHECK(std::abs(lam_plus.length - 2 * kPi / (1 + eps)) < 1e-5);
  CHECK(std::abs(lam_minus.length - 2 * kPi / (1 - eps)) < 1e-5);
  // harmonic relation 1/lambda+ + 1/lambda- = 1/pi
  CHECK(std::abs(1 / lam_plus.length + 1 / lam_minus.length - 1 / kPi) < 1e-4);
}

TEST_CASE("curvature: tune_epsilon recovers a planted wind") {
  auto hopf = sphere::hopf_field();
  VectorXd p0(4);
  p0 << 0, 0, 1, 0;

  SUBCASE("already tuned: round metric gives epsilon = 0") {
    auto round = std::make_shared<sphere::RoundMetric>(3);
    auto result = curvature::tune_epsilon(round, hopf, p0);
    CHECK(std::abs(result.epsilon_prime) < 1e-6);
    CHECK(std::abs(result.lambda_at_epsilon - 2 * kPi) < 1e-5);
  }

  SUBCASE("planted epsilon = 0.3") {
    auto wind = std::make_shared<sphere::LinearKillingField>(hopf);
    auto planted = std::make_shared<navigation::RandersSphereMetric>(3, wind, 0.3);
    auto result = curvature::tune_epsilon(planted, hopf, p0);
    CHECK(std::abs(result.epsilon_prime - 0.3) < 1e-6);
    CHECK(std::abs(result.lambda_at_epsilon - 2 * kPi) < 1e-5);
    CHECK(std::abs(result.lambda_minus - 2 * kPi / 1.3) < 1e-5);
    CHECK(std::abs(result.lambda_plus - 2 * kPi / 0.7) < 1e-5);
  }
}

TEST_CASE("curvature: lambda(eps) is strictly increasing on a sampled grid") {
  auto hopf = sphere::hopf_field();
  auto wind = std::make_shared<sphere::LinearKillingField>(hopf);
  auto planted = std::make_shared<navigation::RandersSphereMetric>(3, wind, 0.3);
  auto oriented = std::make_shared<sphere::LinearKillingField>(-hopf.matrix());
  VectorXd p0(4);
  p0 << 1, 0, 0, 0;
  double prev = 0.0;
  for (double eps : {0.0, 0.25, 0.5, 0.75}) {
    double lam;
    if (eps == 0.0) {
      lam = curvature::closed_geodesic_length(*planted, *oriented, -1, p0).length;
    } else {
      navigation::NavigatedChartMetric nav(planted, oriented, eps);
      lam = curvature::closed_geodesic_length(nav, *oriented, -1, p0).length;
    }
    CHECK(lam > prev);
    prev = lam;
  }
}

TEST_CASE("curvature: directed triangle inequality on sampled triples") {
  curvature::DistanceOptions opts;
  opts.directions = 120;
  auto metric = randers_s2(0.3);
  sampling::Rng rng(23);
  for (int k = 0; k < 2; ++k) {
    VectorXd x = rng.unit_vector(3), y = rng.unit_vector(3), z = rng.unit_vector(3);
    if ((x - y).norm() < 0.4 || (y - z).norm() < 0.4 || (x - z).norm() < 0.4 ||
        (x + y).norm() < 0.4 || (y + z).norm() < 0.4 || (x + z).norm() < 0.4) {
      --k;
      continue;
    }
    const double dxz = curvature::distance(*metric, x, z, opts);
    const double dxy = curvature::distance(*metric, x, y, opts);
    const double dyz = curvature::distance(*metric, y, z, opts);
    CHECK(dxz <= dxy + dyz + 3e-3);
  }
}

TEST_CASE("curvature: antipodal map") {
  SUBCASE("round sphere: psi is the antipode and psi^2 = id") {
    sphere::RoundMetric round(2);
    auto report = curvature::antipodal_check(round, 2, 6, 13);
    CHECK(report.constant_curvature_ok);
    CHECK(report.max_spread < 1e-4);
    CHECK(report.max_psi2_displacement < 1e-4);
    for (std::size_t i = 0; i < report.points.size(); ++i)
      CHECK((report.psi_points[i] + report.points[i]).norm() < 1e-4);
  }

  SUBCASE("untuned Randers: psi^2 displaces along the flow") {
    auto hopf = sphere::hopf_field();
    auto wind = std::make_shared<sphere::LinearKillingField>(hopf);
    const double eps = 0.25;
    navigation::RandersSphereMetric randers(3, wind, eps);
    auto report = curvature::antipodal_check(randers, 1, 6, 13);
    CHECK(report.constant_curvature_ok);  // K = 1: endpoints still agree
    // flow-composition oracle: psi^2 = rotation by angle 2 pi eps
    VectorXd p = report.points[0];
    VectorXd expect = sphere::LinearKillingField(hopf).flow(2 * kPi * eps) * p;
    CHECK(std::abs(report.max_psi2_displacement - (expect - p).norm()) < 1e-3);
    CHECK(report.max_psi2_displacement > 0.1);
  }
}

TEST_CASE("curvature: killing critical point lemma") {
  sphere::RoundMetric round(2);
  auto rot = sphere::rotation_field(2, 0, 1);

  // on the maximal circle (equator of the rotation): critical and geodesic
  VectorXd eq(3);
  eq << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0;
  auto on = curvature::killing_critical_check(round, rot, eq);
  CHECK(on.grad_norm < 1e-6);
  CHECK(on.ode_residual < 1e-5);

  // off the maximal circle: latitude circles are not geodesics
  VectorXd off(3);
  off << 0.6, 0.0, 0.8;
  auto offr = curvature::killing_critical_check(round, rot, off);
  CHECK(offr.grad_norm > 1e-2);
  CHECK(offr.ode_residual > 1e-3);

  // constant-length Killing field: critical everywhere, orbits geodesic
  sphere::RoundMetric round3(3);
  auto hopf = sphere::hopf_field();
  sampling::Rng rng(15);
  VectorXd p = rng.unit_vector(4);
  auto h = curvature::killing_critical_check(round3, hopf, p);
  CHECK(h.grad_norm < 1e-6);
  CHECK(h.ode_residual < 1e-5);

  // X vanishing at the point is rejected
  VectorXd pole(3);
  pole << 0, 0, 1;
  CHECK_THROWS_AS(curvature::killing_critical_check(round, rot, pole), InvalidInputError);
}

TEST_CASE("curvature: directed distances") {
  curvature::DistanceOptions opts;
  opts.directions = 180;

  SUBCASE("round sphere: antipodal distance is pi, symmetric") {
    sphere::RoundMetric round(2);
    VectorXd a(3), b(3);
    a << 1, 0, 0;
    b << -1, 0, 0;
    CHECK(std::abs(curvature::distance(round, a, b, opts) - kPi) < 1e-3);
    VectorXd c(3);
    c << 0.36, 0.48, 0.8;
    const double d1 = curvature::distance(round, a, c, opts);
    const double d2 = curvature::distance(round, c, a, opts);
    CHECK(std::abs(d1 - std::acos(a.dot(c))) < 2e-3);
    CHECK(std::abs(d1 - d2) < 2e-3);
  }

  SUBCASE("Randers asymmetry along the flow circle") {
    const double eps = 0.3;
    auto metric = randers_s2(eps);
    const double theta = 0.8;
    VectorXd a(3), b(3);
    a << 1, 0, 0;
    b << std::cos(theta), std::sin(theta), 0;  // along the equator flow
    const double with_wind = curvature::distance(*metric, a, b, opts);
    const double against = curvature::distance(*metric, b, a, opts);
    CHECK(std::abs(with_wind - theta / (1 + eps)) < 2e-3);
    CHECK(std::abs(against - theta / (1 - eps)) < 2e-3);
    CHECK(std::abs(with_wind / against - (1 - eps) / (1 + eps)) < 2e-3);
  }

  SUBCASE("coincident points are rejected") {
    sphere::RoundMetric round(2);
    VectorXd a(3);
    a << 1, 0, 0;
    CHECK_THROWS_AS(curvature::distance(round, a, a), InvalidInputError);
  }
}

TEST_CASE("curvature: chart metric diagnostics") {
  sphere::RoundMetric round(2);
  CHECK(curvature::chart_consistency_residual(round, 24) < 1e-12);
  sphere::QuarticMetric quartic(2, 0.2);
  CHECK(curvature::chart_consistency_residual(quartic, 24) < 1e-12);
  auto randers = randers_s2(0.3);
  CHECK(curvature::chart_consistency_residual(*randers, 24) < 1e-12);

  // fiberwise Minkowski axioms via the norms machinery
  sampling::Rng rng(19);
  VectorXd p = rng.unit_vector(3);
  const int chart = sphere::Atlas::preferred_chart(p);
  const VectorXd x = sphere::Atlas::to_chart(chart, p);
  norms::MinkowskiNorm fiber(2, norms::FamilyTag::custom,
                             [&, chart, x](const VectorXd& y) { return randers->eval(chart, x, y); });
  CHECK_NOTHROW(norms::check_convexity_on_net(fiber, 12));
  VectorXd y = rng.unit_vector(2);
  CHECK(fiber(2 * y) == doctest::Approx(2 * fiber(y)).epsilon(1e-10));
}

TEST_CASE("curvature: curve CSV export") {
  sphere::RoundMetric round(2);
  VectorXd p0(3);
  p0 << 1, 0, 0;
  VectorXd w0 = curvature::unit_initial(round, p0, VectorXd::Unit(3, 1));
  auto curve = curvature::geodesic(round, p0, w0, 0.2, {2e-3, 0.05});
  auto csv = curvature::curve_to_csv(curve);
  CHECK(csv.rfind("t,chart,x1,x2", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(curve.samples.size()) + 1);
}
