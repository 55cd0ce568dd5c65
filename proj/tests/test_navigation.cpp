#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <memory>

#include "gosphere/errors.hpp"
#include "gosphere/navigation.hpp"

using namespace gosphere;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

norms::MinkowskiNorm sample_family_norm() {
  norms::MetricFamilySpec spec;
  spec.family = norms::FamilyTag::alpha12_beta;
  spec.dim = 4;
  spec.blocks = {1, 1, 2};
  spec.alpha = MatrixXd::Identity(4, 4);
  spec.beta = VectorXd::Zero(4);
  spec.beta[0] = 1.0;
  spec.f = expr::parse("sqrt(1.1*s1^2+0.9*s2+1.2*s3)+0.15*s1", {"s1", "s2", "s3"});
  return norms::make_family(spec);
}

}  // namespace

TEST_CASE("navigation: zero wind is the identity") {
  auto F = sample_family_norm();
  navigation::NavigationDatum datum(F, VectorXd::Unit(4, 1), 0.0);
  sampling::Rng rng(3);
  for (int k = 0; k < 10; ++k) {
    VectorXd w = rng.unit_vector(4) * rng.uniform(0.3, 2.0);
    CHECK(navigation::navigate_eval(datum, w) == doctest::Approx(F(w)).epsilon(1e-14));
  }
}

TEST_CASE("navigation: Euclidean closed form for parallel wind") {
  auto F = norms::make_euclidean(3);
  const double v = 0.4;
  navigation::NavigationDatum datum(F, VectorXd::Unit(3, 0), v);
  // w parallel to V: |w - tV| = t  =>  t = |w|/(1+v)
  for (double len : {0.5, 1.0, 2.5}) {
    VectorXd w = len * VectorXd::Unit(3, 0);
    CHECK(navigation::navigate_eval(datum, w) == doctest::Approx(len / (1 + v)).epsilon(1e-12));
    CHECK(navigation::navigate_eval(datum, -w) == doctest::Approx(len / (1 - v)).epsilon(1e-12));
  }
}

TEST_CASE("navigation: homogeneity and monotonicity in the wind") {
  auto F = sample_family_norm();
  VectorXd V = VectorXd::Unit(4, 2);
  navigation::NavigationDatum datum(F, V, 0.35);
  sampling::Rng rng(5);
  for (int k = 0; k < 10; ++k) {
    VectorXd w = rng.unit_vector(4);
    const double f = navigation::navigate_eval(datum, w);
    CHECK(navigation::navigate_eval(datum, 2.0 * w) == doctest::Approx(2 * f).epsilon(1e-11));
  }
  // headwind: F~ increases with eps when V opposes w
  VectorXd w = -V;
  double prev = 0.0;
  for (double eps : {0.0, 0.2, 0.4, 0.6}) {
    navigation::NavigationDatum d(F, V, eps);
    const double val = navigation::navigate_eval(d, w);
    CHECK(val >= prev);
    prev = val;
  }
}

TEST_CASE("navigation: round trip (F,V) -> F~ -> (F~,-V) recovers F") {
  auto F = sample_family_norm();
  sampling::Rng rng(7);
  VectorXd V = rng.unit_vector(4) * 0.5;
  navigation::NavigationDatum forward(F, V, 1.0);
  auto Ftilde = navigation::navigated_norm(forward);
  navigation::NavigationDatum backward(Ftilde, -V, 1.0);
  for (int k = 0; k < 25; ++k) {
    VectorXd w = rng.unit_vector(4) * rng.uniform(0.5, 2.0);
    const double back = navigation::navigate_eval(backward, w);
    CHECK(back == doctest::Approx(F(w)).epsilon(1e-10));
  }
  // F~(eps V) < 1 wherever the datum is valid
  CHECK(Ftilde(V) < 1.0);
}

TEST_CASE("navigation: Randers correspondence") {
  SUBCASE("W = 0 gives alpha = |y|_h, beta = 0") {
    MatrixXd h(2, 2);
    h << 1.3, 0.2, 0.2, 0.8;
    auto data = navigation::randers_from_navigation(h, VectorXd::Zero(2));
    CHECK((data.alpha_matrix - h).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(data.beta.norm() == 0.0);
  }

  SUBCASE("1-D closed form") {
    MatrixXd h = MatrixXd::Identity(1, 1);
    VectorXd W(1);
    W << 0.25;
    auto data = navigation::randers_from_navigation(h, W);
    auto F = navigation::randers_norm(data);
    VectorXd e(1);
    e << 1;
    CHECK(F(e) == doctest::Approx(1.0 / 1.25).epsilon(1e-14));
    CHECK(F(-e) == doctest::Approx(1.0 / 0.75).epsilon(1e-14));
  }

  SUBCASE("closed form equals implicit navigation on 200 samples") {
    MatrixXd h(3, 3);
    h << 1.2, 0.1, 0.0, 0.1, 0.9, -0.05, 0.0, -0.05, 1.05;
    VectorXd W(3);
    W << 0.3, -0.2, 0.25;
    auto data = navigation::randers_from_navigation(h, W);
    auto closed = navigation::randers_norm(data);
    navigation::NavigationDatum datum(norms::make_riemannian(h), W, 1.0);
    sampling::Rng rng(11);
    for (int k = 0; k < 200; ++k) {
      VectorXd y = rng.unit_vector(3) * rng.uniform(0.3, 2.0);
      const double a = closed(y);
      const double b = navigation::navigate_eval(datum, y);
      CHECK(std::abs(a - b) <= 1e-9 * b);
    }
    // |beta|_alpha < 1 comes out automatically
    CHECK(data.lambda < 1.0);
  }

  SUBCASE("defining F by (alpha+beta, -W)-navigation returns |y|_h") {
    MatrixXd h = MatrixXd::Identity(2, 2);
    VectorXd W(2);
    W << 0.35, 0.1;
    auto data = navigation::randers_from_navigation(h, W);
    auto randers = navigation::randers_norm(data);
    navigation::NavigationDatum inverse(randers, -W, 1.0);
    sampling::Rng rng(13);
    for (int k = 0; k < 20; ++k) {
      VectorXd y = rng.unit_vector(2) * rng.uniform(0.5, 1.5);
      CHECK(navigation::navigate_eval(inverse, y) == doctest::Approx(y.norm()).epsilon(1e-10));
    }
  }

  SUBCASE("lambda >= 1 is rejected") {
    VectorXd W(2);
    W << 1.0, 0.2;
    CHECK_THROWS_AS(navigation::randers_from_navigation(MatrixXd::Identity(2, 2), W),
                    NavigationDomainError);
  }
}

TEST_CASE("navigation: invalid datum is rejected") {
  auto F = norms::make_euclidean(2);
  CHECK_THROWS_AS(navigation::NavigationDatum(F, VectorXd::Unit(2, 0), 1.0),
                  NavigationDomainError);
  CHECK_NOTHROW(navigation::NavigationDatum(F, VectorXd::Unit(2, 0), 0.99));
}

TEST_CASE("navigation: chart-level closed form equals implicit navigation") {
  auto wind = std::make_shared<sphere::LinearKillingField>(sphere::rotation_field(2, 0, 1));
  auto round = std::make_shared<sphere::RoundMetric>(2);
  navigation::RandersSphereMetric closed(2, wind, 0.3);
  navigation::NavigatedChartMetric implicit(round, wind, 0.3);

  sampling::Rng rng(17);
  for (int k = 0; k < 100; ++k) {
    VectorXd p = rng.unit_vector(3);
    VectorXd w = rng.unit_vector(3);
    w -= w.dot(p) * p;
    if (w.norm() < 0.2) continue;
    const double a = closed.eval_ambient(p, w);
    const double b = implicit.eval_ambient(p, w);
    CHECK(std::abs(a - b) <= 1e-9 * b);
  }
}

TEST_CASE("navigation: Killing invariance test and transport guard") {
  sphere::RoundMetric round(2);
  auto rot = sphere::rotation_field(2, 0, 1);
  CHECK(navigation::killing_invariance_residual(round, rot, 16) < 1e-12);

  // the quartic metric is not invariant under this rotation
  sphere::QuarticMetric quartic(2, 0.2);
  CHECK(navigation::killing_invariance_residual(quartic, rot, 16) > 1e-3);

  sphere::Curve dummy;
  dummy.sphere_dim = 2;
  CHECK_THROWS_AS(navigation::killing_transport(dummy, quartic, rot, 0.1), NotKillingError);
}
