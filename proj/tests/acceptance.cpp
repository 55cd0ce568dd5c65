// Acceptance suite: runs every top-level criterion at its stated tolerance
// and prints one PASS/FAIL line each. Exit code 0 iff all pass.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "gosphere/cli.hpp"
#include "gosphere/curvature.hpp"
#include "gosphere/errors.hpp"
#include "gosphere/gocheck.hpp"
#include "gosphere/liealg.hpp"
#include "gosphere/navigation.hpp"
#include "gosphere/norms.hpp"

using namespace gosphere;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.283185307179586476925287;

int failures = 0;

void criterion(int number, const std::string& label, const std::function<void()>& body) {
  try {
    body();
    std::printf("[PASS] criterion %2d: %s\n", number, label.c_str());
  } catch (const std::exception& e) {
    ++failures;
    std::printf("[FAIL] criterion %2d: %s\n        %s\n", number, label.c_str(), e.what());
  }
  std::fflush(stdout);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::runtime_error(what);
}

struct NamedMetric {
  std::string name;
  std::shared_ptr<sphere::ChartMetric> metric;
};

double fiber_reversibility(const sphere::ChartMetric& m, int samples, std::uint64_t seed) {
  sampling::Rng rng(seed);
  const int n = m.sphere_dim();
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    VectorXd p = rng.unit_vector(n + 1);
    VectorXd w = rng.unit_vector(n + 1);
    w -= w.dot(p) * p;
    if (w.norm() < 0.2) continue;
    const double a = m.eval_ambient(p, w), b = m.eval_ambient(p, -w);
    worst = std::max(worst, std::abs(a - b) / a);
  }
  return worst;
}

double fiber_cartan_norm(const sphere::ChartMetric& m, int x_samples, int y_samples,
                         std::uint64_t seed) {
  sampling::Rng rng(seed);
  const int n = m.sphere_dim();
  double worst = 0.0;
  for (int s = 0; s < x_samples; ++s) {
    VectorXd p = rng.unit_vector(n + 1);
    const int chart = sphere::Atlas::preferred_chart(p);
    const VectorXd x = sphere::Atlas::to_chart(chart, p);
    norms::MinkowskiNorm fiber(
        n, norms::FamilyTag::custom,
        [&m, chart, x](const VectorXd& y) { return m.eval(chart, x, y); });
    for (int k = 0; k < y_samples; ++k) {
      VectorXd y = rng.unit_vector(n);
      VectorXd u = rng.unit_vector(n), v = rng.unit_vector(n), w = rng.unit_vector(n);
      worst = std::max(worst, std::abs(norms::cartan(fiber, y, u, v, w)));
    }
  }
  return worst;
}

}  // namespace

int main() {
  const auto t_suite = std::chrono::steady_clock::now();

  // ------------------------------------------------------------------ 1
  criterion(1, "GO classification reproduces the verdict table (< 2 min)", [] {
    const auto t0 = std::chrono::steady_clock::now();
    struct Row {
      const char* key;
      int n;
    };
    for (Row row : {Row{"so", 3}, Row{"su", 3}, Row{"u", 2}, Row{"sp_u1", 2}, Row{"sp_sp1", 2}}) {
      auto pres = liealg::build_presentation(row.key, row.n);
      for (std::uint64_t s : {11u, 12u, 13u}) {
        auto norm = liealg::random_invariant_norm(pres, s);
        auto rep = gocheck::go_verdict(pres, norm, 256, 1e-8, s);
        require(rep.verdict == gocheck::Verdict::Pass,
                std::string(row.key) + ": expected PASS, residual4 max = " +
                    expr::format_double(rep.max_residual4));
        require(rep.max_residual4 < 1e-8, std::string(row.key) + ": residual4 above 1e-8");
      }
    }
    auto sp = liealg::build_sp(2);
    auto witness_norm = liealg::sp_witness_norm(sp);
    auto rep = gocheck::go_verdict(sp, witness_norm, 256, 1e-8, 14);
    require(rep.verdict == gocheck::Verdict::Fail, "sp: expected FAIL");
    require(rep.max_residual4 > 1e-4, "sp: witness residual not above 1e-4");
    require(rep.witness >= 0, "sp: no certified witness");
    const auto& cert = rep.certificates[static_cast<std::size_t>(rep.witness)];
    require(cert.residual4 > 1e-4 && cert.residual3 > 1e-4,
            "sp: witness certificate residuals not above threshold");

    // the classify command path with the witness norm supplied as a file spec
    const std::string witness_json = witness_norm.family_spec()->to_json().dump();
    auto cls = cli::run_classify("sp", 2, witness_json, 1, 256, 1e-8, 14);
    require(cls.exit_code == 1, "classify --space sp with the witness norm should exit 1");
    require(cls.report["verdicts"]["all"] == "FAIL", "classify verdict should be FAIL");
    require(cls.report["verdicts"]["matches_expected_table"] == true,
            "classify FAIL should match the expected table");
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    require(secs < 120.0, "runtime " + expr::format_double(secs) + " s exceeds 2 min");
  });

  // ------------------------------------------------------------------ 2
  criterion(2, "Sp(2)U(1) spray pattern and Hessian block structure", [] {
    auto pres = liealg::build_sp_u1(2);
    VectorXd u = VectorXd::Zero(7);
    u[0] = 0.4;  // e1
    u[1] = 0.7;  // e2
    u[3] = 0.5;  // e4
    for (std::uint64_t s : {21u, 22u, 23u, 24u, 25u}) {
      auto norm = liealg::random_invariant_norm(pres, s);
      auto g = norms::fundamental_tensor(norm, u);
      auto eta = gocheck::spray_vector(pres, norm, u);
      const double bound = 1e-9 * u.squaredNorm() * norm(u);
      // 1-based basis labels {3,5,6} are m-local {2,4,5}
      for (int i = 0; i < 7; ++i) {
        if (i == 2 || i == 4 || i == 5) continue;
        const double pairing = std::abs(norms::inner(g, eta.value, VectorXd::Unit(7, i)));
        require(pairing < bound,
                "spray pairing with e" + std::to_string(i + 1) + " = " +
                    expr::format_double(pairing) + " exceeds " + expr::format_double(bound));
      }
      // g_ij(u) = 0 whenever i != j and {i,j} is not inside the 1-based
      // label set {1,2,4} = m-local {0,1,3}
      for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j) {
          if (i == j) continue;
          const bool inside = (i == 0 || i == 1 || i == 3) && (j == 0 || j == 1 || j == 3);
          if (inside) continue;
          require(std::abs(g.matrix(i, j)) < 1e-9,
                  "Hessian block pattern violated at (" + std::to_string(i + 1) + "," +
                      std::to_string(j + 1) + ")");
        }
    }
  });

  // ------------------------------------------------------------------ 3
  criterion(3, "compensator and orbit-tangency verdicts agree on 256 samples", [] {
    struct Row {
      const char* key;
      int n;
    };
    for (Row row : {Row{"so", 3}, Row{"su", 3}, Row{"u", 2}, Row{"sp_u1", 2}, Row{"sp_sp1", 2},
                    Row{"sp", 2}}) {
      auto pres = liealg::build_presentation(row.key, row.n);
      auto norm = std::string(row.key) == "sp" ? liealg::sp_witness_norm(pres)
                                               : liealg::random_invariant_norm(pres, 31);
      auto rep = gocheck::go_verdict(pres, norm, 256, 1e-8, 32);
      for (const auto& cert : rep.certificates)
        require((cert.residual3 < cert.tol) == (cert.residual4 < cert.tol),
                std::string(row.key) + ": conditions disagree at a sample (res3 = " +
                    expr::format_double(cert.residual3) + ", res4 = " +
                    expr::format_double(cert.residual4) + ")");
    }
  });

  // ------------------------------------------------------------------ 4
  criterion(4, "Cartan bracket identity on 100 random tuples", [] {
    sampling::Rng rng(41);
    struct Row {
      const char* key;
      int n;
    };
    const std::vector<Row> rows = {Row{"u", 2}, Row{"sp_u1", 2}, Row{"sp_sp1", 2}, Row{"su", 3}};
    int done = 0;
    int which = 0;
    while (done < 100) {
      const Row row = rows[static_cast<std::size_t>(which++ % rows.size())];
      auto pres = liealg::build_presentation(row.key, row.n);
      auto norm = liealg::random_invariant_norm(pres, 50 + static_cast<std::uint64_t>(done));
      VectorXd u = rng.unit_vector(pres.dim_m());
      VectorXd up = rng.unit_vector(pres.decomposition.dim_h());
      VectorXd v = rng.unit_vector(pres.dim_m());
      const double gap = gocheck::cartan_bracket_identity_check(pres, norm, u, up, v);
      require(gap <= 1e-5,
              std::string(row.key) + ": identity discrepancy " + expr::format_double(gap));
      ++done;
    }
  });

  // ------------------------------------------------------------------ 5
  criterion(5, "navigation: closed-form Randers and exact round trip", [] {
    MatrixXd h(3, 3);
    h << 1.2, 0.1, 0.0, 0.1, 0.9, -0.05, 0.0, -0.05, 1.05;
    VectorXd W(3);
    W << 0.3, -0.2, 0.25;
    auto data = navigation::randers_from_navigation(h, W);
    auto closed = navigation::randers_norm(data);
    navigation::NavigationDatum datum(norms::make_riemannian(h), W, 1.0);
    sampling::Rng rng(51);
    for (int k = 0; k < 200; ++k) {
      VectorXd y = rng.unit_vector(3) * rng.uniform(0.3, 2.0);
      const double a = closed(y);
      const double b = navigation::navigate_eval(datum, y);
      require(std::abs(a - b) <= 1e-9 * b, "closed form deviates from implicit navigation");
    }

    // round trip on a genuinely non-Riemannian base norm
    norms::MetricFamilySpec spec;
    spec.family = norms::FamilyTag::alpha12_beta;
    spec.dim = 4;
    spec.blocks = {1, 1, 2};
    spec.alpha = MatrixXd::Identity(4, 4);
    spec.beta = VectorXd::Zero(4);
    spec.beta[0] = 1.0;
    spec.f = expr::parse("sqrt(1.1*s1^2+0.9*s2+1.2*s3)+0.15*s1", {"s1", "s2", "s3"});
    auto F = norms::make_family(spec);
    VectorXd V = rng.unit_vector(4) * 0.5;
    navigation::NavigationDatum fwd(F, V, 1.0);
    auto Ft = navigation::navigated_norm(fwd);
    navigation::NavigationDatum bwd(Ft, -V, 1.0);
    for (int k = 0; k < 100; ++k) {
      VectorXd w = rng.unit_vector(4) * rng.uniform(0.4, 2.0);
      const double back = navigation::navigate_eval(bwd, w);
      require(std::abs(back - F(w)) <= 1e-10 * F(w), "round trip exceeded 1e-10");
    }
  });

  // ------------------------------------------------------------------ 6
  criterion(6, "Killing navigation preserves flag curvature on S^2 (< 1 min)", [] {
    const auto t0 = std::chrono::steady_clock::now();
    sphere::RoundMetric round(2);
    auto wind = std::make_shared<sphere::LinearKillingField>(sphere::rotation_field(2, 0, 1));
    navigation::RandersSphereMetric randers(2, wind, 0.3);
    for (const auto& f : curvature::random_flags(2, 50, 61)) {
      const double k0 = curvature::flag_curvature_ambient(round, f.p, f.y, f.u);
      VectorXd ytilde = f.y + round.eval_ambient(f.p, f.y) * 0.3 * wind->ambient(f.p);
      const double k1 = curvature::flag_curvature_ambient(randers, f.p, ytilde, f.u);
      require(std::abs(k0 - k1) < 1e-3, "preservation gap " + expr::format_double(k0 - k1));
      require(std::abs(k1 - 1.0) < 5e-4, "K~ deviates from 1 by " + expr::format_double(k1 - 1));
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    require(secs < 60.0, "runtime " + expr::format_double(secs) + " s exceeds 1 min");
  });

  // ------------------------------------------------------------------ 7
  criterion(7, "flow-transported great circles are F~-geodesics", [] {
    sphere::RoundMetric round(2);
    auto rot = sphere::rotation_field(2, 0, 1);
    const double eps = 0.3;
    auto wind = std::make_shared<sphere::LinearKillingField>(rot);
    navigation::RandersSphereMetric randers(2, wind, eps);

    VectorXd p0(3), w0(3);
    p0 << 0.6, -0.64, 0.48;
    p0.normalize();
    w0 << 0.2, 0.9, 0.5;
    w0 -= w0.dot(p0) * p0;
    w0 = curvature::unit_initial(round, p0, w0);
    auto base = curvature::geodesic(round, p0, w0, 4.0, {1e-3, 1e-3});
    auto moved = navigation::killing_transport(base, round, rot, eps);
    auto rep = curvature::geodesic_residual(randers, moved);
    require(rep.max_ode_residual < 1e-5,
            "ODE residual " + expr::format_double(rep.max_ode_residual));
    require(rep.max_unit_speed_drift < 1e-7,
            "speed drift " + expr::format_double(rep.max_unit_speed_drift));
  });

  // ------------------------------------------------------------------ 8
  criterion(8, "S^3 Hopf lengths, epsilon tuning, antipodal map", [] {
    auto hopf = sphere::hopf_field();
    auto wind = std::make_shared<sphere::LinearKillingField>(hopf);
    const double planted = 0.3;
    auto metric = std::make_shared<navigation::RandersSphereMetric>(3, wind, planted);
    VectorXd p0(4);
    p0 << 1, 0, 0, 0;

    const double lp = curvature::closed_geodesic_length(*metric, hopf, +1, p0).length;
    const double lm = curvature::closed_geodesic_length(*metric, hopf, -1, p0).length;
    require(std::abs(1 / lp + 1 / lm - 1 / kPi) < 1e-4,
            "harmonic relation off by " + expr::format_double(1 / lp + 1 / lm - 1 / kPi));

    auto tuned = curvature::tune_epsilon(metric, hopf, p0, kTwoPi);
    require(std::abs(tuned.epsilon_prime - planted) < 1e-6,
            "planted epsilon recovered as " + expr::format_double(tuned.epsilon_prime));
    require(std::abs(tuned.lambda_at_epsilon - kTwoPi) < 1e-5,
            "lambda(eps') = " + expr::format_double(tuned.lambda_at_epsilon));

    // antipodal map: psi^2 = id at the tuned epsilon, displaced off-tune
    auto oriented = std::make_shared<sphere::LinearKillingField>(
        tuned.orientation * hopf.matrix());
    auto tuned_metric = std::make_shared<navigation::NavigatedChartMetric>(
        metric, oriented, tuned.epsilon_prime);
    auto at_tuned = curvature::antipodal_check(*tuned_metric, 1, 6, 71);
    require(at_tuned.constant_curvature_ok, "tuned metric endpoint spread above 1e-3");
    require(at_tuned.max_psi2_displacement < 1e-3,
            "psi^2 displacement at tuned epsilon = " +
                expr::format_double(at_tuned.max_psi2_displacement));
    auto untuned = curvature::antipodal_check(*metric, 1, 6, 71);
    require(untuned.max_psi2_displacement > 1e-2,
            "untuned psi^2 displacement unexpectedly small");
  });

  // ------------------------------------------------------------------ 9
  criterion(9, "reversibility: distance symmetry; reversible + K=1 implies Riemannian", [] {
    auto round = std::make_shared<sphere::RoundMetric>(2);
    auto quartic = std::make_shared<sphere::QuarticMetric>(2, 0.2);
    auto wind = std::make_shared<sphere::LinearKillingField>(sphere::rotation_field(2, 0, 1));
    auto randers = std::make_shared<navigation::RandersSphereMetric>(2, wind, 0.3);
    auto randers0 = std::make_shared<navigation::RandersSphereMetric>(2, wind, 0.0);

    curvature::DistanceOptions opts;
    opts.directions = 240;
    sampling::Rng rng(91);
    for (const auto& nm : {NamedMetric{"round", round}, NamedMetric{"quartic", quartic}}) {
      for (int k = 0; k < 2; ++k) {
        VectorXd a = rng.unit_vector(3), b = rng.unit_vector(3);
        if ((a - b).norm() < 0.4 || (a + b).norm() < 0.4) {
          --k;
          continue;
        }
        const double dab = curvature::distance(*nm.metric, a, b, opts);
        const double dba = curvature::distance(*nm.metric, b, a, opts);
        require(std::abs(dab - dba) < 2e-3,
                nm.name + ": asymmetry " + expr::format_double(std::abs(dab - dba)));
      }
    }

    // reversible metrics with K = 1 on samples must show a vanishing
    // sampled Cartan tensor (they are Riemannian).
    const std::vector<NamedMetric> family = {{"round", round},
                                             {"randers-0.3", randers},
                                             {"randers-0", randers0},
                                             {"quartic", quartic}};
    bool any_gate_passed = false;
    for (const auto& nm : family) {
      const double asym = fiber_reversibility(*nm.metric, 48, 92);
      double kdev = 0.0;
      for (const auto& f : curvature::random_flags(2, 10, 93))
        kdev = std::max(kdev, std::abs(curvature::flag_curvature_ambient(*nm.metric, f.p, f.y,
                                                                         f.u) -
                                       1.0));
      const bool gate = asym < 1e-9 && kdev < 1e-3;
      if (gate) {
        any_gate_passed = true;
        const double cartan = fiber_cartan_norm(*nm.metric, 4, 6, 94);
        require(cartan < 1e-3,
                nm.name + ": reversible with K = 1 but Cartan norm " +
                    expr::format_double(cartan));
      }
      if (nm.name == "randers-0.3")
        require(!(asym < 1e-9), "randers-0.3 unexpectedly reversible");
      if (nm.name == "quartic")
        require(!(kdev < 1e-3), "quartic unexpectedly has K = 1");
    }
    require(any_gate_passed, "no generated metric passed the reversible+K=1 gate");
  });

  // ------------------------------------------------------------------ 10
  criterion(10, "property suites and report determinism", [] {
    // norm homogeneity under the default seed
    auto pres = liealg::build_sp_u1(2);
    auto norm = liealg::random_invariant_norm(pres, 101);
    sampling::Rng rng(sampling::kDefaultSeed);
    for (int k = 0; k < 50; ++k) {
      VectorXd y = rng.unit_vector(7) * rng.uniform(0.3, 2.0);
      const double f = norm(y);
      for (double lam : {0.5, 2.0, 10.0})
        require(std::abs(norm(lam * y) - lam * f) <= 1e-10 * lam * f, "homogeneity");
    }

    // algebra invariants
    for (const char* key : {"so", "su", "u", "sp", "sp_u1", "sp_sp1"}) {
      const int n = (std::string(key) == "so" || std::string(key) == "su") ? 3 : 2;
      auto p = liealg::build_presentation(key, n);
      require(p.decomposition.algebra.max_jacobi_residual() <= 1e-12, "jacobi");
      require(p.decomposition.algebra.max_bi_invariance_residual() <= 1e-12, "bi-invariance");
      require(p.decomposition.max_closure_residual() <= 1e-12, "closure");
      for (int j = 0; j < p.decomposition.dim_h(); ++j) {
        MatrixXd ad = p.decomposition.ad_h_on_m(j);
        for (const auto& block : p.m_blocks)
          for (int i : block)
            for (int r = 0; r < p.dim_m(); ++r) {
              const bool in_block = std::find(block.begin(), block.end(), r) != block.end();
              if (!in_block)
                require(std::abs(ad(r, i)) <= 1e-12, "Ad(H)-block invariance");
            }
      }
    }

    // eta scaling
    VectorXd u = sampling::Rng(103).unit_vector(7);
    auto e1 = gocheck::spray_vector(pres, norm, u);
    auto e2 = gocheck::spray_vector(pres, norm, 2 * u);
    require((e2.value - 4 * e1.value).norm() <= 1e-8 * std::max(1.0, e1.value.norm()),
            "eta(2u) != 4 eta(u)");

    // determinism: identical argv + seed give byte-identical JSON reports
    auto r1 = cli::run_classify("u", 2, std::nullopt, 2, 32, 1e-8, 7);
    auto r2 = cli::run_classify("u", 2, std::nullopt, 2, 32, 1e-8, 7);
    require(r1.report.dump() == r2.report.dump(), "classify reports differ between runs");
    auto n1 = cli::run_navigate(2, "rot:0:1", 0.3, 50, 7);
    auto n2 = cli::run_navigate(2, "rot:0:1", 0.3, 50, 7);
    require(n1.report.dump() == n2.report.dump(), "navigate reports differ between runs");
  });

  const double total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_suite).count();
  std::printf("acceptance suite finished in %.1f s: %s\n", total,
              failures == 0 ? "all criteria PASS" : "FAILURES present");
  return failures == 0 ? 0 : 1;
}
