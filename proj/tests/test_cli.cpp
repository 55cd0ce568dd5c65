#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>

#include "gosphere/cli.hpp"
#include "gosphere/errors.hpp"

using namespace gosphere;

TEST_CASE("cli: field parsing") {
  CHECK(cli::parse_field("hopf", 3)->sphere_dim() == 3);
  CHECK_THROWS_AS(cli::parse_field("hopf", 2), InvalidInputError);
  auto rot = cli::parse_field("rot:0:2", 2);
  Eigen::VectorXd p(3);
  p << 0, 1, 0;
  CHECK(rot->ambient(p).norm() == 0.0);  // rotation axis
  CHECK_THROWS_AS(cli::parse_field("rot:0:0", 2), InvalidInputError);
  CHECK_THROWS_AS(cli::parse_field("bogus", 2), InvalidInputError);

  // x3 d/dx2 - x2 d/dx3 style expression field (tangent rotation)
  auto ef = cli::parse_field("expr:0;-x3;x2", 2);
  Eigen::VectorXd q(3);
  q << 0, 0.6, 0.8;
  CHECK((ef->ambient(q) - Eigen::Vector3d(0, -0.8, 0.6)).norm() < 1e-15);
  // non-tangent field is rejected
  CHECK_THROWS_AS(cli::parse_field("expr:1;0;0", 2), InvalidInputError);
}

TEST_CASE("cli: norm-check verdicts") {
  auto good = cli::run_norm_check(std::nullopt, std::string("sqrt(s1^2+s2)+0.2*s1"), 3, 32, 5);
  CHECK(good.exit_code == 0);
  CHECK(good.report["verdicts"]["all"] == "PASS");
  CHECK(good.report["verdicts"]["reversible"] == false);
  CHECK(good.report["schema"] == 1);

  // |beta|_alpha >= 1 gets rejected by the convexity check: exit 1
  nlohmann::json bad;
  bad["family"] = "randers";
  bad["dim"] = 2;
  bad["blocks"] = {2};
  bad["f_expr"] = "";
  bad["alpha_matrix"] = {{1.0, 0.0}, {0.0, 1.0}};
  bad["beta_covector"] = {1.2, 0.0};
  auto res = cli::run_norm_check(bad.dump(), std::nullopt, 0, 16, 5);
  CHECK(res.exit_code == 1);
  CHECK(res.report["verdicts"]["all"] == "FAIL");
}

TEST_CASE("cli: algebra-build report") {
  auto res = cli::run_algebra_build("sp_u1", 2);
  CHECK(res.exit_code == 0);
  CHECK(res.report["presentation"]["sphere_dim"] == 7);
  CHECK(res.report["residuals"]["jacobi"].get<double>() <= 1e-12);
  CHECK(res.report["residuals"]["realization_agreement"].get<double>() <= 1e-13);
}

TEST_CASE("cli: go-check and classify exit semantics") {
  auto pass = cli::run_go_check("u", 2, std::nullopt, 1, 32, 1e-8, 3);
  CHECK(pass.exit_code == 0);
  CHECK(pass.report["verdicts"]["all"] == "PASS");

  auto fail = cli::run_go_check("sp", 2, std::nullopt, 1, 32, 1e-8, 3);
  CHECK(fail.exit_code == 1);
  CHECK(fail.report["verdicts"]["all"] == "FAIL");
  CHECK(fail.report["verdicts"]["runs"][0].contains("witness"));

  auto table = cli::run_classify("u", 2, std::nullopt, 2, 32, 1e-8, 3);
  CHECK(table.exit_code == 0);
  CHECK(table.report["verdicts"]["matches_expected_table"] == true);
}

TEST_CASE("cli: dispatch end to end") {
  const char* tmp = "/tmp/gosphere_test_report.json";
  std::remove(tmp);
  const char* argv1[] = {"gosphere", "classify", "--space", "u",      "--samples", "16",
                         "--norms",  "1",        "--seed",  "3",      "--json",    tmp};
  CHECK(cli::dispatch(12, argv1) == 0);
  std::ifstream in(tmp);
  REQUIRE(in.good());
  nlohmann::json report;
  in >> report;
  CHECK(report["schema"] == 1);
  CHECK(report["command"] == "classify");
  CHECK(report["seed"] == 3);

  const char* argv2[] = {"gosphere", "classify", "--space", "nonsense"};
  CHECK(cli::dispatch(4, argv2) == 2);

  const char* argv3[] = {"gosphere"};
  CHECK(cli::dispatch(1, argv3) == 2);  // missing subcommand is a usage error

  const char* argv4[] = {"gosphere", "norm-check", "--f-expr", "s1+*s2", "--dim", "3"};
  CHECK(cli::dispatch(6, argv4) == 2);  // syntax error in the expression
}

TEST_CASE("cli: navigation datum JSON") {
  nlohmann::json datum;
  datum["h_spec"] = {{1.0, 0.0}, {0.0, 1.0}};
  datum["W_expr"] = {0.4, 0.1};
  datum["epsilon"] = 1.0;
  auto res = cli::run_navigate_datum(datum.dump(), 50, 7);
  CHECK(res.exit_code == 0);
  CHECK(res.report["residuals"]["lambda"].get<double>() == doctest::Approx(0.17));

  nlohmann::json chart_datum;
  chart_datum["h_spec"] = "round";
  chart_datum["sphere_dim"] = 2;
  chart_datum["W_expr"] = "rot:0:1";
  chart_datum["epsilon"] = 0.25;
  auto res2 = cli::run_navigate_datum(chart_datum.dump(), 40, 7);
  CHECK(res2.exit_code == 0);
}

TEST_CASE("cli: reports are deterministic for fixed argv and seed") {
  auto a = cli::run_go_check("sp_u1", 2, std::nullopt, 1, 24, 1e-8, 11);
  auto b = cli::run_go_check("sp_u1", 2, std::nullopt, 1, 24, 1e-8, 11);
  CHECK(a.report.dump() == b.report.dump());

  auto c = cli::run_flag(2, "rot:0:1", 0.3, 4, 5e-4, true, 11);
  auto d = cli::run_flag(2, "rot:0:1", 0.3, 4, 5e-4, true, 11);
  CHECK(c.report.dump() == d.report.dump());
  CHECK(c.exit_code == 0);
  CHECK(c.report["residuals"]["K_values"].size() == 4);
}
