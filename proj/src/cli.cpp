#include "gosphere/cli.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include <chrono>

#include "gosphere/curvature.hpp"
#include "gosphere/errors.hpp"
#include "gosphere/gocheck.hpp"
#include "gosphere/liealg.hpp"
#include "gosphere/navigation.hpp"
#include "gosphere/norms.hpp"

namespace gosphere::cli {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.283185307179586476925287;

using nlohmann::ordered_json;
using Eigen::MatrixXd;
using Eigen::VectorXd;

ordered_json base_report(const std::string& command, std::uint64_t seed) {
  ordered_json j;
  j["schema"] = 1;
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = ordered_json::object();
  return j;
}

std::vector<double> to_std(const VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

const char* pass_fail(bool ok) { return ok ? "PASS" : "FAIL"; }

int presentation_default_n(const std::string& space) {
  return (space == "so" || space == "su") ? 3 : 2;
}

}  // namespace

std::shared_ptr<sphere::VectorField> parse_field(const std::string& name, int sphere_dim) {
  if (name == "hopf") {
    if (sphere_dim != 3)
      throw InvalidInputError("field 'hopf' lives on S^3 (got sphere dimension " +
                              std::to_string(sphere_dim) + ")");
    return std::make_shared<sphere::LinearKillingField>(sphere::hopf_field());
  }
  if (name.rfind("rot:", 0) == 0) {
    std::istringstream is(name.substr(4));
    int i = -1, j = -1;
    char colon = 0;
    is >> i >> colon >> j;
    if (!is || colon != ':' || i < 0 || j < 0 || i > sphere_dim || j > sphere_dim || i == j)
      throw InvalidInputError("malformed rotation field '" + name +
                              "', expected rot:i:j with 0 <= i != j <= n");
    return std::make_shared<sphere::LinearKillingField>(sphere::rotation_field(sphere_dim, i, j));
  }
  if (name.rfind("expr:", 0) == 0) {
    std::vector<std::string> vars;
    for (int k = 1; k <= sphere_dim + 1; ++k) vars.push_back("x" + std::to_string(k));
    std::vector<expr::Ast> comps;
    std::string rest = name.substr(5);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      std::size_t next = rest.find(';', pos);
      std::string piece = rest.substr(pos, next == std::string::npos ? next : next - pos);
      comps.push_back(expr::parse(piece, vars));
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    return std::make_shared<sphere::ExprVectorField>(sphere_dim, std::move(comps));
  }
  throw InvalidInputError("unknown field '" + name + "' (use hopf, rot:i:j, or expr:...)");
}

namespace {

norms::MinkowskiNorm norm_from_inputs(const std::optional<std::string>& norm_file_json,
                                      const std::optional<std::string>& f_expr, int dim,
                                      ordered_json& config) {
  if (norm_file_json) {
    auto spec = norms::MetricFamilySpec::from_json(nlohmann::json::parse(*norm_file_json));
    config["norm"] = nlohmann::json::parse(spec.to_json().dump());
    return norms::make_family(spec);
  }
  if (!f_expr) throw InvalidInputError("need --norm-file or --f-expr");
  if (dim < 2) throw InvalidInputError("--f-expr needs --dim >= 2");
  norms::MetricFamilySpec spec;
  spec.dim = dim;
  spec.alpha = MatrixXd::Identity(dim, dim);
  spec.beta = VectorXd::Zero(dim);
  spec.beta[0] = 1.0;
  // arity decides the family: f(s1,s2) -> (alpha,beta); f(s1,s2,s3) -> (a1,a2,beta)
  bool uses_s3 = f_expr->find("s3") != std::string::npos;
  if (uses_s3) {
    if (dim < 4) throw InvalidInputError("3-argument family functions need --dim >= 4");
    spec.family = norms::FamilyTag::alpha12_beta;
    spec.blocks = {1, 2, dim - 3};
    spec.f = expr::parse(*f_expr, {"s1", "s2", "s3"});
  } else {
    spec.family = norms::FamilyTag::alpha_beta;
    spec.blocks = {1, dim - 1};
    spec.f = expr::parse(*f_expr, {"s1", "s2"});
  }
  config["norm"] = nlohmann::json::parse(spec.to_json().dump());
  return norms::make_family(spec);
}

}  // namespace

CommandResult run_norm_check(const std::optional<std::string>& norm_file_json,
                             const std::optional<std::string>& f_expr, int dim, int samples,
                             std::uint64_t seed) {
  CommandResult res;
  res.report = base_report("norm-check", seed);
  res.report["config"]["samples"] = samples;

  std::ostringstream human;
  bool all_ok = true;
  try {
    auto norm = norm_from_inputs(norm_file_json, f_expr, dim, res.report["config"]);

    sampling::Rng rng(seed);
    double homo_worst = 0.0;
    for (int k = 0; k < samples; ++k) {
      VectorXd y = rng.unit_vector(norm.dim()) * rng.uniform(0.3, 2.0);
      const double f = norm(y);
      for (double lam : {0.5, 2.0, 10.0})
        homo_worst = std::max(homo_worst, std::abs(norm(lam * y) - lam * f) / (lam * f));
    }
    const bool homo_ok = homo_worst < 1e-10;
    all_ok = all_ok && homo_ok;
    res.report["verdicts"]["homogeneity"] = pass_fail(homo_ok);
    res.report["residuals"]["homogeneity_rel"] = homo_worst;
    human << "homogeneity: max rel " << homo_worst << " [" << pass_fail(homo_ok) << "]\n";

    bool convex_ok = true;
    std::string convex_msg = "positive definite on the sample net";
    try {
      norms::check_convexity_on_net(norm, 2 * norm.dim() + 16, seed);
    } catch (const NotStronglyConvexError& e) {
      convex_ok = false;
      convex_msg = e.what();
    }
    all_ok = all_ok && convex_ok;
    res.report["verdicts"]["convexity"] = pass_fail(convex_ok);
    res.report["residuals"]["convexity_note"] = convex_msg;
    human << "convexity: " << convex_msg << " [" << pass_fail(convex_ok) << "]\n";

    auto rev = norms::check_reversible(norm, samples, seed);
    res.report["verdicts"]["reversible"] = rev.reversible;
    res.report["residuals"]["max_asymmetry"] = rev.max_asymmetry;
    human << "reversible: " << (rev.reversible ? "yes" : "no") << " (max asymmetry "
          << rev.max_asymmetry << ")\n";
  } catch (const NotStronglyConvexError& e) {
    all_ok = false;
    res.report["verdicts"]["construction"] = "FAIL";
    res.report["residuals"]["construction_error"] = e.what();
    human << "construction failed: " << e.what() << "\n";
  }

  res.exit_code = all_ok ? 0 : 1;
  res.report["verdicts"]["all"] = pass_fail(all_ok);
  res.human = human.str();
  return res;
}

CommandResult run_algebra_build(const std::string& space, int n) {
  CommandResult res;
  res.report = base_report("algebra-build", 0);
  res.report["config"]["space"] = space;
  res.report["config"]["n"] = n;

  auto pres = liealg::build_presentation(space, n);
  const auto& alg = pres.decomposition.algebra;
  res.report["residuals"]["jacobi"] = alg.max_jacobi_residual();
  res.report["residuals"]["antisymmetry"] = alg.max_antisymmetry_residual();
  res.report["residuals"]["bi_invariance"] = alg.max_bi_invariance_residual();
  res.report["residuals"]["reductive_closure"] = pres.decomposition.max_closure_residual();
  res.report["residuals"]["realization_agreement"] = alg.realization_agreement;
  res.report["presentation"] = nlohmann::json::parse(pres.to_json().dump());
  res.report["verdicts"]["all"] = "PASS";

  std::ostringstream human;
  human << pres.name << ": dim g = " << alg.dim << ", dim m = " << pres.dim_m()
        << ", sphere dim = " << pres.sphere_dim << "\n"
        << "jacobi " << alg.max_jacobi_residual() << ", bi-invariance "
        << alg.max_bi_invariance_residual() << ", realizations "
        << alg.realization_agreement << " [PASS]\n";
  res.human = human.str();
  res.exit_code = 0;
  return res;
}

namespace {

ordered_json go_report_entry(const liealg::SpherePresentation& pres,
                             const norms::MinkowskiNorm& norm, const std::string& norm_label,
                             int samples, double tol, std::uint64_t seed, bool& any_fail,
                             bool& any_indet, std::ostringstream& human) {
  auto report = gocheck::go_verdict(pres, norm, samples, tol, seed);
  ordered_json e;
  e["norm"] = norm_label;
  if (norm.family_spec())
    e["norm_spec"] = nlohmann::json::parse(norm.family_spec()->to_json().dump());
  e["verdict"] = gocheck::to_string(report.verdict);
  e["max_residual3"] = report.max_residual3;
  e["max_residual4"] = report.max_residual4;
  e["tol"] = tol;
  e["samples"] = samples;
  e["seed"] = seed;
  e["conditions_agree"] = true;
  for (const auto& c : report.certificates)
    if ((c.residual3 < c.tol) != (c.residual4 < c.tol)) e["conditions_agree"] = false;
  if (report.witness >= 0) {
    const auto& c = report.certificates[static_cast<std::size_t>(report.witness)];
    ordered_json w;
    w["u"] = to_std(c.u);
    w["u_prime"] = to_std(c.u_prime);
    w["residual3"] = c.residual3;
    w["residual4"] = c.residual4;
    w["tol"] = c.tol;
    w["seed"] = seed;
    e["witness"] = std::move(w);
  }
  if (report.verdict == gocheck::Verdict::Fail) any_fail = true;
  if (report.verdict == gocheck::Verdict::Indeterminate) any_indet = true;
  human << "  " << pres.name << "  " << norm_label << "  "
        << gocheck::to_string(report.verdict) << "  (residual4 max " << report.max_residual4
        << ")\n";
  return e;
}

}  // namespace

CommandResult run_go_check(const std::string& space, int n,
                           const std::optional<std::string>& norm_file_json, int norms_count,
                           int samples, double tol, std::uint64_t seed) {
  CommandResult res;
  res.report = base_report("go-check", seed);
  res.report["config"]["space"] = space;
  res.report["config"]["n"] = n;
  res.report["config"]["samples"] = samples;
  res.report["config"]["tol"] = tol;
  res.report["config"]["norms"] = norms_count;

  auto pres = liealg::build_presentation(space, n);
  std::ostringstream human;
  human << "go-check " << pres.name << " (expected GO: "
        << (pres.expected_go_verdict ? "yes" : "generically no") << ")\n";

  bool any_fail = false, any_indet = false;
  ordered_json entries = ordered_json::array();
  if (norm_file_json) {
    auto spec = norms::MetricFamilySpec::from_json(nlohmann::json::parse(*norm_file_json));
    auto norm = norms::make_family(spec);
    entries.push_back(
        go_report_entry(pres, norm, "file", samples, tol, seed, any_fail, any_indet, human));
  } else {
    for (int k = 0; k < norms_count; ++k) {
      auto norm = liealg::random_invariant_norm(pres, seed + static_cast<std::uint64_t>(k));
      entries.push_back(go_report_entry(pres, norm, "random-" + std::to_string(k), samples, tol,
                                        seed + static_cast<std::uint64_t>(k), any_fail, any_indet,
                                        human));
    }
  }
  res.report["verdicts"]["runs"] = std::move(entries);
  res.report["verdicts"]["all"] = any_fail ? "FAIL" : (any_indet ? "INDETERMINATE" : "PASS");
  res.exit_code = (any_fail || any_indet) ? 1 : 0;
  res.human = human.str();
  return res;
}

CommandResult run_classify(const std::string& space_or_all, int n,
                           const std::optional<std::string>& norm_file_json, int norms_count,
                           int samples, double tol, std::uint64_t seed) {
  CommandResult res;
  res.report = base_report("classify", seed);
  res.report["config"]["space"] = space_or_all;
  res.report["config"]["samples"] = samples;
  res.report["config"]["tol"] = tol;
  res.report["config"]["norms"] = norms_count;

  std::vector<std::pair<std::string, int>> spaces;
  if (space_or_all == "all") {
    spaces = {{"so", 3}, {"su", 3}, {"u", 2}, {"sp_u1", 2}, {"sp_sp1", 2}, {"sp", 2}};
  } else {
    spaces = {{space_or_all, n > 0 ? n : presentation_default_n(space_or_all)}};
    res.report["config"]["n"] = spaces[0].second;
  }

  std::ostringstream human;
  human << "classify (verdict table)\n";
  bool any_fail = false, any_indet = false, table_matches = true;
  ordered_json table = ordered_json::array();
  for (const auto& [space, nn] : spaces) {
    auto pres = liealg::build_presentation(space, nn);
    ordered_json row;
    row["space"] = pres.name;
    row["key"] = space;
    row["n"] = nn;
    row["expected_go"] = pres.expected_go_verdict;
    ordered_json entries = ordered_json::array();
    bool row_fail = false, row_indet = false;
    if (norm_file_json) {
      auto spec = norms::MetricFamilySpec::from_json(nlohmann::json::parse(*norm_file_json));
      auto norm = norms::make_family(spec);
      entries.push_back(
          go_report_entry(pres, norm, "file", samples, tol, seed, row_fail, row_indet, human));
    } else {
      for (int k = 0; k < norms_count; ++k) {
        auto norm = liealg::random_invariant_norm(pres, seed + static_cast<std::uint64_t>(k));
        entries.push_back(go_report_entry(pres, norm, "random-" + std::to_string(k), samples,
                                          tol, seed + static_cast<std::uint64_t>(k), row_fail,
                                          row_indet, human));
      }
    }
    const bool got_go = !row_fail && !row_indet;
    row["verdict"] = row_fail ? "FAIL" : (row_indet ? "INDETERMINATE" : "PASS");
    row["matches_expectation"] = got_go == pres.expected_go_verdict;
    table_matches = table_matches && (got_go == pres.expected_go_verdict);
    row["runs"] = std::move(entries);
    table.push_back(std::move(row));
    any_fail = any_fail || row_fail;
    any_indet = any_indet || row_indet;
  }
  res.report["verdicts"]["table"] = std::move(table);
  res.report["verdicts"]["matches_expected_table"] = table_matches;
  res.report["verdicts"]["all"] = any_fail ? "FAIL" : (any_indet ? "INDETERMINATE" : "PASS");
  human << "table matches expectations: " << (table_matches ? "yes" : "NO") << "\n";
  res.exit_code = (any_fail || any_indet) ? 1 : 0;
  res.human = human.str();
  return res;
}

CommandResult run_navigate(int sphere_dim, const std::string& field, double epsilon, int samples,
                           std::uint64_t seed, const std::string& curve_csv_path) {
  CommandResult res;
  res.report = base_report("navigate", seed);
  res.report["config"]["sphere"] = sphere_dim;
  res.report["config"]["field"] = field;
  res.report["config"]["epsilon"] = epsilon;
  res.report["config"]["samples"] = samples;

  auto wind = parse_field(field, sphere_dim);
  auto round = std::make_shared<sphere::RoundMetric>(sphere_dim);
  auto closed = std::make_shared<navigation::RandersSphereMetric>(sphere_dim, wind, epsilon);
  navigation::NavigatedChartMetric implicit(round, wind, epsilon);
  auto reversed = std::make_shared<sphere::ScaledVectorField>(wind, -1.0);
  navigation::NavigatedChartMetric inverse(closed, reversed, epsilon);

  sampling::Rng rng(seed);
  double worst_closed = 0.0, worst_roundtrip = 0.0, worst_wind_ball = 0.0;
  for (int k = 0; k < samples; ++k) {
    VectorXd p = rng.unit_vector(sphere_dim + 1);
    VectorXd w = rng.unit_vector(sphere_dim + 1);
    w -= w.dot(p) * p;
    if (w.norm() < 0.2) {
      --k;
      continue;
    }
    const double a = closed->eval_ambient(p, w);
    const double b = implicit.eval_ambient(p, w);
    worst_closed = std::max(worst_closed, std::abs(a - b) / b);
    const double back = inverse.eval_ambient(p, w);
    const double round_val = w.norm();
    worst_roundtrip = std::max(worst_roundtrip, std::abs(back - round_val) / round_val);
    const VectorXd wv = epsilon * wind->ambient(p);
    if (wv.norm() > 0) worst_wind_ball = std::max(worst_wind_ball, closed->eval_ambient(p, wv));
  }
  const bool closed_ok = worst_closed < 1e-9;
  const bool trip_ok = worst_roundtrip < 1e-10;
  const bool ball_ok = worst_wind_ball < 1.0;
  res.report["residuals"]["closed_vs_implicit_rel"] = worst_closed;
  res.report["residuals"]["round_trip_rel"] = worst_roundtrip;
  res.report["residuals"]["max_F_of_wind"] = worst_wind_ball;
  res.report["verdicts"]["closed_form"] = pass_fail(closed_ok);
  res.report["verdicts"]["round_trip"] = pass_fail(trip_ok);
  res.report["verdicts"]["wind_inside_unit_ball"] = pass_fail(ball_ok);
  const bool all_ok = closed_ok && trip_ok && ball_ok;
  res.report["verdicts"]["all"] = pass_fail(all_ok);

  std::ostringstream human;
  human << "closed form vs implicit navigation: max rel " << worst_closed << " ["
        << pass_fail(closed_ok) << "]\n"
        << "round trip (F,V),(F~,-V): max rel " << worst_roundtrip << " [" << pass_fail(trip_ok)
        << "]\n"
        << "F~(eps V) < 1 everywhere sampled: max " << worst_wind_ball << " ["
        << pass_fail(ball_ok) << "]\n";

  if (!curve_csv_path.empty()) {
    // demo transport: a unit-speed round geodesic moved by the wind flow
    auto killing = std::dynamic_pointer_cast<const sphere::LinearKillingField>(wind);
    if (!killing)
      throw InvalidInputError("--curve-csv needs a linear Killing wind field");
    sampling::Rng crng(seed);
    VectorXd p0 = crng.unit_vector(sphere_dim + 1);
    VectorXd w0 = crng.unit_vector(sphere_dim + 1);
    w0 -= w0.dot(p0) * p0;
    w0 = curvature::unit_initial(*round, p0, w0);
    auto base_curve = curvature::geodesic(*round, p0, w0, kTwoPi, {2e-3, 2e-2});
    auto moved = navigation::killing_transport(base_curve, *round, *killing, epsilon);
    std::ofstream out(curve_csv_path);
    out << curvature::curve_to_csv(moved);
    human << "transported curve written to " << curve_csv_path << "\n";
  }

  res.human = human.str();
  res.exit_code = all_ok ? 0 : 1;
  return res;
}

CommandResult run_navigate_datum(const std::string& datum_json, int samples,
                                 std::uint64_t seed) {
  const auto j = nlohmann::json::parse(datum_json);
  const double epsilon = j.value("epsilon", 1.0);

  if (j.at("h_spec").is_string() && j.at("h_spec").get<std::string>() == "round") {
    int sphere_dim = j.value("sphere_dim", 2);
    std::string field;
    if (j.at("W_expr").is_array()) {
      field = "expr:";
      bool first = true;
      for (const auto& comp : j.at("W_expr")) {
        if (!first) field += ";";
        field += comp.get<std::string>();
        first = false;
      }
    } else {
      field = j.at("W_expr").get<std::string>();
    }
    auto res = run_navigate(sphere_dim, field, epsilon, samples, seed);
    res.report["config"]["datum"] = nlohmann::json::parse(datum_json);
    return res;
  }

  // single-fiber mode: h is an SPD matrix, W a fixed vector
  CommandResult res;
  res.report = base_report("navigate", seed);
  res.report["config"]["datum"] = nlohmann::json::parse(datum_json);
  res.report["config"]["samples"] = samples;
  const auto rows = j.at("h_spec").get<std::vector<std::vector<double>>>();
  const int n = static_cast<int>(rows.size());
  MatrixXd h(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) h(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  const auto wv = j.at("W_expr").get<std::vector<double>>();
  if (static_cast<int>(wv.size()) != n)
    throw InvalidInputError("navigation datum: W has wrong dimension");
  VectorXd W(n);
  for (int i = 0; i < n; ++i) W[i] = wv[static_cast<std::size_t>(i)];

  auto data = navigation::randers_from_navigation(h, epsilon * W);
  auto closed = navigation::randers_norm(data);
  navigation::NavigationDatum datum(norms::make_riemannian(h), W, epsilon);
  sampling::Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    VectorXd y = rng.unit_vector(n) * rng.uniform(0.3, 2.0);
    const double a = closed(y);
    const double b = navigation::navigate_eval(datum, y);
    worst = std::max(worst, std::abs(a - b) / b);
  }
  const bool ok = worst < 1e-9;
  res.report["residuals"]["closed_vs_implicit_rel"] = worst;
  res.report["residuals"]["lambda"] = data.lambda;
  res.report["verdicts"]["closed_form"] = pass_fail(ok);
  res.report["verdicts"]["all"] = pass_fail(ok);
  std::ostringstream human;
  human << "fiber navigation, lambda = " << data.lambda
        << ": closed form vs implicit max rel " << worst << " [" << pass_fail(ok) << "]\n";
  res.human = human.str();
  res.exit_code = ok ? 0 : 1;
  return res;
}

CommandResult run_flag(int sphere_dim, const std::string& field, double epsilon, int flags,
                       double tol, bool check_preservation, std::uint64_t seed) {
  CommandResult res;
  res.report = base_report("flag", seed);
  res.report["config"]["sphere"] = sphere_dim;
  res.report["config"]["field"] = field;
  res.report["config"]["epsilon"] = epsilon;
  res.report["config"]["flags"] = flags;
  res.report["config"]["tol"] = tol;

  sphere::RoundMetric round(sphere_dim);
  std::shared_ptr<sphere::VectorField> wind;
  std::shared_ptr<sphere::ChartMetric> metric;
  if (epsilon > 0) {
    wind = parse_field(field, sphere_dim);
    metric = std::make_shared<navigation::RandersSphereMetric>(sphere_dim, wind, epsilon);
  } else {
    metric = std::make_shared<sphere::RoundMetric>(sphere_dim);
  }

  double max_dev = 0.0, max_pres = 0.0;
  ordered_json k_values = ordered_json::array();
  auto net = curvature::random_flags(sphere_dim, flags, seed);
  for (const auto& f : net) {
    VectorXd y = f.y;
    if (epsilon > 0 && check_preservation) {
      const double k0 = curvature::flag_curvature_ambient(round, f.p, f.y, f.u);
      VectorXd ytilde = f.y + round.eval_ambient(f.p, f.y) * epsilon * wind->ambient(f.p);
      const double k1 = curvature::flag_curvature_ambient(*metric, f.p, ytilde, f.u);
      max_pres = std::max(max_pres, std::abs(k0 - k1));
      max_dev = std::max(max_dev, std::abs(k1 - 1.0));
      k_values.push_back(k1);
    } else {
      const double k = curvature::flag_curvature_ambient(*metric, f.p, y, f.u);
      max_dev = std::max(max_dev, std::abs(k - 1.0));
      k_values.push_back(k);
    }
  }
  const bool const_ok = max_dev < tol;
  const bool pres_ok = !check_preservation || max_pres < 1e-3;
  res.report["residuals"]["max_abs_K_minus_1"] = max_dev;
  res.report["residuals"]["K_values"] = std::move(k_values);
  res.report["verdicts"]["constant_curvature"] = pass_fail(const_ok);
  std::ostringstream human;
  human << "max |K - 1| over " << flags << " flags: " << max_dev << " [" << pass_fail(const_ok)
        << "]\n";
  if (check_preservation) {
    res.report["residuals"]["max_preservation_gap"] = max_pres;
    res.report["verdicts"]["navigation_preserves_K"] = pass_fail(pres_ok);
    human << "max |K - K~| under navigation: " << max_pres << " [" << pass_fail(pres_ok)
          << "]\n";
  }
  const bool all_ok = const_ok && pres_ok;
  res.report["verdicts"]["all"] = pass_fail(all_ok);
  res.exit_code = all_ok ? 0 : 1;
  res.human = human.str();
  return res;
}

CommandResult run_tune_epsilon(int sphere_dim, const std::string& field, double planted_epsilon,
                               double target_lambda, std::uint64_t seed) {
  CommandResult res;
  res.report = base_report("tune-epsilon", seed);
  res.report["config"]["sphere"] = sphere_dim;
  res.report["config"]["field"] = field;
  res.report["config"]["epsilon"] = planted_epsilon;
  res.report["config"]["target_lambda"] = target_lambda;

  auto wind = parse_field(field, sphere_dim);
  std::shared_ptr<const sphere::ChartMetric> metric;
  if (planted_epsilon > 0)
    metric = std::make_shared<navigation::RandersSphereMetric>(sphere_dim, wind, planted_epsilon);
  else
    metric = std::make_shared<sphere::RoundMetric>(sphere_dim);

  auto killing = std::dynamic_pointer_cast<sphere::LinearKillingField>(wind);
  if (!killing) throw InvalidInputError("tune-epsilon needs a linear Killing field");

  sampling::Rng rng(seed);
  VectorXd p0 = rng.unit_vector(sphere_dim + 1);
  auto result = curvature::tune_epsilon(metric, *killing, p0, target_lambda);

  const bool lambda_ok = std::abs(result.lambda_at_epsilon - target_lambda) < 1e-5;
  res.report["residuals"]["epsilon_prime"] = result.epsilon_prime;
  res.report["residuals"]["lambda_at_epsilon"] = result.lambda_at_epsilon;
  res.report["residuals"]["lambda_minus"] = result.lambda_minus;
  res.report["residuals"]["lambda_plus"] = result.lambda_plus;
  res.report["residuals"]["orientation"] = result.orientation;
  std::ostringstream human;
  human << "lambda- = " << result.lambda_minus << ", lambda+ = " << result.lambda_plus << "\n"
        << "epsilon' = " << result.epsilon_prime << " with lambda(epsilon') = "
        << result.lambda_at_epsilon << " [" << pass_fail(lambda_ok) << "]\n";
  bool planted_ok = true;
  if (planted_epsilon > 0 && std::abs(target_lambda - kTwoPi) < 1e-6) {
    const double err = std::abs(result.epsilon_prime - planted_epsilon);
    planted_ok = err < 1e-6;
    res.report["residuals"]["planted_epsilon_error"] = err;
    res.report["verdicts"]["recovers_planted_epsilon"] = pass_fail(planted_ok);
    human << "planted epsilon recovery error: " << err << " [" << pass_fail(planted_ok)
          << "]\n";
  }
  const bool all_ok = lambda_ok && planted_ok;
  res.report["verdicts"]["lambda_target"] = pass_fail(lambda_ok);
  res.report["verdicts"]["all"] = pass_fail(all_ok);
  res.exit_code = all_ok ? 0 : 1;
  res.human = human.str();
  return res;
}

CommandResult run_distances(int sphere_dim, const std::string& field, double epsilon, int pairs,
                            int directions, std::uint64_t seed) {
  CommandResult res;
  res.report = base_report("distances", seed);
  res.report["config"]["sphere"] = sphere_dim;
  res.report["config"]["field"] = field;
  res.report["config"]["epsilon"] = epsilon;
  res.report["config"]["pairs"] = pairs;
  res.report["config"]["directions"] = directions;

  std::shared_ptr<sphere::ChartMetric> metric;
  bool reversible = true;
  if (epsilon > 0) {
    auto wind = parse_field(field, sphere_dim);
    metric = std::make_shared<navigation::RandersSphereMetric>(sphere_dim, wind, epsilon);
    reversible = false;
  } else {
    metric = std::make_shared<sphere::RoundMetric>(sphere_dim);
  }

  curvature::DistanceOptions opts;
  opts.directions = directions;

  sampling::Rng rng(seed);
  std::ostringstream human;
  ordered_json rows = ordered_json::array();
  double max_asym = 0.0;
  for (int k = 0; k < pairs; ++k) {
    VectorXd a = rng.unit_vector(sphere_dim + 1);
    VectorXd b = rng.unit_vector(sphere_dim + 1);
    if ((a - b).norm() < 0.3 || (a + b).norm() < 0.3) {
      --k;
      continue;
    }
    const double dab = curvature::distance(*metric, a, b, opts);
    const double dba = curvature::distance(*metric, b, a, opts);
    ordered_json row;
    row["a"] = to_std(a);
    row["b"] = to_std(b);
    row["d_ab"] = dab;
    row["d_ba"] = dba;
    row["asymmetry"] = std::abs(dab - dba);
    rows.push_back(std::move(row));
    max_asym = std::max(max_asym, std::abs(dab - dba));
    human << "d(a,b) = " << dab << ", d(b,a) = " << dba << "\n";
  }
  res.report["verdicts"]["pairs"] = std::move(rows);
  res.report["residuals"]["max_asymmetry"] = max_asym;
  bool all_ok = true;
  if (reversible) {
    all_ok = max_asym < 2e-3;
    res.report["verdicts"]["directed_symmetry"] = pass_fail(all_ok);
    human << "directed-distance asymmetry (reversible metric): " << max_asym << " ["
          << pass_fail(all_ok) << "]\n";
  }
  res.report["verdicts"]["all"] = pass_fail(all_ok);
  res.exit_code = all_ok ? 0 : 1;
  res.human = human.str();
  return res;
}

int dispatch(int argc, const char* const* argv) {
  CLI::App app{
      "gosphere: geodesic-orbit checks and Zermelo/Killing navigation on Finsler spheres"};
  app.require_subcommand(1);

  std::string space = "sp_u1", field = "hopf";
  int n = 0, dim = 0, samples = 256, norms_count = 3, flags = 50, pairs = 3, directions = 720;
  double tol = 1e-8, epsilon = 0.3, target_lambda = kTwoPi, flag_tol = 5e-4;
  std::uint64_t seed = sampling::kDefaultSeed;
  std::string norm_file, json_path, f_expr;
  bool check_preservation = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "deterministic seed echoed in reports");
    sub->add_option("--json", json_path, "write the JSON report to this path");
  };

  auto* c_norm = app.add_subcommand("norm-check", "validate a Minkowski norm spec");
  c_norm->add_option("--norm-file", norm_file, "metric spec JSON file");
  c_norm->add_option("--f-expr", f_expr,
                     "family function in s1,s2[,s3]; smooth grammar (no abs/min/max) so "
                     "Hessians exist");
  c_norm->add_option("--dim", dim, "norm dimension for --f-expr");
  c_norm->add_option("--samples", samples, "sample count");
  add_common(c_norm);

  auto* c_alg = app.add_subcommand("algebra-build", "build a sphere presentation");
  c_alg->add_option("--space", space, "so|su|u|sp|sp_u1|sp_sp1")->required();
  c_alg->add_option("--n", n, "rank parameter");
  add_common(c_alg);

  auto* c_go = app.add_subcommand("go-check", "geodesic-orbit conditions (3)/(4)");
  c_go->add_option("--space", space)->required();
  c_go->add_option("--n", n);
  c_go->add_option("--norm-file", norm_file);
  c_go->add_option("--norms", norms_count, "number of random invariant norms");
  c_go->add_option("--samples", samples);
  c_go->add_option("--tol", tol);
  add_common(c_go);

  auto* c_cls = app.add_subcommand("classify", "reproduce the GO verdict table");
  c_cls->add_option("--space", space, "space key or 'all'");
  c_cls->add_option("--n", n);
  c_cls->add_option("--norm-file", norm_file);
  c_cls->add_option("--norms", norms_count);
  c_cls->add_option("--samples", samples);
  c_cls->add_option("--tol", tol);
  add_common(c_cls);

  std::string datum_file, curve_csv;
  auto* c_nav = app.add_subcommand("navigate", "navigation correspondence checks");
  c_nav->add_option("--sphere", dim, "sphere dimension");
  c_nav->add_option("--field", field, "hopf | rot:i:j | expr:...");
  c_nav->add_option("--epsilon", epsilon);
  c_nav->add_option("--samples", samples);
  c_nav->add_option("--datum-file", datum_file,
                    "navigation datum JSON {h_spec, W_expr, epsilon}");
  c_nav->add_option("--curve-csv", curve_csv, "write a transported demo curve as CSV");
  add_common(c_nav);

  auto* c_flag = app.add_subcommand("flag", "flag curvature nets");
  c_flag->add_option("--sphere", dim)->required();
  c_flag->add_option("--field", field);
  c_flag->add_option("--epsilon", epsilon);
  c_flag->add_option("--flags", flags);
  c_flag->add_option("--tol", flag_tol);
  c_flag->add_flag("--check-preservation", check_preservation,
                   "also verify K(x,y,P) = K~(x,y~,P~) under navigation");
  add_common(c_flag);

  auto* c_tune = app.add_subcommand("tune-epsilon", "solve lambda(eps) = target");
  c_tune->add_option("--sphere", dim)->required();
  c_tune->add_option("--field", field);
  c_tune->add_option("--epsilon", epsilon, "planted wind scale of the starting metric");
  c_tune->add_option("--target-lambda", target_lambda);
  add_common(c_tune);

  auto* c_dist = app.add_subcommand("distances", "directed geodesic distances");
  c_dist->add_option("--sphere", dim)->required();
  c_dist->add_option("--field", field);
  c_dist->add_option("--epsilon", epsilon);
  c_dist->add_option("--pairs", pairs);
  c_dist->add_option("--directions", directions);
  add_common(c_dist);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto read_file = [](const std::string& path) -> std::optional<std::string> {
    if (path.empty()) return std::nullopt;
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot read file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  try {
    const auto t0 = std::chrono::steady_clock::now();
    CommandResult result;
    if (*c_norm) {
      result = run_norm_check(read_file(norm_file),
                              f_expr.empty() ? std::nullopt : std::optional<std::string>(f_expr),
                              dim, samples, seed);
    } else if (*c_alg) {
      result = run_algebra_build(space, n > 0 ? n : presentation_default_n(space));
    } else if (*c_go) {
      result = run_go_check(space, n > 0 ? n : presentation_default_n(space),
                            read_file(norm_file), norms_count, samples, tol, seed);
    } else if (*c_cls) {
      result = run_classify(space, n, read_file(norm_file), norms_count, samples, tol, seed);
    } else if (*c_nav) {
      if (!datum_file.empty()) {
        result = run_navigate_datum(*read_file(datum_file), samples, seed);
      } else {
        if (dim <= 0) throw InvalidInputError("navigate needs --sphere or --datum-file");
        result = run_navigate(dim, field, epsilon, samples, seed, curve_csv);
      }
    } else if (*c_flag) {
      result = run_flag(dim, field, epsilon, flags, flag_tol, check_preservation, seed);
    } else if (*c_tune) {
      result = run_tune_epsilon(dim, field, epsilon, target_lambda, seed);
    } else if (*c_dist) {
      result = run_distances(dim, field, epsilon, pairs, directions, seed);
    }
    std::cout << result.human;
    // wall-clock goes to the human report only; JSON stays byte-reproducible
    std::cout << "elapsed: "
              << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
              << " s\n";
    if (!json_path.empty()) {
      std::ofstream out(json_path);
      out << result.report.dump(2) << "\n";
    }
    return result.exit_code;
  } catch (const expr::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const OutOfScopeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace gosphere::cli
