#include "gosphere/gocheck.hpp"

#include <Eigen/Dense>
#include <cmath>

#include <nlohmann/json.hpp>

#include "gosphere/errors.hpp"

namespace gosphere::gocheck {

namespace {

Eigen::VectorXd as_m_local(const liealg::SpherePresentation& pres, const Eigen::VectorXd& u,
                           const char* op) {
  const auto& dec = pres.decomposition;
  Eigen::VectorXd um = u.size() == dec.dim_m() ? u : dec.restrict_m(u);
  if (um.size() != dec.dim_m()) throw InvalidInputError(std::string(op) + ": dimension mismatch");
  if (um.norm() < 1e-12) throw InvalidInputError(std::string(op) + ": u must be nonzero");
  return um;
}

struct SampleEvaluation {
  Eigen::MatrixXd g;       // fundamental tensor at u
  Eigen::VectorXd eta;
  Eigen::VectorXd u_prime;
  double residual3 = 0.0;
  double residual4 = 0.0;
};

SampleEvaluation evaluate_sample(const liealg::SpherePresentation& pres,
                                 const norms::MinkowskiNorm& norm, const Eigen::VectorXd& um) {
  const auto& dec = pres.decomposition;
  const int dm = dec.dim_m();
  const int dh = dec.dim_h();

  SampleEvaluation out;
  out.g = norms::fundamental_tensor(norm, um).matrix;
  const double fu = norm(um);
  const double nu = um.norm();

  // Spray vector: G eta = r, r_i = <u, [e_i, u]_m>_u.
  Eigen::VectorXd gu = out.g * um;
  Eigen::VectorXd r(dm);
  for (int i = 0; i < dm; ++i)
    r[i] = gu.dot(liealg::m_bracket(dec, Eigen::VectorXd::Unit(dm, i), um));
  out.eta = out.g.ldlt().solve(r);

  // Condition (3): minimize |b + A c|, b_v = <u,[u,v]_m>_u,
  // A(v,j) = <u, [h_j, v]_m>_u, over compensators c in h.
  Eigen::VectorXd b(dm);
  for (int v = 0; v < dm; ++v)
    b[v] = gu.dot(liealg::m_bracket(dec, um, Eigen::VectorXd::Unit(dm, v)));
  Eigen::MatrixXd A(dm, dh);
  for (int j = 0; j < dh; ++j) {
    Eigen::MatrixXd ad = dec.ad_h_on_m(j);
    for (int v = 0; v < dm; ++v) A(v, j) = gu.dot(ad * Eigen::VectorXd::Unit(dm, v));
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.u_prime = svd.solve(-b);
  out.residual3 = (b + A * out.u_prime).norm() / (nu * nu * fu * fu);

  // Condition (4): <.,.>_u-distance of eta from span{[h_j, u]}.
  std::vector<Eigen::VectorXd> tangent = liealg::orbit_tangent(dec, um);
  std::vector<Eigen::VectorXd> basis;
  double max_norm = 0.0;
  for (const auto& t : tangent) max_norm = std::max(max_norm, std::sqrt(std::abs(t.dot(out.g * t))));
  Eigen::VectorXd resid = out.eta;
  if (max_norm > 0) {
    for (auto t : tangent) {
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : basis) t -= q.dot(out.g * t) * q;
      const double tn = std::sqrt(std::max(0.0, t.dot(out.g * t)));
      if (tn > 1e-10 * max_norm) basis.push_back(t / tn);
    }
    for (const auto& q : basis) resid -= q.dot(out.g * resid) * q;
  }
  out.residual4 = std::sqrt(std::max(0.0, resid.dot(out.g * resid))) / (nu * fu);
  return out;
}

}  // namespace

SprayVector spray_vector(const liealg::SpherePresentation& pres, const norms::MinkowskiNorm& norm,
                         const Eigen::VectorXd& u) {
  Eigen::VectorXd um = as_m_local(pres, u, "spray_vector");
  if (norm.dim() != pres.dim_m())
    throw InvalidInputError("spray_vector: norm dimension does not match dim m");
  const auto& dec = pres.decomposition;
  Eigen::MatrixXd g = norms::fundamental_tensor(norm, um).matrix;
  Eigen::VectorXd gu = g * um;
  Eigen::VectorXd r(pres.dim_m());
  for (int i = 0; i < pres.dim_m(); ++i)
    r[i] = gu.dot(liealg::m_bracket(dec, Eigen::VectorXd::Unit(pres.dim_m(), i), um));
  return {um, g.ldlt().solve(r)};
}

Condition3Result condition3_compensator(const liealg::SpherePresentation& pres,
                                        const norms::MinkowskiNorm& norm,
                                        const Eigen::VectorXd& u) {
  Eigen::VectorXd um = as_m_local(pres, u, "condition3_compensator");
  auto ev = evaluate_sample(pres, norm, um);
  return {ev.u_prime, ev.residual3};
}

double condition4_residual(const liealg::SpherePresentation& pres,
                           const norms::MinkowskiNorm& norm, const Eigen::VectorXd& u) {
  Eigen::VectorXd um = as_m_local(pres, u, "condition4_residual");
  return evaluate_sample(pres, norm, um).residual4;
}

double cartan_bracket_identity_check(const liealg::SpherePresentation& pres,
                                     const norms::MinkowskiNorm& norm, const Eigen::VectorXd& u,
                                     const Eigen::VectorXd& u_prime, const Eigen::VectorXd& v) {
  const auto& dec = pres.decomposition;
  Eigen::VectorXd um = as_m_local(pres, u, "cartan_bracket_identity_check");
  if (u_prime.size() != dec.dim_h())
    throw InvalidInputError("cartan_bracket_identity_check: u' must be h-local");
  Eigen::VectorXd vm = v.size() == dec.dim_m() ? v : dec.restrict_m(v);

  Eigen::MatrixXd g = norms::fundamental_tensor(norm, um).matrix;
  Eigen::VectorXd ug = dec.embed_m(um);
  Eigen::VectorXd upg = dec.embed_h(u_prime);
  Eigen::VectorXd vg = dec.embed_m(vm);

  Eigen::VectorXd up_v = dec.restrict_m(dec.algebra.bracket(upg, vg));
  Eigen::VectorXd u_up = dec.restrict_m(dec.algebra.bracket(ug, upg));
  Eigen::VectorXd up_u = dec.restrict_m(dec.algebra.bracket(upg, ug));

  const double lhs = um.dot(g * up_v);
  const double rhs = u_up.dot(g * vm) - 2.0 * norms::cartan(norm, um, um, vm, up_u);
  return std::abs(lhs - rhs);
}

std::vector<Eigen::VectorXd> sample_directions(const liealg::SpherePresentation& pres, int count,
                                               std::uint64_t seed) {
  const int dm = pres.dim_m();
  sampling::Rng rng(seed);
  std::vector<Eigen::VectorXd> samples;
  samples.reserve(static_cast<std::size_t>(count));

  auto unit_on = [&](const std::vector<int>& support) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(dm);
    do {
      for (int i : support) u[i] = rng.normal();
    } while (u.norm() < 1e-6);
    return Eigen::VectorXd(u / u.norm());
  };

  const int n_slice = pres.slice.empty() ? 0 : (2 * count) / 5;
  const int n_pure = count / 5;
  const int n_mixed = count / 5;

  for (int k = 0; k < n_slice; ++k) samples.push_back(unit_on(pres.slice));
  const auto& blocks = pres.m_blocks;
  for (int k = 0; k < n_pure; ++k)
    samples.push_back(unit_on(blocks[static_cast<std::size_t>(k % blocks.size())]));
  for (int k = 0; k < n_mixed && blocks.size() > 1; ++k) {
    int a = rng.uniform_int(static_cast<int>(blocks.size()));
    int b = rng.uniform_int(static_cast<int>(blocks.size()));
    while (b == a) b = rng.uniform_int(static_cast<int>(blocks.size()));
    std::vector<int> support = blocks[static_cast<std::size_t>(a)];
    support.insert(support.end(), blocks[static_cast<std::size_t>(b)].begin(),
                   blocks[static_cast<std::size_t>(b)].end());
    samples.push_back(unit_on(support));
  }
  while (static_cast<int>(samples.size()) < count) samples.push_back(rng.unit_vector(dm));
  return samples;
}

GOReport go_verdict(const liealg::SpherePresentation& pres, const norms::MinkowskiNorm& norm,
                    int sample_count, double tol, std::uint64_t seed, double fail_threshold) {
  if (sample_count < 1) throw InvalidInputError("go_verdict: sample_count must be >= 1");
  if (norm.dim() != pres.dim_m())
    throw InvalidInputError("go_verdict: norm dimension does not match dim m");

  GOReport report;
  report.tol = tol;
  report.fail_threshold = fail_threshold;
  report.seed = seed;

  const auto samples = sample_directions(pres, sample_count, seed);
  report.certificates.reserve(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    auto ev = evaluate_sample(pres, norm, samples[k]);
    report.certificates.push_back({samples[k], ev.u_prime, ev.residual3, ev.residual4, tol});
    if (ev.residual4 > report.max_residual4) {
      report.max_residual4 = ev.residual4;
      report.witness = static_cast<int>(k);
    }
    report.max_residual3 = std::max(report.max_residual3, ev.residual3);
  }

  if (report.max_residual4 < tol)
    report.verdict = Verdict::Pass;
  else if (report.max_residual4 >= fail_threshold)
    report.verdict = Verdict::Fail;
  else
    report.verdict = Verdict::Indeterminate;
  return report;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Indeterminate: return "INDETERMINATE";
  }
  return "INDETERMINATE";
}

nlohmann::json GOReport::to_json() const {
  nlohmann::json j;
  j["verdict"] = to_string(verdict);
  j["max_residual3"] = max_residual3;
  j["max_residual4"] = max_residual4;
  j["witness_index"] = witness;
  j["tol"] = tol;
  j["fail_threshold"] = fail_threshold;
  j["seed"] = seed;
  nlohmann::json certs = nlohmann::json::array();
  for (const auto& c : certificates) {
    nlohmann::json cj;
    cj["u"] = std::vector<double>(c.u.data(), c.u.data() + c.u.size());
    cj["u_prime"] = std::vector<double>(c.u_prime.data(), c.u_prime.data() + c.u_prime.size());
    cj["residual3"] = c.residual3;
    cj["residual4"] = c.residual4;
    cj["tol"] = c.tol;
    certs.push_back(std::move(cj));
  }
  j["certificates"] = std::move(certs);
  return j;
}

}  // namespace gosphere::gocheck
