#include "gosphere/norms.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gosphere/errors.hpp"
#include "gosphere/numdiff.hpp"

namespace gosphere::norms {

namespace {

std::string fmt_vec(const Eigen::VectorXd& y) {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < y.size(); ++i) os << (i ? ", " : "") << expr::format_double(y[i]);
  os << "]";
  return os.str();
}

// Shared evaluation kernel for block metric families.
struct FamilyEval {
  std::vector<int> offsets;
  std::vector<int> sizes;
  bool linear_first = false;
  std::vector<Eigen::MatrixXd> alpha_blocks;  // quadratic blocks only, by block index
  Eigen::VectorXd beta;
  expr::Ast f;

  double operator()(const Eigen::VectorXd& y) const {
    double s[3] = {0, 0, 0};
    for (std::size_t b = 0; b < offsets.size(); ++b) {
      if (b == 0 && linear_first) {
        s[0] = beta.dot(y);
      } else {
        const auto seg = y.segment(offsets[b], sizes[b]);
        s[b] = seg.dot(alpha_blocks[b] * seg);
      }
    }
    return f.eval(std::span<const double>(s, offsets.size()));
  }
};

}  // namespace

std::string to_string(FamilyTag tag) {
  switch (tag) {
    case FamilyTag::riemannian: return "riemannian";
    case FamilyTag::randers: return "randers";
    case FamilyTag::alpha_beta: return "alpha_beta";
    case FamilyTag::alpha12: return "alpha12";
    case FamilyTag::alpha12_beta: return "alpha12_beta";
    case FamilyTag::custom: return "custom";
  }
  return "custom";
}

FamilyTag family_tag_from_string(const std::string& s) {
  if (s == "riemannian") return FamilyTag::riemannian;
  if (s == "randers") return FamilyTag::randers;
  if (s == "alpha_beta") return FamilyTag::alpha_beta;
  if (s == "alpha12") return FamilyTag::alpha12;
  if (s == "alpha12_beta") return FamilyTag::alpha12_beta;
  if (s == "custom") return FamilyTag::custom;
  throw InvalidInputError("unknown family tag '" + s + "'");
}

MinkowskiNorm::MinkowskiNorm(int dim, FamilyTag tag,
                             std::function<double(const Eigen::VectorXd&)> value,
                             std::optional<bool> reversible_hint,
                             std::optional<MetricFamilySpec> spec)
    : dim_(dim), tag_(tag), value_(std::move(value)),
      reversible_hint_(reversible_hint), spec_(std::move(spec)) {
  if (dim_ <= 0) throw InvalidInputError("norm dimension must be positive");
}

double MinkowskiNorm::operator()(const Eigen::VectorXd& y) const {
  if (y.size() != dim_)
    throw InvalidInputError("norm eval: expected dimension " + std::to_string(dim_) +
                            ", got " + std::to_string(y.size()));
  if (!y.allFinite()) throw InvalidInputError("norm eval: non-finite input " + fmt_vec(y));
  const double ny = y.norm();
  if (ny == 0.0) return 0.0;
  if (ny < 1e-12)
    throw InvalidInputError("norm eval: vector too close to the origin, |y| = " +
                            expr::format_double(ny));
  return value_(y);
}

namespace {

void require_slit(const MinkowskiNorm& norm, const Eigen::VectorXd& y, const char* op) {
  if (y.size() != norm.dim())
    throw InvalidInputError(std::string(op) + ": dimension mismatch");
  if (!y.allFinite()) throw InvalidInputError(std::string(op) + ": non-finite input");
  if (y.norm() < 1e-12)
    throw InvalidInputError(std::string(op) + ": base vector must be nonzero, got " + fmt_vec(y));
}

}  // namespace

FundamentalTensor fundamental_tensor(const MinkowskiNorm& norm, const Eigen::VectorXd& y) {
  require_slit(norm, y, "fundamental_tensor");
  const double h = kHessianStepRel * y.norm();
  auto f2 = [&](const Eigen::VectorXd& z) {
    double v = norm.unchecked(z);
    return v * v;
  };
  Eigen::MatrixXd g = 0.5 * numdiff::hessian(f2, y, h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 1e-9 * hi))
    throw NotStronglyConvexError("fundamental tensor not positive definite at y = " + fmt_vec(y) +
                                 " (min/max eigenvalue " + expr::format_double(lo) + " / " +
                                 expr::format_double(hi) + ")");
  return {y, std::move(g)};
}

double cartan(const MinkowskiNorm& norm, const Eigen::VectorXd& y, const Eigen::VectorXd& u,
              const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
  require_slit(norm, y, "cartan");
  const double h = kThirdStepRel * y.norm();
  auto f2 = [&](const Eigen::VectorXd& z) {
    double t = norm.unchecked(z);
    return t * t;
  };
  return 0.25 * numdiff::trilinear_third(f2, y, u, v, w, h);
}

void check_convexity_on_net(const MinkowskiNorm& norm, int net_size, std::uint64_t seed) {
  for (const auto& d : sampling::direction_net(norm.dim(), net_size, seed)) {
    fundamental_tensor(norm, d);   // throws with witness on failure
    fundamental_tensor(norm, -d);
  }
}

MinkowskiNorm make_riemannian(const Eigen::MatrixXd& A) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || !A.isApprox(A.transpose(), 1e-12))
    throw InvalidInputError("riemannian norm: matrix must be square symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success)
    throw NotStronglyConvexError("riemannian norm: matrix is not positive definite");
  MetricFamilySpec spec;
  spec.family = FamilyTag::riemannian;
  spec.dim = n;
  spec.blocks = {n};
  spec.alpha = A;
  spec.beta = Eigen::VectorXd::Zero(n);
  return MinkowskiNorm(
      n, FamilyTag::riemannian,
      [A](const Eigen::VectorXd& y) { return std::sqrt(y.dot(A * y)); }, true, spec);
}

MinkowskiNorm make_euclidean(int dim) {
  return make_riemannian(Eigen::MatrixXd::Identity(dim, dim));
}

MinkowskiNorm make_randers(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(A.rows());
  if (b.size() != n) throw InvalidInputError("randers norm: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success)
    throw NotStronglyConvexError("randers norm: alpha matrix is not positive definite");
  const double bn2 = b.dot(llt.solve(b));
  if (!(bn2 < 1.0))
    throw NotStronglyConvexError("randers norm rejected: |beta|_alpha = " +
                                 expr::format_double(std::sqrt(bn2)) +
                                 " >= 1, F is not strongly convex");
  MetricFamilySpec spec;
  spec.family = FamilyTag::randers;
  spec.dim = n;
  spec.blocks = {n};
  spec.alpha = A;
  spec.beta = b;
  const bool has_beta = b.norm() > 0;
  return MinkowskiNorm(
      n, FamilyTag::randers,
      [A, b](const Eigen::VectorXd& y) { return std::sqrt(y.dot(A * y)) + b.dot(y); },
      has_beta ? std::optional<bool>(false) : std::optional<bool>(true), spec);
}

namespace {

bool family_has_beta(FamilyTag t) {
  return t == FamilyTag::alpha_beta || t == FamilyTag::alpha12_beta;
}

void validate_spec_shape(const MetricFamilySpec& spec) {
  if (spec.dim <= 0) throw InvalidInputError("family spec: dim must be positive");
  int total = 0;
  for (int b : spec.blocks) {
    if (b <= 0) throw InvalidInputError("family spec: block dimensions must be positive");
    total += b;
  }
  if (total != spec.dim)
    throw InvalidInputError("family spec: block dimensions must sum to dim");
  switch (spec.family) {
    case FamilyTag::riemannian:
    case FamilyTag::randers:
      break;
    case FamilyTag::alpha_beta:
      if (spec.blocks.size() != 2 || spec.blocks[0] != 1)
        throw InvalidInputError("alpha_beta family needs blocks [1, n-1]");
      break;
    case FamilyTag::alpha12:
      if (spec.blocks.size() != 2)
        throw InvalidInputError("alpha12 family needs two blocks");
      break;
    case FamilyTag::alpha12_beta:
      if (spec.blocks.size() != 3 || spec.blocks[0] != 1)
        throw InvalidInputError("alpha12_beta family needs blocks [1, d1, d2]");
      break;
    case FamilyTag::custom:
      throw InvalidInputError("custom norms cannot be built from a family spec");
  }
  if (spec.alpha.rows() != spec.dim || spec.alpha.cols() != spec.dim)
    throw InvalidInputError("family spec: alpha matrix has wrong shape");
  if (!spec.alpha.isApprox(spec.alpha.transpose(), 1e-12))
    throw InvalidInputError("family spec: alpha matrix must be symmetric");
  if (family_has_beta(spec.family)) {
    if (spec.beta.size() != spec.dim)
      throw InvalidInputError("family spec: beta covector has wrong size");
    // beta must annihilate every block but the first
    for (int i = spec.blocks[0]; i < spec.dim; ++i)
      if (std::abs(spec.beta[i]) > 1e-12)
        throw InvalidInputError("family spec: beta must be supported on the first block");
  }
  // the decomposition must be alpha-orthogonal
  if (spec.blocks.size() > 1) {
    int off_i = 0;
    for (std::size_t bi = 0; bi < spec.blocks.size(); ++bi) {
      int off_j = off_i + spec.blocks[bi];
      for (std::size_t bj = bi + 1; bj < spec.blocks.size(); ++bj) {
        if (spec.alpha.block(off_i, off_j, spec.blocks[bi], spec.blocks[bj]).cwiseAbs().maxCoeff() >
            1e-12)
          throw InvalidInputError("family spec: blocks are not alpha-orthogonal");
        off_j += spec.blocks[bj];
      }
      off_i += spec.blocks[bi];
    }
  }
}

}  // namespace

MinkowskiNorm make_family(const MetricFamilySpec& spec, std::uint64_t seed) {
  validate_spec_shape(spec);

  if (spec.family == FamilyTag::riemannian) return make_riemannian(spec.alpha);
  if (spec.family == FamilyTag::randers) return make_randers(spec.alpha, spec.beta);

  const std::size_t nargs = spec.blocks.size();
  if (spec.f.empty()) throw InvalidInputError("family spec: missing family function f");
  if (spec.f.variables().size() != nargs)
    throw InvalidInputError("family spec: f must take exactly " + std::to_string(nargs) +
                            " arguments");

  FamilyEval ev;
  ev.linear_first = family_has_beta(spec.family);
  ev.beta = spec.beta;
  ev.f = spec.f;
  int off = 0;
  for (int b : spec.blocks) {
    ev.offsets.push_back(off);
    ev.sizes.push_back(b);
    ev.alpha_blocks.push_back(spec.alpha.block(off, off, b, b));
    off += b;
  }

  // Sample-check positivity and 1-homogeneity of f in the family scaling:
  // f(t s1, t^2 s2, ...) = t f(s) (s1 scales linearly only when it is the
  // beta argument).
  sampling::Rng rng(seed);
  for (int k = 0; k < 32; ++k) {
    Eigen::VectorXd y = rng.unit_vector(spec.dim);
    for (int sgn = 0; sgn < 2; ++sgn, y = -y) {
      const double base = ev(y);
      if (!(base > 0.0) || !std::isfinite(base))
        throw NotStronglyConvexError("family function is not positive at direction " +
                                     fmt_vec(y));
      for (double lam : {0.5, 2.0, 10.0}) {
        const double scaled = ev(lam * y);
        if (std::abs(scaled - lam * base) > 1e-9 * std::max(1.0, lam * base))
          throw InvalidInputError(
              "family function is not 1-homogeneous in the family scaling at " + fmt_vec(y) +
              ", lambda = " + expr::format_double(lam));
      }
    }
  }

  std::optional<bool> hint;
  if (spec.family == FamilyTag::alpha12) hint = true;  // depends on squares only

  MinkowskiNorm norm(spec.dim, spec.family, ev, hint, spec);
  check_convexity_on_net(norm, 2 * spec.dim + spec.dim * (spec.dim - 1) + 16, seed);
  return norm;
}

ReversibilityReport check_reversible(const MinkowskiNorm& norm, int sample_count,
                                     std::uint64_t seed) {
  if (sample_count < 1) throw InvalidInputError("check_reversible: sample_count must be >= 1");
  sampling::Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < sample_count; ++k) {
    Eigen::VectorXd y = rng.unit_vector(norm.dim());
    const double fp = norm(y), fm = norm(-y);
    worst = std::max(worst, std::abs(fp - fm) / fp);
  }
  return {worst < 1e-9, worst};
}

nlohmann::json MetricFamilySpec::to_json() const {
  nlohmann::json j;
  j["family"] = to_string(family);
  j["dim"] = dim;
  j["blocks"] = blocks;
  j["f_expr"] = f.empty() ? "" : f.str();
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < alpha.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(alpha.cols()));
    for (int k = 0; k < alpha.cols(); ++k) r[static_cast<std::size_t>(k)] = alpha(i, k);
    rows.push_back(std::move(r));
  }
  j["alpha_matrix"] = rows;
  std::vector<double> b(static_cast<std::size_t>(beta.size()));
  for (int i = 0; i < beta.size(); ++i) b[static_cast<std::size_t>(i)] = beta[i];
  j["beta_covector"] = b;
  return j;
}

MetricFamilySpec MetricFamilySpec::from_json(const nlohmann::json& j) {
  MetricFamilySpec spec;
  spec.family = family_tag_from_string(j.at("family").get<std::string>());
  spec.dim = j.at("dim").get<int>();
  spec.blocks = j.at("blocks").get<std::vector<int>>();
  const auto rows = j.at("alpha_matrix").get<std::vector<std::vector<double>>>();
  spec.alpha.resize(spec.dim, spec.dim);
  if (static_cast<int>(rows.size()) != spec.dim)
    throw InvalidInputError("metric spec JSON: alpha_matrix has wrong shape");
  for (int i = 0; i < spec.dim; ++i) {
    if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != spec.dim)
      throw InvalidInputError("metric spec JSON: alpha_matrix has wrong shape");
    for (int k = 0; k < spec.dim; ++k)
      spec.alpha(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  }
  const auto b = j.value("beta_covector", std::vector<double>(static_cast<std::size_t>(spec.dim), 0.0));
  if (static_cast<int>(b.size()) != spec.dim)
    throw InvalidInputError("metric spec JSON: beta_covector has wrong size");
  spec.beta.resize(spec.dim);
  for (int i = 0; i < spec.dim; ++i) spec.beta[i] = b[static_cast<std::size_t>(i)];
  const std::string fe = j.value("f_expr", std::string());
  if (!fe.empty()) {
    std::vector<std::string> vars;
    for (std::size_t k = 0; k < spec.blocks.size(); ++k) vars.push_back("s" + std::to_string(k + 1));
    spec.f = expr::parse(fe, vars);
  }
  return spec;
}

}  // namespace gosphere::norms
