#ifndef GOSPHERE_NORMS_HPP
#define GOSPHERE_NORMS_HPP

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "gosphere/expr.hpp"
#include "gosphere/sampling.hpp"

namespace gosphere::norms {

enum class FamilyTag { riemannian, randers, alpha_beta, alpha12, alpha12_beta, custom };

std::string to_string(FamilyTag tag);
FamilyTag family_tag_from_string(const std::string& s);

/// Defining data of a block metric family F(y) = f(s_1, ..., s_k).
///
/// `blocks` lists the dimensions of the alpha-orthogonal decomposition in
/// order. For families with a one-form (alpha_beta, alpha12_beta) the first
/// block is one-dimensional and its argument is linear, s_1 = beta(y); every
/// other block contributes its squared alpha-norm, s_j = |y_j|_alpha^2. The
/// family function must be positive and 1-homogeneous under the induced
/// scaling f(t s_1, t^2 s_2, ...) = t f(s_1, s_2, ...).
struct MetricFamilySpec {
  FamilyTag family = FamilyTag::custom;
  int dim = 0;
  std::vector<int> blocks;
  expr::Ast f;                  // unused for riemannian / randers
  Eigen::MatrixXd alpha;        // SPD base inner product
  Eigen::VectorXd beta;         // covector; zero when the family has no beta

  nlohmann::json to_json() const;
  static MetricFamilySpec from_json(const nlohmann::json& j);
};

/// A Minkowski norm on R^dim: positively homogeneous, positive off 0, with
/// strongly convex square. Values are immutable after construction and all
/// operations are pure.
class MinkowskiNorm {
 public:
  MinkowskiNorm(int dim, FamilyTag tag, std::function<double(const Eigen::VectorXd&)> value,
                std::optional<bool> reversible_hint = std::nullopt,
                std::optional<MetricFamilySpec> spec = std::nullopt);

  int dim() const { return dim_; }
  FamilyTag family() const { return tag_; }
  std::optional<bool> reversible_hint() const { return reversible_hint_; }
  const std::optional<MetricFamilySpec>& family_spec() const { return spec_; }

  /// F(y). Rejects non-finite input; y = 0 evaluates to 0; nonzero vectors
  /// below norm 1e-12 are rejected (the axioms live on the slit bundle).
  double operator()(const Eigen::VectorXd& y) const;

  /// Raw evaluation without input validation; for finite-difference probes
  /// around an already validated base point.
  double unchecked(const Eigen::VectorXd& y) const { return value_(y); }

 private:
  int dim_;
  FamilyTag tag_;
  std::function<double(const Eigen::VectorXd&)> value_;
  std::optional<bool> reversible_hint_;
  std::optional<MetricFamilySpec> spec_;
};

/// g_y = 1/2 * Hessian of F^2 at y. Symmetric positive definite;
/// 0-homogeneous in y.
struct FundamentalTensor {
  Eigen::VectorXd base;
  Eigen::MatrixXd matrix;
};

/// Relative step for second y-derivatives of F^2 (fourth-order stencils).
inline constexpr double kHessianStepRel = 6e-3;
/// Relative step for third y-derivatives of F^2.
inline constexpr double kThirdStepRel = 1e-2;

FundamentalTensor fundamental_tensor(const MinkowskiNorm& norm, const Eigen::VectorXd& y);

/// <u,v>_y for a precomputed tensor.
inline double inner(const FundamentalTensor& g, const Eigen::VectorXd& u,
                    const Eigen::VectorXd& v) {
  return u.dot(g.matrix * v);
}

/// Cartan tensor C_y(u,v,w) = 1/4 * third derivative of F^2 at y along
/// (u,v,w). Totally symmetric; C_y(y,.,.) = 0; identically 0 for Riemannian
/// norms.
double cartan(const MinkowskiNorm& norm, const Eigen::VectorXd& y, const Eigen::VectorXd& u,
              const Eigen::VectorXd& v, const Eigen::VectorXd& w);

/// Builds a norm from a family spec. Validates the spec invariants, the
/// scaling-homogeneity and positivity of f by sampling, and strong convexity
/// of the induced Hessian on a deterministic direction net. Throws
/// NotStronglyConvexError with a witness direction on failure.
MinkowskiNorm make_family(const MetricFamilySpec& spec,
                          std::uint64_t seed = sampling::kDefaultSeed);

MinkowskiNorm make_riemannian(const Eigen::MatrixXd& A);
MinkowskiNorm make_euclidean(int dim);
/// F = sqrt(y' A y) + b . y; requires |b|_{A^{-1}} < 1.
MinkowskiNorm make_randers(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

struct ReversibilityReport {
  bool reversible = false;
  double max_asymmetry = 0.0;
};

/// max_y |F(y)-F(-y)|/F(y) over `sample_count` seeded unit directions;
/// reversible iff below 1e-9.
ReversibilityReport check_reversible(const MinkowskiNorm& norm, int sample_count,
                                     std::uint64_t seed = sampling::kDefaultSeed);

/// Checks strong convexity of F^2 on a deterministic direction net; throws
/// NotStronglyConvexError naming the first offending direction.
void check_convexity_on_net(const MinkowskiNorm& norm, int net_size,
                            std::uint64_t seed = sampling::kDefaultSeed);

}  // namespace gosphere::norms

#endif
