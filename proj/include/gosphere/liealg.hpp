#ifndef GOSPHERE_LIEALG_HPP
#define GOSPHERE_LIEALG_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gosphere/norms.hpp"
#include "gosphere/sampling.hpp"

namespace gosphere::liealg {

/// Quaternion with the i j = k, j k = i, k i = j multiplication convention.
/// Matrices act on column vectors from the left, scalars from the right.
struct Quat {
  double w = 0, x = 0, y = 0, z = 0;

  friend Quat operator+(const Quat& a, const Quat& b) {
    return {a.w + b.w, a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend Quat operator-(const Quat& a, const Quat& b) {
    return {a.w - b.w, a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend Quat operator*(double s, const Quat& a) { return {s * a.w, s * a.x, s * a.y, s * a.z}; }
  friend Quat operator*(const Quat& a, const Quat& b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
  }
  Quat conj() const { return {w, -x, -y, -z}; }
};

inline Quat quat_one() { return {1, 0, 0, 0}; }
inline Quat quat_i() { return {0, 1, 0, 0}; }
inline Quat quat_j() { return {0, 0, 1, 0}; }
inline Quat quat_k() { return {0, 0, 0, 1}; }

/// Dense quaternionic matrix; doubles as a real or complex matrix when the
/// entries stay in the corresponding subfield.
class QuatMatrix {
 public:
  QuatMatrix() = default;
  explicit QuatMatrix(int n) : n_(n), e_(static_cast<std::size_t>(n) * n) {}

  int size() const { return n_; }
  Quat& at(int i, int j) { return e_[static_cast<std::size_t>(i) * n_ + j]; }
  const Quat& at(int i, int j) const { return e_[static_cast<std::size_t>(i) * n_ + j]; }

  QuatMatrix operator*(const QuatMatrix& o) const;
  QuatMatrix operator+(const QuatMatrix& o) const;
  QuatMatrix operator-(const QuatMatrix& o) const;
  QuatMatrix scaled(double s) const;
  QuatMatrix commutator(const QuatMatrix& o) const { return *this * o - o * *this; }

  /// Real part of the quaternionic trace.
  double re_trace() const;

  /// Complex realization (quaternion -> 2x2 complex blocks), size 2n.
  Eigen::MatrixXcd to_complex() const;
  /// Real realization (quaternion -> 4x4 real left-multiplication blocks),
  /// size 4n.
  Eigen::MatrixXd to_real() const;

 private:
  int n_ = 0;
  std::vector<Quat> e_;
};

/// <X,Y>_bi = -Re tr(XY) over the quaternionic entries. Ad-invariant on the
/// compact algebras built below.
double bi_inner_raw(const QuatMatrix& a, const QuatMatrix& b);

/// A compact Lie algebra presented by an orthonormal basis and its structure
/// constants. structure[k](i,j) is the e_k-coefficient of [e_i, e_j].
struct LieAlgebra {
  int dim = 0;
  std::vector<std::string> basis_labels;
  std::vector<Eigen::MatrixXd> structure;
  Eigen::MatrixXd bi_inner;  // identity in the orthonormalized basis
  std::string bi_scale_note; // how the inner product was normalized
  double realization_agreement = 0.0;  // complex 2x2 vs real 4x4 cross-check

  Eigen::VectorXd bracket(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

  double max_jacobi_residual() const;
  double max_antisymmetry_residual() const;
  double max_bi_invariance_residual() const;
};

/// g = h + m with h and m spanned by disjoint subsets of the basis,
/// bi-orthogonal by construction.
struct ReductiveDecomposition {
  LieAlgebra algebra;
  std::vector<int> h_indices;
  std::vector<int> m_indices;

  int dim_h() const { return static_cast<int>(h_indices.size()); }
  int dim_m() const { return static_cast<int>(m_indices.size()); }

  Eigen::VectorXd embed_m(const Eigen::VectorXd& um) const;
  Eigen::VectorXd embed_h(const Eigen::VectorXd& uh) const;
  Eigen::VectorXd restrict_m(const Eigen::VectorXd& xg) const;
  /// Matrix of ad(h_j) restricted to m, in m-local coordinates.
  Eigen::MatrixXd ad_h_on_m(int j) const;

  double max_closure_residual() const;  // [h,h] in h, [h,m] in m
};

struct SpherePresentation {
  std::string name;  // e.g. "Sp(2)U(1)/Sp(1)U(1)"
  std::string key;   // e.g. "sp_u1"
  int n = 0;
  int sphere_dim = 0;
  ReductiveDecomposition decomposition;
  std::vector<std::vector<int>> m_blocks;  // m-local index sets
  std::vector<int> beta_blocks;            // blocks with a trivial 1-dim action
  std::vector<int> slice;                  // m-local fundamental-domain slice
  bool expected_go_verdict = true;

  int dim_m() const { return decomposition.dim_m(); }
  nlohmann::json to_json() const;
};

/// Full-algebra bracket of coefficient vectors.
Eigen::VectorXd bracket(const ReductiveDecomposition& dec, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& y);

/// m-projection of [x,y]. Accepts m-local vectors (size dim m) or full
/// algebra vectors (size dim g); full vectors must lie in m up to 1e-12.
Eigen::VectorXd m_bracket(const ReductiveDecomposition& dec, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y);

/// {[h_j, u]} for the h-basis; spans T_u(Ad(H).u). Caller orthonormalizes.
std::vector<Eigen::VectorXd> orbit_tangent(const ReductiveDecomposition& dec,
                                           const Eigen::VectorXd& u);

/// Presentations of the homogeneous spheres. Keys: "so", "su", "u", "sp",
/// "sp_u1", "sp_sp1". The three exceptional presentations ("g2_su3",
/// "spin7_g2", "spin9_spin7") raise OutOfScopeError.
SpherePresentation build_presentation(const std::string& key, int n);
SpherePresentation build_so(int n);      // SO(n)/SO(n-1),  n >= 3
SpherePresentation build_su(int n);      // SU(n)/SU(n-1),  n >= 3
SpherePresentation build_u(int n);       // U(n)/U(n-1),    n >= 2
SpherePresentation build_sp(int n);      // Sp(n)/Sp(n-1),  n >= 2
SpherePresentation build_sp_u1(int n);   // Sp(n)U(1)/Sp(n-1)U(1),   n >= 2
SpherePresentation build_sp_sp1(int n);  // Sp(n)Sp(1)/Sp(n-1)Sp(1), n >= 2

struct WeakSymmetryResult {
  bool found = false;
  double residual = 0.0;       // |Ad(g)u + u| / |u| at the best g
  Eigen::VectorXd witness;     // exp/exp parameters of the best g
};

/// Searches H (as exp(h) exp(h), parameters optimized numerically) for g
/// with Ad(g)u = -u. `search_budget` counts optimizer restarts. A miss is
/// "not found within budget", never a disproof.
WeakSymmetryResult check_weakly_symmetric(const SpherePresentation& pres,
                                          const Eigen::VectorXd& u, int search_budget,
                                          std::uint64_t seed = sampling::kDefaultSeed);

/// Draws a random Ad(H)-invariant Minkowski norm adapted to the
/// presentation's block structure (the family type the space supports).
/// For "sp" the result is invariant under the isotropy Sp(n-1) but
/// generically not under Sp(n-1)Sp(1).
norms::MinkowskiNorm random_invariant_norm(const SpherePresentation& pres, std::uint64_t seed);

/// Deterministic non-Sp(1)Sp(1)-invariant witness norm for Sp(n)/Sp(n-1).
norms::MinkowskiNorm sp_witness_norm(const SpherePresentation& pres);

}  // namespace gosphere::liealg

#endif
