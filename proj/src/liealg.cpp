#include "gosphere/liealg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <nlohmann/json.hpp>

#include "gosphere/errors.hpp"
#include "gosphere/optimize.hpp"

namespace gosphere::liealg {

QuatMatrix QuatMatrix::operator*(const QuatMatrix& o) const {
  QuatMatrix r(n_);
  for (int i = 0; i < n_; ++i)
    for (int k = 0; k < n_; ++k) {
      const Quat& a = at(i, k);
      if (a.w == 0 && a.x == 0 && a.y == 0 && a.z == 0) continue;
      for (int j = 0; j < n_; ++j) r.at(i, j) = r.at(i, j) + a * o.at(k, j);
    }
  return r;
}

QuatMatrix QuatMatrix::operator+(const QuatMatrix& o) const {
  QuatMatrix r(n_);
  for (std::size_t i = 0; i < e_.size(); ++i) r.e_[i] = e_[i] + o.e_[i];
  return r;
}

QuatMatrix QuatMatrix::operator-(const QuatMatrix& o) const {
  QuatMatrix r(n_);
  for (std::size_t i = 0; i < e_.size(); ++i) r.e_[i] = e_[i] - o.e_[i];
  return r;
}

QuatMatrix QuatMatrix::scaled(double s) const {
  QuatMatrix r(n_);
  for (std::size_t i = 0; i < e_.size(); ++i) r.e_[i] = s * e_[i];
  return r;
}

double QuatMatrix::re_trace() const {
  double t = 0;
  for (int i = 0; i < n_; ++i) t += at(i, i).w;
  return t;
}

Eigen::MatrixXcd QuatMatrix::to_complex() const {
  using C = std::complex<double>;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2 * n_, 2 * n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) {
      const Quat& q = at(i, j);
      // q = z1 + z2 j  ->  [[z1, z2], [-conj(z2), conj(z1)]]
      m(2 * i, 2 * j) = C(q.w, q.x);
      m(2 * i, 2 * j + 1) = C(q.y, q.z);
      m(2 * i + 1, 2 * j) = C(-q.y, q.z);
      m(2 * i + 1, 2 * j + 1) = C(q.w, -q.x);
    }
  return m;
}

Eigen::MatrixXd QuatMatrix::to_real() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4 * n_, 4 * n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) {
      const Quat& q = at(i, j);
      const double L[4][4] = {{q.w, -q.x, -q.y, -q.z},
                              {q.x, q.w, -q.z, q.y},
                              {q.y, q.z, q.w, -q.x},
                              {q.z, -q.y, q.x, q.w}};
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) m(4 * i + a, 4 * j + b) = L[a][b];
    }
  return m;
}

double bi_inner_raw(const QuatMatrix& a, const QuatMatrix& b) {
  return -(a * b).re_trace();
}

Eigen::VectorXd LieAlgebra::bracket(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  if (x.size() != dim || y.size() != dim)
    throw InvalidInputError("bracket: dimension mismatch");
  Eigen::VectorXd r(dim);
  for (int k = 0; k < dim; ++k) r[k] = x.dot(structure[static_cast<std::size_t>(k)] * y);
  return r;
}

double LieAlgebra::max_jacobi_residual() const {
  double worst = 0;
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j)
      for (int k = j + 1; k < dim; ++k) {
        Eigen::VectorXd a = Eigen::VectorXd::Unit(dim, i);
        Eigen::VectorXd b = Eigen::VectorXd::Unit(dim, j);
        Eigen::VectorXd c = Eigen::VectorXd::Unit(dim, k);
        Eigen::VectorXd r =
            bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) + bracket(c, bracket(a, b));
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
      }
  return worst;
}

double LieAlgebra::max_antisymmetry_residual() const {
  double worst = 0;
  for (int k = 0; k < dim; ++k) {
    const auto& S = structure[static_cast<std::size_t>(k)];
    worst = std::max(worst, (S + S.transpose()).cwiseAbs().maxCoeff());
  }
  return worst;
}

double LieAlgebra::max_bi_invariance_residual() const {
  // <[x,y],z> + <y,[x,z]> = 0; basis is orthonormal so inner = dot.
  double worst = 0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k) {
        double a = structure[static_cast<std::size_t>(k)](i, j);
        double b = structure[static_cast<std::size_t>(j)](i, k);
        worst = std::max(worst, std::abs(a + b));
      }
  return worst;
}

Eigen::VectorXd ReductiveDecomposition::embed_m(const Eigen::VectorXd& um) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(algebra.dim);
  for (int i = 0; i < dim_m(); ++i) x[m_indices[static_cast<std::size_t>(i)]] = um[i];
  return x;
}

Eigen::VectorXd ReductiveDecomposition::embed_h(const Eigen::VectorXd& uh) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(algebra.dim);
  for (int i = 0; i < dim_h(); ++i) x[h_indices[static_cast<std::size_t>(i)]] = uh[i];
  return x;
}

Eigen::VectorXd ReductiveDecomposition::restrict_m(const Eigen::VectorXd& xg) const {
  Eigen::VectorXd u(dim_m());
  for (int i = 0; i < dim_m(); ++i) u[i] = xg[m_indices[static_cast<std::size_t>(i)]];
  return u;
}

Eigen::MatrixXd ReductiveDecomposition::ad_h_on_m(int j) const {
  const int m = dim_m();
  Eigen::MatrixXd M(m, m);
  const int hj = h_indices[static_cast<std::size_t>(j)];
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k)
      M(k, i) = algebra.structure[static_cast<std::size_t>(m_indices[static_cast<std::size_t>(k)])](
          hj, m_indices[static_cast<std::size_t>(i)]);
  return M;
}

double ReductiveDecomposition::max_closure_residual() const {
  double worst = 0;
  auto component = [&](int i, int j, const std::vector<int>& bad) {
    for (int k : bad)
      worst = std::max(worst, std::abs(algebra.structure[static_cast<std::size_t>(k)](i, j)));
  };
  for (int a : h_indices)
    for (int b : h_indices) component(a, b, m_indices);  // [h,h] subset h
  for (int a : h_indices)
    for (int b : m_indices) component(a, b, h_indices);  // [h,m] subset m
  return worst;
}

Eigen::VectorXd bracket(const ReductiveDecomposition& dec, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& y) {
  return dec.algebra.bracket(x, y);
}

Eigen::VectorXd m_bracket(const ReductiveDecomposition& dec, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y) {
  const int dg = dec.algebra.dim, dm = dec.dim_m();
  auto lift = [&](const Eigen::VectorXd& v) {
    if (v.size() == dm) return dec.embed_m(v);
    if (v.size() != dg) throw InvalidInputError("m_bracket: dimension mismatch");
    for (int k : dec.h_indices)
      if (std::abs(v[k]) > 1e-12)
        throw InvalidInputError("m_bracket: input has an h-component above 1e-12");
    return v;
  };
  return dec.restrict_m(dec.algebra.bracket(lift(x), lift(y)));
}

std::vector<Eigen::VectorXd> orbit_tangent(const ReductiveDecomposition& dec,
                                           const Eigen::VectorXd& u) {
  if (u.norm() == 0.0) throw InvalidInputError("orbit_tangent: u must be nonzero");
  Eigen::VectorXd um = u.size() == dec.dim_m() ? u : dec.restrict_m(u);
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(dec.dim_h()));
  for (int j = 0; j < dec.dim_h(); ++j) out.push_back(dec.ad_h_on_m(j) * um);
  return out;
}

// ---------------------------------------------------------------------------
// Presentation construction

namespace {

QuatMatrix entry(int n, int i, int j, const Quat& q) {
  QuatMatrix m(n);
  m.at(i, j) = q;
  return m;
}

// q (E_ij + E_ji)
QuatMatrix sym_pair(int n, int i, int j, const Quat& q) {
  QuatMatrix m(n);
  m.at(i, j) = q;
  m.at(j, i) = q;
  return m;
}

// E_ij - E_ji
QuatMatrix skew_pair(int n, int i, int j) {
  QuatMatrix m(n);
  m.at(i, j) = quat_one();
  m.at(j, i) = {-1, 0, 0, 0};
  return m;
}

struct RawBasis {
  std::vector<QuatMatrix> h, m;
  std::vector<std::string> h_labels, m_labels;

  void add_h(QuatMatrix q, std::string label) {
    h.push_back(std::move(q));
    h_labels.push_back(std::move(label));
  }
  void add_m(QuatMatrix q, std::string label) {
    m.push_back(std::move(q));
    m_labels.push_back(std::move(label));
  }
};

// Orthonormalizes the raw basis against -Re tr, computes structure constants,
// and cross-checks them between the complex 2x2 and real 4x4 realizations.
ReductiveDecomposition assemble(RawBasis raw, const std::string& what) {
  const int dh = static_cast<int>(raw.h.size());
  const int dm = static_cast<int>(raw.m.size());
  const int dim = dh + dm;

  std::vector<QuatMatrix> basis;
  basis.reserve(static_cast<std::size_t>(dim));
  for (auto& q : raw.h) basis.push_back(std::move(q));
  for (auto& q : raw.m) basis.push_back(std::move(q));

  // The raw basis must be orthogonal; normalize it.
  for (int i = 0; i < dim; ++i) {
    const double n2 = bi_inner_raw(basis[static_cast<std::size_t>(i)], basis[static_cast<std::size_t>(i)]);
    if (!(n2 > 0)) throw Error(what + ": basis vector " + std::to_string(i) + " has nonpositive norm");
    basis[static_cast<std::size_t>(i)] = basis[static_cast<std::size_t>(i)].scaled(1.0 / std::sqrt(n2));
  }
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j)
      if (std::abs(bi_inner_raw(basis[static_cast<std::size_t>(i)], basis[static_cast<std::size_t>(j)])) > 1e-12)
        throw Error(what + ": basis is not orthogonal at pair (" + std::to_string(i) + "," +
                    std::to_string(j) + ")");

  LieAlgebra alg;
  alg.dim = dim;
  alg.bi_inner = Eigen::MatrixXd::Identity(dim, dim);
  alg.bi_scale_note =
      "basis orthonormalized against <X,Y> = -Re tr(XY) on the quaternionic realization; "
      "central factors carry |v0|_bi = 1";
  alg.basis_labels = raw.h_labels;
  alg.basis_labels.insert(alg.basis_labels.end(), raw.m_labels.begin(), raw.m_labels.end());
  alg.structure.assign(static_cast<std::size_t>(dim), Eigen::MatrixXd::Zero(dim, dim));

  // Realizations for the cross-check.
  std::vector<Eigen::MatrixXcd> cplx;
  std::vector<Eigen::MatrixXd> real;
  cplx.reserve(static_cast<std::size_t>(dim));
  real.reserve(static_cast<std::size_t>(dim));
  for (const auto& b : basis) {
    cplx.push_back(b.to_complex());
    real.push_back(b.to_real());
  }

  double agreement = 0.0;
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) {
      const QuatMatrix br = basis[static_cast<std::size_t>(i)].commutator(basis[static_cast<std::size_t>(j)]);
      const Eigen::MatrixXcd brc =
          cplx[static_cast<std::size_t>(i)] * cplx[static_cast<std::size_t>(j)] -
          cplx[static_cast<std::size_t>(j)] * cplx[static_cast<std::size_t>(i)];
      const Eigen::MatrixXd brr =
          real[static_cast<std::size_t>(i)] * real[static_cast<std::size_t>(j)] -
          real[static_cast<std::size_t>(j)] * real[static_cast<std::size_t>(i)];
      double n2 = bi_inner_raw(br, br);
      double recon = 0.0;
      for (int k = 0; k < dim; ++k) {
        const double c = bi_inner_raw(br, basis[static_cast<std::size_t>(k)]);
        const double cc = -0.5 * (brc * cplx[static_cast<std::size_t>(k)]).trace().real();
        const double cr = -0.25 * (brr * real[static_cast<std::size_t>(k)]).trace();
        agreement = std::max({agreement, std::abs(c - cc), std::abs(c - cr)});
        alg.structure[static_cast<std::size_t>(k)](i, j) = c;
        alg.structure[static_cast<std::size_t>(k)](j, i) = -c;
        recon += c * c;
      }
      if (std::abs(n2 - recon) > 1e-10 * (1.0 + n2))
        throw Error(what + ": bracket [" + std::to_string(i) + "," + std::to_string(j) +
                    "] does not close in the basis span");
    }
  alg.realization_agreement = agreement;
  if (agreement > 1e-13)
    throw Error(what + ": realization cross-check failed, disagreement " +
                expr::format_double(agreement));

  ReductiveDecomposition dec;
  dec.algebra = std::move(alg);
  for (int i = 0; i < dh; ++i) dec.h_indices.push_back(i);
  for (int i = 0; i < dm; ++i) dec.m_indices.push_back(dh + i);

  if (dec.algebra.max_jacobi_residual() > 1e-12)
    throw Error(what + ": Jacobi identity violated");
  if (dec.algebra.max_bi_invariance_residual() > 1e-12)
    throw Error(what + ": inner product is not bi-invariant");
  if (dec.max_closure_residual() > 1e-12)
    throw Error(what + ": reductive closure [h,h] in h, [h,m] in m violated");
  return dec;
}

void check_block_invariance(const SpherePresentation& pres) {
  const auto& dec = pres.decomposition;
  for (int j = 0; j < dec.dim_h(); ++j) {
    Eigen::MatrixXd ad = dec.ad_h_on_m(j);
    for (const auto& block : pres.m_blocks) {
      for (int i : block) {
        Eigen::VectorXd v = ad.col(i);
        for (int k = 0; k < dec.dim_m(); ++k) {
          if (std::find(block.begin(), block.end(), k) != block.end()) continue;
          if (std::abs(v[k]) > 1e-12)
            throw Error(pres.name + ": m-block decomposition is not ad(h)-invariant");
        }
      }
    }
  }
}

std::vector<int> range_block(int lo, int hi) {
  std::vector<int> v;
  for (int i = lo; i < hi; ++i) v.push_back(i);
  return v;
}

}  // namespace

SpherePresentation build_so(int n) {
  if (n < 3) throw InvalidInputError("SO(n)/SO(n-1) presentation needs n >= 3");
  RawBasis raw;
  for (int i = 1; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      raw.add_h(skew_pair(n, i, j), "h_so(" + std::to_string(i) + "," + std::to_string(j) + ")");
  for (int k = 1; k < n; ++k) raw.add_m(skew_pair(n, 0, k), "e" + std::to_string(k));

  SpherePresentation pres;
  pres.name = "SO(" + std::to_string(n) + ")/SO(" + std::to_string(n - 1) + ")";
  pres.key = "so";
  pres.n = n;
  pres.sphere_dim = n - 1;
  pres.decomposition = assemble(std::move(raw), pres.name);
  pres.m_blocks = {range_block(0, n - 1)};
  pres.beta_blocks = {};
  pres.slice = {0};
  pres.expected_go_verdict = true;
  check_block_invariance(pres);
  return pres;
}

namespace {

void add_u_block_h(RawBasis& raw, int n, bool traceless) {
  // u(n-1) (or su(n-1)) acting on indices 1..n-1
  for (int i = 1; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      raw.add_h(skew_pair(n, i, j), "h_a(" + std::to_string(i) + "," + std::to_string(j) + ")");
      raw.add_h(sym_pair(n, i, j, quat_i()), "h_b(" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
  if (traceless) {
    for (int j = 1; j < n - 1; ++j) {
      QuatMatrix d = entry(n, j, j, quat_i()) - entry(n, j + 1, j + 1, quat_i());
      raw.add_h(std::move(d), "h_d" + std::to_string(j));
    }
  } else {
    for (int j = 1; j < n; ++j) raw.add_h(entry(n, j, j, quat_i()), "h_d" + std::to_string(j));
  }
}

void add_complex_row_m(RawBasis& raw, int n) {
  for (int k = 1; k < n; ++k) {
    raw.add_m(skew_pair(n, 0, k), "e" + std::to_string(2 * k));
    raw.add_m(sym_pair(n, 0, k, quat_i()), "e" + std::to_string(2 * k + 1));
  }
}

}  // namespace

SpherePresentation build_su(int n) {
  if (n < 3) throw InvalidInputError("SU(n)/SU(n-1) presentation needs n >= 3");
  RawBasis raw;
  add_u_block_h(raw, n, /*traceless=*/true);
  QuatMatrix e1(n);
  e1.at(0, 0) = static_cast<double>(n - 1) * quat_i();
  for (int j = 1; j < n; ++j) e1.at(j, j) = -1.0 * quat_i();
  raw.add_m(std::move(e1), "e1");
  add_complex_row_m(raw, n);

  SpherePresentation pres;
  pres.name = "SU(" + std::to_string(n) + ")/SU(" + std::to_string(n - 1) + ")";
  pres.key = "su";
  pres.n = n;
  pres.sphere_dim = 2 * n - 1;
  pres.decomposition = assemble(std::move(raw), pres.name);
  pres.m_blocks = {{0}, range_block(1, 2 * n - 1)};
  pres.beta_blocks = {0};
  pres.slice = {0, 1};
  pres.expected_go_verdict = true;
  check_block_invariance(pres);
  return pres;
}

SpherePresentation build_u(int n) {
  if (n < 2) throw InvalidInputError("U(n)/U(n-1) presentation needs n >= 2");
  RawBasis raw;
  add_u_block_h(raw, n, /*traceless=*/false);
  raw.add_m(entry(n, 0, 0, quat_i()), "e1");
  add_complex_row_m(raw, n);

  SpherePresentation pres;
  pres.name = "U(" + std::to_string(n) + ")/U(" + std::to_string(n - 1) + ")";
  pres.key = "u";
  pres.n = n;
  pres.sphere_dim = 2 * n - 1;
  pres.decomposition = assemble(std::move(raw), pres.name);
  pres.m_blocks = {{0}, range_block(1, 2 * n - 1)};
  pres.beta_blocks = {0};
  pres.slice = {0, 1};
  pres.expected_go_verdict = true;
  check_block_invariance(pres);
  return pres;
}

namespace {

void add_sp_block_h(RawBasis& raw, int n) {
  // sp(n-1) on indices 1..n-1 of an n x n (or larger) quaternionic matrix
  for (int j = 1; j < n; ++j) {
    raw.add_h(entry(n, j, j, quat_i()), "h_i" + std::to_string(j));
    raw.add_h(entry(n, j, j, quat_j()), "h_j" + std::to_string(j));
    raw.add_h(entry(n, j, j, quat_k()), "h_k" + std::to_string(j));
  }
  for (int i = 1; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      raw.add_h(skew_pair(n, i, j), "h_r(" + std::to_string(i) + "," + std::to_string(j) + ")");
      raw.add_h(sym_pair(n, i, j, quat_i()), "h_i(" + std::to_string(i) + "," + std::to_string(j) + ")");
      raw.add_h(sym_pair(n, i, j, quat_j()), "h_j(" + std::to_string(i) + "," + std::to_string(j) + ")");
      raw.add_h(sym_pair(n, i, j, quat_k()), "h_k(" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
}

void add_quaternion_row_m(RawBasis& raw, int n, int size) {
  for (int k = 1; k < n; ++k) {
    raw.add_m(skew_pair(size, 0, k), "e" + std::to_string(4 * k));
    raw.add_m(sym_pair(size, 0, k, quat_i()), "e" + std::to_string(4 * k + 1));
    raw.add_m(sym_pair(size, 0, k, quat_j()), "e" + std::to_string(4 * k + 2));
    raw.add_m(sym_pair(size, 0, k, quat_k()), "e" + std::to_string(4 * k + 3));
  }
}

}  // namespace

SpherePresentation build_sp(int n) {
  if (n < 2) throw InvalidInputError("Sp(n)/Sp(n-1) presentation needs n >= 2");
  RawBasis raw;
  add_sp_block_h(raw, n);
  raw.add_m(entry(n, 0, 0, quat_i()), "e1");
  raw.add_m(entry(n, 0, 0, quat_j()), "e2");
  raw.add_m(entry(n, 0, 0, quat_k()), "e3");
  add_quaternion_row_m(raw, n, n);

  SpherePresentation pres;
  pres.name = "Sp(" + std::to_string(n) + ")/Sp(" + std::to_string(n - 1) + ")";
  pres.key = "sp";
  pres.n = n;
  pres.sphere_dim = 4 * n - 1;
  pres.decomposition = assemble(std::move(raw), pres.name);
  pres.m_blocks = {{0}, {1}, {2}, range_block(3, 4 * n - 1)};
  pres.beta_blocks = {0, 1, 2};
  pres.slice = {0, 1, 2, 3};
  pres.expected_go_verdict = false;  // generic isotropy-invariant norms are not GO
  check_block_invariance(pres);
  return pres;
}

SpherePresentation build_sp_u1(int n) {
  if (n < 2) throw InvalidInputError("Sp(n)U(1)/Sp(n-1)U(1) presentation needs n >= 2");
  const int N = n + 1;  // extra 1x1 block carries the central v0 = i E_{n,n}
  RawBasis raw;
  add_sp_block_h(raw, n);
  for (auto& q : raw.h) {
    QuatMatrix lift(N);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) lift.at(i, j) = q.at(i, j);
    q = std::move(lift);
  }
  raw.add_h(entry(N, 0, 0, quat_i()) + entry(N, n, n, quat_i()), "h_u1");

  raw.add_m(entry(N, 0, 0, quat_i()) - entry(N, n, n, quat_i()), "e1");
  raw.add_m(entry(N, 0, 0, quat_j()), "e2");
  raw.add_m(entry(N, 0, 0, quat_k()), "e3");
  add_quaternion_row_m(raw, n, N);

  SpherePresentation pres;
  pres.name = "Sp(" + std::to_string(n) + ")U(1)/Sp(" + std::to_string(n - 1) + ")U(1)";
  pres.key = "sp_u1";
  pres.n = n;
  pres.sphere_dim = 4 * n - 1;
  pres.decomposition = assemble(std::move(raw), pres.name);
  pres.m_blocks = {{0}, {1, 2}, range_block(3, 4 * n - 1)};
  pres.beta_blocks = {0};
  pres.slice = {0, 1, 3};  // u = u1 e1 + u2 e2 + u4 e4
  pres.expected_go_verdict = true;
  check_block_invariance(pres);
  return pres;
}

SpherePresentation build_sp_sp1(int n) {
  if (n < 2) throw InvalidInputError("Sp(n)Sp(1)/Sp(n-1)Sp(1) presentation needs n >= 2");
  const int N = n + 1;  // extra 1x1 block carries the sp(1) factor
  RawBasis raw;
  add_sp_block_h(raw, n);
  for (auto& q : raw.h) {
    QuatMatrix lift(N);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) lift.at(i, j) = q.at(i, j);
    q = std::move(lift);
  }
  raw.add_h(entry(N, 0, 0, quat_i()) + entry(N, n, n, quat_i()), "h_diag_i");
  raw.add_h(entry(N, 0, 0, quat_j()) + entry(N, n, n, quat_j()), "h_diag_j");
  raw.add_h(entry(N, 0, 0, quat_k()) + entry(N, n, n, quat_k()), "h_diag_k");

  raw.add_m(entry(N, 0, 0, quat_i()) - entry(N, n, n, quat_i()), "e1");
  raw.add_m(entry(N, 0, 0, quat_j()) - entry(N, n, n, quat_j()), "e2");
  raw.add_m(entry(N, 0, 0, quat_k()) - entry(N, n, n, quat_k()), "e3");
  add_quaternion_row_m(raw, n, N);

  SpherePresentation pres;
  pres.name = "Sp(" + std::to_string(n) + ")Sp(1)/Sp(" + std::to_string(n - 1) + ")Sp(1)";
  pres.key = "sp_sp1";
  pres.n = n;
  pres.sphere_dim = 4 * n - 1;
  pres.decomposition = assemble(std::move(raw), pres.name);
  pres.m_blocks = {{0, 1, 2}, range_block(3, 4 * n - 1)};
  pres.beta_blocks = {};
  pres.slice = {0, 3};
  pres.expected_go_verdict = true;
  check_block_invariance(pres);
  return pres;
}

SpherePresentation build_presentation(const std::string& key, int n) {
  if (key == "so") return build_so(n);
  if (key == "su") return build_su(n);
  if (key == "u") return build_u(n);
  if (key == "sp") return build_sp(n);
  if (key == "sp_u1") return build_sp_u1(n);
  if (key == "sp_sp1") return build_sp_sp1(n);
  if (key == "g2_su3" || key == "spin7_g2" || key == "spin9_spin7")
    throw OutOfScopeError("presentation '" + key +
                          "' requires spin/exceptional representation machinery and is out of "
                          "scope; it carries only symmetric or weakly symmetric metrics");
  throw InvalidInputError("unknown presentation key '" + key + "'");
}

// ---------------------------------------------------------------------------
// Weak symmetry search

WeakSymmetryResult check_weakly_symmetric(const SpherePresentation& pres, const Eigen::VectorXd& u,
                                          int search_budget, std::uint64_t seed) {
  const auto& dec = pres.decomposition;
  Eigen::VectorXd um = u.size() == dec.dim_m() ? u : dec.restrict_m(u);
  if (um.norm() == 0.0) throw InvalidInputError("check_weakly_symmetric: u must be nonzero");
  const int dh = dec.dim_h();
  const int dm = dec.dim_m();

  std::vector<Eigen::MatrixXd> ad(static_cast<std::size_t>(dh));
  for (int j = 0; j < dh; ++j) ad[static_cast<std::size_t>(j)] = dec.ad_h_on_m(j);

  auto phi = [&](const Eigen::VectorXd& theta) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dm, dm);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(dm, dm);
    for (int j = 0; j < dh; ++j) {
      a += theta[j] * ad[static_cast<std::size_t>(j)];
      b += theta[dh + j] * ad[static_cast<std::size_t>(j)];
    }
    Eigen::VectorXd v = a.exp() * (b.exp() * um);
    return (v + um).squaredNorm();
  };

  const double target = 1e-6 * um.norm();
  WeakSymmetryResult best;
  best.residual = std::numeric_limits<double>::infinity();

  sampling::Rng rng(seed);
  for (int attempt = 0; attempt < std::max(1, search_budget); ++attempt) {
    Eigen::VectorXd theta(2 * dh);
    if (attempt == 0) {
      theta.setZero();
    } else if (attempt <= dh) {
      theta.setZero();
      theta[attempt - 1] = 3.14159265358979323846;
    } else {
      for (int i = 0; i < 2 * dh; ++i) theta[i] = rng.uniform(-3.2, 3.2);
    }
    double v = optimize::nelder_mead(phi, theta, 0.8, 600);
    double res = std::sqrt(std::max(v, 0.0)) / um.norm();
    if (res < best.residual) {
      best.residual = res;
      best.witness = theta;
    }
    if (std::sqrt(std::max(v, 0.0)) < target) {
      best.found = true;
      break;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Invariant norms adapted to a presentation

namespace {

std::string fd(double v) { return expr::format_double(v); }

norms::MetricFamilySpec family_skeleton(const SpherePresentation& pres, norms::FamilyTag tag,
                                        std::vector<int> blocks) {
  norms::MetricFamilySpec spec;
  spec.family = tag;
  spec.dim = pres.dim_m();
  spec.blocks = std::move(blocks);
  spec.alpha = Eigen::MatrixXd::Identity(spec.dim, spec.dim);
  spec.beta = Eigen::VectorXd::Zero(spec.dim);
  return spec;
}

}  // namespace

norms::MinkowskiNorm random_invariant_norm(const SpherePresentation& pres, std::uint64_t seed) {
  sampling::Rng rng(seed);
  const int dm = pres.dim_m();

  if (pres.key == "so") {
    const double b = rng.uniform(0.6, 1.8);
    return norms::make_riemannian(b * Eigen::MatrixXd::Identity(dm, dm));
  }

  if (pres.key == "sp") {
    // Ad(Sp(n-1))-invariant: arbitrary SPD on the trivial 3-dim block, a
    // multiple of the identity on the quaternionic block, plus a small
    // one-form on the trivial block. Generically not Sp(n-1)Sp(1)-invariant.
    Eigen::VectorXd diag = Eigen::VectorXd::Constant(dm, rng.uniform(0.8, 1.25));
    diag[0] = rng.uniform(0.7, 1.4);
    diag[1] = rng.uniform(0.7, 1.4);
    diag[2] = rng.uniform(0.7, 1.4);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(dm);
    b[0] = rng.uniform(-0.3, 0.3) * std::sqrt(diag[0]);
    return norms::make_randers(diag.asDiagonal(), b);
  }

  if (pres.key == "u" || pres.key == "su") {
    const std::vector<std::string> vars = {"s1", "s2"};
    for (double soften = 1.0;; soften *= 0.4) {
      const double A = rng.uniform(0.7, 1.5);
      const double B = rng.uniform(0.7, 1.5);
      const double D = soften * rng.uniform(-0.2, 0.2) * B;
      const double G = soften * rng.uniform(-0.25, 0.25) * std::sqrt(A);
      std::string f = "sqrt(" + fd(A) + "*s1^2+" + fd(B) + "*s2+" + fd(D) +
                      "*s1^2*s2/(s1^2+s2))+" + fd(G) + "*s1";
      auto spec = family_skeleton(pres, norms::FamilyTag::alpha_beta, {1, dm - 1});
      spec.beta[0] = 1.0;
      spec.f = expr::parse(f, vars);
      try {
        return norms::make_family(spec);
      } catch (const NotStronglyConvexError&) {
        if (soften < 1e-3) throw;
      }
    }
  }

  if (pres.key == "sp_u1") {
    const std::vector<std::string> vars = {"s1", "s2", "s3"};
    for (double soften = 1.0;; soften *= 0.4) {
      const double A = rng.uniform(0.7, 1.5);
      const double B = rng.uniform(0.7, 1.5);
      const double C = rng.uniform(0.7, 1.5);
      const double D = soften * rng.uniform(-0.15, 0.15) * std::min(B, C);
      const double E = soften * rng.uniform(-0.15, 0.15) * B;
      const double G = soften * rng.uniform(-0.25, 0.25) * std::sqrt(A);
      std::string f = "sqrt(" + fd(A) + "*s1^2+" + fd(B) + "*s2+" + fd(C) + "*s3+" + fd(D) +
                      "*s2*s3/(s1^2+s2+s3)+" + fd(E) + "*s1^2*s2/(s1^2+s2+s3))+" + fd(G) + "*s1";
      auto spec = family_skeleton(pres, norms::FamilyTag::alpha12_beta, {1, 2, dm - 3});
      spec.beta[0] = 1.0;
      spec.f = expr::parse(f, vars);
      try {
        return norms::make_family(spec);
      } catch (const NotStronglyConvexError&) {
        if (soften < 1e-3) throw;
      }
    }
  }

  if (pres.key == "sp_sp1") {
    const std::vector<std::string> vars = {"s1", "s2"};
    for (double soften = 1.0;; soften *= 0.4) {
      const double B = rng.uniform(0.7, 1.5);
      const double C = rng.uniform(0.7, 1.5);
      const double D = soften * rng.uniform(-0.2, 0.2) * std::min(B, C);
      std::string f = "sqrt(" + fd(B) + "*s1+" + fd(C) + "*s2+" + fd(D) + "*s1*s2/(s1+s2))";
      auto spec = family_skeleton(pres, norms::FamilyTag::alpha12, {3, dm - 3});
      spec.f = expr::parse(f, vars);
      try {
        return norms::make_family(spec);
      } catch (const NotStronglyConvexError&) {
        if (soften < 1e-3) throw;
      }
    }
  }

  throw InvalidInputError("random_invariant_norm: unsupported presentation '" + pres.key + "'");
}

norms::MinkowskiNorm sp_witness_norm(const SpherePresentation& pres) {
  if (pres.key != "sp")
    throw InvalidInputError("sp_witness_norm expects the Sp(n)/Sp(n-1) presentation");
  Eigen::VectorXd diag = Eigen::VectorXd::Ones(pres.dim_m());
  diag[1] = 1.69;  // weights e2, e3 differently from e1: breaks Sp(1)-rotations of m0
  diag[2] = 0.81;
  return norms::make_riemannian(diag.asDiagonal());
}

// ---------------------------------------------------------------------------

nlohmann::json SpherePresentation::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["key"] = key;
  j["n"] = n;
  j["sphere_dim"] = sphere_dim;
  j["dim_g"] = decomposition.algebra.dim;
  j["basis_labels"] = decomposition.algebra.basis_labels;
  j["h_indices"] = decomposition.h_indices;
  j["m_indices"] = decomposition.m_indices;
  j["m_blocks"] = m_blocks;
  j["beta_blocks"] = beta_blocks;
  j["slice"] = slice;
  j["expected_go_verdict"] = expected_go_verdict;
  j["bi_inner"] = decomposition.algebra.bi_scale_note;
  j["realization_agreement"] = decomposition.algebra.realization_agreement;
  nlohmann::json sc = nlohmann::json::array();
  const int d = decomposition.algebra.dim;
  for (int i = 0; i < d; ++i)
    for (int jx = i + 1; jx < d; ++jx)
      for (int k = 0; k < d; ++k) {
        const double c = decomposition.algebra.structure[static_cast<std::size_t>(k)](i, jx);
        if (std::abs(c) > 1e-14) sc.push_back({i, jx, k, c});
      }
  j["structure_constants"] = sc;
  return j;
}

}  // namespace gosphere::liealg
