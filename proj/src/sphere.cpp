#include "gosphere/sphere.hpp"

#include <cmath>

#include "gosphere/errors.hpp"
#include "gosphere/sampling.hpp"

namespace gosphere::sphere {

Eigen::VectorXd Atlas::to_sphere(int chart, const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  const double s = 1.0 + x.squaredNorm();
  Eigen::VectorXd p(n + 1);
  p.head(n) = 2.0 * x / s;
  p[n] = chart == 0 ? (s - 2.0) / s : (2.0 - s) / s;  // (|x|^2 - 1)/(|x|^2 + 1)
  return p;
}

Eigen::VectorXd Atlas::to_chart(int chart, const Eigen::VectorXd& p) {
  const int n = static_cast<int>(p.size()) - 1;
  const double denom = chart == 0 ? 1.0 - p[n] : 1.0 + p[n];
  if (denom < 1e-9)
    throw ChartBoundaryError("stereographic projection undefined near the projection pole");
  return p.head(n) / denom;
}

Eigen::MatrixXd Atlas::to_sphere_jacobian(int chart, const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  const double s = 1.0 + x.squaredNorm();
  Eigen::MatrixXd j(n + 1, n);
  j.topRows(n) = (2.0 / s) * Eigen::MatrixXd::Identity(n, n) -
                 (4.0 / (s * s)) * (x * x.transpose());
  j.row(n) = (chart == 0 ? 4.0 : -4.0) / (s * s) * x.transpose();
  return j;
}

Eigen::MatrixXd Atlas::to_chart_jacobian(int chart, const Eigen::VectorXd& p) {
  const int n = static_cast<int>(p.size()) - 1;
  const double denom = chart == 0 ? 1.0 - p[n] : 1.0 + p[n];
  if (denom < 1e-9)
    throw ChartBoundaryError("stereographic projection undefined near the projection pole");
  Eigen::MatrixXd j(n, n + 1);
  j.leftCols(n) = Eigen::MatrixXd::Identity(n, n) / denom;
  j.col(n) = (chart == 0 ? 1.0 : -1.0) * p.head(n) / (denom * denom);
  return j;
}

int Atlas::preferred_chart(const Eigen::VectorXd& p) {
  return p[p.size() - 1] <= 0.0 ? 0 : 1;
}

Eigen::VectorXd Atlas::transition(const Eigen::VectorXd& x) {
  const double q = x.squaredNorm();
  if (q < 1e-18) throw ChartBoundaryError("chart transition undefined at the origin");
  return x / q;
}

Eigen::MatrixXd Atlas::transition_jacobian(const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  const double q = x.squaredNorm();
  return Eigen::MatrixXd::Identity(n, n) / q - 2.0 / (q * q) * (x * x.transpose());
}

double ChartMetric::eval_ambient(const Eigen::VectorXd& p, const Eigen::VectorXd& w) const {
  const int chart = Atlas::preferred_chart(p);
  return eval(chart, Atlas::to_chart(chart, p), Atlas::to_chart_jacobian(chart, p) * w);
}

double AmbientMetric::eval(int chart, const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  return ambient(Atlas::to_sphere(chart, x), Atlas::to_sphere_jacobian(chart, x) * y);
}

Eigen::VectorXd VectorField::chart_value(int chart, const Eigen::VectorXd& x) const {
  const Eigen::VectorXd p = Atlas::to_sphere(chart, x);
  return Atlas::to_chart_jacobian(chart, p) * ambient(p);
}

LinearKillingField::LinearKillingField(Eigen::MatrixXd a) : a_(std::move(a)) {
  if (a_.rows() != a_.cols() || (a_ + a_.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw InvalidInputError("LinearKillingField: matrix must be antisymmetric");
}

Eigen::MatrixXd LinearKillingField::flow(double t) const {
  const int m = static_cast<int>(a_.rows());
  // scaling and squaring with a Taylor core; A is antisymmetric, so this is
  // well conditioned
  Eigen::MatrixXd b = t * a_;
  int squarings = 0;
  double nrm = b.cwiseAbs().rowwise().sum().maxCoeff();
  while (nrm > 0.5) {
    b *= 0.5;
    nrm *= 0.5;
    ++squarings;
  }
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(m, m);
  for (int k = 1; k <= 14; ++k) {
    term = term * b / static_cast<double>(k);
    result += term;
  }
  for (int k = 0; k < squarings; ++k) result = result * result;
  return result;
}

LinearKillingField hopf_field() {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  a(0, 1) = -1;
  a(1, 0) = 1;
  a(2, 3) = -1;
  a(3, 2) = 1;
  return LinearKillingField(a);
}

LinearKillingField rotation_field(int sphere_dim, int i, int j) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(sphere_dim + 1, sphere_dim + 1);
  a(i, j) = -1;
  a(j, i) = 1;
  return LinearKillingField(a);
}

ExprVectorField::ExprVectorField(int sphere_dim, std::vector<expr::Ast> components)
    : n_(sphere_dim), components_(std::move(components)) {
  if (static_cast<int>(components_.size()) != n_ + 1)
    throw InvalidInputError("ExprVectorField: need n+1 ambient components");
  sampling::Rng rng(sampling::kDefaultSeed);
  for (int k = 0; k < 16; ++k) {
    Eigen::VectorXd p = rng.unit_vector(n_ + 1);
    if (std::abs(p.dot(ambient(p))) > 1e-8)
      throw InvalidInputError("ExprVectorField: field is not tangent to the sphere");
  }
}

Eigen::VectorXd ExprVectorField::ambient(const Eigen::VectorXd& p) const {
  Eigen::VectorXd v(n_ + 1);
  std::span<const double> vars(p.data(), static_cast<std::size_t>(p.size()));
  for (int i = 0; i <= n_; ++i) v[i] = components_[static_cast<std::size_t>(i)].eval(vars);
  return v;
}

}  // namespace gosphere::sphere
