#include "gosphere/navigation.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "gosphere/errors.hpp"

namespace gosphere::navigation {

namespace {

// Solves F(w - t V) = t for the unique positive root. F is any positive
// 1-homogeneous convex evaluator; requires F(-V) < 1.
template <class F>
double solve_navigation(F&& f, const Eigen::VectorXd& V, const Eigen::VectorXd& w) {
  const double fw = f(w);
  if (fw == 0.0) return 0.0;
  const double fmv = f(-V);
  if (!(fmv < 1.0))
    throw NavigationDomainError("navigation datum invalid: F(-V) = " +
                                expr::format_double(fmv) + " >= 1");
  double lo = 0.0, hi = fw / (1.0 - fmv);
  // phi(t) = F(w - tV) - t is strictly decreasing from F(w) to <= 0 on [lo,hi].
  auto phi = [&](double t) { return f(w - t * V) - t; };
  double t = std::min(fw, hi);
  double ft = phi(t);
  for (int it = 0; it < 60; ++it) {
    if (ft > 0)
      lo = t;
    else
      hi = t;
    if (std::abs(ft) <= 1e-14 * std::max(1.0, t)) break;
    const double dh = 1e-7 * std::max(t, 1e-3);
    const double deriv = (phi(t + dh) - phi(t - dh)) / (2 * dh);
    double next = deriv < 0 ? t - ft / deriv : std::numeric_limits<double>::quiet_NaN();
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-15 * std::max(1.0, t)) {
      t = next;
      ft = phi(t);
      break;
    }
    t = next;
    ft = phi(t);
  }
  if (std::abs(ft) > 1e-10 * std::max(1.0, t))
    throw IntegrationError("navigation root-finder failed to converge: residual " +
                           expr::format_double(ft) + " at t = " + expr::format_double(t));
  return t;
}

}  // namespace

NavigationDatum::NavigationDatum(norms::MinkowskiNorm base_norm, Eigen::VectorXd field,
                                 double scale)
    : base(std::move(base_norm)), V(std::move(field)), epsilon(scale) {
  if (V.size() != base.dim()) throw InvalidInputError("navigation datum: dimension mismatch");
  if (epsilon < 0) throw InvalidInputError("navigation datum: epsilon must be nonnegative");
  if (epsilon > 0 && V.norm() > 0) {
    const double fmv = base(-epsilon * V);
    if (!(fmv < 1.0))
      throw NavigationDomainError("navigation datum invalid: F(-eps V) = " +
                                  expr::format_double(fmv) + " >= 1");
  }
}

double navigate_eval(const NavigationDatum& datum, const Eigen::VectorXd& w) {
  if (w.size() != datum.base.dim())
    throw InvalidInputError("navigate_eval: dimension mismatch");
  if (!w.allFinite()) throw InvalidInputError("navigate_eval: non-finite input");
  if (w.norm() == 0.0) return 0.0;
  if (datum.epsilon == 0.0 || datum.V.norm() == 0.0) return datum.base(w);
  Eigen::VectorXd scaled = datum.epsilon * datum.V;
  return solve_navigation([&](const Eigen::VectorXd& z) { return datum.base.unchecked(z); },
                          scaled, w);
}

norms::MinkowskiNorm navigated_norm(const NavigationDatum& datum) {
  NavigationDatum copy = datum;
  return norms::MinkowskiNorm(
      datum.base.dim(), norms::FamilyTag::custom,
      [copy](const Eigen::VectorXd& w) { return navigate_eval(copy, w); });
}

RandersData randers_from_navigation(const Eigen::MatrixXd& h, const Eigen::VectorXd& W) {
  const int n = static_cast<int>(h.rows());
  if (W.size() != n) throw InvalidInputError("randers_from_navigation: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() != Eigen::Success)
    throw InvalidInputError("randers_from_navigation: h must be positive definite");
  RandersData data;
  data.h = h;
  data.W = W;
  data.lambda = W.dot(h * W);
  if (!(data.lambda < 1.0))
    throw NavigationDomainError("randers_from_navigation: lambda = <W,W>_h = " +
                                expr::format_double(data.lambda) + " >= 1");
  const double c = 1.0 - data.lambda;
  const Eigen::VectorXd wflat = h * W;
  data.alpha_matrix = (c * h + wflat * wflat.transpose()) / (c * c);
  data.beta = -wflat / c;
  return data;
}

norms::MinkowskiNorm randers_norm(const RandersData& data) {
  return norms::make_randers(data.alpha_matrix, data.beta);
}

RandersSphereMetric::RandersSphereMetric(int sphere_dim,
                                         std::shared_ptr<const sphere::VectorField> wind,
                                         double epsilon)
    : n_(sphere_dim), wind_(std::move(wind)), eps_(epsilon) {
  if (!wind_ || wind_->sphere_dim() != n_)
    throw InvalidInputError("RandersSphereMetric: wind field dimension mismatch");
  sampling::Rng rng(sampling::kDefaultSeed);
  for (int k = 0; k < 32; ++k) {
    Eigen::VectorXd p = rng.unit_vector(n_ + 1);
    const double lam = eps_ * eps_ * wind_->ambient(p).squaredNorm();
    if (!(lam < 1.0))
      throw NavigationDomainError("RandersSphereMetric: |eps W|_h >= 1 at a sampled point");
  }
}

double RandersSphereMetric::ambient(const Eigen::VectorXd& p, const Eigen::VectorXd& w) const {
  const Eigen::VectorXd W = eps_ * wind_->ambient(p);
  const double lam = W.squaredNorm();
  const double c = 1.0 - lam;
  const double ww = w.dot(W);
  return (-ww + std::sqrt(ww * ww + c * w.squaredNorm())) / c;
}

NavigatedChartMetric::NavigatedChartMetric(std::shared_ptr<const sphere::ChartMetric> base,
                                           std::shared_ptr<const sphere::VectorField> wind,
                                           double epsilon)
    : base_(std::move(base)), wind_(std::move(wind)), eps_(epsilon) {
  if (!base_ || !wind_ || base_->sphere_dim() != wind_->sphere_dim())
    throw InvalidInputError("NavigatedChartMetric: dimension mismatch");
  if (eps_ < 0) throw InvalidInputError("NavigatedChartMetric: epsilon must be nonnegative");
  sampling::Rng rng(sampling::kDefaultSeed);
  for (int k = 0; k < 32; ++k) {
    Eigen::VectorXd p = rng.unit_vector(sphere_dim() + 1);
    Eigen::VectorXd v = wind_->ambient(p);
    if (eps_ > 0 && v.norm() > 0 && !(base_->eval_ambient(p, -eps_ * v) < 1.0))
      throw NavigationDomainError("NavigatedChartMetric: F(-eps V) >= 1 at a sampled point");
  }
}

double NavigatedChartMetric::eval(int chart, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y) const {
  if (y.norm() == 0.0) return 0.0;
  if (eps_ == 0.0) return base_->eval(chart, x, y);
  Eigen::VectorXd V = eps_ * wind_->chart_value(chart, x);
  if (V.norm() == 0.0) return base_->eval(chart, x, y);
  return solve_navigation([&](const Eigen::VectorXd& z) { return base_->eval(chart, x, z); }, V,
                          y);
}

double killing_invariance_residual(const sphere::ChartMetric& metric,
                                   const sphere::LinearKillingField& V, int samples,
                                   std::uint64_t seed) {
  const int n = metric.sphere_dim();
  sampling::Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    Eigen::VectorXd p = rng.unit_vector(n + 1);
    Eigen::VectorXd w = rng.unit_vector(n + 1);
    w -= w.dot(p) * p;  // tangent
    if (w.norm() < 1e-3) continue;
    const double f0 = metric.eval_ambient(p, w);
    for (double t : {0.35, 0.8}) {
      Eigen::MatrixXd rho = V.flow(t);
      const double ft = metric.eval_ambient(rho * p, rho * w);
      worst = std::max(worst, std::abs(ft - f0) / f0);
    }
  }
  return worst;
}

sphere::Curve killing_transport(const sphere::Curve& c, const sphere::ChartMetric& base_metric,
                                const sphere::LinearKillingField& V, double epsilon) {
  const double kill = killing_invariance_residual(base_metric, V, 24);
  if (kill > 1e-6)
    throw NotKillingError("killing_transport: field fails the sampled invariance test, "
                          "residual " + expr::format_double(kill));
  if (c.samples.empty()) return c;

  sphere::Curve out;
  out.sphere_dim = c.sphere_dim;
  out.samples.reserve(c.samples.size());
  const Eigen::MatrixXd A = epsilon * V.matrix();
  for (const auto& s : c.samples) {
    // rho_t = exp(t eps A); d/dt rho_t(c(t)) = eps A c~(t) + rho_t c'(t)
    Eigen::MatrixXd rho = sphere::LinearKillingField(V.matrix()).flow(epsilon * s.t);
    sphere::CurveSample o;
    o.t = s.t;
    o.p = rho * s.p;
    o.v = A * o.p + rho * s.v;
    out.samples.push_back(std::move(o));
  }
  return out;
}

}  // namespace gosphere::navigation
