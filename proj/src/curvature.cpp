#include "gosphere/curvature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "gosphere/errors.hpp"
#include "gosphere/numdiff.hpp"
#include "gosphere/optimize.hpp"

namespace gosphere::curvature {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kStepYRel = 6e-3;   // y-derivatives of F^2
constexpr double kStepX = 1e-3;      // x-derivatives of F^2, scaled by (1+|x|^2)
constexpr double kOuterX = 4e-3;     // x-derivatives of G
constexpr double kOuterYRel = 5e-3;  // y-derivatives of G

using Eigen::MatrixXd;
using Eigen::VectorXd;

// 4-point first derivative of a vector-valued map along direction d.
template <class F>
VectorXd vderiv1(F&& f, const VectorXd& base, const VectorXd& d, double h) {
  return (f(base - 2 * h * d) - 8.0 * f(base - h * d) + 8.0 * f(base + h * d) -
          f(base + 2 * h * d)) /
         (12.0 * h);
}

MatrixXd fiber_tensor(const sphere::ChartMetric& metric, int chart, const VectorXd& x,
                      const VectorXd& y) {
  auto f2 = [&](const VectorXd& yy) {
    const double f = metric.eval(chart, x, yy);
    return f * f;
  };
  return 0.5 * numdiff::hessian(f2, y, kStepYRel * y.norm());
}

struct IntegratorState {
  int chart;
  VectorXd x, v;
  double t = 0.0;
};

void switch_chart_if_needed(IntegratorState& s) {
  if (s.x.norm() > sphere::Atlas::kSwitchRadius) {
    s.v = sphere::Atlas::transition_jacobian(s.x) * s.v;
    s.x = sphere::Atlas::transition(s.x);
    s.chart = 1 - s.chart;
  }
}

void rk4_geodesic_step(const sphere::ChartMetric& metric, IntegratorState& s, double h) {
  auto acc = [&](const VectorXd& x, const VectorXd& v) -> VectorXd {
    return -2.0 * spray_coefficients(metric, s.chart, x, v);
  };
  const VectorXd k1x = s.v, k1v = acc(s.x, s.v);
  const VectorXd k2x = s.v + 0.5 * h * k1v, k2v = acc(s.x + 0.5 * h * k1x, s.v + 0.5 * h * k1v);
  const VectorXd k3x = s.v + 0.5 * h * k2v, k3v = acc(s.x + 0.5 * h * k2x, s.v + 0.5 * h * k2v);
  const VectorXd k4x = s.v + h * k3v, k4v = acc(s.x + h * k3x, s.v + h * k3v);
  s.x += h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
  s.v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
  s.t += h;
  switch_chart_if_needed(s);
}

sphere::CurveSample to_ambient_sample(const IntegratorState& s) {
  sphere::CurveSample out;
  out.t = s.t;
  out.p = sphere::Atlas::to_sphere(s.chart, s.x);
  out.v = sphere::Atlas::to_sphere_jacobian(s.chart, s.x) * s.v;
  return out;
}

}  // namespace

Eigen::VectorXd spray_coefficients(const sphere::ChartMetric& metric, int chart,
                                   const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.norm() > sphere::Atlas::kMaxRadius)
    throw ChartBoundaryError("spray_coefficients: chart coordinate outside safe radius, "
                             "switch charts");
  const int n = static_cast<int>(x.size());
  const double ny = y.norm();
  if (ny < 1e-12) throw InvalidInputError("spray_coefficients: y must be nonzero");

  auto f2 = [&](const VectorXd& xx, const VectorXd& yy) {
    const double f = metric.eval(chart, xx, yy);
    return f * f;
  };

  const double hy = kStepYRel * ny;
  const double hx = kStepX * (1.0 + x.squaredNorm());

  const MatrixXd g = fiber_tensor(metric, chart, x, y);

  // a(y') = y^k [F^2]_{x^k}(x, y'), the x-derivative along the fixed
  // direction y; then [F^2]_{x^k y^l} y^k = da/dy'^l.
  auto a = [&](const VectorXd& yy) {
    return numdiff::dderiv1([&](const VectorXd& xx) { return f2(xx, yy); }, x, y, hx / ny);
  };
  VectorXd da(n), dx(n);
  for (int l = 0; l < n; ++l) {
    da[l] = numdiff::dderiv1(a, y, VectorXd::Unit(n, l), hy);
    dx[l] = numdiff::dderiv1([&](const VectorXd& xx) { return f2(xx, y); }, x,
                             VectorXd::Unit(n, l), hx);
  }
  return g.ldlt().solve(0.25 * (da - dx));
}

Eigen::VectorXd unit_initial(const sphere::ChartMetric& metric, const Eigen::VectorXd& p0,
                             const Eigen::VectorXd& w0) {
  const double f = metric.eval_ambient(p0, w0);
  if (!(f > 0)) throw InvalidInputError("unit_initial: zero direction");
  return w0 / f;
}

sphere::Curve geodesic(const sphere::ChartMetric& metric, const Eigen::VectorXd& p0,
                       const Eigen::VectorXd& w0, double T, const GeodesicOptions& opts) {
  if (T <= 0) throw InvalidInputError("geodesic: T must be positive");
  IntegratorState s;
  s.chart = sphere::Atlas::preferred_chart(p0);
  s.x = sphere::Atlas::to_chart(s.chart, p0);
  s.v = sphere::Atlas::to_chart_jacobian(s.chart, p0) * w0;
  const double f0 = metric.eval(s.chart, s.x, s.v);
  if (std::abs(f0 - 1.0) > 1e-9)
    throw PreconditionError("geodesic: initial speed F = " + expr::format_double(f0) +
                            " is not 1 (normalize with unit_initial)");

  const int n_samples = std::max(1, static_cast<int>(std::round(T / opts.sample_dt)));
  const double dt = T / n_samples;
  const int substeps0 = std::max(1, static_cast<int>(std::ceil(dt / opts.step)));

  sphere::Curve curve;
  curve.sphere_dim = metric.sphere_dim();
  curve.samples.reserve(static_cast<std::size_t>(n_samples) + 1);
  curve.samples.push_back(to_ambient_sample(s));

  const double drift_tol = opts.segment_drift_tol > 0
                               ? opts.segment_drift_tol
                               : std::max(1e-10, 1e-8 * dt);
  double f_prev = f0;
  int substeps = substeps0;
  for (int k = 0; k < n_samples; ++k) {
    const IntegratorState saved = s;
    for (int halving = 0;; ++halving) {
      bool finite = true;
      const double h = dt / substeps;
      for (int j = 0; j < substeps; ++j) {
        rk4_geodesic_step(metric, s, h);
        if (!s.x.allFinite() || !s.v.allFinite()) {
          finite = false;
          break;
        }
      }
      const double f = finite ? metric.eval(s.chart, s.x, s.v) : 0.0;
      if (finite && std::abs(f - f_prev) <= drift_tol) {
        f_prev = f;
        break;
      }
      if (halving >= opts.max_halvings)
        throw IntegrationError("geodesic: step-size collapse near t = " +
                               expr::format_double(s.t) + " (chart " +
                               std::to_string(saved.chart) + ", |x| = " +
                               expr::format_double(saved.x.norm()) + ")");
      s = saved;
      substeps *= 2;
    }
    s.t = (k + 1) * dt;  // avoid accumulation drift in the time stamp
    curve.samples.push_back(to_ambient_sample(s));
    curve.max_speed_drift = std::max(curve.max_speed_drift, std::abs(f_prev - 1.0));
  }
  return curve;
}

double flag_curvature(const sphere::ChartMetric& metric, int chart, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& y, const Eigen::VectorXd& u_in) {
  const int n = static_cast<int>(x.size());
  const MatrixXd g = fiber_tensor(metric, chart, x, y);
  const double fy = metric.eval(chart, x, y);
  const double f2 = fy * fy;

  VectorXd u = u_in;
  u -= (u.dot(g * y) / y.dot(g * y)) * y;  // enforce <y,u>_y = 0
  const double denom = f2 * u.dot(g * u) - std::pow(y.dot(g * u), 2);
  if (!(denom > 1e-12 * f2 * u.squaredNorm()))
    throw InvalidInputError("flag_curvature: degenerate flag (u parallel to y)");

  auto G = [&](const VectorXd& xx, const VectorXd& yy) {
    return spray_coefficients(metric, chart, xx, yy);
  };

  const double ny = y.norm();
  const double hox = kOuterX * (1.0 + x.squaredNorm());
  const double hoy = kOuterYRel * ny;

  const VectorXd w = G(x, y);

  MatrixXd R = MatrixXd::Zero(n, n);
  // 2 dG/dx^k
  for (int k = 0; k < n; ++k)
    R.col(k) += 2.0 * vderiv1([&](const VectorXd& xx) { return G(xx, y); }, x,
                              VectorXd::Unit(n, k), hox);
  // - y^j d2G/dx^j dy^k: x-derivative along y, then y-gradient
  auto cdir = [&](const VectorXd& yy) {
    return vderiv1([&](const VectorXd& xx) { return G(xx, yy); }, x, y, hox / ny);
  };
  for (int k = 0; k < n; ++k)
    R.col(k) -= vderiv1(cdir, y, VectorXd::Unit(n, k), hoy);
  // + 2 G^j d2G/dy^j dy^k: y-derivative along w = G(x,y), then y-gradient
  if (w.norm() > 1e-12) {
    auto edir = [&](const VectorXd& yy) {
      return vderiv1([&](const VectorXd& zz) { return G(x, zz); }, yy, w, hoy / w.norm());
    };
    for (int k = 0; k < n; ++k)
      R.col(k) += 2.0 * vderiv1(edir, y, VectorXd::Unit(n, k), hoy);
  }
  // - dG^i/dy^j dG^j/dy^k
  MatrixXd J(n, n);
  for (int j = 0; j < n; ++j)
    J.col(j) = vderiv1([&](const VectorXd& yy) { return G(x, yy); }, y, VectorXd::Unit(n, j),
                       hoy);
  R -= J * J;

  const VectorXd ru = R * u;
  return u.dot(g * ru) / denom;
}

double flag_curvature_ambient(const sphere::ChartMetric& metric, const Eigen::VectorXd& p,
                              const Eigen::VectorXd& w, const Eigen::VectorXd& u) {
  const int chart = sphere::Atlas::preferred_chart(p);
  const VectorXd x = sphere::Atlas::to_chart(chart, p);
  const MatrixXd jc = sphere::Atlas::to_chart_jacobian(chart, p);
  return flag_curvature(metric, chart, x, jc * w, jc * u);
}

namespace {

struct FlowState {
  VectorXd p;
  double length = 0.0;
};

// One RK4 step of p' = s V(p), length' = F(p, s V(p)).
template <class Field>
void rk4_flow_step(const Field& f, FlowState& st, double h) {
  auto d = [&](const FlowState& a) {
    return std::pair<VectorXd, double>(f.velocity(a.p), f.speed(a.p));
  };
  auto [k1p, k1l] = d(st);
  FlowState s2{st.p + 0.5 * h * k1p, 0};
  auto [k2p, k2l] = d(s2);
  FlowState s3{st.p + 0.5 * h * k2p, 0};
  auto [k3p, k3l] = d(s3);
  FlowState s4{st.p + h * k3p, 0};
  auto [k4p, k4l] = d(s4);
  st.p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
  st.length += h / 6.0 * (k1l + 2 * k2l + 2 * k3l + k4l);
}

struct OrbitFlow {
  const sphere::ChartMetric* metric;
  const sphere::VectorField* field;
  int dir;
  VectorXd velocity(const VectorXd& p) const { return dir * field->ambient(p); }
  double speed(const VectorXd& p) const { return metric->eval_ambient(p, velocity(p)); }
};

}  // namespace

ClosedGeodesicRecord closed_geodesic_length(const sphere::ChartMetric& metric,
                                            const sphere::VectorField& V, int direction,
                                            const Eigen::VectorXd& p0,
                                            const ClosedGeodesicOptions& opts) {
  if (direction != 1 && direction != -1)
    throw InvalidInputError("closed_geodesic_length: direction must be +1 or -1");
  OrbitFlow flow{&metric, &V, direction};
  if (V.ambient(p0).norm() < 1e-12)
    throw InvalidInputError("closed_geodesic_length: V vanishes at the start point");

  double speed_min = std::numeric_limits<double>::infinity(), speed_max = 0.0;
  auto observe_speed = [&](const VectorXd& p) {
    const double s = flow.speed(p);
    speed_min = std::min(speed_min, s);
    speed_max = std::max(speed_max, s);
  };
  observe_speed(p0);

  FlowState st{p0, 0.0};
  const double h = opts.step;
  double t = 0.0;
  double prev_d2 = 0.0, prev_prev_d2 = 0.0;
  FlowState prev_prev_state = st, prev_state = st;
  double prev_t = 0.0, prev_prev_t = 0.0;
  bool armed = false;  // set once the orbit has left the start ball

  int step_count = 0;
  while (t < opts.horizon) {
    prev_prev_state = prev_state;
    prev_prev_t = prev_t;
    prev_prev_d2 = prev_d2;
    prev_state = st;
    prev_t = t;
    prev_d2 = (st.p - p0).squaredNorm();

    rk4_flow_step(flow, st, h);
    t += h;
    if (++step_count % 64 == 0) observe_speed(st.p);
    const double d2 = (st.p - p0).squaredNorm();
    if (!armed && d2 > 0.04) armed = true;

    if (armed && prev_d2 < 2.5e-3 && prev_d2 <= prev_prev_d2 && prev_d2 <= d2 && prev_t > 0) {
      // bracketed local minimum of |p(t) - p0|^2 at prev_t: golden section
      // refine by re-integrating from the stored state
      auto dist2_at = [&](double tau) {
        FlowState w = prev_prev_state;
        const double span = tau - prev_prev_t;
        const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(span) / 1e-4)));
        const double hh = span / steps;
        for (int i = 0; i < steps; ++i) rk4_flow_step(flow, w, hh);
        return std::make_pair((w.p - p0).squaredNorm(), w);
      };
      double a = prev_prev_t, b = t;
      const double gr = 0.6180339887498949;
      double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
      double f1 = dist2_at(c1).first, f2v = dist2_at(c2).first;
      for (int it = 0; it < 60 && (b - a) > 1e-12; ++it) {
        if (f1 <= f2v) {
          b = c2;
          c2 = c1;
          f2v = f1;
          c1 = b - gr * (b - a);
          f1 = dist2_at(c1).first;
        } else {
          a = c1;
          c1 = c2;
          f1 = f2v;
          c2 = a + gr * (b - a);
          f2v = dist2_at(c2).first;
        }
      }
      const double tau = 0.5 * (a + b);
      auto [d2min, wmin] = dist2_at(tau);
      const double miss = std::sqrt(d2min);
      if (miss <= opts.return_tol) {
        ClosedGeodesicRecord rec;
        rec.direction = direction;
        rec.period = tau;
        rec.length = wmin.length;
        rec.return_miss = miss;
        rec.speed_spread = (speed_max - speed_min) / std::max(speed_min, 1e-300);
        if (rec.speed_spread > 1e-6)
          throw PreconditionError(
              "closed_geodesic_length: F-speed is not constant along the orbit (spread " +
              expr::format_double(rec.speed_spread) + "); V must be Killing of constant length");
        return rec;
      }
      // near miss: keep integrating
    }
  }
  throw SearchFailureError("closed_geodesic_length: orbit did not close within the horizon");
}

TuneResult tune_epsilon(std::shared_ptr<const sphere::ChartMetric> metric,
                        const sphere::LinearKillingField& V, const Eigen::VectorXd& p0,
                        double target, const ClosedGeodesicOptions& opts) {
  TuneResult out;
  const double la = closed_geodesic_length(*metric, V, +1, p0, opts).length;
  const double lb = closed_geodesic_length(*metric, V, -1, p0, opts).length;
  // Orient V so that c(-t), the flow of -V_oriented, is the shorter prime
  // geodesic; navigation by +eps V_oriented then lengthens it monotonically.
  out.orientation = la <= lb ? -1 : +1;
  out.lambda_minus = std::min(la, lb);
  out.lambda_plus = std::max(la, lb);
  if (out.lambda_minus > target + 1e-9)
    throw PreconditionError("tune_epsilon: lambda_minus = " +
                            expr::format_double(out.lambda_minus) +
                            " exceeds the target; the tuning lemma requires lambda_minus <= 2 pi");

  auto oriented = std::make_shared<sphere::LinearKillingField>(out.orientation * V.matrix());
  const double f_mv = metric->eval_ambient(p0, -oriented->ambient(p0));
  const double eps_max = 1.0 / f_mv;

  auto lambda_of = [&](double eps) {
    if (eps == 0.0) return out.lambda_minus;
    auto nav = std::make_shared<navigation::NavigatedChartMetric>(metric, oriented, eps);
    return closed_geodesic_length(*nav, *oriented, -1, p0, opts).length;
  };

  double lo = 0.0, hi = 0.9 * eps_max;
  double lhi = lambda_of(hi);
  while (lhi < target && hi < 0.999 * eps_max) {
    hi = 0.5 * (hi + eps_max);
    lhi = lambda_of(hi);
  }
  if (lhi < target)
    throw SearchFailureError("tune_epsilon: could not bracket the target length");
  for (int it = 0; it < 60 && (hi - lo) > 1e-8; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (lambda_of(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  out.epsilon_prime = 0.5 * (lo + hi);
  out.lambda_at_epsilon = lambda_of(out.epsilon_prime);
  return out;
}

namespace {

// Closest approach of a unit-speed geodesic to the target, with parabolic
// refinement of the discrete minimum of the squared chord distance.
struct Approach {
  double d = std::numeric_limits<double>::infinity();
  double t = 0.0;
};

Approach closest_approach(const sphere::ChartMetric& metric, const Eigen::VectorXd& p0,
                          const Eigen::VectorXd& w0, const Eigen::VectorXd& target,
                          double horizon, double step) {
  IntegratorState s;
  s.chart = sphere::Atlas::preferred_chart(p0);
  s.x = sphere::Atlas::to_chart(s.chart, p0);
  s.v = sphere::Atlas::to_chart_jacobian(s.chart, p0) * w0;

  Approach best;
  double tm1 = 0, dm2 = std::numeric_limits<double>::infinity(),
         dm1 = (p0 - target).squaredNorm();
  double t = 0.0;
  while (t < horizon) {
    rk4_geodesic_step(metric, s, step);
    t += step;
    const VectorXd p = sphere::Atlas::to_sphere(s.chart, s.x);
    const double d2 = (p - target).squaredNorm();
    if (dm1 <= dm2 && dm1 <= d2 && tm1 > 0) {
      // parabola through (tm2, dm2), (tm1, dm1), (t, d2)
      const double denom = (dm2 - 2 * dm1 + d2);
      double tq = tm1, dq = dm1;
      if (denom > 1e-300) {
        const double delta = 0.5 * (dm2 - d2) / denom * step;
        tq = tm1 + delta;
        dq = dm1 - 0.125 * (dm2 - d2) * (dm2 - d2) / denom;
      }
      if (dq < best.d * best.d || std::sqrt(std::max(dq, 0.0)) < best.d) {
        best.d = std::sqrt(std::max(dq, 0.0));
        best.t = tq;
      }
    }
    dm2 = dm1;
    tm1 = t;
    dm1 = d2;
  }
  return best;
}

}  // namespace

double distance(const sphere::ChartMetric& metric, const Eigen::VectorXd& p1,
                const Eigen::VectorXd& p2, const DistanceOptions& opts) {
  if ((p1 - p2).norm() < 1e-12)
    throw InvalidInputError("distance: points coincide");
  const int n = metric.sphere_dim();
  const int chart = sphere::Atlas::preferred_chart(p1);
  const VectorXd x1 = sphere::Atlas::to_chart(chart, p1);
  const MatrixXd js = sphere::Atlas::to_sphere_jacobian(chart, x1);

  auto unit_dir = [&](const VectorXd& raw_chart) {
    const double f = metric.eval(chart, x1, raw_chart);
    return VectorXd(js * (raw_chart / f));
  };

  std::vector<VectorXd> dirs;
  std::vector<VectorXd> raws;
  if (n == 2) {
    for (int k = 0; k < opts.directions; ++k) {
      const double th = 2 * kPi * k / opts.directions;
      VectorXd raw(2);
      raw << std::cos(th), std::sin(th);
      raws.push_back(raw);
      dirs.push_back(unit_dir(raw));
    }
  } else {
    sampling::Rng rng(sampling::kDefaultSeed);
    for (int k = 0; k < opts.directions; ++k) {
      raws.push_back(rng.unit_vector(n));
      dirs.push_back(unit_dir(raws.back()));
    }
  }

  struct Candidate {
    int index;
    Approach approach;
  };
  std::vector<Candidate> candidates;
  for (int k = 0; k < static_cast<int>(dirs.size()); ++k) {
    Approach a = closest_approach(metric, p1, dirs[static_cast<std::size_t>(k)], p2,
                                  opts.horizon, opts.coarse_step);
    if (a.d < 0.25) candidates.push_back({k, a});
  }
  if (candidates.empty())
    throw SearchFailureError("distance: no geodesic approached the target");
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.approach.d + 1e-3 * a.approach.t < b.approach.d + 1e-3 * b.approach.t;
  });
  candidates.resize(std::min<std::size_t>(candidates.size(), 4));

  double best_len = std::numeric_limits<double>::infinity();
  if (n == 2) {
    for (const auto& cand : candidates) {
      const double th0 = 2 * kPi * cand.index / opts.directions;
      const double width = 2 * kPi / opts.directions;
      auto miss = [&](double th) {
        VectorXd raw(2);
        raw << std::cos(th), std::sin(th);
        Approach a = closest_approach(metric, p1, unit_dir(raw), p2,
                                      std::min(opts.horizon, cand.approach.t + 0.5),
                                      opts.fine_step);
        return a;
      };
      double a = th0 - width, b = th0 + width;
      const double gr = 0.6180339887498949;
      double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
      Approach f1 = miss(c1), f2 = miss(c2);
      for (int it = 0; it < 48 && (b - a) > 1e-10; ++it) {
        if (f1.d <= f2.d) {
          b = c2;
          c2 = c1;
          f2 = f1;
          c1 = b - gr * (b - a);
          f1 = miss(c1);
        } else {
          a = c1;
          c1 = c2;
          f1 = f2;
          c2 = a + gr * (b - a);
          f2 = miss(c2);
        }
        if (std::min(f1.d, f2.d) < 0.2 * opts.hit_tol) break;
      }
      const Approach hit = f1.d <= f2.d ? f1 : f2;
      if (hit.d <= opts.hit_tol) best_len = std::min(best_len, hit.t);
    }
  } else {
    // refine by a simplex search over tangent perturbations of the best rays
    for (const auto& cand : candidates) {
      const VectorXd raw0 = raws[static_cast<std::size_t>(cand.index)];
      Eigen::HouseholderQR<MatrixXd> qr(raw0);
      const MatrixXd basis = qr.householderQ() * MatrixXd::Identity(n, n).rightCols(n - 1);
      const double local_horizon = std::min(opts.horizon, cand.approach.t + 0.5);
      Approach best_local = cand.approach;
      auto objective = [&](const VectorXd& delta) {
        VectorXd raw = raw0 + basis * delta;
        if (raw.norm() < 1e-9) return 10.0;
        Approach a = closest_approach(metric, p1, unit_dir(raw), p2, local_horizon,
                                      opts.fine_step);
        if (a.d < best_local.d) best_local = a;
        return a.d;
      };
      VectorXd delta = VectorXd::Zero(n - 1);
      const double spacing = 2.5 * std::sqrt(4.0 / opts.directions);
      optimize::nelder_mead(objective, delta, spacing, 140);
      if (best_local.d <= opts.hit_tol) best_len = std::min(best_len, best_local.t);
    }
  }
  if (!std::isfinite(best_len))
    throw SearchFailureError("distance: refinement did not reach the target within 1e-4");
  return best_len;
}

AntipodalReport antipodal_check(const sphere::ChartMetric& metric, int point_samples,
                                int directions, std::uint64_t seed) {
  const int n = metric.sphere_dim();
  sampling::Rng rng(seed);
  AntipodalReport report;
  report.max_spread = 0.0;

  auto endpoint_cloud = [&](const VectorXd& p) {
    std::vector<VectorXd> ends;
    const int chart = sphere::Atlas::preferred_chart(p);
    const VectorXd x = sphere::Atlas::to_chart(chart, p);
    const MatrixXd js = sphere::Atlas::to_sphere_jacobian(chart, x);
    for (int k = 0; k < directions; ++k) {
      VectorXd raw;
      if (n == 2) {
        const double th = 2 * kPi * k / directions;
        raw.resize(2);
        raw << std::cos(th), std::sin(th);
      } else {
        raw = rng.unit_vector(n);
      }
      VectorXd w = js * raw;
      w /= metric.eval_ambient(p, w);
      auto curve = geodesic(metric, p, w, kPi, {2e-3, kPi / 8});
      ends.push_back(curve.samples.back().p);
    }
    return ends;
  };

  auto cloud_stats = [&](const std::vector<VectorXd>& ends) {
    double spread = 0.0;
    VectorXd mean = VectorXd::Zero(n + 1);
    for (const auto& e : ends) mean += e;
    mean /= static_cast<double>(ends.size());
    for (std::size_t i = 0; i < ends.size(); ++i)
      for (std::size_t j = i + 1; j < ends.size(); ++j)
        spread = std::max(spread, (ends[i] - ends[j]).norm());
    mean.normalize();
    return std::make_pair(spread, mean);
  };

  for (int s = 0; s < point_samples; ++s) {
    VectorXd p = rng.unit_vector(n + 1);
    auto [spread1, psi] = cloud_stats(endpoint_cloud(p));
    auto [spread2, psi2] = cloud_stats(endpoint_cloud(psi));
    report.max_spread = std::max({report.max_spread, spread1, spread2});
    report.max_psi2_displacement = std::max(report.max_psi2_displacement, (psi2 - p).norm());
    report.points.push_back(p);
    report.psi_points.push_back(psi);
  }
  report.constant_curvature_ok = report.max_spread <= 1e-3;
  return report;
}

KillingCriticalReport killing_critical_check(const sphere::ChartMetric& metric,
                                             const sphere::VectorField& X,
                                             const Eigen::VectorXd& p) {
  if (X.ambient(p).norm() < 1e-12)
    throw InvalidInputError("killing_critical_check: X vanishes at the point");
  const int chart = sphere::Atlas::preferred_chart(p);
  const VectorXd x0 = sphere::Atlas::to_chart(chart, p);

  auto f = [&](const VectorXd& x) {
    return metric.eval(chart, x, X.chart_value(chart, x));
  };
  KillingCriticalReport report;
  report.grad_norm = numdiff::gradient(f, x0, 1e-4 * (1.0 + x0.squaredNorm())).norm();

  // integral curve through p: chart positions at +-dt by RK4 on x' = X(x)
  const double dt = 1e-3;
  auto flow_step = [&](VectorXd x, double h) {
    auto vel = [&](const VectorXd& z) { return X.chart_value(chart, z); };
    const VectorXd k1 = vel(x);
    const VectorXd k2 = vel(x + 0.5 * h * k1);
    const VectorXd k3 = vel(x + 0.5 * h * k2);
    const VectorXd k4 = vel(x + h * k3);
    return VectorXd(x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4));
  };
  const VectorXd xp = flow_step(x0, dt), xm = flow_step(x0, -dt);
  const VectorXd vel = (xp - xm) / (2 * dt);
  const VectorXd acc = (xp - 2 * x0 + xm) / (dt * dt);
  VectorXd resid = acc + 2.0 * spray_coefficients(metric, chart, x0, vel);
  report.ode_residual = resid.cwiseAbs().maxCoeff();
  return report;
}

CurveODEReport geodesic_residual(const sphere::ChartMetric& metric, const sphere::Curve& c) {
  CurveODEReport report;
  if (c.samples.size() < 3) return report;
  for (std::size_t i = 1; i + 1 < c.samples.size(); ++i) {
    const auto& sm = c.samples[i - 1];
    const auto& s0 = c.samples[i];
    const auto& sp = c.samples[i + 1];
    const double dt = 0.5 * (sp.t - sm.t);
    const int chart = sphere::Atlas::preferred_chart(s0.p);
    const VectorXd x0 = sphere::Atlas::to_chart(chart, s0.p);
    const MatrixXd jm = sphere::Atlas::to_chart_jacobian(chart, sm.p);
    const MatrixXd j0 = sphere::Atlas::to_chart_jacobian(chart, s0.p);
    const MatrixXd jp = sphere::Atlas::to_chart_jacobian(chart, sp.p);
    const VectorXd v0 = j0 * s0.v;
    const VectorXd acc = (jp * sp.v - jm * sm.v) / (2 * dt);
    const VectorXd resid = acc + 2.0 * spray_coefficients(metric, chart, x0, v0);
    report.max_ode_residual = std::max(report.max_ode_residual, resid.cwiseAbs().maxCoeff());
    report.max_unit_speed_drift =
        std::max(report.max_unit_speed_drift, std::abs(metric.eval(chart, x0, v0) - 1.0));
  }
  return report;
}

double chart_consistency_residual(const sphere::ChartMetric& metric, int samples,
                                  std::uint64_t seed) {
  const int n = metric.sphere_dim();
  sampling::Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    VectorXd p = rng.unit_vector(n + 1);
    if (std::abs(p[n]) > 0.8) {
      --k;  // resample away from the poles so both charts are well-conditioned
      continue;
    }
    VectorXd x0 = sphere::Atlas::to_chart(0, p);
    VectorXd y0 = rng.unit_vector(n);
    const double f0 = metric.eval(0, x0, y0);
    const VectorXd x1 = sphere::Atlas::transition(x0);
    const VectorXd y1 = sphere::Atlas::transition_jacobian(x0) * y0;
    const double f1 = metric.eval(1, x1, y1);
    worst = std::max(worst, std::abs(f0 - f1) / f0);
  }
  return worst;
}

std::string curve_to_csv(const sphere::Curve& c) {
  std::string out = "t,chart";
  for (int i = 0; i < c.sphere_dim; ++i) out += ",x" + std::to_string(i + 1);
  out += "\n";
  for (const auto& s : c.samples) {
    const int chart = sphere::Atlas::preferred_chart(s.p);
    const VectorXd x = sphere::Atlas::to_chart(chart, s.p);
    out += expr::format_double(s.t);
    out += "," + std::to_string(chart);
    for (int i = 0; i < x.size(); ++i) out += "," + expr::format_double(x[i]);
    out += "\n";
  }
  return out;
}

std::vector<FlagSample> random_flags(int sphere_dim, int count, std::uint64_t seed) {
  sampling::Rng rng(seed);
  std::vector<FlagSample> flags;
  flags.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(flags.size()) < count) {
    FlagSample f;
    f.p = rng.unit_vector(sphere_dim + 1);
    f.y = rng.unit_vector(sphere_dim + 1);
    f.y -= f.y.dot(f.p) * f.p;
    f.u = rng.unit_vector(sphere_dim + 1);
    f.u -= f.u.dot(f.p) * f.p;
    if (f.y.norm() < 0.3 || f.u.norm() < 0.3) continue;
    f.y.normalize();
    f.u.normalize();
    if (std::abs(f.y.dot(f.u)) > 0.95) continue;
    flags.push_back(std::move(f));
  }
  return flags;
}

}  // namespace gosphere::curvature
