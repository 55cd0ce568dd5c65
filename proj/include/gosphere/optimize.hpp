#ifndef GOSPHERE_OPTIMIZE_HPP
#define GOSPHERE_OPTIMIZE_HPP

#include <Eigen/Core>
#include <algorithm>
#include <functional>
#include <vector>

namespace gosphere::optimize {

/// Compact Nelder-Mead. x is the start point on entry and the argmin on
/// exit; returns the best value found.
inline double nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                          Eigen::VectorXd& x, double scale, int max_iter) {
  const int n = static_cast<int>(x.size());
  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1), x);
  std::vector<double> val(static_cast<std::size_t>(n + 1));
  for (int i = 1; i <= n; ++i) pts[static_cast<std::size_t>(i)][i - 1] += scale;
  for (int i = 0; i <= n; ++i) val[static_cast<std::size_t>(i)] = f(pts[static_cast<std::size_t>(i)]);

  auto order = [&] {
    std::vector<int> idx(static_cast<std::size_t>(n + 1));
    for (int i = 0; i <= n; ++i) idx[static_cast<std::size_t>(i)] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      return val[static_cast<std::size_t>(a)] < val[static_cast<std::size_t>(b)];
    });
    std::vector<Eigen::VectorXd> p2;
    std::vector<double> v2;
    for (int i : idx) {
      p2.push_back(pts[static_cast<std::size_t>(i)]);
      v2.push_back(val[static_cast<std::size_t>(i)]);
    }
    pts = std::move(p2);
    val = std::move(v2);
  };

  for (int it = 0; it < max_iter; ++it) {
    order();
    if (val[0] < 1e-16 || std::abs(val[static_cast<std::size_t>(n)] - val[0]) < 1e-15) break;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += pts[static_cast<std::size_t>(i)];
    centroid /= n;
    Eigen::VectorXd xr = centroid + (centroid - pts[static_cast<std::size_t>(n)]);
    double fr = f(xr);
    if (fr < val[0]) {
      Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[static_cast<std::size_t>(n)]);
      double fe = f(xe);
      if (fe < fr) {
        pts[static_cast<std::size_t>(n)] = xe;
        val[static_cast<std::size_t>(n)] = fe;
      } else {
        pts[static_cast<std::size_t>(n)] = xr;
        val[static_cast<std::size_t>(n)] = fr;
      }
    } else if (fr < val[static_cast<std::size_t>(n - 1)]) {
      pts[static_cast<std::size_t>(n)] = xr;
      val[static_cast<std::size_t>(n)] = fr;
    } else {
      Eigen::VectorXd xc = centroid + 0.5 * (pts[static_cast<std::size_t>(n)] - centroid);
      double fc = f(xc);
      if (fc < val[static_cast<std::size_t>(n)]) {
        pts[static_cast<std::size_t>(n)] = xc;
        val[static_cast<std::size_t>(n)] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          pts[static_cast<std::size_t>(i)] = pts[0] + 0.5 * (pts[static_cast<std::size_t>(i)] - pts[0]);
          val[static_cast<std::size_t>(i)] = f(pts[static_cast<std::size_t>(i)]);
        }
      }
    }
  }
  order();
  x = pts[0];
  return val[0];
}

}  // namespace gosphere::optimize

#endif
