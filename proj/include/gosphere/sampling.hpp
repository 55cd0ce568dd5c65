#ifndef GOSPHERE_SAMPLING_HPP
#define GOSPHERE_SAMPLING_HPP

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <vector>

namespace gosphere::sampling {

/// Seed used by every sampled check unless the caller overrides it.
/// Reports must echo the seed they ran under.
inline constexpr std::uint64_t kDefaultSeed = 1729;

/// Deterministic random source. Transforms are hand-rolled on top of the
/// (bit-stable) mt19937_64 stream so results do not depend on the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0,1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925287 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Uniform integer in [0, n).
  int uniform_int(int n) { return static_cast<int>(gen_() % static_cast<std::uint64_t>(n)); }

  /// Uniform direction on the unit sphere of R^dim.
  Eigen::VectorXd unit_vector(int dim) {
    Eigen::VectorXd v(dim);
    do {
      for (int i = 0; i < dim; ++i) v[i] = normal();
    } while (v.norm() < 1e-6);
    return v / v.norm();
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Deterministic direction net: the coordinate axes, all normalized axis
/// pairs (e_i ± e_j)/sqrt(2), then seeded uniform directions up to `count`.
std::vector<Eigen::VectorXd> direction_net(int dim, int count, std::uint64_t seed = kDefaultSeed);

}  // namespace gosphere::sampling

#endif
