#include "gosphere/sampling.hpp"

namespace gosphere::sampling {

std::vector<Eigen::VectorXd> direction_net(int dim, int count, std::uint64_t seed) {
  std::vector<Eigen::VectorXd> net;
  net.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < dim && static_cast<int>(net.size()) < count; ++i)
    net.push_back(Eigen::VectorXd::Unit(dim, i));
  const double s = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < dim && static_cast<int>(net.size()) < count; ++i)
    for (int j = i + 1; j < dim && static_cast<int>(net.size()) < count; ++j) {
      net.push_back(s * (Eigen::VectorXd::Unit(dim, i) + Eigen::VectorXd::Unit(dim, j)));
      if (static_cast<int>(net.size()) < count)
        net.push_back(s * (Eigen::VectorXd::Unit(dim, i) - Eigen::VectorXd::Unit(dim, j)));
    }
  Rng rng(seed);
  while (static_cast<int>(net.size()) < count) net.push_back(rng.unit_vector(dim));
  return net;
}

}  // namespace gosphere::sampling
