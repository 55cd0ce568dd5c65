#ifndef GOSPHERE_GOCHECK_HPP
#define GOSPHERE_GOCHECK_HPP

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gosphere/liealg.hpp"
#include "gosphere/norms.hpp"

namespace gosphere::gocheck {

/// eta(u), defined by <eta(u), v>_u = <u, [v,u]_m>_u for all v in m.
/// Computed as eta = G(u)^{-1} r with r_i = <u, [e_i, u]_m>_u.
struct SprayVector {
  Eigen::VectorXd base;   // u, m-local coordinates
  Eigen::VectorXd value;  // eta(u)
};

SprayVector spray_vector(const liealg::SpherePresentation& pres, const norms::MinkowskiNorm& norm,
                         const Eigen::VectorXd& u);

struct Condition3Result {
  Eigen::VectorXd u_prime;  // minimizing compensator in h-local coordinates
  double residual3 = 0.0;   // root-sum-square of <u,[u+u',v]>_u over the m-basis,
                            // normalized by |u|^2 F(u)^2
};

/// Least-squares compensator u' minimizing <u,[u+u',m]_m>_u over h;
/// minimum-norm on ties.
Condition3Result condition3_compensator(const liealg::SpherePresentation& pres,
                                        const norms::MinkowskiNorm& norm,
                                        const Eigen::VectorXd& u);

/// Normalized <.,.>_u-distance of eta(u) from the Ad(H)-orbit tangent
/// space [h,u]; vanishes exactly on geodesic-orbit metrics.
double condition4_residual(const liealg::SpherePresentation& pres,
                           const norms::MinkowskiNorm& norm, const Eigen::VectorXd& u);

/// |LHS - RHS| of <u,[u',v]>_u = <[u,u'],v>_u - 2 C_u(u, v, [u',u]) for
/// u' in h, v in m, with all inner products taken at u. Holds for
/// Ad(H)-invariant norms.
double cartan_bracket_identity_check(const liealg::SpherePresentation& pres,
                                     const norms::MinkowskiNorm& norm, const Eigen::VectorXd& u,
                                     const Eigen::VectorXd& u_prime, const Eigen::VectorXd& v);

struct GOCertificate {
  Eigen::VectorXd u;
  Eigen::VectorXd u_prime;
  double residual3 = 0.0;
  double residual4 = 0.0;
  double tol = 0.0;
};

enum class Verdict { Pass, Fail, Indeterminate };

const char* to_string(Verdict v);

struct GOReport {
  Verdict verdict = Verdict::Indeterminate;
  double max_residual3 = 0.0;
  double max_residual4 = 0.0;
  int witness = -1;  // sample index realizing max_residual4
  double tol = 0.0;
  double fail_threshold = 0.0;
  std::uint64_t seed = 0;
  std::vector<GOCertificate> certificates;

  nlohmann::json to_json() const;
};

/// Stratified sample directions: fundamental-domain slice (when declared),
/// pure m-block directions, block mixtures, and full-space controls.
std::vector<Eigen::VectorXd> sample_directions(const liealg::SpherePresentation& pres, int count,
                                               std::uint64_t seed);

/// PASS iff max residual4 < tol over the sample net; FAIL iff some sample
/// reaches fail_threshold; the gap in between reports Indeterminate (noise
/// guard).
GOReport go_verdict(const liealg::SpherePresentation& pres, const norms::MinkowskiNorm& norm,
                    int sample_count, double tol = 1e-8,
                    std::uint64_t seed = sampling::kDefaultSeed, double fail_threshold = 1e-4);

}  // namespace gosphere::gocheck

#endif
