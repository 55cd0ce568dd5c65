#ifndef GOSPHERE_CLI_HPP
#define GOSPHERE_CLI_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "gosphere/sampling.hpp"
#include "gosphere/sphere.hpp"

namespace gosphere::cli {

/// Outcome of one subcommand run. `report` is fully deterministic for a
/// fixed argv + seed (no timings, ordered keys); human-readable text may
/// carry extras.
struct CommandResult {
  int exit_code = 0;  // 0 checks pass, 1 mathematical FAIL, 2 usage/config
  nlohmann::ordered_json report;
  std::string human;
};

/// Named wind fields: "hopf" (S^3), "rot:i:j" (rotation in the (i,j)
/// ambient plane, 0-based), or "expr:c1;c2;...;c_{n+1}" with ambient
/// coordinate variables x1..x_{n+1}.
std::shared_ptr<sphere::VectorField> parse_field(const std::string& name, int sphere_dim);

CommandResult run_norm_check(const std::optional<std::string>& norm_file_json,
                             const std::optional<std::string>& f_expr, int dim, int samples,
                             std::uint64_t seed);

CommandResult run_algebra_build(const std::string& space, int n);

CommandResult run_go_check(const std::string& space, int n,
                           const std::optional<std::string>& norm_file_json, int norms_count,
                           int samples, double tol, std::uint64_t seed);

CommandResult run_classify(const std::string& space_or_all, int n,
                           const std::optional<std::string>& norm_file_json, int norms_count,
                           int samples, double tol, std::uint64_t seed);

CommandResult run_navigate(int sphere_dim, const std::string& field, double epsilon, int samples,
                           std::uint64_t seed, const std::string& curve_csv_path = {});

/// Navigation-datum JSON {h_spec, W_expr, epsilon}: h_spec is "round"
/// (chart mode) or an SPD matrix (single-fiber mode); W_expr is a field name
/// or a list of component expressions; epsilon scales the wind.
CommandResult run_navigate_datum(const std::string& datum_json, int samples, std::uint64_t seed);

CommandResult run_flag(int sphere_dim, const std::string& field, double epsilon, int flags,
                       double tol, bool check_preservation, std::uint64_t seed);

CommandResult run_tune_epsilon(int sphere_dim, const std::string& field, double planted_epsilon,
                               double target_lambda, std::uint64_t seed);

CommandResult run_distances(int sphere_dim, const std::string& field, double epsilon, int pairs,
                            int directions, std::uint64_t seed);

/// Full argv dispatch (CLI11); writes the human report to stdout and the
/// JSON report to `--json <path>` when given. Returns the process exit code.
int dispatch(int argc, const char* const* argv);

}  // namespace gosphere::cli

#endif
