#pragma once

#include "drpinns/box.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace drpinns {

using ScalarField = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

/// Obstacle problem: minimize 1/2 a(v,v) - (f,v) over v >= psi with v = g on
/// the boundary, where a(u,v) = int grad u . grad v + alpha u v.
struct ProblemSpec {
  std::string name;
  Box box;
  ScalarField f;
  ScalarField psi;
  ScalarField g;
  double alpha = 0.0;
  std::optional<ScalarField> exact;
  /// Data inconsistencies surfaced at construction (printed by the CLI).
  std::vector<std::string> warnings;

  int dim() const { return box.dim(); }
};

/// 1D obstacle problem on [0,1]: f = 2x, psi = x(1-x)/4, g = 0.
ProblemSpec example1();
/// [-1,1]^2, f = 2 pi^2 sin(pi x) sin(pi y), psi = g = 0.
ProblemSpec example2();
/// [-1,1]^2, f = 4 - 2(x^2 + y^2), psi = g = 0.
ProblemSpec example3();

/// Radius of the free boundary in the 3D radial problem.
inline constexpr double kExample4Radius = 0.7;

/// [0,1]^3 radial problem with exact solution (max(r^2 - r0^2, 0))^2 and
/// boundary data g = r^2 - r0^2 as printed. That g is not the trace of the
/// exact solution; a warning records the mismatch.
ProblemSpec example4();
/// Same as example4() but with g equal to the trace of the exact solution,
/// so the exact formula actually solves the problem.
ProblemSpec example4_exact_trace();

/// "ex1".."ex4", "ex4x" (exact-trace variant), or a path to a JSON config.
ProblemSpec resolve_problem(const std::string& name_or_path);

/// {"name", "dim", "box": [[lo,hi],...], "f", "psi", "g", "exact", "alpha"};
/// psi, g default to "0", exact is optional.
ProblemSpec problem_from_json(const nlohmann::json& j);
ProblemSpec load_problem(const std::filesystem::path& path);

/// field evaluated at every column of `points`.
Eigen::RowVectorXd evaluate_field(const ScalarField& field, const PointSet& points);

/// Exact solution at every column, or nullopt when the problem has none.
std::optional<Eigen::RowVectorXd> evaluate_exact(const ProblemSpec& problem, const PointSet& points);

/// min over the given boundary points of g - psi; negative means the
/// admissible set is empty there.
double compatibility_margin(const ProblemSpec& problem, const PointSet& boundary_points);

}  // namespace drpinns
