#pragma once

// Finite-difference projected SOR for the discrete obstacle problem
//   A u - f >= 0,  u >= psi,  (u - psi)(A u - f) = 0,  u = g on the boundary,
// with A the second-order central-difference -Laplacian plus alpha.

#include "drpinns/box.hpp"
#include "drpinns/problems.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <vector>

namespace drpinns {

struct GridSolution {
  Box box;
  int nodes_per_axis = 0;
  Eigen::VectorXd spacing;  // h per axis
  /// Node values in lexicographic order (last axis fastest).
  Eigen::VectorXd values;
  bool converged = false;
  long iterations = 0;
  /// max over interior nodes of |min(u - psi, (A u - f) / diag(A))|.
  double final_residual = 0.0;

  int dim() const { return box.dim(); }
  Eigen::Index node_count() const { return values.size(); }
  /// Coordinates of the node with flat index `flat`.
  Eigen::VectorXd node(Eigen::Index flat) const;
  /// All node coordinates, d x node_count(), in flat order.
  PointSet node_points() const;
  bool is_boundary_node(Eigen::Index flat) const;
};

struct PsorOptions {
  double omega = 1.8;
  double tol = 1e-10;
  long max_iter = 0;

  /// omega 1.5 (1D) / 1.8 (2D, 3D); tol 1e-10 (1D, 2D) / 1e-8 (3D);
  /// max_iter 200 n^2.
  static PsorOptions defaults(int dim, int nodes_per_axis);
};

/// Sweeps in lexicographic Gauss-Seidel order with
/// u_i <- max(psi_i, (1 - omega) u_i + omega * GS_i) until the largest nodal
/// change drops below tol. Hitting max_iter sets converged = false.
GridSolution solve_obstacle_fd(const ProblemSpec& problem, int nodes_per_axis, const PsorOptions& options);
GridSolution solve_obstacle_fd(const ProblemSpec& problem, int nodes_per_axis);

/// Diagonally scaled discrete complementarity residual of `values` on the grid.
double complementarity_residual(const GridSolution& solution, const ProblemSpec& problem);

/// Per interior node: (A u - f)_i / diag(A)_i, zero at boundary nodes.
Eigen::VectorXd scaled_operator_residual(const GridSolution& solution, const ProblemSpec& problem);

/// Multilinear interpolation; throws OutOfDomain outside the closed box.
double interpolate(const GridSolution& solution, const Eigen::Ref<const Eigen::VectorXd>& point);
Eigen::RowVectorXd interpolate_batch(const GridSolution& solution, const PointSet& points);

/// Rows "x0[,x1[,x2]],u".
void write_grid_csv(const GridSolution& solution, const std::filesystem::path& path);

}  // namespace drpinns
