#include "drpinns/fd_oracle.hpp"

#include "drpinns/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

namespace drpinns {

namespace {

// Flat-index strides, last axis fastest.
std::vector<Eigen::Index> strides(int dim, int n) {
  std::vector<Eigen::Index> s(static_cast<std::size_t>(dim));
  Eigen::Index stride = 1;
  for (int k = dim - 1; k >= 0; --k) {
    s[static_cast<std::size_t>(k)] = stride;
    stride *= n;
  }
  return s;
}

Eigen::Index total_nodes(int dim, int n) {
  Eigen::Index total = 1;
  for (int k = 0; k < dim; ++k) total *= n;
  return total;
}

struct Stencil {
  std::vector<Eigen::Index> interior;  // flat indices of interior nodes, ascending
  std::vector<Eigen::Index> stride;
  Eigen::VectorXd inv_h2;
  double diagonal = 0.0;
};

Stencil build_stencil(const GridSolution& sol, double alpha) {
  Stencil s;
  s.stride = strides(sol.dim(), sol.nodes_per_axis);
  s.inv_h2 = sol.spacing.array().square().inverse();
  s.diagonal = 2.0 * s.inv_h2.sum() + alpha;
  for (Eigen::Index i = 0; i < sol.node_count(); ++i) {
    if (!sol.is_boundary_node(i)) s.interior.push_back(i);
  }
  return s;
}

// sum_k (u[i - e_k] + u[i + e_k]) / h_k^2
double neighbour_sum(const Stencil& s, const Eigen::VectorXd& u, Eigen::Index i) {
  double acc = 0.0;
  for (std::size_t k = 0; k < s.stride.size(); ++k) {
    acc += (u[i - s.stride[k]] + u[i + s.stride[k]]) * s.inv_h2[static_cast<Eigen::Index>(k)];
  }
  return acc;
}

}  // namespace

Eigen::VectorXd GridSolution::node(Eigen::Index flat) const {
  Eigen::VectorXd x(dim());
  for (int k = dim() - 1; k >= 0; --k) {
    const Eigen::Index idx = flat % nodes_per_axis;
    flat /= nodes_per_axis;
    x[k] = idx == nodes_per_axis - 1 ? box.hi[k] : box.lo[k] + static_cast<double>(idx) * spacing[k];
  }
  return x;
}

PointSet GridSolution::node_points() const {
  PointSet pts(dim(), node_count());
  for (Eigen::Index i = 0; i < node_count(); ++i) pts.col(i) = node(i);
  return pts;
}

bool GridSolution::is_boundary_node(Eigen::Index flat) const {
  for (int k = 0; k < dim(); ++k) {
    const Eigen::Index idx = flat % nodes_per_axis;
    flat /= nodes_per_axis;
    if (idx == 0 || idx == nodes_per_axis - 1) return true;
  }
  return false;
}

PsorOptions PsorOptions::defaults(int dim, int nodes_per_axis) {
  PsorOptions o;
  o.omega = dim == 1 ? 1.5 : 1.8;
  o.tol = dim == 3 ? 1e-8 : 1e-10;
  o.max_iter = 200L * nodes_per_axis * nodes_per_axis;
  return o;
}

GridSolution solve_obstacle_fd(const ProblemSpec& problem, int nodes_per_axis) {
  return solve_obstacle_fd(problem, nodes_per_axis, PsorOptions::defaults(problem.dim(), nodes_per_axis));
}

GridSolution solve_obstacle_fd(const ProblemSpec& problem, int nodes_per_axis, const PsorOptions& options) {
  problem.box.validate();
  if (problem.dim() < 1 || problem.dim() > 3) throw ConfigError("PSOR supports dimensions 1 to 3");
  if (nodes_per_axis < 3) throw ConfigError("PSOR needs at least 3 nodes per axis");
  if (!(options.omega > 0.0 && options.omega < 2.0)) throw ConfigError("omega must lie in (0, 2)");
  if (!(options.tol > 0.0)) throw ConfigError("tol must be positive");

  GridSolution sol;
  sol.box = problem.box;
  sol.nodes_per_axis = nodes_per_axis;
  sol.spacing = problem.box.width() / static_cast<double>(nodes_per_axis - 1);
  const Eigen::Index count = total_nodes(problem.dim(), nodes_per_axis);
  sol.values = Eigen::VectorXd::Zero(count);

  Eigen::VectorXd f = Eigen::VectorXd::Zero(count);
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const Eigen::VectorXd x = sol.node(i);
    if (sol.is_boundary_node(i)) {
      sol.values[i] = problem.g(x);
    } else {
      f[i] = problem.f(x);
      psi[i] = problem.psi(x);
      sol.values[i] = std::max(psi[i], 0.0);
    }
  }

  const Stencil s = build_stencil(sol, problem.alpha);
  const double omega = options.omega;
  Eigen::VectorXd& u = sol.values;
  for (long it = 1; it <= options.max_iter; ++it) {
    double max_change = 0.0;
    for (Eigen::Index i : s.interior) {
      const double gs = (f[i] + neighbour_sum(s, u, i)) / s.diagonal;
      const double updated = std::max(psi[i], (1.0 - omega) * u[i] + omega * gs);
      max_change = std::max(max_change, std::abs(updated - u[i]));
      u[i] = updated;
    }
    sol.iterations = it;
    if (max_change < options.tol) {
      sol.converged = true;
      break;
    }
  }
  sol.final_residual = complementarity_residual(sol, problem);
  return sol;
}

Eigen::VectorXd scaled_operator_residual(const GridSolution& solution, const ProblemSpec& problem) {
  const Stencil s = build_stencil(solution, problem.alpha);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(solution.node_count());
  for (Eigen::Index i : s.interior) {
    const double au = s.diagonal * solution.values[i] - neighbour_sum(s, solution.values, i);
    r[i] = (au - problem.f(solution.node(i))) / s.diagonal;
  }
  return r;
}

double complementarity_residual(const GridSolution& solution, const ProblemSpec& problem) {
  const Eigen::VectorXd r = scaled_operator_residual(solution, problem);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < solution.node_count(); ++i) {
    if (solution.is_boundary_node(i)) continue;
    const double gap = solution.values[i] - problem.psi(solution.node(i));
    worst = std::max(worst, std::abs(std::min(gap, r[i])));
  }
  return worst;
}

double interpolate(const GridSolution& solution, const Eigen::Ref<const Eigen::VectorXd>& point) {
  const int dim = solution.dim();
  if (point.size() != dim) throw InputDimensionError("interpolation point has the wrong dimension");
  if (!solution.box.contains(point)) throw OutOfDomain("interpolation point lies outside the grid box");

  const int n = solution.nodes_per_axis;
  const std::vector<Eigen::Index> stride = strides(dim, n);
  std::vector<Eigen::Index> cell(static_cast<std::size_t>(dim));
  std::vector<double> frac(static_cast<std::size_t>(dim));
  for (int k = 0; k < dim; ++k) {
    double t = (point[k] - solution.box.lo[k]) / solution.spacing[k];
    // Snap round-off so that queries at nodes return the node value exactly.
    if (std::abs(t - std::round(t)) < 1e-12 * n) t = std::round(t);
    const auto c = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(t)), 0, n - 2);
    cell[static_cast<std::size_t>(k)] = c;
    frac[static_cast<std::size_t>(k)] = t - static_cast<double>(c);
  }

  double value = 0.0;
  for (int corner = 0; corner < (1 << dim); ++corner) {
    double weight = 1.0;
    Eigen::Index flat = 0;
    for (int k = 0; k < dim; ++k) {
      const bool upper = (corner >> k) & 1;
      const double fk = frac[static_cast<std::size_t>(k)];
      weight *= upper ? fk : 1.0 - fk;
      flat += (cell[static_cast<std::size_t>(k)] + (upper ? 1 : 0)) * stride[static_cast<std::size_t>(k)];
    }
    if (weight != 0.0) value += weight * solution.values[flat];
  }
  return value;
}

Eigen::RowVectorXd interpolate_batch(const GridSolution& solution, const PointSet& points) {
  Eigen::RowVectorXd out(points.cols());
  for (Eigen::Index i = 0; i < points.cols(); ++i) out[i] = interpolate(solution, points.col(i));
  return out;
}

void write_grid_csv(const GridSolution& solution, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (int k = 0; k < solution.dim(); ++k) out << 'x' << k << ',';
  out << "u\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < solution.node_count(); ++i) {
    const Eigen::VectorXd x = solution.node(i);
    for (int k = 0; k < solution.dim(); ++k) out << x[k] << ',';
    out << solution.values[i] << '\n';
  }
}

}  // namespace drpinns
