#include "drpinns/errors.hpp"
#include "drpinns/fd_oracle.hpp"
#include "drpinns/sampling.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace drpinns;

namespace {

ProblemSpec unconstrained_1d(ScalarField f) {
  ProblemSpec p = example1();
  p.f = std::move(f);
  p.psi = [](const Eigen::Ref<const Eigen::VectorXd>&) { return -1e6; };
  return p;
}

Eigen::VectorXd pt(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Thomas algorithm for -u'' = f, u(0) = u(1) = 0 on n nodes.
Eigen::VectorXd thomas(const ScalarField& f, int n) {
  const int m = n - 2;
  const double h = 1.0 / (n - 1);
  Eigen::VectorXd c(m), d(m), u = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) d[i] = f(pt({(i + 1) * h})) * h * h;
  c[0] = -0.5;
  d[0] /= 2.0;
  for (int i = 1; i < m; ++i) {
    const double denom = 2.0 + c[i - 1];
    c[i] = -1.0 / denom;
    d[i] = (d[i] + d[i - 1]) / denom;
  }
  u[m] = d[m - 1];
  for (int i = m - 2; i >= 0; --i) u[i + 1] = d[i] - c[i] * u[i + 2];
  return u;
}

double max_error_vs_exact(const GridSolution& sol, const ProblemSpec& p) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < sol.node_count(); ++i)
    worst = std::max(worst, std::abs(sol.values[i] - (*p.exact)(sol.node(i))));
  return worst;
}

}  // namespace

TEST(Psor, ZeroDataConvergesImmediately) {
  ProblemSpec p = example3();
  p.f = [](const Eigen::Ref<const Eigen::VectorXd>&) { return 0.0; };
  const GridSolution sol = solve_obstacle_fd(p, 17);
  EXPECT_TRUE(sol.converged);
  EXPECT_LE(sol.iterations, 2);
  EXPECT_EQ(sol.values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Psor, UnconstrainedOneDimensionalMatchesThomasSolve) {
  const ProblemSpec p = unconstrained_1d([](const Eigen::Ref<const Eigen::VectorXd>& x) { return std::exp(x[0]); });
  PsorOptions o = PsorOptions::defaults(1, 33);
  o.tol = 1e-14;
  const GridSolution sol = solve_obstacle_fd(p, 33, o);
  ASSERT_TRUE(sol.converged);
  EXPECT_LT((sol.values - thomas(p.f, 33)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Psor, ExampleOneIsExactAtNodes) {
  // Central differences are exact for the cubic (x - x^3) / 3 and the obstacle stays inactive.
  PsorOptions o = PsorOptions::defaults(1, 33);
  o.tol = 1e-14;
  const GridSolution sol = solve_obstacle_fd(example1(), 33, o);
  for (Eigen::Index i = 0; i < sol.node_count(); ++i) {
    const double x = sol.node(i)[0];
    EXPECT_NEAR(sol.values[i], (x - x * x * x) / 3.0, 1e-10);
  }
}

TEST(Psor, ExampleFourConvergesAtSecondOrder) {
  const ProblemSpec p = example4_exact_trace();
  const GridSolution coarse = solve_obstacle_fd(p, 17);
  const GridSolution fine = solve_obstacle_fd(p, 33);
  ASSERT_TRUE(coarse.converged && fine.converged);
  EXPECT_GE(max_error_vs_exact(coarse, p) / max_error_vs_exact(fine, p), 3.0);
  EXPECT_LE(fine.final_residual, 1e-6);
}

TEST(Psor, SolutionIsFeasibleWithExactBoundaryAndSmallResidual) {
  for (const ProblemSpec& p : {example2(), example3()}) {
    const PsorOptions o = PsorOptions::defaults(2, 33);
    const GridSolution sol = solve_obstacle_fd(p, 33, o);
    ASSERT_TRUE(sol.converged);
    for (Eigen::Index i = 0; i < sol.node_count(); ++i) {
      const Eigen::VectorXd x = sol.node(i);
      if (sol.is_boundary_node(i)) {
        EXPECT_EQ(sol.values[i], p.g(x));
      } else {
        EXPECT_GE(sol.values[i], p.psi(x));
      }
    }
    EXPECT_LE(sol.final_residual, 10 * o.tol);
    EXPECT_EQ(sol.final_residual, complementarity_residual(sol, p));
    EXPECT_GE(scaled_operator_residual(sol, p).minCoeff(), -10 * o.tol);
  }
}

TEST(Psor, MonotoneInSourceAndObstacle) {
  const ProblemSpec base = example3();
  ProblemSpec more_f = base, higher_psi = base;
  more_f.f = [](const Eigen::Ref<const Eigen::VectorXd>& x) { return 5.0 - 2.0 * x.squaredNorm(); };
  higher_psi.psi = [](const Eigen::Ref<const Eigen::VectorXd>& x) { return 0.3 - x.squaredNorm(); };
  const GridSolution u0 = solve_obstacle_fd(base, 17);
  EXPECT_GE((solve_obstacle_fd(more_f, 17).values - u0.values).minCoeff(), -1e-9);
  EXPECT_GE((solve_obstacle_fd(higher_psi, 17).values - u0.values).minCoeff(), -1e-9);
}

TEST(Psor, FlagsNonConvergence) {
  PsorOptions o = PsorOptions::defaults(2, 33);
  o.max_iter = 3;
  const GridSolution sol = solve_obstacle_fd(example2(), 33, o);
  EXPECT_FALSE(sol.converged);
  EXPECT_EQ(sol.iterations, 3);
}

TEST(Psor, RejectsBadOptions) {
  const ProblemSpec p = example1();
  EXPECT_THROW(solve_obstacle_fd(p, 2), ConfigError);
  PsorOptions o = PsorOptions::defaults(1, 9);
  o.omega = 2.0;
  EXPECT_THROW(solve_obstacle_fd(p, 9, o), ConfigError);
  o = PsorOptions::defaults(1, 9);
  o.tol = 0.0;
  EXPECT_THROW(solve_obstacle_fd(p, 9, o), ConfigError);
}

TEST(Interpolate, ReproducesNodesAndMultilinearFunctions) {
  ProblemSpec p = example3();
  p.g = [](const Eigen::Ref<const Eigen::VectorXd>& x) { return 1 + 2 * x[0] - x[1] + 0.5 * x[0] * x[1]; };
  p.f = [](const Eigen::Ref<const Eigen::VectorXd>&) { return 0.0; };
  p.psi = [](const Eigen::Ref<const Eigen::VectorXd>&) { return -1e6; };
  GridSolution sol = solve_obstacle_fd(p, 5);
  // Overwrite interior nodes with the bilinear field itself.
  for (Eigen::Index i = 0; i < sol.node_count(); ++i) sol.values[i] = p.g(sol.node(i));
  for (Eigen::Index i = 0; i < sol.node_count(); ++i) EXPECT_EQ(interpolate(sol, sol.node(i)), sol.values[i]);
  const PointSet q = latin_hypercube(50, p.box, 4);
  const Eigen::RowVectorXd vals = interpolate_batch(sol, q);
  for (Eigen::Index i = 0; i < q.cols(); ++i) EXPECT_NEAR(vals[i], p.g(q.col(i)), 1e-13);
}

TEST(Interpolate, RejectsOutsidePointsAndWrongDimension) {
  const GridSolution sol = solve_obstacle_fd(example1(), 9);
  EXPECT_THROW(interpolate(sol, pt({1.0001})), OutOfDomain);
  EXPECT_THROW(interpolate(sol, pt({0.5, 0.5})), InputDimensionError);
  EXPECT_EQ(interpolate(sol, pt({1.0})), 0.0);
}

TEST(GridCsv, WritesHeaderAndEveryNode) {
  const GridSolution sol = solve_obstacle_fd(example3(), 5);
  const auto path = std::filesystem::temp_directory_path() / "drpinns_grid_test.csv";
  write_grid_csv(sol, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x0,x1,u");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 25);
  std::filesystem::remove(path);
  EXPECT_THROW(write_grid_csv(sol, "/nonexistent-dir/grid.csv"), ConfigError);
}
