#include "drpinns/errors.hpp"
#include "drpinns/expression.hpp"
#include "drpinns/fd_oracle.hpp"
#include "drpinns/problems.hpp"
#include "drpinns/sampling.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace drpinns;

namespace {

Eigen::VectorXd pt(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST(Examples, PointValues) {
  const ProblemSpec e1 = example1();
  EXPECT_EQ(e1.dim(), 1);
  EXPECT_DOUBLE_EQ(e1.f(pt({0.25})), 0.5);
  EXPECT_DOUBLE_EQ(e1.psi(pt({0.5})), 0.0625);
  EXPECT_EQ(e1.g(pt({1.0})), 0.0);

  const ProblemSpec e2 = example2();
  EXPECT_NEAR(e2.f(pt({0.5, 0.5})), 2 * std::numbers::pi * std::numbers::pi, 1e-12);
  EXPECT_NEAR(e2.f(pt({-0.5, 0.5})), -2 * std::numbers::pi * std::numbers::pi, 1e-12);

  const ProblemSpec e3 = example3();
  EXPECT_DOUBLE_EQ(e3.f(pt({1.0, 1.0})), 0.0);
  EXPECT_DOUBLE_EQ(e3.f(pt({0.0, 0.0})), 4.0);
}

TEST(Examples, ExampleFourFields) {
  const ProblemSpec e4 = example4();
  const ProblemSpec e4x = example4_exact_trace();
  EXPECT_FALSE(e4.warnings.empty());
  EXPECT_TRUE(e4x.warnings.empty());
  const Eigen::VectorXd corner = pt({1, 0, 0});
  EXPECT_NEAR(e4.g(corner), 0.51, 1e-15);
  EXPECT_NEAR(e4x.g(corner), 0.51 * 0.51, 1e-15);
  EXPECT_NEAR((*e4.exact)(corner), 0.2601, 1e-15);
  EXPECT_EQ((*e4.exact)(pt({0.3, 0.3, 0.3})), 0.0);
  // f inside the contact ball is -8 r0^2 (1 - r^2 + r0^2).
  EXPECT_NEAR(e4.f(pt({0, 0, 0})), -8 * 0.49 * 1.49, 1e-14);
}

TEST(Examples, ExactSolutionOfExampleFourSatisfiesThePdeOutsideTheBall) {
  // -Laplacian by central differences of the closed form, away from r = r0.
  const ProblemSpec p = example4_exact_trace();
  const double h = 1e-3;
  for (const Eigen::VectorXd& x : {pt({0.9, 0.2, 0.3}), pt({0.5, 0.6, 0.4}), pt({1.0, 1.0, 1.0})}) {
    double lap = 0.0;
    for (int k = 0; k < 3; ++k) {
      Eigen::VectorXd a = x, b = x;
      a[k] += h;
      b[k] -= h;
      lap += ((*p.exact)(a) - 2 * (*p.exact)(x) + (*p.exact)(b)) / (h * h);
    }
    EXPECT_NEAR(-lap, p.f(x), 1e-5);
  }
}

TEST(Examples, ExampleFourExactIsDiscreteComplementarityAwayFromFreeBoundary) {
  const ProblemSpec p = example4_exact_trace();
  const int n = 33;
  GridSolution grid;
  grid.box = p.box;
  grid.nodes_per_axis = n;
  grid.spacing = Eigen::VectorXd::Constant(3, 1.0 / (n - 1));
  grid.values = evaluate_field(*p.exact, [&] {
    GridSolution shape = grid;
    shape.values.resize(n * n * n);
    return shape.node_points();
  }());
  const Eigen::VectorXd op = scaled_operator_residual(grid, p);
  const double h = 1.0 / (n - 1);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < grid.node_count(); ++i) {
    if (grid.is_boundary_node(i)) continue;
    const double r = grid.node(i).norm();
    if (std::abs(r - kExample4Radius) < 2 * h) continue;
    const double slack = grid.values[i] - p.psi(grid.node(i));
    worst = std::max(worst, std::abs(std::min(slack, op[i])));
  }
  EXPECT_LT(worst, 10 * h * h);
}

TEST(Examples, ExampleTwoOracleHasAPositiveLobeInTheSecondQuadrant) {
  const ProblemSpec p = example2();
  const GridSolution sol = solve_obstacle_fd(p, 129);
  ASSERT_TRUE(sol.converged);
  EXPECT_NEAR(interpolate(sol, pt({0.5, 0.5})), 1.20, 0.01);
  EXPECT_NEAR(interpolate(sol, pt({-0.5, -0.5})), 1.20, 0.01);
  // The obstacle is active deep inside the negative-source quadrants.
  EXPECT_EQ(interpolate(sol, pt({0.5, -0.5})), 0.0);
  EXPECT_EQ(interpolate(sol, pt({-0.5, 0.5})), 0.0);
  EXPECT_GT(interpolate(sol, pt({-0.1, 0.5})), 0.0);
}

TEST(Examples, ResolveByName) {
  for (const char* name : {"ex1", "ex2", "ex3", "ex4", "ex4x"}) EXPECT_EQ(resolve_problem(name).name, name);
  EXPECT_THROW(resolve_problem("ex5"), ConfigError);
}

TEST(Expression, Evaluates) {
  const Eigen::VectorXd x = pt({3.0, 4.0});
  auto eval = [&](const char* src) { return Expression::parse(src, 2)(x); };
  EXPECT_DOUBLE_EQ(eval("1 + 2 * 3"), 7.0);
  EXPECT_DOUBLE_EQ(eval("(1 + 2) * 3"), 9.0);
  EXPECT_DOUBLE_EQ(eval("2 ^ 3 ^ 2"), 512.0);
  EXPECT_DOUBLE_EQ(eval("-2 ^ 2"), -4.0);
  EXPECT_DOUBLE_EQ(eval("x / y"), 0.75);
  EXPECT_DOUBLE_EQ(eval("r"), 5.0);
  EXPECT_DOUBLE_EQ(eval("max(x, y) - max(y, x)"), 0.0);
  EXPECT_NEAR(eval("sin(pi / 2) + cos(0) + exp(0)"), 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(eval("1.5e1"), 15.0);
  EXPECT_EQ(Expression::parse(" x ", 1).source(), " x ");
}

TEST(Expression, RejectsMalformedInput) {
  for (const char* bad : {"", "1 +", "(x", "x)", "foo(x)", "max(x)", "sin(x, y)", "3 x", "y", "z", "1..2", "#"})
    EXPECT_THROW(Expression::parse(bad, 1), ParseError) << bad;
  EXPECT_NO_THROW(Expression::parse("z", 3));
}

TEST(ProblemJson, LoadsAllFields) {
  const nlohmann::json j = {{"name", "bump"},
                            {"dim", 2},
                            {"box", {{0, 2}, {-1, 1}}},
                            {"f", "x + y"},
                            {"psi", "-1"},
                            {"exact", "x * y"},
                            {"alpha", 0.5}};
  const ProblemSpec p = problem_from_json(j);
  EXPECT_EQ(p.name, "bump");
  EXPECT_EQ(p.dim(), 2);
  EXPECT_EQ(p.box.hi[0], 2.0);
  EXPECT_EQ(p.box.lo[1], -1.0);
  EXPECT_DOUBLE_EQ(p.f(pt({1, 2})), 3.0);
  EXPECT_DOUBLE_EQ(p.psi(pt({1, 2})), -1.0);
  EXPECT_DOUBLE_EQ(p.g(pt({1, 2})), 0.0);
  EXPECT_DOUBLE_EQ((*p.exact)(pt({1, 2})), 2.0);
  EXPECT_EQ(p.alpha, 0.5);
}

TEST(ProblemJson, LoadsFromFileAndByPath) {
  const auto path = std::filesystem::temp_directory_path() / "drpinns_problem_test.json";
  std::ofstream(path) << R"({"dim": 1, "box": [[0, 1]], "f": "1"})";
  EXPECT_EQ(load_problem(path).name, "custom");
  EXPECT_EQ(resolve_problem(path.string()).dim(), 1);
  std::ofstream(path) << "{not json";
  EXPECT_THROW(load_problem(path), ParseError);
  std::filesystem::remove(path);
  EXPECT_THROW(load_problem(path), ConfigError);
}

TEST(ProblemJson, RejectsBadConfigs) {
  const nlohmann::json base = {{"dim", 1}, {"box", {{0, 1}}}, {"f", "1"}};
  auto with = [&](const char* key, nlohmann::json v) {
    nlohmann::json j = base;
    j[key] = std::move(v);
    return j;
  };
  EXPECT_THROW(problem_from_json(with("dim", 4)), ConfigError);
  EXPECT_THROW(problem_from_json(with("dim", 2)), ConfigError);
  EXPECT_THROW(problem_from_json(with("box", {{1, 0}})), InvalidDomain);
  EXPECT_THROW(problem_from_json(with("f", "y")), ParseError);
  EXPECT_THROW(problem_from_json(with("alpha", -1)), ConfigError);
  EXPECT_THROW(problem_from_json(with("f", 3)), ParseError);
  nlohmann::json missing = base;
  missing.erase("f");
  EXPECT_THROW(problem_from_json(missing), ParseError);
}

TEST(Compatibility, MarginIsMinimumOfGMinusPsi) {
  const ProblemSpec e4 = example4();
  const CollocationSet set = initial_collocation(e4.box, 10, 600, 2);
  // g - psi = r^2 - r0^2 goes negative near the origin corner's faces.
  EXPECT_LT(compatibility_margin(e4, set.boundary), 0.0);
  const ProblemSpec e4x = example4_exact_trace();
  EXPECT_GE(compatibility_margin(e4x, set.boundary), 0.0);
  Eigen::MatrixXd ends(1, 2);
  ends << 0.0, 1.0;
  EXPECT_EQ(compatibility_margin(example1(), ends), 0.0);
}
