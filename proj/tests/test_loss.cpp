#include "drpinns/errors.hpp"
#include "drpinns/loss.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace drpinns;

namespace {

// u(x) = a x + b on a 1D input.
Network line(double a, double b) {
  Network net{{1, 1}, Activation::Tanh, {}, {}};
  net.weights.push_back(Eigen::MatrixXd::Constant(1, 1, a));
  net.biases.push_back(Eigen::VectorXd::Constant(1, b));
  return net;
}

Network constant(int dim, double c) {
  Network net = init_params(mlp_layout(dim, 1, 3), Activation::Tanh, 1).zeros_like();
  net.biases.back()[0] = c;
  return net;
}

Eigen::MatrixXd row(std::initializer_list<double> xs) {
  Eigen::MatrixXd m(1, static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) m(0, i++) = x;
  return m;
}

ProblemSpec zero_obstacle_1d() {
  ProblemSpec p = example1();
  p.psi = [](const Eigen::Ref<const Eigen::VectorXd>&) { return 0.0; };
  return p;
}

}  // namespace

TEST(EnergyTerm, ZeroNetworkGivesZero) {
  EXPECT_EQ(energy_term(constant(2, 0.0), Eigen::MatrixXd::Random(2, 9), example2()), 0.0);
}

TEST(EnergyTerm, IdentityOnExampleOne) {
  EXPECT_NEAR(energy_term(line(1, 0), row({0.0, 0.5, 1.0}), example1()), -1.0 / 3.0, 1e-15);
}

TEST(EnergyTerm, MatchesBruteForceLoop) {
  const ProblemSpec p = example3();
  const Network net = init_params(mlp_layout(2, 2, 8), Activation::Tanh, 31);
  const Eigen::MatrixXd pts = Eigen::MatrixXd::Random(2, 25);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    const Eigen::VectorXd x = pts.col(i);
    acc += 0.5 * grad_input<double>(net, x).squaredNorm() - p.f(x) * forward<double>(net, x);
  }
  EXPECT_NEAR(energy_term(net, pts, p), acc / 25.0, 1e-14);
}

TEST(EnergyTerm, ReactionTermAddsHalfAlphaUSquared) {
  ProblemSpec p = example1();
  p.alpha = 4.0;
  // u = 1: gradient 0, 1/2 * 4 * 1 - 2x * 1 at x = 0.25 and 0.75.
  EXPECT_NEAR(energy_term(constant(1, 1.0), row({0.25, 0.75}), p), 2.0 - 1.0, 1e-15);
}

TEST(ConstraintTerm, HandExamples) {
  const ProblemSpec p = zero_obstacle_1d();
  EXPECT_EQ(constraint_term(constant(1, 0.2), row({0.1, 0.9}), p), 0.0);
  EXPECT_DOUBLE_EQ(constraint_term(constant(1, -1.0), row({0.1, 0.4, 0.9}), p), 1.0);
  EXPECT_NEAR(constraint_term(line(1, -0.5), row({0.0, 0.5, 1.0}), p), 1.0 / 6.0, 1e-15);
  // With the example's own obstacle: psi(0.5) = 1/16 > u = 0.
  EXPECT_DOUBLE_EQ(constraint_term(constant(1, 0.0), row({0.5}), example1()), 0.0625);
}

TEST(BoundaryTerm, HandExamples) {
  const ProblemSpec p = example1();
  EXPECT_EQ(boundary_term(constant(1, 0.0), row({0.0, 1.0}), p), 0.0);
  EXPECT_DOUBLE_EQ(boundary_term(constant(1, 1.0), row({0.0, 1.0}), p), 1.0);
  EXPECT_NEAR(boundary_term(line(1, 0), row({0.1, -0.2}), p), 0.025, 1e-16);
}

TEST(Terms, RejectEmptyInput) {
  EXPECT_THROW(energy_term(constant(1, 0), Eigen::MatrixXd(1, 0), example1()), EmptyInput);
  EXPECT_THROW(constraint_term(constant(1, 0), Eigen::MatrixXd(1, 0), example1()), EmptyInput);
  EXPECT_THROW(boundary_term(constant(1, 0), Eigen::MatrixXd(1, 0), example1()), EmptyInput);
}

TEST(Terms, NonFiniteOutputNamesTheTerm) {
  Network net = constant(1, 0.0);
  net.biases.back()[0] = std::numeric_limits<double>::infinity();
  try {
    energy_term(net, row({0.5}), example1());
    FAIL() << "expected NonFiniteLoss";
  } catch (const NonFiniteLoss& e) {
    EXPECT_EQ(e.term(), "energy");
  }
  const CollocationSet set = initial_collocation(example1().box, 5, 2, 1);
  try {
    loss_and_gradient(net, LossData::build(example1(), set), LossWeights{});
    FAIL() << "expected NonFiniteLoss";
  } catch (const NonFiniteLoss& e) {
    EXPECT_FALSE(e.term().empty());
  }
}

TEST(Terms, PenaltiesAreNonNegativeForRandomNets) {
  const ProblemSpec p = example2();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Network net = init_params(mlp_layout(2, 2, 6), Activation::Tanh, seed);
    const CollocationSet set = initial_collocation(p.box, 50, 20, seed);
    EXPECT_GE(constraint_term(net, set.interior, p), 0.0);
    EXPECT_GE(boundary_term(net, set.boundary, p), 0.0);
  }
}

TEST(TotalLoss, WeightedSums) {
  EXPECT_NEAR(total_loss(0.1, 0.2, 0.3, {1, 1, 1}).total, 0.6, 1e-15);
  EXPECT_DOUBLE_EQ(total_loss(7.0, 9.0, 0.5, {0, 0, 1}).total, 0.5);
  EXPECT_DOUBLE_EQ(total_loss(1, 1, 1, {2, 3, 5}).total, 10.0);
  const LossBreakdown b = total_loss(-0.4, 0.25, 0.125, {1, 1, 1});
  EXPECT_EQ(b.energy, -0.4);
  EXPECT_EQ(b.constraint, 0.25);
  EXPECT_EQ(b.boundary, 0.125);
}

TEST(TotalLoss, LinearInWeights) {
  const double e = -0.37, c = 0.011, g = 0.42;
  const LossWeights a{3, 5, 7}, b{11, 13, 17};
  const double lhs = total_loss(e, c, g, {a.w1 + 2 * b.w1, a.w2 + 2 * b.w2, a.w3 + 2 * b.w3}).total;
  EXPECT_NEAR(lhs, total_loss(e, c, g, a).total + 2 * total_loss(e, c, g, b).total, 1e-12);
}

TEST(TotalLoss, RejectsInvalidWeights) {
  EXPECT_THROW(total_loss(0, 0, 0, {0, 0, 0}), ConfigError);
  EXPECT_THROW(total_loss(0, 0, 0, {-1, 1, 1}), ConfigError);
  EXPECT_THROW(total_loss(0, 0, 0, {1, std::nan(""), 1}), ConfigError);
}

TEST(LossData, TapedBreakdownMatchesStandaloneTerms) {
  const ProblemSpec p = example3();
  const Network net = init_params(mlp_layout(2, 3, 10), Activation::Tanh, 8);
  const CollocationSet set = initial_collocation(p.box, 120, 40, 4);
  const LossWeights w{2, 3, 5};
  const LossBreakdown b = evaluate_loss(net, LossData::build(p, set), w);
  EXPECT_NEAR(b.energy, energy_term(net, set.interior, p), 1e-14);
  EXPECT_NEAR(b.constraint, constraint_term(net, set.interior, p), 1e-15);
  EXPECT_NEAR(b.boundary, boundary_term(net, set.boundary, p), 1e-15);
  EXPECT_NEAR(b.total, 2 * b.energy + 3 * b.constraint + 5 * b.boundary, 1e-13);
  EXPECT_EQ(loss_and_gradient(net, LossData::build(p, set), w).breakdown.total, b.total);
}

TEST(LossData, GradientMatchesFiniteDifferencesPerTerm) {
  const double h = 1e-5;
  const ProblemSpec p = example1();
  const Network net = init_params(mlp_layout(1, 2, 5), Activation::Tanh, 13);
  const CollocationSet set = initial_collocation(p.box, 30, 2, 3);
  const LossData data = LossData::build(p, set);
  const Eigen::VectorXd theta = net.flatten();
  for (const LossWeights& w : {LossWeights{1, 0, 0}, LossWeights{0, 1, 0}, LossWeights{0, 0, 1}}) {
    const Eigen::VectorXd g = loss_and_gradient(net, data, w).gradient.flatten();
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      Network plus = net, minus = net;
      Eigen::VectorXd tp = theta, tm = theta;
      tp[i] += h;
      tm[i] -= h;
      plus.assign(tp);
      minus.assign(tm);
      const double fd = (evaluate_loss(plus, data, w).total - evaluate_loss(minus, data, w).total) / (2 * h);
      EXPECT_LT(std::abs(g[i] - fd) / std::max(std::abs(g[i]), 1e-8), 1e-4)
          << "weights " << w.w1 << w.w2 << w.w3 << " parameter " << i;
    }
  }
}

TEST(LossData, ExactExampleFourIsFeasibleAndBoundaryExact) {
  // Table-lookup surrogate: the exact solution's own values stand in for u.
  const ProblemSpec p = example4_exact_trace();
  const CollocationSet set = initial_collocation(p.box, 2000, 600, 12);
  const Eigen::RowVectorXd u_in = *evaluate_exact(p, set.interior);
  const Eigen::RowVectorXd u_bd = *evaluate_exact(p, set.boundary);
  const LossData data = LossData::build(p, set);
  EXPECT_LE((data.psi - u_in).cwiseMax(0.0).mean(), 1e-12);
  EXPECT_LE((u_bd - data.g).squaredNorm() / static_cast<double>(u_bd.size()), 1e-12);
}

TEST(InteriorResiduals, NonNegativeAndSizedPerPoint) {
  const ProblemSpec p = example1();
  const Network net = init_params(mlp_layout(1, 2, 6), Activation::Tanh, 2);
  const CollocationSet set = initial_collocation(p.box, 64, 2, 1);
  const Eigen::VectorXd r = interior_residuals(net, LossData::build(p, set), LossWeights{});
  ASSERT_EQ(r.size(), 64);
  EXPECT_GE(r.minCoeff(), 0.0);
}
