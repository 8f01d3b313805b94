#include "drpinns/errors.hpp"
#include "drpinns/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace drpinns;

TEST(Metrics, HandExample) {
  const Eigen::Vector4d y(1, -2, 3, 0);
  const Eigen::Vector4d yhat(1.5, -2, 2, 0);
  const MetricReport m = compute_metrics(y, yhat);
  EXPECT_DOUBLE_EQ(m.mse, (0.25 + 1.0) / 4);
  EXPECT_DOUBLE_EQ(m.mae, 1.5 / 4);
  EXPECT_DOUBLE_EQ(m.max_error, 1.0);
  EXPECT_DOUBLE_EQ(m.reference_max, 3.0);
  EXPECT_DOUBLE_EQ(m.relative_max_error, 1.0 / 3.0);
  EXPECT_NEAR(m.rel2, std::sqrt(1.25 / 14.0), 1e-15);
  EXPECT_EQ(m.n_points, 4);
  EXPECT_TRUE(m.relative_defined);
}

TEST(Metrics, PerfectPredictionIsZero) {
  const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(11, -1, 1);
  const MetricReport m = compute_metrics(y, y);
  EXPECT_EQ(m.mse, 0.0);
  EXPECT_EQ(m.mae, 0.0);
  EXPECT_EQ(m.rel2, 0.0);
  EXPECT_EQ(m.relative_max_error, 0.0);
}

TEST(Metrics, ZeroPredictionHasUnitRelativeErrors) {
  const Eigen::VectorXd y = Eigen::VectorXd::Random(30);
  const MetricReport m = compute_metrics(y, Eigen::VectorXd::Zero(30));
  EXPECT_NEAR(m.rel2, 1.0, 1e-15);
  EXPECT_NEAR(m.relative_max_error, 1.0, 1e-15);
}

TEST(Metrics, Invariants) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd y(40), yhat(40);
    for (int i = 0; i < 40; ++i) {
      y[i] = n01(gen);
      yhat[i] = y[i] + 0.1 * n01(gen);
    }
    const MetricReport m = compute_metrics(y, yhat);
    EXPECT_LE(m.mae, std::sqrt(m.mse) + 1e-15);
    EXPECT_LE(std::sqrt(m.mse), m.max_error + 1e-15);
    EXPECT_GE(m.rel2, 0.0);
    // Symmetric in the error sign.
    const MetricReport flipped = compute_metrics(y, 2 * y - yhat);
    EXPECT_NEAR(flipped.mse, m.mse, 1e-14);
    EXPECT_NEAR(flipped.max_error, m.max_error, 1e-14);
  }
}

TEST(Metrics, InvariantUnderJointPermutation) {
  const Eigen::VectorXd y = Eigen::VectorXd::Random(25);
  const Eigen::VectorXd yhat = Eigen::VectorXd::Random(25);
  std::vector<int> idx(25);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), std::mt19937(3));
  Eigen::VectorXd py(25), pyhat(25);
  for (int i = 0; i < 25; ++i) {
    py[i] = y[idx[static_cast<std::size_t>(i)]];
    pyhat[i] = yhat[idx[static_cast<std::size_t>(i)]];
  }
  const MetricReport a = compute_metrics(y, yhat), b = compute_metrics(py, pyhat);
  EXPECT_NEAR(a.mse, b.mse, 1e-15);
  EXPECT_NEAR(a.mae, b.mae, 1e-15);
  EXPECT_NEAR(a.rel2, b.rel2, 1e-15);
  EXPECT_EQ(a.max_error, b.max_error);
}

TEST(Metrics, ZeroReferenceLeavesRelativeErrorsUndefined) {
  const MetricReport m = compute_metrics(Eigen::VectorXd::Zero(3), Eigen::Vector3d(0.1, 0, 0));
  EXPECT_FALSE(m.relative_defined);
  EXPECT_TRUE(std::isnan(m.rel2));
  EXPECT_TRUE(std::isnan(m.relative_max_error));
  const nlohmann::json j = to_json(m);
  EXPECT_TRUE(j.at("rel2").is_null());
  EXPECT_TRUE(j.at("relative_max_error").is_null());
  EXPECT_DOUBLE_EQ(j.at("max_error").get<double>(), 0.1);
}

TEST(Metrics, JsonCarriesEveryField) {
  const nlohmann::json j = to_json(compute_metrics(Eigen::Vector2d(1, 2), Eigen::Vector2d(1, 1)));
  for (const char* key : {"mse", "mae", "rel2", "max_error", "relative_max_error", "reference_max", "n_points"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j.at("n_points").get<int>(), 2);
}

TEST(Metrics, RejectsShapeMismatchAndEmptyInput) {
  EXPECT_THROW(compute_metrics(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(4)), ShapeError);
  EXPECT_THROW(compute_metrics(Eigen::VectorXd(0), Eigen::VectorXd(0)), ShapeError);
}
