#pragma once

#include <json.hpp>

#include <Eigen/Dense>

namespace drpinns {

struct MetricReport {
  double mse = 0.0;
  double mae = 0.0;
  double rel2 = 0.0;                // ||y - yhat||_2 / ||y||_2
  double max_error = 0.0;           // max |y - yhat|
  double relative_max_error = 0.0;  // max |y - yhat| / max |y|
  double reference_max = 0.0;       // max |y|
  Eigen::Index n_points = 0;
  /// False when the reference is identically zero; rel2 and
  /// relative_max_error are then NaN.
  bool relative_defined = true;
};

/// Throws ShapeError on length mismatch or empty input.
MetricReport compute_metrics(const Eigen::Ref<const Eigen::VectorXd>& reference,
                             const Eigen::Ref<const Eigen::VectorXd>& predicted);

nlohmann::json to_json(const MetricReport& report);

}  // namespace drpinns
