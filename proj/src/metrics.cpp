#include "drpinns/metrics.hpp"

#include "drpinns/errors.hpp"

#include <cmath>
#include <limits>

namespace drpinns {

MetricReport compute_metrics(const Eigen::Ref<const Eigen::VectorXd>& reference,
                             const Eigen::Ref<const Eigen::VectorXd>& predicted) {
  if (reference.size() != predicted.size()) throw ShapeError("reference and prediction lengths differ");
  if (reference.size() == 0) throw ShapeError("metrics need at least one point");

  const Eigen::VectorXd err = reference - predicted;
  MetricReport r;
  r.n_points = reference.size();
  r.mse = err.squaredNorm() / static_cast<double>(r.n_points);
  r.mae = err.cwiseAbs().mean();
  r.max_error = err.cwiseAbs().maxCoeff();
  r.reference_max = reference.cwiseAbs().maxCoeff();

  const double ref_norm = reference.norm();
  if (ref_norm > 0.0) {
    r.rel2 = err.norm() / ref_norm;
    r.relative_max_error = r.max_error / r.reference_max;
  } else {
    r.relative_defined = false;
    r.rel2 = std::numeric_limits<double>::quiet_NaN();
    r.relative_max_error = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

nlohmann::json to_json(const MetricReport& report) {
  auto relative = [&](double v) -> nlohmann::json {
    if (!report.relative_defined) return nullptr;
    return v;
  };
  return {{"mse", report.mse},
          {"mae", report.mae},
          {"rel2", relative(report.rel2)},
          {"max_error", report.max_error},
          {"relative_max_error", relative(report.relative_max_error)},
          {"reference_max", report.reference_max},
          {"n_points", report.n_points},
          {"relative_defined", report.relative_defined}};
}

}  // namespace drpinns
