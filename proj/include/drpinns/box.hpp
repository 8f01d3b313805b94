#pragma once

#include "drpinns/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <string>

namespace drpinns {

/// Points are stored column-wise: a d x N matrix holds N points in R^d.
using PointSet = Eigen::MatrixXd;

/// Axis-aligned domain [lo_0, hi_0] x ... x [lo_{d-1}, hi_{d-1}].
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  static Box cube(int dim, double lo, double hi) {
    return Box{Eigen::VectorXd::Constant(dim, lo), Eigen::VectorXd::Constant(dim, hi)};
  }

  int dim() const { return static_cast<int>(lo.size()); }
  Eigen::VectorXd width() const { return hi - lo; }
  double longest_edge() const { return width().maxCoeff(); }

  void validate() const {
    if (lo.size() == 0 || lo.size() != hi.size()) throw InvalidDomain("box bounds have mismatched dimensions");
    for (Eigen::Index k = 0; k < lo.size(); ++k) {
      if (!(hi[k] > lo[k]) || !std::isfinite(lo[k]) || !std::isfinite(hi[k]))
        throw InvalidDomain("degenerate box on axis " + std::to_string(k));
    }
  }

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return ((x.array() >= lo.array()) && (x.array() <= hi.array())).all();
  }

  bool strictly_contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return ((x.array() > lo.array()) && (x.array() < hi.array())).all();
  }

  /// Inside the closed box with at least one coordinate on a face.
  bool on_boundary(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return contains(x) && ((x.array() == lo.array()) || (x.array() == hi.array())).any();
  }
};

}  // namespace drpinns
