#pragma once

#include "drpinns/network.hpp"
#include "drpinns/problems.hpp"
#include "drpinns/sampling.hpp"

#include <Eigen/Dense>

namespace drpinns {

struct LossWeights {
  double w1 = 1e4;  // energy
  double w2 = 1e4;  // obstacle penalty
  double w3 = 1e4;  // boundary mismatch

  /// Finite, non-negative, not all zero; throws ConfigError otherwise.
  void validate() const;
  double sum() const { return w1 + w2 + w3; }
  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

struct LossBreakdown {
  double energy = 0.0;      // mean of 1/2|grad u|^2 + 1/2 alpha u^2 - f u
  double constraint = 0.0;  // mean of max(psi - u, 0)
  double boundary = 0.0;    // mean of (u - g)^2
  double total = 0.0;       // w1 energy + w2 constraint + w3 boundary
};

LossBreakdown total_loss(double energy, double constraint, double boundary, const LossWeights& weights);

/// Problem data sampled at a collocation set; rebuilt whenever the set changes.
struct LossData {
  PointSet interior;
  Eigen::RowVectorXd f;
  Eigen::RowVectorXd psi;
  PointSet boundary;
  Eigen::RowVectorXd g;
  double alpha = 0.0;

  static LossData build(const ProblemSpec& problem, const PointSet& interior, const PointSet& boundary);
  static LossData build(const ProblemSpec& problem, const CollocationSet& set) {
    return build(problem, set.interior, set.boundary);
  }
};

double energy_term(const Network& net, const PointSet& interior, const ProblemSpec& problem);
double constraint_term(const Network& net, const PointSet& interior, const ProblemSpec& problem);
double boundary_term(const Network& net, const PointSet& boundary, const ProblemSpec& problem);

/// The three terms as 1x1 nodes on `tape`.
struct RecordedLoss {
  ad::Var<double> energy;
  ad::Var<double> constraint;
  ad::Var<double> boundary;
};

RecordedLoss record_loss(ad::Tape<double>& tape, const Network& net, const ParamVars<double>& vars,
                         const LossData& data);

/// All three terms without a parameter gradient.
LossBreakdown evaluate_loss(const Network& net, const LossData& data, const LossWeights& weights);

struct LossAndGradient {
  LossBreakdown breakdown;
  Network gradient;  // d total / d theta
};

/// Throws NonFiniteLoss naming the first non-finite term.
LossAndGradient loss_and_gradient(const Network& net, const LossData& data, const LossWeights& weights);

/// Per-interior-point residual for adaptive resampling:
/// max(w1 * energy integrand, 0) + w2 * max(psi - u, 0).
Eigen::VectorXd interior_residuals(const Network& net, const LossData& data, const LossWeights& weights);

}  // namespace drpinns
