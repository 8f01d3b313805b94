#pragma once

// Bayesian optimization of the three loss weights. The surrogate is a GP
// with an RBF kernel over log10(w); candidates are scored by expected
// improvement for minimization.

#include "drpinns/loss.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace drpinns {

struct Observation {
  LossWeights weights;
  double loss = 0.0;
};

struct BoState {
  std::vector<Observation> observations;  // D
  double kernel_lengthscale = 1.0;        // in log10-weight units
  /// <= 0 means "use the variance of the observed losses".
  double kernel_variance = 0.0;
  double noise_jitter = 1e-6;
  /// Per-weight search interval in log10 space: [1e0, 1e6] by default.
  double log10_lower = 0.0;
  double log10_upper = 6.0;
};

/// GP posterior over weight space.
class GaussianProcess {
 public:
  struct Posterior {
    double mean = 0.0;
    double variance = 0.0;
  };

  /// Fits to the observations of `state`. Throws EmptyInput with no
  /// observations and DuplicateObservation when one weight vector carries
  /// two different losses.
  static GaussianProcess fit(const BoState& state);

  Posterior predict(const LossWeights& weights) const;

  double prior_mean() const { return prior_mean_; }
  double signal_variance() const { return signal_variance_; }
  double best_observed() const { return targets_.minCoeff(); }

 private:
  double kernel(const Eigen::Vector3d& a, const Eigen::Vector3d& b) const;

  Eigen::Matrix3Xd inputs_;  // log10 weights, one column per observation
  Eigen::VectorXd targets_;
  Eigen::VectorXd coefficients_;  // K^{-1} (y - m)
  Eigen::LDLT<Eigen::MatrixXd> gram_;
  double prior_mean_ = 0.0;
  double signal_variance_ = 1.0;
  double lengthscale_ = 1.0;
};

inline GaussianProcess gp_fit(const BoState& state) { return GaussianProcess::fit(state); }

double normal_pdf(double z);
double normal_cdf(double z);

/// EI for minimization with posterior mean `mean`, standard deviation `sigma`
/// and incumbent `best`: D Phi(D/sigma) + sigma phi(D/sigma), D = best - mean;
/// max(D, 0) when sigma == 0.
double expected_improvement(double mean, double sigma, double best);

double expected_improvement(const GaussianProcess& gp, const LossWeights& candidate, double best_loss);

/// Weights split into a direction summing to one and the total magnitude.
struct NormalizedWeights {
  Eigen::Vector3d direction;
  double magnitude = 0.0;

  LossWeights weights() const {
    return {direction[0] * magnitude, direction[1] * magnitude, direction[2] * magnitude};
  }
};

NormalizedWeights normalize_weights(const LossWeights& w);

/// Latin-hypercube candidates in log10 space; returns the EI maximizer (a
/// random in-bounds draw when no observations exist yet).
LossWeights propose_weights(const BoState& state, int n_candidates, std::uint64_t seed);

/// Appends (w, loss) to D. An identical (w, loss) pair is not added twice.
/// Throws NonFiniteObservation for a non-finite loss.
BoState bo_update(BoState state, const LossWeights& w, double observed_loss);

}  // namespace drpinns
