#include "drpinns/bayes_opt.hpp"

#include "drpinns/errors.hpp"
#include "drpinns/random.hpp"
#include "drpinns/sampling.hpp"

#include <cmath>
#include <numbers>

namespace drpinns {

namespace {

Eigen::Vector3d log_coords(const LossWeights& w) {
  return {std::log10(w.w1), std::log10(w.w2), std::log10(w.w3)};
}

LossWeights from_log(const Eigen::Vector3d& z) {
  return {std::pow(10.0, z[0]), std::pow(10.0, z[1]), std::pow(10.0, z[2])};
}

}  // namespace

GaussianProcess GaussianProcess::fit(const BoState& state) {
  if (state.observations.empty()) throw EmptyInput("gp_fit needs at least one observation");
  if (!(state.kernel_lengthscale > 0.0) || !(state.noise_jitter > 0.0))
    throw ConfigError("kernel lengthscale and jitter must be positive");

  // Collapse exact repeats; conflicting repeats are an error.
  std::vector<Observation> obs;
  for (const Observation& o : state.observations) {
    bool repeat = false;
    for (const Observation& seen : obs) {
      if (seen.weights == o.weights) {
        if (seen.loss != o.loss) throw DuplicateObservation("the same weights were observed with different losses");
        repeat = true;
      }
    }
    if (!repeat) obs.push_back(o);
  }

  GaussianProcess gp;
  const auto n = static_cast<Eigen::Index>(obs.size());
  gp.inputs_.resize(3, n);
  gp.targets_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (obs[i].weights.w1 <= 0 || obs[i].weights.w2 <= 0 || obs[i].weights.w3 <= 0)
      throw ConfigError("BO observations need strictly positive weights");
    gp.inputs_.col(i) = log_coords(obs[i].weights);
    gp.targets_[i] = obs[i].loss;
  }
  gp.lengthscale_ = state.kernel_lengthscale;
  gp.prior_mean_ = gp.targets_.mean();
  if (state.kernel_variance > 0.0) {
    gp.signal_variance_ = state.kernel_variance;
  } else {
    const double var = (gp.targets_.array() - gp.prior_mean_).square().mean();
    gp.signal_variance_ = var > 0.0 ? var : 1.0;
  }

  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) k(i, j) = gp.kernel(gp.inputs_.col(i), gp.inputs_.col(j));
  k.diagonal().array() += state.noise_jitter;
  gp.gram_.compute(k);
  gp.coefficients_ = gp.gram_.solve((gp.targets_.array() - gp.prior_mean_).matrix());
  return gp;
}

double GaussianProcess::kernel(const Eigen::Vector3d& a, const Eigen::Vector3d& b) const {
  return signal_variance_ * std::exp(-0.5 * (a - b).squaredNorm() / (lengthscale_ * lengthscale_));
}

GaussianProcess::Posterior GaussianProcess::predict(const LossWeights& weights) const {
  const Eigen::Vector3d z = log_coords(weights);
  Eigen::VectorXd kstar(inputs_.cols());
  for (Eigen::Index i = 0; i < inputs_.cols(); ++i) kstar[i] = kernel(z, inputs_.col(i));
  Posterior p;
  p.mean = prior_mean_ + kstar.dot(coefficients_);
  p.variance = std::max(0.0, signal_variance_ - kstar.dot(gram_.solve(kstar)));
  return p;
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double expected_improvement(double mean, double sigma, double best) {
  const double delta = best - mean;
  if (!(sigma > 0.0)) return std::max(delta, 0.0);
  const double z = delta / sigma;
  return std::max(0.0, delta * normal_cdf(z) + sigma * normal_pdf(z));
}

double expected_improvement(const GaussianProcess& gp, const LossWeights& candidate, double best_loss) {
  const GaussianProcess::Posterior p = gp.predict(candidate);
  return expected_improvement(p.mean, std::sqrt(p.variance), best_loss);
}

NormalizedWeights normalize_weights(const LossWeights& w) {
  const double total = w.sum();
  if (!(total > 0.0)) throw ConfigError("cannot normalize all-zero weights");
  return {Eigen::Vector3d(w.w1, w.w2, w.w3) / total, total};
}

LossWeights propose_weights(const BoState& state, int n_candidates, std::uint64_t seed) {
  const Box space = Box::cube(3, state.log10_lower, state.log10_upper);
  if (state.observations.empty()) {
    Rng rng(seed);
    Eigen::Vector3d z;
    for (int k = 0; k < 3; ++k) z[k] = rng.uniform(state.log10_lower, state.log10_upper);
    return normalize_weights(from_log(z)).weights();
  }
  if (n_candidates < 1) throw ConfigError("need at least one BO candidate");

  const GaussianProcess gp = GaussianProcess::fit(state);
  const double best = gp.best_observed();
  const PointSet candidates = latin_hypercube(n_candidates, space, seed);
  Eigen::Index arg = 0;
  double best_ei = -1.0;
  for (Eigen::Index i = 0; i < candidates.cols(); ++i) {
    const double ei = expected_improvement(gp, from_log(candidates.col(i)), best);
    if (ei > best_ei) {
      best_ei = ei;
      arg = i;
    }
  }
  return normalize_weights(from_log(candidates.col(arg))).weights();
}

BoState bo_update(BoState state, const LossWeights& w, double observed_loss) {
  if (!std::isfinite(observed_loss)) throw NonFiniteObservation("BO observation has a non-finite loss");
  for (const Observation& o : state.observations) {
    if (o.weights == w && o.loss == observed_loss) return state;
  }
  state.observations.push_back({w, observed_loss});
  return state;
}

}  // namespace drpinns
