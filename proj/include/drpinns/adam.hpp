#pragma once

#include "drpinns/errors.hpp"
#include "drpinns/network.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace drpinns {

/// Moment accumulators and hyperparameters of Adam. m and v are stored flat,
/// in NetworkParams::flatten() order.
template <typename Scalar>
struct AdamState {
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  VectorType m;
  VectorType v;
  long t = 0;
  Scalar alpha = Scalar(1e-3);
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar eps = Scalar(1e-8);

  static AdamState zeros(Eigen::Index n, Scalar alpha = Scalar(1e-3)) {
    AdamState s;
    s.m = VectorType::Zero(n);
    s.v = VectorType::Zero(n);
    s.alpha = alpha;
    return s;
  }
};

/// One Adam update on a flat parameter vector:
///   t += 1; m = b1 m + (1-b1) g; v = b2 v + (1-b2) g^2;
///   theta -= alpha * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
template <typename Scalar>
void adam_step(AdamState<Scalar>& state, Eigen::Ref<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> theta,
               const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& grad) {
  if (grad.size() != theta.size() || state.m.size() != theta.size())
    throw ShapeError("Adam gradient/state size does not match the parameters");
  if (!grad.allFinite()) throw NonFiniteGradient("non-finite gradient entry in Adam step");
  if (!(state.beta1 >= 0 && state.beta1 < 1 && state.beta2 >= 0 && state.beta2 < 1))
    throw ConfigError("Adam decay rates must lie in [0, 1)");

  state.t += 1;
  state.m = state.beta1 * state.m + (Scalar(1) - state.beta1) * grad;
  state.v = state.beta2 * state.v + (Scalar(1) - state.beta2) * grad.cwiseAbs2();
  const Scalar c1 = Scalar(1) - std::pow(state.beta1, static_cast<Scalar>(state.t));
  const Scalar c2 = Scalar(1) - std::pow(state.beta2, static_cast<Scalar>(state.t));
  theta.array() -= state.alpha * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + state.eps);
}

template <typename Scalar>
void adam_step(AdamState<Scalar>& state, NetworkParams<Scalar>& params, const NetworkParams<Scalar>& grads) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> theta = params.flatten();
  adam_step<Scalar>(state, theta, grads.flatten());
  params.assign(theta);
}

}  // namespace drpinns
