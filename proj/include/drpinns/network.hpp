#pragma once

// Dense feed-forward network u(x; theta) with a scalar output. Hidden layers
// apply affine-then-activation; the output layer is purely affine.

#include "drpinns/autodiff.hpp"
#include "drpinns/errors.hpp"
#include "drpinns/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace drpinns {

enum class Activation { Tanh, ReLU, Sigmoid };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::ReLU: return "relu";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "tanh";
}

inline Activation parse_activation(std::string_view name) {
  if (name == "tanh" || name == "Tanh") return Activation::Tanh;
  if (name == "relu" || name == "ReLU") return Activation::ReLU;
  if (name == "sigmoid" || name == "Sigmoid") return Activation::Sigmoid;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

template <typename Scalar>
struct NetworkParams {
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  /// [d_in, M_1, ..., M_{L-1}, 1]
  std::vector<int> layer_sizes;
  Activation activation = Activation::Tanh;
  /// weights[l] is (layer_sizes[l+1] x layer_sizes[l]).
  std::vector<MatrixType> weights;
  std::vector<VectorType> biases;

  int input_dim() const { return layer_sizes.front(); }
  std::size_t layer_count() const { return weights.size(); }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
  }

  NetworkParams zeros_like() const {
    NetworkParams out{layer_sizes, activation, {}, {}};
    for (std::size_t l = 0; l < weights.size(); ++l) {
      out.weights.push_back(MatrixType::Zero(weights[l].rows(), weights[l].cols()));
      out.biases.push_back(VectorType::Zero(biases[l].size()));
    }
    return out;
  }

  bool all_finite() const {
    for (std::size_t l = 0; l < weights.size(); ++l) {
      if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
    }
    return true;
  }

  /// Layer by layer: weights row-major, then biases.
  VectorType flatten() const {
    VectorType out(parameter_count());
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      for (Eigen::Index i = 0; i < weights[l].rows(); ++i)
        for (Eigen::Index j = 0; j < weights[l].cols(); ++j) out[k++] = weights[l](i, j);
      out.segment(k, biases[l].size()) = biases[l];
      k += biases[l].size();
    }
    return out;
  }

  /// Inverse of flatten(); keeps the architecture of *this.
  void assign(const VectorType& flat) {
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      for (Eigen::Index i = 0; i < weights[l].rows(); ++i)
        for (Eigen::Index j = 0; j < weights[l].cols(); ++j) weights[l](i, j) = flat[k++];
      biases[l] = flat.segment(k, biases[l].size());
      k += biases[l].size();
    }
  }
};

using Network = NetworkParams<double>;

inline void validate_architecture(const std::vector<int>& layer_sizes) {
  if (layer_sizes.size() < 2) throw InvalidArchitecture("need at least an input and an output layer");
  for (int s : layer_sizes) {
    if (s <= 0) throw InvalidArchitecture("layer sizes must be positive");
  }
  if (layer_sizes.back() != 1) throw InvalidArchitecture("output layer must have exactly one unit");
}

/// Shapes [d, units x layers, 1].
inline std::vector<int> mlp_layout(int input_dim, int hidden_layers, int units) {
  std::vector<int> sizes{input_dim};
  for (int l = 0; l < hidden_layers; ++l) sizes.push_back(units);
  sizes.push_back(1);
  return sizes;
}

/// Xavier/Glorot normal weights (variance 2/(fan_in + fan_out)), zero biases.
template <typename Scalar = double>
NetworkParams<Scalar> init_params(const std::vector<int>& layer_sizes, Activation activation,
                                  std::uint64_t seed) {
  validate_architecture(layer_sizes);
  using P = NetworkParams<Scalar>;
  P params{layer_sizes, activation, {}, {}};
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double stddev = std::sqrt(2.0 / (fan_in + fan_out));
    typename P::MatrixType w(fan_out, fan_in);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = static_cast<Scalar>(stddev * rng.normal());
    params.weights.push_back(std::move(w));
    params.biases.push_back(P::VectorType::Zero(fan_out));
  }
  return params;
}

namespace detail {

template <typename Derived>
auto apply_activation(const Eigen::ArrayBase<Derived>& z, Activation a) {
  using Scalar = typename Derived::Scalar;
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  switch (a) {
    case Activation::ReLU: return Array(z.max(Scalar(0)));
    case Activation::Sigmoid: return Array(Scalar(1) / (Scalar(1) + (-z).exp()));
    case Activation::Tanh: break;
  }
  return Array(ad::fast_tanh(z));
}

inline void check_input(int expected, Eigen::Index got) {
  if (got != expected)
    throw InputDimensionError("input has dimension " + std::to_string(got) + ", network expects " +
                              std::to_string(expected));
}

}  // namespace detail

/// u at every column of `points` (d x N); returns a 1 x N row.
template <typename Scalar>
Eigen::Matrix<Scalar, 1, Eigen::Dynamic> forward_batch(
    const NetworkParams<Scalar>& params,
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& points) {
  detail::check_input(params.input_dim(), points.rows());
  using MatrixType = typename NetworkParams<Scalar>::MatrixType;
  MatrixType h = points;
  const std::size_t last = params.layer_count() - 1;
  for (std::size_t l = 0; l < last; ++l) {
    MatrixType z = (params.weights[l] * h).colwise() + params.biases[l];
    h = detail::apply_activation(z.array(), params.activation).matrix();
  }
  MatrixType out = (params.weights[last] * h).colwise() + params.biases[last];
  return out.row(0);
}

template <typename Scalar>
Scalar forward(const NetworkParams<Scalar>& params,
               const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& x) {
  return forward_batch<Scalar>(params, x)(0);
}

// ---------------------------------------------------------------------------
// Taped evaluation

template <typename Scalar>
struct ParamVars {
  std::vector<ad::Var<Scalar>> weights;
  std::vector<ad::Var<Scalar>> biases;
};

template <typename Scalar>
ParamVars<Scalar> record_params(ad::Tape<Scalar>& tape, const NetworkParams<Scalar>& params, bool active = true) {
  ParamVars<Scalar> vars;
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    vars.weights.push_back(active ? tape.variable(params.weights[l]) : tape.constant(params.weights[l]));
    vars.biases.push_back(active ? tape.variable(params.biases[l]) : tape.constant(params.biases[l]));
  }
  return vars;
}

template <typename Scalar>
struct RecordedOutput {
  ad::Var<Scalar> value;                        // 1 x N
  std::vector<ad::Var<Scalar>> input_gradient;  // d entries, each 1 x N: du/dx_k
};

/// Records u and, optionally, the input gradient (propagated as forward
/// tangents on the same tape) for the batch `inputs` (d x N).
template <typename Scalar>
RecordedOutput<Scalar> record_forward(const NetworkParams<Scalar>& params, const ParamVars<Scalar>& vars,
                                      const ad::Var<Scalar>& inputs, bool with_input_gradient) {
  detail::check_input(params.input_dim(), inputs.rows());
  const Eigen::Index n = inputs.cols();
  const Eigen::Index dim = inputs.rows();
  const std::size_t last = params.layer_count() - 1;

  auto activate = [&](const ad::Var<Scalar>& z) {
    switch (params.activation) {
      case Activation::ReLU: return ad::relu(z);
      case Activation::Sigmoid: return ad::sigmoid(z);
      case Activation::Tanh: break;
    }
    return ad::tanh(z);
  };
  auto activate_derivative = [&](const ad::Var<Scalar>& z) {
    switch (params.activation) {
      case Activation::ReLU: return ad::relu_derivative(z);
      case Activation::Sigmoid: return ad::sigmoid_derivative(z);
      case Activation::Tanh: break;
    }
    return ad::tanh_derivative(z);
  };

  ad::Var<Scalar> h = inputs;
  std::vector<ad::Var<Scalar>> tangents;
  for (std::size_t l = 0; l < last; ++l) {
    ad::Var<Scalar> z = ad::add_bias(ad::matmul(vars.weights[l], h), vars.biases[l]);
    ad::Var<Scalar> next = activate(z);
    if (with_input_gradient) {
      ad::Var<Scalar> slope =
          params.activation == Activation::Tanh ? ad::tanh_slope_from_output(next) : activate_derivative(z);
      for (Eigen::Index k = 0; k < dim; ++k) {
        ad::Var<Scalar> dz = l == 0 ? ad::broadcast_column(vars.weights[0], k, n)
                                    : ad::matmul(vars.weights[l], tangents[k]);
        ad::Var<Scalar> dh = ad::cwise_mul(slope, dz);
        if (l == 0)
          tangents.push_back(dh);
        else
          tangents[k] = dh;
      }
    }
    h = next;
  }

  RecordedOutput<Scalar> out;
  out.value = ad::add_bias(ad::matmul(vars.weights[last], h), vars.biases[last]);
  if (with_input_gradient) {
    for (Eigen::Index k = 0; k < dim; ++k) {
      out.input_gradient.push_back(last == 0 ? ad::broadcast_column(vars.weights[0], k, n)
                                             : ad::matmul(vars.weights[last], tangents[k]));
    }
  }
  return out;
}

/// Reverse-mode gradient of u with respect to the input point.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> grad_input(const NetworkParams<Scalar>& params,
                                                    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x) {
  detail::check_input(params.input_dim(), x.size());
  ad::Tape<Scalar> tape;
  const ParamVars<Scalar> vars = record_params(tape, params, false);
  const ad::Var<Scalar> input = tape.variable(x);
  const RecordedOutput<Scalar> out = record_forward(params, vars, input, false);
  tape.backward(out.value);
  return tape.adjoint(input).col(0);
}

/// Builds a scalar (1x1) loss on the tape from the recorded parameters.
template <typename Scalar>
using LossEvaluator = std::function<ad::Var<Scalar>(ad::Tape<Scalar>&, const ParamVars<Scalar>&)>;

template <typename Scalar>
struct ValueAndGradient {
  Scalar value;
  NetworkParams<Scalar> gradient;
};

template <typename Scalar>
ValueAndGradient<Scalar> value_and_grad_params(const NetworkParams<Scalar>& params,
                                               const LossEvaluator<Scalar>& loss_evaluator) {
  ad::Tape<Scalar> tape;
  const ParamVars<Scalar> vars = record_params(tape, params, true);
  const ad::Var<Scalar> loss = loss_evaluator(tape, vars);
  const Scalar value = loss.scalar();
  if (!std::isfinite(static_cast<double>(value))) throw NonFiniteLoss("loss");
  tape.backward(loss);
  ValueAndGradient<Scalar> result{value, params.zeros_like()};
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    result.gradient.weights[l] = tape.adjoint(vars.weights[l]);
    result.gradient.biases[l] = tape.adjoint(vars.biases[l]).col(0);
  }
  return result;
}

/// Reverse-mode gradient of the scalar loss with respect to every weight and bias.
template <typename Scalar>
NetworkParams<Scalar> grad_params(const NetworkParams<Scalar>& params, const LossEvaluator<Scalar>& loss_evaluator) {
  return value_and_grad_params(params, loss_evaluator).gradient;
}

}  // namespace drpinns
