#include "drpinns/loss.hpp"

#include "drpinns/errors.hpp"

#include <cmath>

namespace drpinns {

using ad::Var;

void LossWeights::validate() const {
  for (double w : {w1, w2, w3}) {
    if (!std::isfinite(w) || w < 0.0) throw ConfigError("loss weights must be finite and non-negative");
  }
  if (w1 == 0.0 && w2 == 0.0 && w3 == 0.0) throw ConfigError("loss weights must not all be zero");
}

LossBreakdown total_loss(double energy, double constraint, double boundary, const LossWeights& weights) {
  weights.validate();
  return LossBreakdown{energy, constraint, boundary,
                       weights.w1 * energy + weights.w2 * constraint + weights.w3 * boundary};
}

LossData LossData::build(const ProblemSpec& problem, const PointSet& interior, const PointSet& boundary) {
  LossData d;
  d.interior = interior;
  d.boundary = boundary;
  d.f = evaluate_field(problem.f, interior);
  d.psi = evaluate_field(problem.psi, interior);
  d.g = evaluate_field(problem.g, boundary);
  d.alpha = problem.alpha;
  return d;
}

namespace {

// Per-point energy integrand 1/2|grad u|^2 + 1/2 alpha u^2 - f u, as a 1 x N node.
Var<double> energy_density(ad::Tape<double>& tape, const RecordedOutput<double>& out, const LossData& data) {
  Var<double> grad_sq = ad::square(out.input_gradient[0]);
  for (std::size_t k = 1; k < out.input_gradient.size(); ++k) grad_sq = grad_sq + ad::square(out.input_gradient[k]);
  Var<double> density = 0.5 * grad_sq - ad::cwise_mul(tape.constant(data.f), out.value);
  if (data.alpha != 0.0) density = density + (0.5 * data.alpha) * ad::square(out.value);
  return density;
}

void check_finite(double value, const char* term) {
  if (!std::isfinite(value)) throw NonFiniteLoss(term);
}

}  // namespace

RecordedLoss record_loss(ad::Tape<double>& tape, const Network& net, const ParamVars<double>& vars,
                         const LossData& data) {
  if (data.interior.cols() == 0 || data.boundary.cols() == 0)
    throw EmptyInput("loss needs at least one interior and one boundary point");
  const RecordedOutput<double> inner = record_forward(net, vars, tape.constant(data.interior), true);
  const RecordedOutput<double> outer = record_forward(net, vars, tape.constant(data.boundary), false);

  RecordedLoss loss;
  loss.energy = ad::mean(energy_density(tape, inner, data));
  loss.constraint = ad::mean(ad::hinge(tape.constant(data.psi) - inner.value));
  loss.boundary = ad::mean(ad::square(outer.value - tape.constant(data.g)));
  check_finite(loss.energy.scalar(), "energy");
  check_finite(loss.constraint.scalar(), "constraint");
  check_finite(loss.boundary.scalar(), "boundary");
  return loss;
}

LossBreakdown evaluate_loss(const Network& net, const LossData& data, const LossWeights& weights) {
  ad::Tape<double> tape;
  const ParamVars<double> vars = record_params(tape, net, false);
  const RecordedLoss loss = record_loss(tape, net, vars, data);
  return total_loss(loss.energy.scalar(), loss.constraint.scalar(), loss.boundary.scalar(), weights);
}

LossAndGradient loss_and_gradient(const Network& net, const LossData& data, const LossWeights& weights) {
  weights.validate();
  ad::Tape<double> tape;
  const ParamVars<double> vars = record_params(tape, net, true);
  const RecordedLoss loss = record_loss(tape, net, vars, data);
  const Var<double> total =
      weights.w1 * loss.energy + weights.w2 * loss.constraint + weights.w3 * loss.boundary;
  check_finite(total.scalar(), "total");
  tape.backward(total);

  LossAndGradient result{total_loss(loss.energy.scalar(), loss.constraint.scalar(), loss.boundary.scalar(), weights),
                         net.zeros_like()};
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    result.gradient.weights[l] = tape.adjoint(vars.weights[l]);
    result.gradient.biases[l] = tape.adjoint(vars.biases[l]).col(0);
  }
  return result;
}

double energy_term(const Network& net, const PointSet& interior, const ProblemSpec& problem) {
  if (interior.cols() == 0) throw EmptyInput("energy term needs interior points");
  const LossData data = LossData::build(problem, interior, interior.leftCols(1));
  ad::Tape<double> tape;
  const ParamVars<double> vars = record_params(tape, net, false);
  const RecordedOutput<double> out = record_forward(net, vars, tape.constant(data.interior), true);
  const double value = ad::mean(energy_density(tape, out, data)).scalar();
  check_finite(value, "energy");
  return value;
}

double constraint_term(const Network& net, const PointSet& interior, const ProblemSpec& problem) {
  if (interior.cols() == 0) throw EmptyInput("constraint term needs interior points");
  const Eigen::RowVectorXd u = forward_batch<double>(net, interior);
  const Eigen::RowVectorXd psi = evaluate_field(problem.psi, interior);
  const double value = (psi - u).cwiseMax(0.0).mean();
  check_finite(value, "constraint");
  return value;
}

double boundary_term(const Network& net, const PointSet& boundary, const ProblemSpec& problem) {
  if (boundary.cols() == 0) throw EmptyInput("boundary term needs boundary points");
  const Eigen::RowVectorXd u = forward_batch<double>(net, boundary);
  const Eigen::RowVectorXd g = evaluate_field(problem.g, boundary);
  const double value = (u - g).squaredNorm() / static_cast<double>(boundary.cols());
  check_finite(value, "boundary");
  return value;
}

Eigen::VectorXd interior_residuals(const Network& net, const LossData& data, const LossWeights& weights) {
  ad::Tape<double> tape;
  const ParamVars<double> vars = record_params(tape, net, false);
  const RecordedOutput<double> out = record_forward(net, vars, tape.constant(data.interior), true);
  const Eigen::RowVectorXd density = energy_density(tape, out, data).value().row(0);
  const Eigen::RowVectorXd violation = (data.psi - out.value.value().row(0)).cwiseMax(0.0);
  const Eigen::RowVectorXd r = (weights.w1 * density).cwiseMax(0.0) + weights.w2 * violation;
  return r.transpose();
}

}  // namespace drpinns
