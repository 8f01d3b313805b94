#pragma once

// Matrix-valued reverse-mode tape. Every node holds a dense Eigen matrix, so a
// whole batch of collocation points flows through one node per layer.

#include <Eigen/Dense>

#include <cassert>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace drpinns::ad {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while its tape lives.
template <typename Scalar>
class Var {
 public:
  Var() = default;

  Tape<Scalar>& tape() const { return *tape_; }
  std::size_t index() const { return index_; }
  const Matrix<Scalar>& value() const { return tape_->value(*this); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Scalar scalar() const {
    assert(rows() == 1 && cols() == 1);
    return value()(0, 0);
  }

 private:
  friend class Tape<Scalar>;
  Var(Tape<Scalar>* tape, std::size_t index) : tape_(tape), index_(index) {}

  Tape<Scalar>* tape_ = nullptr;
  std::size_t index_ = 0;
};

template <typename Scalar>
class Tape {
 public:
  using MatrixType = Matrix<Scalar>;
  /// Receives the node's adjoint and its own forward value, and scatters
  /// contributions into the node's inputs.
  using Pullback = std::function<void(Tape&, const MatrixType& adjoint, const MatrixType& value)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that receives an adjoint.
  Var<Scalar> variable(MatrixType value) { return push(std::move(value), true, {}); }

  /// Leaf excluded from differentiation.
  Var<Scalar> constant(MatrixType value) { return push(std::move(value), false, {}); }

  /// Interior node. `active` should be true iff any input is active.
  Var<Scalar> record(MatrixType value, bool active, Pullback pullback) {
    return push(std::move(value), active, active ? std::move(pullback) : Pullback{});
  }

  const MatrixType& value(const Var<Scalar>& v) const { return nodes_[v.index()].value; }
  const MatrixType& adjoint(const Var<Scalar>& v) const { return nodes_[v.index()].adjoint; }
  bool active(const Var<Scalar>& v) const { return nodes_[v.index()].active; }
  std::size_t size() const { return nodes_.size(); }

  template <typename Derived>
  void accumulate(const Var<Scalar>& v, const Eigen::MatrixBase<Derived>& contribution) {
    Node& node = nodes_[v.index()];
    if (!node.active) return;
    if (node.seeded) {
      node.adjoint += contribution;
    } else {
      node.adjoint = contribution;
      node.seeded = true;
    }
  }

  /// Seeds d(output)/d(output) = 1 and runs every pullback in reverse order.
  /// Adjoints are zeroed first, so backward may be called more than once.
  void backward(const Var<Scalar>& output) {
    assert(output.rows() == 1 && output.cols() == 1);
    for (Node& node : nodes_) node.seeded = false;
    Node& seed = nodes_[output.index()];
    if (seed.active) {
      seed.adjoint = MatrixType::Ones(1, 1);
      seed.seeded = true;
      for (std::size_t i = output.index() + 1; i-- > 0;) {
        Node& node = nodes_[i];
        if (node.seeded && node.pullback) node.pullback(*this, node.adjoint, node.value);
      }
    }
    // Nodes that no path reached get an explicit zero adjoint.
    for (Node& node : nodes_) {
      if (node.active && !node.seeded) node.adjoint.setZero(node.value.rows(), node.value.cols());
    }
  }

 private:
  struct Node {
    MatrixType value;
    MatrixType adjoint;
    Pullback pullback;
    bool active = false;
    bool seeded = false;  // adjoint holds a value in the current backward pass
  };

  Var<Scalar> push(MatrixType value, bool active, Pullback pullback) {
    nodes_.push_back(Node{std::move(value), MatrixType{}, std::move(pullback), active, false});
    return Var<Scalar>(this, nodes_.size() - 1);
  }

  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Operations. Inputs must live on the same tape.

template <typename Scalar>
Var<Scalar> matmul(const Var<Scalar>& a, const Var<Scalar>& b) {
  Tape<Scalar>& t = a.tape();
  assert(a.cols() == b.rows());
  const bool active = t.active(a) || t.active(b);
  return t.record(a.value() * b.value(), active,
                  [a, b](Tape<Scalar>& tape, const Matrix<Scalar>& adj, const Matrix<Scalar>&) {
                    if (tape.active(a)) tape.accumulate(a, adj * b.value().transpose());
                    if (tape.active(b)) tape.accumulate(b, a.value().transpose() * adj);
                  });
}

template <typename Scalar>
Var<Scalar> operator+(const Var<Scalar>& a, const Var<Scalar>& b) {
  Tape<Scalar>& t = a.tape();
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  return t.record(a.value() + b.value(), t.active(a) || t.active(b),
                  [a, b](Tape<Scalar>& tape, const Matrix<Scalar>& adj, const Matrix<Scalar>&) {
                    tape.accumulate(a, adj);
                    tape.accumulate(b, adj);
                  });
}

template <typename Scalar>
Var<Scalar> operator-(const Var<Scalar>& a, const Var<Scalar>& b) {
  Tape<Scalar>& t = a.tape();
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  return t.record(a.value() - b.value(), t.active(a) || t.active(b),
                  [a, b](Tape<Scalar>& tape, const Matrix<Scalar>& adj, const Matrix<Scalar>&) {
                    tape.accumulate(a, adj);
                    tape.accumulate(b, -adj);
                  });
}

template <typename Scalar>
Var<Scalar> operator*(Scalar s, const Var<Scalar>& a) {
  Tape<Scalar>& t = a.tape();
  return t.record(s * a.value(), t.active(a),
                  [a, s](Tape<Scalar>& tape, const Matrix<Scalar>& adj, const Matrix<Scalar>&) {
                    tape.accumulate(a, s * adj);
                  });
}

/// a (m x n) plus the column vector b (m x 1) added to every column.
template <typename Scalar>
Var<Scalar> add_bias(const Var<Scalar>& a, const Var<Scalar>& b) {
  Tape<Scalar>& t = a.tape();
  assert(b.cols() == 1 && b.rows() == a.rows());
  Matrix<Scalar> out = a.value().colwise() + b.value().col(0);
  return t.record(std::move(out), t.active(a) || t.active(b),
                  [a, b](Tape<Scalar>& tape, const Matrix<Scalar>& adj, const Matrix<Scalar>&) {
                    tape.accumulate(a, adj);
                    if (tape.active(b)) tape.accumulate(b, adj.rowwise().sum());
                  });
}

/// Column `col` of a, repeated `count` times.
template <typename Scalar>
Var<Scalar> broadcast_column(const Var<Scalar>& a, Eigen::Index col, Eigen::Index count) {
  Tape<Scalar>& t = a.tape();
  Matrix<Scalar> out = a.value().col(col).replicate(1, count);
  return t.record(std::move(out), t.active(a),
                  [a, col](Tape<Scalar>& tape, const Matrix<Scalar>& adj, const Matrix<Scalar>&) {
                    Matrix<Scalar> contribution = Matrix<Scalar>::Zero(a.rows(), a.cols());
                    contribution.col(col) = adj.rowwise().sum();
                    tape.accumulate(a, contribution);
                  });
}

template <typename Scalar>
Var<Scalar> cwise_mul(const Var<Scalar>& a, const Var<Scalar>& b) {
  Tape<Scalar>& t = a.tape();
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  Matrix<Scalar> out = a.value().cwiseProduct(b.value());
  return t.record(std::move(out), t.active(a) || t.active(b),
                  [a, b](Tape<Scalar>& tape, const Matrix<Scalar>& adj, const Matrix<Scalar>&) {
                    if (tape.active(a)) tape.accumulate(a, adj.cwiseProduct(b.value()));
                    if (tape.active(b)) tape.accumulate(b, adj.cwiseProduct(a.value()));
                  });
}

template <typename Scalar>
Var<Scalar> square(const Var<Scalar>& a) {
  Tape<Scalar>& t = a.tape();
  Matrix<Scalar> out = a.value().array().square().matrix();
  return t.record(std::move(out), t.active(a),
                  [a](Tape<Scalar>& tape, const Matrix<Scalar>& adj, const Matrix<Scalar>&) {
                    tape.accumulate(a, Scalar(2) * adj.cwiseProduct(a.value()));
                  });
}

/// max(a, 0) elementwise; subgradient 0 at exactly 0.
template <typename Scalar>
Var<Scalar> relu(const Var<Scalar>& a) {
  Tape<Scalar>& t = a.tape();
  Matrix<Scalar> out = a.value().cwiseMax(Scalar(0));
  return t.record(std::move(out), t.active(a),
                  [a](Tape<Scalar>& tape, const Matrix<Scalar>& adj, const Matrix<Scalar>&) {
                    tape.accumulate(a, (adj.array() * (a.value().array() > Scalar(0)).template cast<Scalar>()).matrix());
                  });
}

/// Penalty hinge max(a, 0); same as relu.
template <typename Scalar>
Var<Scalar> hinge(const Var<Scalar>& a) {
  return relu(a);
}

/// Unit step of a (1 where a > 0, else 0). Piecewise constant, so it has no pullback.
template <typename Scalar>
Var<Scalar> relu_derivative(const Var<Scalar>& a) {
  Matrix<Scalar> out = (a.value().array() > Scalar(0)).template cast<Scalar>().matrix();
  return a.tape().constant(std::move(out));
}

/// tanh(x) = 1 - 2 / (exp(2x) + 1), using Eigen's vectorized exp. Absolute
/// error is a few ulps of 1; saturates correctly for large |x|.
template <typename Derived>
auto fast_tanh(const Eigen::ArrayBase<Derived>& x) {
  using S = typename Derived::Scalar;
  return S(1) - S(2) / ((S(2) * x).exp() + S(1));
}

template <typename Scalar>
Var<Scalar> tanh(const Var<Scalar>& a) {
  Tape<Scalar>& t = a.tape();
  Matrix<Scalar> out = fast_tanh(a.value().array()).matrix();
  return t.record(std::move(out), t.active(a),
                  [a](Tape<Scalar>& tape, const Matrix<Scalar>& adj, const Matrix<Scalar>& y) {
                    tape.accumulate(a, (adj.array() * (Scalar(1) - y.array().square())).matrix());
                  });
}

/// 1 - y^2 for y = tanh(a) already on the tape; differentiable in y.
template <typename Scalar>
Var<Scalar> tanh_slope_from_output(const Var<Scalar>& y) {
  Tape<Scalar>& t = y.tape();
  Matrix<Scalar> out = (Scalar(1) - y.value().array().square()).matrix();
  return t.record(std::move(out), t.active(y),
                  [y](Tape<Scalar>& tape, const Matrix<Scalar>& adj, const Matrix<Scalar>&) {
                    tape.accumulate(y, (Scalar(-2) * adj.array() * y.value().array()).matrix());
                  });
}

/// 1 - tanh(a)^2, differentiable once more.
template <typename Scalar>
Var<Scalar> tanh_derivative(const Var<Scalar>& a) {
  Tape<Scalar>& t = a.tape();
  Matrix<Scalar> th = fast_tanh(a.value().array()).matrix();
  Matrix<Scalar> out = (Scalar(1) - th.array().square()).matrix();
  return t.record(std::move(out), t.active(a),
                  [a, th = std::move(th)](Tape<Scalar>& tape, const Matrix<Scalar>& adj, const Matrix<Scalar>& y) {
                    tape.accumulate(a, (adj.array() * Scalar(-2) * th.array() * y.array()).matrix());
                  });
}

template <typename Scalar>
Var<Scalar> sigmoid(const Var<Scalar>& a) {
  Tape<Scalar>& t = a.tape();
  Matrix<Scalar> out = (Scalar(1) / (Scalar(1) + (-a.value().array()).exp())).matrix();
  return t.record(std::move(out), t.active(a),
                  [a](Tape<Scalar>& tape, const Matrix<Scalar>& adj, const Matrix<Scalar>& y) {
                    tape.accumulate(a, (adj.array() * y.array() * (Scalar(1) - y.array())).matrix());
                  });
}

/// s(a)(1 - s(a)) for the logistic s, differentiable once more.
template <typename Scalar>
Var<Scalar> sigmoid_derivative(const Var<Scalar>& a) {
  Tape<Scalar>& t = a.tape();
  Matrix<Scalar> s = (Scalar(1) / (Scalar(1) + (-a.value().array()).exp())).matrix();
  Matrix<Scalar> out = (s.array() * (Scalar(1) - s.array())).matrix();
  return t.record(std::move(out), t.active(a),
                  [a, s = std::move(s)](Tape<Scalar>& tape, const Matrix<Scalar>& adj, const Matrix<Scalar>& y) {
                    tape.accumulate(a, (adj.array() * y.array() * (Scalar(1) - Scalar(2) * s.array())).matrix());
                  });
}

/// Sum of all entries, as a 1x1 node.
template <typename Scalar>
Var<Scalar> sum(const Var<Scalar>& a) {
  Tape<Scalar>& t = a.tape();
  Matrix<Scalar> out(1, 1);
  out(0, 0) = a.value().sum();
  return t.record(std::move(out), t.active(a),
                  [a](Tape<Scalar>& tape, const Matrix<Scalar>& adj, const Matrix<Scalar>&) {
                    tape.accumulate(a, Matrix<Scalar>::Constant(a.rows(), a.cols(), adj(0, 0)));
                  });
}

template <typename Scalar>
Var<Scalar> mean(const Var<Scalar>& a) {
  const auto n = static_cast<Scalar>(a.rows() * a.cols());
  return (Scalar(1) / n) * sum(a);
}

}  // namespace drpinns::ad
