#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <string_view>

namespace drpinns {

/// Arithmetic expression over the coordinates of a point.
///
/// Grammar: numbers, `+ - * / ^` (`^` is right-associative and binds tighter
/// than unary minus), parentheses, `sin cos exp` of one argument, `max` of two,
/// the variables `x y z` (coordinates 0..2) and `r` (Euclidean norm), and the
/// constant `pi`.
class Expression {
 public:
  /// Parses `source` for points of dimension `dim`; referencing a coordinate
  /// beyond `dim` is a parse error.
  static Expression parse(std::string_view source, int dim);

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  const std::string& source() const { return source_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string source_;
};

}  // namespace drpinns
