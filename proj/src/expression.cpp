#include "drpinns/expression.hpp"

#include "drpinns/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

namespace drpinns {

struct Expression::Node {
  enum class Kind { Number, Coordinate, Radius, Negate, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Max };
  Kind kind;
  double number = 0.0;
  int axis = 0;
  std::vector<std::shared_ptr<const Node>> args;

  double eval(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    switch (kind) {
      case Kind::Number: return number;
      case Kind::Coordinate: return x[axis];
      case Kind::Radius: return x.norm();
      case Kind::Negate: return -args[0]->eval(x);
      case Kind::Add: return args[0]->eval(x) + args[1]->eval(x);
      case Kind::Sub: return args[0]->eval(x) - args[1]->eval(x);
      case Kind::Mul: return args[0]->eval(x) * args[1]->eval(x);
      case Kind::Div: return args[0]->eval(x) / args[1]->eval(x);
      case Kind::Pow: return std::pow(args[0]->eval(x), args[1]->eval(x));
      case Kind::Sin: return std::sin(args[0]->eval(x));
      case Kind::Cos: return std::cos(args[0]->eval(x));
      case Kind::Exp: return std::exp(args[0]->eval(x));
      case Kind::Max: return std::max(args[0]->eval(x), args[1]->eval(x));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind kind, std::vector<NodePtr> args = {}) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = kind;
  n->args = std::move(args);
  return n;
}

// Recursive descent:
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | '+' unary | power
//   power  := atom ('^' unary)?
//   atom   := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
class Parser {
 public:
  Parser(std::string_view src, int dim) : src_(src), dim_(dim) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_space();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("expression \"" + std::string(src_) + "\" at offset " + std::to_string(pos_) + ": " + what);
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = make(Kind::Add, {lhs, term()});
      else if (accept('-'))
        lhs = make(Kind::Sub, {lhs, term()});
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = make(Kind::Mul, {lhs, unary()});
      else if (accept('/'))
        lhs = make(Kind::Div, {lhs, unary()});
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Kind::Negate, {unary()});
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) return make(Kind::Pow, {base, unary()});
    return base;
  }

  NodePtr atom() {
    skip_space();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    if (accept('(')) {
      NodePtr e = expr();
      expect(')');
      return e;
    }
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return name();
    fail(std::string("unexpected '") + c + "'");
  }

  NodePtr number() {
    const std::string rest(src_.substr(pos_));
    char* end = nullptr;
    const double v = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str()) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - rest.c_str());
    auto n = std::make_shared<Expression::Node>();
    n->kind = Kind::Number;
    n->number = v;
    return n;
  }

  NodePtr name() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::string_view id = src_.substr(start, pos_ - start);

    if (id == "sin" || id == "cos" || id == "exp") {
      expect('(');
      NodePtr arg = expr();
      expect(')');
      return make(id == "sin" ? Kind::Sin : id == "cos" ? Kind::Cos : Kind::Exp, {arg});
    }
    if (id == "max") {
      expect('(');
      NodePtr a = expr();
      expect(',');
      NodePtr b = expr();
      expect(')');
      return make(Kind::Max, {a, b});
    }
    if (id == "pi") {
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::Number;
      n->number = std::numbers::pi;
      return n;
    }
    if (id == "r") return make(Kind::Radius);
    if (id == "x" || id == "y" || id == "z") {
      const int axis = id == "x" ? 0 : id == "y" ? 1 : 2;
      if (axis >= dim_) fail("variable '" + std::string(id) + "' exceeds dimension " + std::to_string(dim_));
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::Coordinate;
      n->axis = axis;
      return n;
    }
    fail("unknown identifier '" + std::string(id) + "'");
  }

  std::string_view src_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(std::string_view source, int dim) {
  Expression e;
  e.root_ = Parser(source, dim).parse();
  e.source_ = std::string(source);
  return e;
}

double Expression::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const { return root_->eval(x); }

}  // namespace drpinns
