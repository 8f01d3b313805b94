#include "drpinns/problems.hpp"

#include "drpinns/errors.hpp"
#include "drpinns/expression.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace drpinns {

namespace {

double zero(const Eigen::Ref<const Eigen::VectorXd>&) { return 0.0; }

double ex4_exact(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double s = std::max(x.squaredNorm() - kExample4Radius * kExample4Radius, 0.0);
  return s * s;
}

double ex4_source(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double r2 = x.squaredNorm();
  const double r02 = kExample4Radius * kExample4Radius;
  if (r2 > r02) return -4.0 * (2.0 * r2 + 3.0 * (r2 - r02));
  return -8.0 * r02 * (1.0 - r2 + r02);
}

ProblemSpec example4_base() {
  ProblemSpec p;
  p.box = Box::cube(3, 0.0, 1.0);
  p.f = ex4_source;
  p.psi = zero;
  p.exact = ex4_exact;
  return p;
}

}  // namespace

ProblemSpec example1() {
  ProblemSpec p;
  p.name = "ex1";
  p.box = Box::cube(1, 0.0, 1.0);
  p.f = [](const Eigen::Ref<const Eigen::VectorXd>& x) { return 2.0 * x[0]; };
  p.psi = [](const Eigen::Ref<const Eigen::VectorXd>& x) { return 0.25 * x[0] * (1.0 - x[0]); };
  p.g = zero;
  return p;
}

ProblemSpec example2() {
  ProblemSpec p;
  p.name = "ex2";
  p.box = Box::cube(2, -1.0, 1.0);
  p.f = [](const Eigen::Ref<const Eigen::VectorXd>& x) {
    constexpr double pi = std::numbers::pi;
    return 2.0 * pi * pi * std::sin(pi * x[0]) * std::sin(pi * x[1]);
  };
  p.psi = zero;
  p.g = zero;
  return p;
}

ProblemSpec example3() {
  ProblemSpec p;
  p.name = "ex3";
  p.box = Box::cube(2, -1.0, 1.0);
  p.f = [](const Eigen::Ref<const Eigen::VectorXd>& x) { return 4.0 - 2.0 * x.squaredNorm(); };
  p.psi = zero;
  p.g = zero;
  return p;
}

ProblemSpec example4() {
  ProblemSpec p = example4_base();
  p.name = "ex4";
  p.g = [](const Eigen::Ref<const Eigen::VectorXd>& x) {
    return x.squaredNorm() - kExample4Radius * kExample4Radius;
  };
  p.warnings.push_back(
      "ex4: boundary data g = r^2 - r0^2 differs from the trace of the exact solution "
      "(max(r^2 - r0^2, 0))^2 (e.g. 0.51 vs 0.2601 at (1,0,0)) and is negative where r < r0, "
      "so errors against the exact formula do not vanish; use ex4x for consistent data");
  return p;
}

ProblemSpec example4_exact_trace() {
  ProblemSpec p = example4_base();
  p.name = "ex4x";
  p.g = ex4_exact;
  return p;
}

ProblemSpec resolve_problem(const std::string& name_or_path) {
  if (name_or_path == "ex1") return example1();
  if (name_or_path == "ex2") return example2();
  if (name_or_path == "ex3") return example3();
  if (name_or_path == "ex4") return example4();
  if (name_or_path == "ex4x") return example4_exact_trace();
  if (!std::filesystem::exists(name_or_path))
    throw ConfigError("unknown problem '" + name_or_path + "' (expected ex1..ex4, ex4x or a JSON file)");
  return load_problem(name_or_path);
}

ProblemSpec problem_from_json(const nlohmann::json& j) {
  try {
    ProblemSpec p;
    const int dim = j.at("dim").get<int>();
    if (dim < 1 || dim > 3) throw ConfigError("dim must be 1, 2 or 3");
    p.name = j.value("name", std::string("custom"));
    const auto& box = j.at("box");
    if (box.size() != static_cast<std::size_t>(dim)) throw ConfigError("box must list one [lo, hi] per axis");
    p.box.lo.resize(dim);
    p.box.hi.resize(dim);
    for (int k = 0; k < dim; ++k) {
      p.box.lo[k] = box[k].at(0).get<double>();
      p.box.hi[k] = box[k].at(1).get<double>();
    }
    p.box.validate();

    auto field = [dim](const std::string& src) -> ScalarField {
      Expression e = Expression::parse(src, dim);
      return [e](const Eigen::Ref<const Eigen::VectorXd>& x) { return e(x); };
    };
    p.f = field(j.at("f").get<std::string>());
    p.psi = field(j.value("psi", std::string("0")));
    p.g = field(j.value("g", std::string("0")));
    if (j.contains("exact")) p.exact = field(j.at("exact").get<std::string>());
    p.alpha = j.value("alpha", 0.0);
    if (!(p.alpha >= 0.0) || !std::isfinite(p.alpha)) throw ConfigError("alpha must be finite and >= 0");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed problem config: ") + e.what());
  }
}

ProblemSpec load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read problem config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed problem config: ") + e.what());
  }
  return problem_from_json(j);
}

Eigen::RowVectorXd evaluate_field(const ScalarField& field, const PointSet& points) {
  Eigen::RowVectorXd out(points.cols());
  for (Eigen::Index i = 0; i < points.cols(); ++i) out[i] = field(points.col(i));
  return out;
}

std::optional<Eigen::RowVectorXd> evaluate_exact(const ProblemSpec& problem, const PointSet& points) {
  if (!problem.exact) return std::nullopt;
  return evaluate_field(*problem.exact, points);
}

double compatibility_margin(const ProblemSpec& problem, const PointSet& boundary_points) {
  double margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < boundary_points.cols(); ++i) {
    const auto x = boundary_points.col(i);
    margin = std::min(margin, problem.g(x) - problem.psi(x));
  }
  return margin;
}

}  // namespace drpinns
