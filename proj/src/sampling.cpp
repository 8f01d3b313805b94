#include "drpinns/sampling.hpp"

#include "drpinns/errors.hpp"
#include "drpinns/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

namespace drpinns {

namespace {

using Coords = std::vector<double>;

Coords coords_of(const Eigen::Ref<const Eigen::VectorXd>& x) { return Coords(x.data(), x.data() + x.size()); }

std::vector<int> permutation(int n, Rng& rng) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(p[i], p[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  return p;
}

// Projects x into the box shrunk by 1e-9 of the width on every side.
void clip_interior(Eigen::Ref<Eigen::VectorXd> x, const Box& box) {
  const Eigen::VectorXd margin = 1e-9 * box.width();
  x = x.cwiseMax(box.lo + margin).cwiseMin(box.hi - margin);
}

Eigen::VectorXd uniform_in_ball(int dim, double radius, Rng& rng) {
  Eigen::VectorXd dir(dim);
  do {
    for (int k = 0; k < dim; ++k) dir[k] = rng.normal();
  } while (dir.norm() == 0.0);
  dir.normalize();
  return radius * std::pow(rng.uniform(), 1.0 / dim) * dir;
}

}  // namespace

void CollocationSet::validate(const Box& box) const {
  if (interior.cols() < 1 || boundary.cols() < 1) throw ConfigError("collocation set needs N_f >= 1 and N_g >= 1");
  if (interior.rows() != box.dim() || boundary.rows() != box.dim())
    throw ShapeError("collocation points do not match the domain dimension");
  std::set<Coords> seen;
  for (Eigen::Index i = 0; i < interior.cols(); ++i) {
    if (!box.strictly_contains(interior.col(i)))
      throw ConfigError("interior point " + std::to_string(i) + " is not strictly inside the domain");
    if (!seen.insert(coords_of(interior.col(i))).second)
      throw ConfigError("duplicate interior point " + std::to_string(i));
  }
  for (Eigen::Index i = 0; i < boundary.cols(); ++i) {
    if (!box.on_boundary(boundary.col(i)))
      throw ConfigError("boundary point " + std::to_string(i) + " is not on a face");
  }
}

PointSet latin_hypercube(int n, const Box& box, std::uint64_t seed) {
  box.validate();
  if (n < 1) throw EmptyInput("latin_hypercube needs n >= 1");
  Rng rng(seed);
  PointSet points(box.dim(), n);
  for (int k = 0; k < box.dim(); ++k) {
    const std::vector<int> strata = permutation(n, rng);
    const double width = box.hi[k] - box.lo[k];
    for (int i = 0; i < n; ++i) {
      double x = box.lo[k] + width * ((strata[i] + rng.uniform()) / n);
      // Rounding can land exactly on a face for tiny strata; pull it back inside.
      x = std::clamp(x, std::nextafter(box.lo[k], box.hi[k]), std::nextafter(box.hi[k], box.lo[k]));
      points(k, i) = x;
    }
  }
  return points;
}

PointSet normal_interior(int n, const Box& box, std::uint64_t seed) {
  box.validate();
  if (n < 1) throw EmptyInput("normal_interior needs n >= 1");
  Rng rng(seed);
  const Eigen::VectorXd centre = 0.5 * (box.lo + box.hi);
  const Eigen::VectorXd sd = box.width() / 6.0;
  PointSet points(box.dim(), n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x(box.dim());
    do {
      for (int k = 0; k < box.dim(); ++k) x[k] = centre[k] + sd[k] * rng.normal();
    } while (!box.strictly_contains(x));
    points.col(i) = x;
  }
  return points;
}

PointSet boundary_points(int n, const Box& box, std::uint64_t seed) {
  box.validate();
  if (n < 1) throw EmptyInput("boundary_points needs n >= 1");
  const int dim = box.dim();
  PointSet points(dim, n);
  if (dim == 1) {
    for (int i = 0; i < n; ++i) points(0, i) = i % 2 == 0 ? box.lo[0] : box.hi[0];
    return points;
  }

  // Faces ordered (axis 0, lo), (axis 0, hi), (axis 1, lo), ...; counts by
  // largest remainder on face measure.
  const Eigen::VectorXd width = box.width();
  const int faces = 2 * dim;
  std::vector<double> measure(faces);
  for (int f = 0; f < faces; ++f) {
    const int axis = f / 2;
    double m = 1.0;
    for (int k = 0; k < dim; ++k)
      if (k != axis) m *= width[k];
    measure[f] = m;
  }
  const double total = std::accumulate(measure.begin(), measure.end(), 0.0);
  std::vector<int> counts(faces);
  std::vector<std::pair<double, int>> remainders;
  int assigned = 0;
  for (int f = 0; f < faces; ++f) {
    const double exact = n * measure[f] / total;
    counts[f] = static_cast<int>(std::floor(exact));
    assigned += counts[f];
    remainders.emplace_back(-(exact - counts[f]), f);
  }
  std::sort(remainders.begin(), remainders.end());
  for (int i = 0; assigned < n; ++i, ++assigned) ++counts[remainders[i % faces].second];

  int col = 0;
  for (int f = 0; f < faces; ++f) {
    if (counts[f] == 0) continue;
    const int axis = f / 2;
    Box face{Eigen::VectorXd(dim - 1), Eigen::VectorXd(dim - 1)};
    for (int k = 0, j = 0; k < dim; ++k) {
      if (k == axis) continue;
      face.lo[j] = box.lo[k];
      face.hi[j] = box.hi[k];
      ++j;
    }
    const PointSet on_face = latin_hypercube(counts[f], face, seed + 0x9E3779B97F4A7C15ULL * (f + 1));
    for (int i = 0; i < counts[f]; ++i, ++col) {
      for (int k = 0, j = 0; k < dim; ++k) {
        if (k == axis)
          points(k, col) = f % 2 == 0 ? box.lo[k] : box.hi[k];
        else
          points(k, col) = on_face(j++, i);
      }
    }
  }
  return points;
}

CollocationSet initial_collocation(const Box& box, int n_interior, int n_boundary, std::uint64_t seed,
                                   InitialSampling kind) {
  CollocationSet set;
  set.interior = kind == InitialSampling::LatinHypercube ? latin_hypercube(n_interior, box, seed)
                                                         : normal_interior(n_interior, box, seed);
  set.boundary = boundary_points(n_boundary, box, seed ^ 0xB0B0B0B0ULL);
  set.round = 0;
  return set;
}

Eigen::VectorXd sampling_probabilities(const Eigen::VectorXd& residuals, double epsilon) {
  if (residuals.size() == 0) throw EmptyInput("sampling_probabilities needs at least one residual");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  const Eigen::VectorXd shifted = residuals.cwiseMax(0.0).array() + epsilon;
  return shifted / shifted.sum();
}

std::vector<Eigen::Index> draw_with_replacement(const Eigen::VectorXd& probabilities, int count,
                                                std::uint64_t seed) {
  std::vector<double> cumulative(static_cast<std::size_t>(probabilities.size()));
  std::partial_sum(probabilities.begin(), probabilities.end(), cumulative.begin());
  Rng rng(seed);
  std::vector<Eigen::Index> picks;
  picks.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double u = rng.uniform() * cumulative.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto idx = std::min<std::ptrdiff_t>(it - cumulative.begin(), probabilities.size() - 1);
    picks.push_back(static_cast<Eigen::Index>(idx));
  }
  return picks;
}

CollocationSet resample(const CollocationSet& set, const Eigen::VectorXd& residuals, const ResampleConfig& cfg,
                        const Box& box, std::uint64_t seed) {
  const Eigen::Index n_f = set.interior_count();
  if (residuals.size() != n_f) throw ShapeError("one residual per interior point is required");
  if (cfg.parent_count < 1 || cfg.parent_count > n_f)
    throw ConfigError("parent_count must lie in [1, N_f]");
  if (cfg.children_per_parent < 1) throw ConfigError("children_per_parent must be positive");
  if (!(cfg.base_radius > 0.0)) throw ConfigError("base_radius must be positive");
  if (!(cfg.epsilon > 0.0)) throw ConfigError("epsilon must be positive");

  const Eigen::VectorXd probs = sampling_probabilities(residuals, cfg.epsilon);
  const std::vector<Eigen::Index> picks = draw_with_replacement(probs, cfg.parent_count, seed);

  // Distinct parents in first-draw order.
  std::vector<char> selected(static_cast<std::size_t>(n_f), 0);
  std::vector<Eigen::Index> parents;
  for (Eigen::Index p : picks) {
    if (!selected[static_cast<std::size_t>(p)]) {
      selected[static_cast<std::size_t>(p)] = 1;
      parents.push_back(p);
    }
  }

  const int dim = box.dim();
  const int n_children = cfg.children_per_parent;
  const double radius = cfg.base_radius * std::exp(-static_cast<double>(set.round));
  const double jitter_floor = 1e-9 * box.longest_edge();

  CollocationSet out;
  out.boundary = set.boundary;
  out.round = set.round + 1;
  out.interior.resize(dim, n_f - static_cast<Eigen::Index>(parents.size()) +
                               static_cast<Eigen::Index>(parents.size()) * n_children);

  std::set<Coords> seen;
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < n_f; ++i) {
    if (selected[static_cast<std::size_t>(i)]) continue;
    out.interior.col(col++) = set.interior.col(i);
    seen.insert(coords_of(set.interior.col(i)));
  }

  Rng rng(seed ^ 0x5DEECE66DULL);
  for (Eigen::Index p : parents) {
    const Eigen::VectorXd centre = set.interior.col(p);
    for (int c = 0; c < n_children; ++c) {
      Eigen::VectorXd child = centre + uniform_in_ball(dim, radius, rng);
      clip_interior(child, box);
      // A vanishing radius reproduces the parent; jitter until the point is new.
      while (!seen.insert(coords_of(child)).second) {
        child = centre + uniform_in_ball(dim, std::max(radius, jitter_floor), rng);
        clip_interior(child, box);
      }
      out.interior.col(col++) = child;
    }
  }
  return out;
}

void write_collocation_csv(const CollocationSet& set, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "round,set";
  for (Eigen::Index k = 0; k < set.interior.rows(); ++k) out << ",x" << k;
  out << '\n' << std::setprecision(17);
  auto rows = [&](const PointSet& pts, const char* label) {
    for (Eigen::Index i = 0; i < pts.cols(); ++i) {
      out << set.round << ',' << label;
      for (Eigen::Index k = 0; k < pts.rows(); ++k) out << ',' << pts(k, i);
      out << '\n';
    }
  };
  rows(set.interior, "interior");
  rows(set.boundary, "boundary");
}

CollocationSet read_collocation_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> interior, boundary;
  int round = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    round = std::stoi(cell);
    std::string label;
    std::getline(ss, label, ',');
    std::vector<double> x;
    while (std::getline(ss, cell, ',')) x.push_back(std::stod(cell));
    (label == "interior" ? interior : boundary).push_back(std::move(x));
  }
  auto to_points = [](const std::vector<std::vector<double>>& rows) {
    const Eigen::Index dim = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
    PointSet pts(dim, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (static_cast<Eigen::Index>(rows[i].size()) != dim) throw ShapeError("ragged collocation CSV");
      pts.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::VectorXd>(rows[i].data(), dim);
    }
    return pts;
  };
  CollocationSet set;
  set.interior = to_points(interior);
  set.boundary = to_points(boundary);
  set.round = round;
  return set;
}

}  // namespace drpinns
