#pragma once

#include "drpinns/box.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>

namespace drpinns {

/// Interior and boundary collocation points, plus the number of residual
/// resampling rounds already applied.
struct CollocationSet {
  PointSet interior;  // d x N_f, strictly inside the box, pairwise distinct
  PointSet boundary;  // d x N_g, on the faces
  int round = 0;

  Eigen::Index interior_count() const { return interior.cols(); }
  Eigen::Index boundary_count() const { return boundary.cols(); }

  /// Throws ConfigError when any CollocationSet invariant is broken.
  void validate(const Box& box) const;
};

struct ResampleConfig {
  int parent_count = 100;        // M
  int children_per_parent = 2;   // n
  double base_radius = 0.1;      // r_0; the radius in round t is r_0 e^{-t}
  double epsilon = 1e-6;

  /// Default r_0 = 0.1 x longest box edge.
  static ResampleConfig defaults_for(const Box& box) {
    ResampleConfig cfg;
    cfg.base_radius = 0.1 * box.longest_edge();
    return cfg;
  }
};

enum class InitialSampling { LatinHypercube, Normal };

/// n points, exactly one per stratum on every axis; strictly interior.
PointSet latin_hypercube(int n, const Box& box, std::uint64_t seed);

/// n points from a normal centred in the box (sd = width/6 per axis),
/// redrawn until strictly interior.
PointSet normal_interior(int n, const Box& box, std::uint64_t seed);

/// n points on the faces. In 1D the two endpoints alternate; otherwise the
/// count is split over faces by area and each face is filled by LHS.
PointSet boundary_points(int n, const Box& box, std::uint64_t seed);

CollocationSet initial_collocation(const Box& box, int n_interior, int n_boundary, std::uint64_t seed,
                                   InitialSampling kind = InitialSampling::LatinHypercube);

/// P_i = (R_i + eps) / sum_j (R_j + eps), negative residuals clamped to 0.
Eigen::VectorXd sampling_probabilities(const Eigen::VectorXd& residuals, double epsilon);

/// Draws `count` indices with replacement according to `probabilities`.
std::vector<Eigen::Index> draw_with_replacement(const Eigen::VectorXd& probabilities, int count, std::uint64_t seed);

/// One residual-adaptive refresh of the interior set: M parents drawn with
/// replacement, each distinct parent replaced by n children uniform in the
/// ball of radius r_0 e^{-round} (clipped into the box). Boundary points are
/// kept. The result has round + 1.
CollocationSet resample(const CollocationSet& set, const Eigen::VectorXd& residuals, const ResampleConfig& cfg,
                        const Box& box, std::uint64_t seed);

/// Rows "round,set,x0[,x1[,x2]]" with set in {interior, boundary}.
void write_collocation_csv(const CollocationSet& set, const std::filesystem::path& path);
CollocationSet read_collocation_csv(const std::filesystem::path& path);

}  // namespace drpinns
