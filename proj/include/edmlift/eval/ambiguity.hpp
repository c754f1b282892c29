#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "edmlift/core/pose.hpp"
#include "edmlift/core/random.hpp"

namespace edmlift::eval {

struct ScatterPoint {
  int i = 0;
  int j = 0;
  /// Distance between the 3D representations and between the 2D ones.
  double d3 = 0.0;
  double d2 = 0.0;
};

struct AmbiguityResult {
  double pearson_cartesian = 0.0;
  double pearson_edm = 0.0;
  std::vector<ScatterPoint> cartesian;
  std::vector<ScatterPoint> edm;
};

/// Pearson correlation coefficient; throws correlation-undefined when either
/// side has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Coordinates centred and scaled to unit Frobenius norm.
Eigen::MatrixXd normalized_coordinates(const Eigen::Ref<const Eigen::MatrixXd>& points);
/// Distance matrix of the points scaled to unit Frobenius norm.
Eigen::MatrixXd normalized_edm(const Eigen::Ref<const Eigen::MatrixXd>& points);

/// Frobenius distance between representations of random pose pairs, in 3D
/// against 2D, for raw coordinates and for distance matrices.
AmbiguityResult ambiguity_correlation(std::span<const Pose2D> poses2d,
                                      std::span<const Pose3D> poses3d, int n_pairs, Rng& rng);

}  // namespace edmlift::eval
