#pragma once

#include <Eigen/Core>

#include "edmlift/core/pose.hpp"

namespace edmlift::eval {

struct AlignmentResult {
  /// aligned = scale * src * rotation^T + translation^T (row-wise).
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double scale = 1.0;
  Pose3D aligned;
  /// Distance of every aligned joint to its target, mm.
  Eigen::VectorXd residuals;
};

/// Least-squares superimposition of `src` onto `dst`. Rigid by default; a
/// reflection and/or a uniform scale can be allowed. Both poses need at least
/// three non-collinear joints.
AlignmentResult procrustes_align(const Pose3D& src, const Pose3D& dst,
                                 bool allow_reflection = false, bool allow_scale = false);

}  // namespace edmlift::eval
