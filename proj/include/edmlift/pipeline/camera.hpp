#pragma once

#include <Eigen/Core>

#include "edmlift/core/pose.hpp"

namespace edmlift::pipeline {

/// Pinhole camera. A world point p maps to camera coordinates R p + t; the
/// camera looks along +Z with image v pointing down.
struct CameraModel {
  double focal = 1000.0;
  Eigen::Vector2d principal{500.0, 500.0};
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  void validate() const;

  /// Camera at `eye` looking at `target`, with world +Y up in the image.
  static CameraModel look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                             double focal, const Eigen::Vector2d& principal);
};

/// u = f X / Z + cx, v = f Y / Z + cy in camera coordinates. Throws
/// behind-camera when a joint has Z <= 0.
Pose2D project_camera(const Pose3D& pose, const CameraModel& camera);

}  // namespace edmlift::pipeline
