#include "edmlift/pipeline/camera.hpp"

#include <cmath>
#include <string>

#include <Eigen/Geometry>

#include "edmlift/core/error.hpp"

namespace edmlift::pipeline {

void CameraModel::validate() const {
  if (!(focal > 0.0) || !std::isfinite(focal)) {
    throw Error(ErrorCode::kInvalidArgument, "focal length must be positive");
  }
  if (!principal.allFinite() || !translation.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "camera parameters must be finite");
  }
  const double err = (rotation * rotation.transpose() - Eigen::Matrix3d::Identity()).norm();
  if (!(err < 1e-9) || rotation.determinant() < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "camera rotation is not a proper rotation");
  }
}

CameraModel CameraModel::look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                                 double focal, const Eigen::Vector2d& principal) {
  const Eigen::Vector3d forward = (target - eye).normalized();
  const Eigen::Vector3d right = forward.cross(Eigen::Vector3d::UnitY());
  if (!(right.norm() > 1e-9)) {
    throw Error(ErrorCode::kInvalidArgument, "camera cannot look straight up or down");
  }
  CameraModel cam;
  cam.focal = focal;
  cam.principal = principal;
  cam.rotation.row(0) = right.normalized();
  cam.rotation.row(2) = forward;
  cam.rotation.row(1) = forward.cross(cam.rotation.row(0).transpose());
  cam.translation = -cam.rotation * eye;
  return cam;
}

Pose2D project_camera(const Pose3D& pose, const CameraModel& camera) {
  require_finite(pose.joints, "3D pose");
  Pose2D out;
  out.joints.resize(pose.size(), 2);
  for (int j = 0; j < pose.size(); ++j) {
    const Eigen::Vector3d p = camera.rotation * pose.joints.row(j).transpose() + camera.translation;
    if (!(p.z() > 0.0)) {
      throw Error(ErrorCode::kBehindCamera,
                  "joint " + std::to_string(j) + " has depth " + std::to_string(p.z()) + " mm");
    }
    out.joints(j, 0) = camera.focal * p.x() / p.z() + camera.principal.x();
    out.joints(j, 1) = camera.focal * p.y() / p.z() + camera.principal.y();
  }
  return out;
}

}  // namespace edmlift::pipeline
