#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

#include "edmlift/core/error.hpp"
#include "edmlift/mds/recover.hpp"

namespace edmlift::mds {
namespace {

bool within_limits(const Pose3D& pose, const Skeleton& skeleton, int joint, const HingeLimit& limit) {
  const Eigen::RowVector3d at = pose.joints.row(joint);
  const Eigen::RowVector3d to_parent = pose.joints.row(skeleton.parent(joint)) - at;
  const Eigen::RowVector3d to_child = pose.joints.row(skeleton.hinge_child(joint)) - at;
  const double a = to_parent.norm();
  const double b = to_child.norm();
  if (!(a > 0.0) || !(b > 0.0)) return false;

  const double cosine = std::clamp(to_parent.dot(to_child) / (a * b), -1.0, 1.0);
  const double angle = std::acos(cosine);
  if (angle < limit.lo || angle > limit.hi) return false;

  if (const auto bend = skeleton.bend_reference(joint)) {
    const Eigen::Vector3d parent_bone = -to_parent.transpose();
    const Eigen::Vector3d child_bone = to_child.transpose();
    const Eigen::Vector3d axis =
        (pose.joints.row(bend->axis_to) - pose.joints.row(bend->axis_from)).transpose();
    if (!(bend->sign * parent_bone.cross(child_bone).dot(axis) > 0.0)) return false;
  }
  return true;
}

}  // namespace

int anthropomorphism_score(const Pose3D& pose, const Skeleton& skeleton) {
  if (pose.size() != skeleton.size()) {
    throw Error(ErrorCode::kShape, "pose and skeleton have different joint counts");
  }
  int score = skeleton.size();
  for (const auto& [joint, limit] : skeleton.hinge_limits()) {
    if (!within_limits(pose, skeleton, joint, limit)) --score;
  }
  return score;
}

Pose3D mirror(const Pose3D& pose) {
  Pose3D out = pose;
  out.joints.col(0) = -out.joints.col(0);
  return out;
}

}  // namespace edmlift::mds
