#include "edmlift/core/pose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "edmlift/core/error.hpp"

namespace edmlift {

Visibility all_visible(int n_joints) { return Visibility(static_cast<std::size_t>(n_joints), true); }

int count_visible(const Visibility& visibility) {
  return static_cast<int>(std::count(visibility.begin(), visibility.end(), true));
}

void ObservedPose2D::validate() const {
  if (static_cast<int>(visibility.size()) != pose.size()) {
    throw Error(ErrorCode::kShape, "visibility has " + std::to_string(visibility.size()) +
                                       " flags for " + std::to_string(pose.size()) + " joints");
  }
  const int visible = count_visible(visibility);
  if (visible < kMinVisibleJoints) {
    throw Error(ErrorCode::kTooFewObservations,
                std::to_string(visible) + " visible joints, at least " +
                    std::to_string(kMinVisibleJoints) + " required");
  }
}

void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& points, const char* what) {
  if (!points.allFinite()) {
    throw Error(ErrorCode::kInvalidInput, std::string(what) + " contains a non-finite coordinate");
  }
}

Pose2D normalize_2d(const Pose2D& pose, const Visibility& visibility) {
  if (pose.normalized()) {
    throw Error(ErrorCode::kInvalidArgument, "pose is already normalized");
  }
  if (static_cast<int>(visibility.size()) != pose.size()) {
    throw Error(ErrorCode::kShape, "visibility length does not match joint count");
  }
  require_finite(pose.joints, "2D pose");

  double u_min = std::numeric_limits<double>::infinity();
  double u_max = -u_min;
  double v_min = u_min;
  double v_max = -u_min;
  for (int j = 0; j < pose.size(); ++j) {
    if (!visibility[j]) continue;
    u_min = std::min(u_min, pose.joints(j, 0));
    u_max = std::max(u_max, pose.joints(j, 0));
    v_min = std::min(v_min, pose.joints(j, 1));
    v_max = std::max(v_max, pose.joints(j, 1));
  }
  if (!(v_max > v_min)) {
    throw Error(ErrorCode::kDegeneratePose, "visible joints have zero vertical extent");
  }

  NormParams params{0.5 * (u_min + u_max), 0.5 * (v_min + v_max), 2.0 / (v_max - v_min)};
  Pose2D out;
  out.joints.resize(pose.size(), 2);
  for (int j = 0; j < pose.size(); ++j) {
    out.joints(j, 0) = params.scale * (pose.joints(j, 0) - params.center_u);
    out.joints(j, 1) = params.scale * (pose.joints(j, 1) - params.center_v);
  }
  // Pin the extremes so the visible range is exactly [-1, 1].
  for (int j = 0; j < pose.size(); ++j) {
    if (!visibility[j]) continue;
    if (pose.joints(j, 1) == v_min) out.joints(j, 1) = -1.0;
    if (pose.joints(j, 1) == v_max) out.joints(j, 1) = 1.0;
  }
  out.norm = params;
  return out;
}

Pose2D normalize_2d(const Pose2D& pose) { return normalize_2d(pose, all_visible(pose.size())); }

Pose2D denormalize_2d(const Pose2D& pose) {
  if (!pose.normalized()) throw Error(ErrorCode::kInvalidArgument, "pose is not normalized");
  const NormParams& p = *pose.norm;
  Pose2D out;
  out.joints.resize(pose.size(), 2);
  out.joints.col(0) = pose.joints.col(0).array() / p.scale + p.center_u;
  out.joints.col(1) = pose.joints.col(1).array() / p.scale + p.center_v;
  return out;
}

}  // namespace edmlift
