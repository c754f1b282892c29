#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

namespace edmlift {

using Points3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using Points2 = Eigen::Matrix<double, Eigen::Dynamic, 2>;
using Visibility = std::vector<bool>;

/// 3D joint positions in millimetres, one row per joint.
struct Pose3D {
  Points3 joints;

  int size() const { return static_cast<int>(joints.rows()); }
};

/// Parameters of the 2D normalization, kept so it can be undone.
struct NormParams {
  double center_u = 0.0;
  double center_v = 0.0;
  double scale = 1.0;
};

/// 2D joint positions. Raw poses are in pixels; normalized poses are
/// dimensionless with vertical coordinates in [-1, 1].
struct Pose2D {
  Points2 joints;
  std::optional<NormParams> norm;

  int size() const { return static_cast<int>(joints.rows()); }
  bool normalized() const { return norm.has_value(); }
};

/// A 2D detection together with which joints were actually observed.
struct ObservedPose2D {
  Pose2D pose;
  Visibility visibility;

  /// Throws too-few-observations when fewer than `kMinVisibleJoints` are visible.
  void validate() const;
};

inline constexpr int kMinVisibleJoints = 4;

Visibility all_visible(int n_joints);
int count_visible(const Visibility& visibility);

/// Throws invalid-input if any coordinate is NaN or infinite.
void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& points, const char* what);

/// Maps a normalized pose back to pixels.
Pose2D denormalize_2d(const Pose2D& pose);

/// Normalizes vertical coordinates of visible joints to [-1, 1] and applies the
/// same scale horizontally about the horizontal midpoint.
Pose2D normalize_2d(const Pose2D& pose, const Visibility& visibility);
Pose2D normalize_2d(const Pose2D& pose);

}  // namespace edmlift
