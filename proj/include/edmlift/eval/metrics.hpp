#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "edmlift/core/distance_matrix.hpp"
#include "edmlift/core/pose.hpp"
#include "edmlift/core/skeleton.hpp"

namespace edmlift::eval {

struct MetricOptions {
  bool aligned = true;
  bool allow_reflection = false;
  bool allow_scale = false;
};

/// Distance of every joint of `pred` to `gt` in mm, after alignment when requested.
Eigen::VectorXd joint_errors(const Pose3D& pred, const Pose3D& gt, const MetricOptions& options = {});

/// Mean per-joint position error in mm.
double mpjpe(const Pose3D& pred, const Pose3D& gt, bool aligned = true,
             bool allow_reflection = false);

struct MetricsReport {
  std::string protocol = "clean";
  int samples = 0;
  double mpjpe = 0.0;
  std::vector<double> per_joint;
  /// Error over joints hidden from the network, and over the rest.
  std::optional<double> occluded_mpjpe;
  std::optional<double> visible_mpjpe;
  long occluded_joints = 0;
  /// Predictions whose alignment was degenerate; those were aligned by
  /// translation only.
  int degenerate_alignments = 0;
  std::optional<double> baseline_mpjpe;

  nlohmann::json to_json(const Skeleton& skeleton) const;
};

/// Running per-joint sums for a MetricsReport.
class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(int n_joints, MetricOptions options = {});

  /// `visibility` marks what the network saw; empty means all joints.
  void add(const Pose3D& pred, const Pose3D& gt, const Visibility& visibility = {});
  int samples() const { return samples_; }
  MetricsReport report(const std::string& protocol = "clean") const;

 private:
  MetricOptions options_;
  int samples_ = 0;
  int degenerate_ = 0;
  std::vector<double> joint_sum_;
  double occluded_sum_ = 0.0, visible_sum_ = 0.0;
  long occluded_count_ = 0, visible_count_ = 0;
};

/// Element-wise mean of 3D distance matrices.
DistanceMatrix mean_edm(std::span<const Pose3D> poses);

}  // namespace edmlift::eval
