#pragma once

#include <span>
#include <vector>

#include "edmlift/eval/corruption.hpp"
#include "edmlift/eval/lifter.hpp"
#include "edmlift/eval/metrics.hpp"

namespace edmlift::eval {

/// A test pose: raw pixel detection, which joints were detected, and the truth.
struct LabeledPose {
  Pose2D raw;
  Visibility visibility;
  Pose3D truth;
};

struct ProtocolOutcome {
  MetricsReport metrics;
  std::vector<ObservedPose2D> inputs;
  std::vector<LiftResult> lifts;
};

/// Corrupts every sample per `spec` (sample i uses stream (spec.seed, i)),
/// lifts it and scores the result against the truth.
ProtocolOutcome run_protocol(const nn::Model& model, const Skeleton& skeleton,
                             std::span<const LabeledPose> samples, const ProtocolSpec& spec,
                             const MetricOptions& metric = {},
                             const mds::RecoveryOptions& recovery = {});

/// Recovers the pose of the mean 3D distance matrix over `train`.
Pose3D mean_pose_baseline(std::span<const Pose3D> train, const Skeleton& skeleton);

/// MPJPE of predicting `baseline` for every test pose.
double baseline_mpjpe(const Pose3D& baseline, std::span<const Pose3D> test,
                      const MetricOptions& metric = {});

}  // namespace edmlift::eval
