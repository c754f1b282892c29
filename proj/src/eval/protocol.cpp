#include "edmlift/eval/protocol.hpp"

#include "edmlift/core/error.hpp"

namespace edmlift::eval {

ProtocolOutcome run_protocol(const nn::Model& model, const Skeleton& skeleton,
                             std::span<const LabeledPose> samples, const ProtocolSpec& spec,
                             const MetricOptions& metric, const mds::RecoveryOptions& recovery) {
  spec.validate();
  if (samples.empty()) throw Error(ErrorCode::kInvalidArgument, "no samples to evaluate");
  ProtocolOutcome out;
  out.inputs.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out.inputs.push_back(apply_protocol(spec, skeleton, samples[i].raw, samples[i].visibility, i));
  }
  out.lifts = lift_poses(model, out.inputs, skeleton, recovery);

  MetricsAccumulator acc(skeleton.size(), metric);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    acc.add(out.lifts[i].recovery.pose, samples[i].truth, out.inputs[i].visibility);
  }
  out.metrics = acc.report(spec.to_string());
  return out;
}

Pose3D mean_pose_baseline(std::span<const Pose3D> train, const Skeleton& skeleton) {
  return mds::recover_pose(mean_edm(train), skeleton).pose;
}

double baseline_mpjpe(const Pose3D& baseline, std::span<const Pose3D> test,
                      const MetricOptions& metric) {
  if (test.empty()) throw Error(ErrorCode::kInvalidArgument, "no test poses");
  MetricsAccumulator acc(baseline.size(), metric);
  for (const auto& gt : test) acc.add(baseline, gt);
  return acc.report().mpjpe;
}

}  // namespace edmlift::eval
