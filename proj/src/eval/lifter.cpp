#include "edmlift/eval/lifter.hpp"

#include "edmlift/core/error.hpp"

namespace edmlift::eval {

LiftResult lift_pose(const nn::Model& model, const ObservedPose2D& observed,
                     const Skeleton& skeleton, mds::RecoveryOptions options) {
  return lift_poses(model, std::span<const ObservedPose2D>(&observed, 1), skeleton, options).front();
}

std::vector<LiftResult> lift_poses(const nn::Model& model, std::span<const ObservedPose2D> observed,
                                   const Skeleton& skeleton, mds::RecoveryOptions options) {
  if (model.config().n_joints != skeleton.size()) {
    throw Error(ErrorCode::kShape, "model and skeleton disagree on the joint count");
  }
  options.reject_zero_rows = false;
  std::vector<DistanceMatrix> inputs;
  inputs.reserve(observed.size());
  for (const auto& o : observed) inputs.push_back(network_input(o));
  std::vector<DistanceMatrix> edms = nn::predict_edms(model, inputs);

  std::vector<LiftResult> out;
  out.reserve(observed.size());
  for (auto& edm : edms) {
    mds::RecoveryResult rec = mds::recover_pose(edm, skeleton, options);
    out.push_back({std::move(edm), std::move(rec)});
  }
  return out;
}

}  // namespace edmlift::eval
