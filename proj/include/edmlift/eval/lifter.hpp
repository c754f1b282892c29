#pragma once

#include <span>
#include <vector>

#include "edmlift/core/pose.hpp"
#include "edmlift/core/skeleton.hpp"
#include "edmlift/mds/recover.hpp"
#include "edmlift/nn/network.hpp"

namespace edmlift::eval {

struct LiftResult {
  /// Network output in millimetres.
  DistanceMatrix edm;
  mds::RecoveryResult recovery;
};

/// Raw 2D detection -> normalized input matrix -> predicted 3D distances -> pose.
LiftResult lift_pose(const nn::Model& model, const ObservedPose2D& observed,
                     const Skeleton& skeleton, mds::RecoveryOptions options = {});
std::vector<LiftResult> lift_poses(const nn::Model& model, std::span<const ObservedPose2D> observed,
                                   const Skeleton& skeleton, mds::RecoveryOptions options = {});

}  // namespace edmlift::eval
