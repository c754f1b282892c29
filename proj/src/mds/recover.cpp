#include <string>

#include "edmlift/core/error.hpp"
#include "edmlift/mds/recover.hpp"

namespace edmlift::mds {

RecoveryResult recover_pose(const DistanceMatrix& edm, const Skeleton& skeleton,
                            const RecoveryOptions& options) {
  if (edm.size() != skeleton.size()) {
    throw Error(ErrorCode::kShape, "matrix size does not match the skeleton");
  }
  for (int m = 0; options.reject_zero_rows && m < edm.size(); ++m) {
    if (edm.values().row(m).isZero(0.0)) {
      throw Error(ErrorCode::kIncompleteMatrix,
                  "row " + std::to_string(m) + " (" + skeleton.name(m) +
                      ") is all zeros; fill in hidden joints before recovery");
    }
  }

  RecoveryResult result = refine_stress(classical_mds(edm, options.embed_dim), edm, options);
  const Pose3D reflected = mirror(result.pose);
  result.scores = {anthropomorphism_score(result.pose, skeleton),
                   anthropomorphism_score(reflected, skeleton)};
  if (result.scores[1] > result.scores[0]) {
    result.pose = reflected;
    result.chirality = Chirality::kReflected;
  }
  return result;
}

}  // namespace edmlift::mds
