#pragma once

#include <array>
#include <vector>

#include "edmlift/core/distance_matrix.hpp"
#include "edmlift/core/pose.hpp"
#include "edmlift/core/skeleton.hpp"

namespace edmlift::mds {

struct RecoveryOptions {
  int max_iterations = 500;
  /// Stop when an accepted step lowers the surrogate by less than this
  /// fraction of its current value.
  double relative_tolerance = 1e-10;
  /// Armijo sufficient-decrease constant and step shrink factor.
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 60;
  int embed_dim = 3;
  /// An all-zero row marks a joint that was never filled in. Network outputs
  /// can legitimately collapse a joint onto the others, so callers lifting
  /// predictions switch this off.
  bool reject_zero_rows = true;

  void validate() const;
};

enum class Chirality { kOriginal, kReflected };

struct RecoveryResult {
  Pose3D pose;
  /// sum over all ordered pairs (m, n) of | |p_m - p_n|^2 - d_mn^2 |.
  double edm_residual = 0.0;
  /// sum over m < n of (|p_m - p_n|^2 - d_mn^2)^2, at the solution.
  double surrogate = 0.0;
  double initial_surrogate = 0.0;
  int iterations = 0;
  Chirality chirality = Chirality::kOriginal;
  /// Anthropomorphism of the original and the reflected candidate.
  std::array<int, 2> scores = {0, 0};
};

/// Top-`dim` eigenpairs of the double-centred Gram matrix, eigenvalues clamped
/// at zero. The result is centred. A zero matrix yields all points at the origin.
Pose3D classical_mds(const DistanceMatrix& edm, int dim = 3);

/// Smooth squared-residual surrogate and the absolute-value objective.
double stress_surrogate(const Points3& points, const DistanceMatrix& edm);
double edm_residual(const Points3& points, const DistanceMatrix& edm);

/// Gradient descent with Armijo backtracking on the surrogate, starting at `init`.
/// `surrogate_trace`, when given, receives the surrogate after every accepted step
/// (first entry: the initial value).
RecoveryResult refine_stress(const Pose3D& init, const DistanceMatrix& edm,
                             const RecoveryOptions& options = {},
                             std::vector<double>* surrogate_trace = nullptr);

/// Number of joints whose hinge angle satisfies the skeleton's limits (joints
/// without limits count as satisfied).
int anthropomorphism_score(const Pose3D& pose, const Skeleton& skeleton);

/// The pose with its first coordinate negated.
Pose3D mirror(const Pose3D& pose);

/// classical MDS -> refinement -> keep the more anthropomorphic of the solution
/// and its mirror image (the original on ties). Rejects matrices with an
/// all-zero row, which mark joints that were never filled in.
RecoveryResult recover_pose(const DistanceMatrix& edm, const Skeleton& skeleton,
                            const RecoveryOptions& options = {});

}  // namespace edmlift::mds
