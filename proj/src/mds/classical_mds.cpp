#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "edmlift/core/error.hpp"
#include "edmlift/mds/recover.hpp"

namespace edmlift::mds {

Pose3D classical_mds(const DistanceMatrix& edm, int dim) {
  const int n = edm.size();
  if (dim != 3) throw Error(ErrorCode::kInvalidArgument, "only 3D embeddings are supported");
  if (n < dim + 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "classical MDS in " + std::to_string(dim) + "D needs at least " +
                    std::to_string(dim + 1) + " points, got " + std::to_string(n));
  }
  Pose3D out;
  out.joints = Points3::Zero(n, 3);
  const Eigen::MatrixXd gram = double_centered_gram(edm.values());
  const double gram_scale = gram.cwiseAbs().maxCoeff();
  if (gram_scale == 0.0) return out;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumericFailure, "eigendecomposition of the Gram matrix failed");
  }
  // Eigen returns eigenvalues in increasing order.
  const Eigen::VectorXd& values = solver.eigenvalues();
  if (values(n - 1) <= 1e-14 * gram_scale) {
    throw Error(ErrorCode::kDegenerateMatrix,
                "Gram matrix has no positive eigenvalue; the matrix is not a distance matrix");
  }
  for (int axis = 0; axis < dim; ++axis) {
    const double lambda = std::max(0.0, values(n - 1 - axis));
    out.joints.col(axis) = solver.eigenvectors().col(n - 1 - axis) * std::sqrt(lambda);
  }
  out.joints.rowwise() -= out.joints.colwise().mean();
  return out;
}

}  // namespace edmlift::mds
