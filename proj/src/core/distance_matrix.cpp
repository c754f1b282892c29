#include "edmlift/core/distance_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "edmlift/core/error.hpp"

namespace edmlift {

DistanceMatrix::DistanceMatrix(Eigen::MatrixXd values, EdmUnits units)
    : values_(std::move(values)), units_(units) {
  if (values_.rows() != values_.cols()) {
    throw Error(ErrorCode::kShape, "distance matrix must be square");
  }
  if (!values_.allFinite()) {
    throw Error(ErrorCode::kInvalidInput, "distance matrix has a non-finite entry");
  }
  const int n = size();
  for (int m = 0; m < n; ++m) {
    if (values_(m, m) != 0.0) {
      throw Error(ErrorCode::kInvalidInput, "distance matrix diagonal entry " + std::to_string(m) +
                                                " is not zero");
    }
    for (int k = m + 1; k < n; ++k) {
      if (values_(m, k) != values_(k, m)) {
        throw Error(ErrorCode::kInvalidInput, "distance matrix is not symmetric at (" +
                                                  std::to_string(m) + "," + std::to_string(k) +
                                                  ")");
      }
    }
  }
}

DistanceMatrix DistanceMatrix::zeros(int n, EdmUnits units) {
  return DistanceMatrix(Eigen::MatrixXd::Zero(n, n), units);
}

DistanceMatrix build_edm(const Eigen::Ref<const Eigen::MatrixXd>& points, EdmUnits units) {
  if (points.rows() < 1) throw Error(ErrorCode::kInvalidInput, "build_edm needs at least one point");
  require_finite(points, "point set");
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index k = m + 1; k < n; ++k) {
      const double dist = (points.row(m) - points.row(k)).norm();
      d(m, k) = dist;
      d(k, m) = dist;
    }
  }
  return DistanceMatrix(std::move(d), units);
}

DistanceMatrix build_edm(const Pose3D& pose) { return build_edm(pose.joints, EdmUnits::kMillimeters); }

DistanceMatrix build_edm(const Pose2D& pose) {
  return build_edm(pose.joints, pose.normalized() ? EdmUnits::kNormalized : EdmUnits::kPixels);
}

DistanceMatrix apply_occlusion(const DistanceMatrix& edm, const Visibility& visibility) {
  if (static_cast<int>(visibility.size()) != edm.size()) {
    throw Error(ErrorCode::kShape, "visibility length does not match matrix size");
  }
  const int visible = count_visible(visibility);
  if (visible < kMinVisibleJoints) {
    throw Error(ErrorCode::kTooFewObservations,
                std::to_string(visible) + " visible joints, at least " +
                    std::to_string(kMinVisibleJoints) + " required");
  }
  Eigen::MatrixXd values = edm.values();
  for (int j = 0; j < edm.size(); ++j) {
    if (visibility[j]) continue;
    values.row(j).setZero();
    values.col(j).setZero();
  }
  return DistanceMatrix(std::move(values), edm.units());
}

int packed_size(int n_joints) { return n_joints * (n_joints - 1) / 2; }

int joints_for_packed_size(std::size_t length) {
  for (int n = 1; packed_size(n) <= static_cast<int>(length); ++n) {
    if (packed_size(n) == static_cast<int>(length)) return n;
  }
  throw Error(ErrorCode::kShape,
              "length " + std::to_string(length) + " is not N(N-1)/2 for any joint count");
}

std::vector<double> pack_upper(const DistanceMatrix& edm) {
  const int n = edm.size();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(packed_size(n)));
  for (int m = 0; m < n; ++m) {
    for (int k = m + 1; k < n; ++k) out.push_back(edm(m, k));
  }
  return out;
}

DistanceMatrix unpack_upper(std::span<const double> packed, int n_joints, EdmUnits units) {
  if (n_joints < 1 || static_cast<int>(packed.size()) != packed_size(n_joints)) {
    throw Error(ErrorCode::kShape, "packed vector has length " + std::to_string(packed.size()) +
                                       ", expected " + std::to_string(packed_size(n_joints)));
  }
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n_joints, n_joints);
  std::size_t i = 0;
  for (int m = 0; m < n_joints; ++m) {
    for (int k = m + 1; k < n_joints; ++k, ++i) {
      d(m, k) = packed[i];
      d(k, m) = packed[i];
    }
  }
  return DistanceMatrix(std::move(d), units);
}

Eigen::MatrixXd double_centered_gram(const Eigen::Ref<const Eigen::MatrixXd>& distances) {
  const Eigen::Index n = distances.rows();
  const Eigen::MatrixXd squared = distances.array().square().matrix();
  const Eigen::MatrixXd centering =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  Eigen::MatrixXd gram = -0.5 * centering * squared * centering;
  // Symmetrize away rounding so the self-adjoint solver sees an exact symmetric matrix.
  return 0.5 * (gram + gram.transpose());
}

bool EdmDiagnostics::gram_psd(double tolerance) const {
  return gram_min_eigenvalue >= -tolerance * std::max(1.0, gram_max_eigenvalue);
}

bool EdmDiagnostics::is_valid_edm(double tolerance) const {
  return symmetry_residual == 0.0 && max_abs_diagonal == 0.0 && min_entry >= 0.0 &&
         triangle_violations == 0 && gram_psd(tolerance);
}

EdmDiagnostics validate_edm(const Eigen::Ref<const Eigen::MatrixXd>& matrix) {
  EdmDiagnostics out;
  const Eigen::Index n = matrix.rows();
  if (n != matrix.cols()) throw Error(ErrorCode::kShape, "validate_edm needs a square matrix");
  if (n == 0) return out;

  out.symmetry_residual = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
  out.min_entry = matrix.minCoeff();
  out.max_abs_diagonal = matrix.diagonal().cwiseAbs().maxCoeff();

  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  const double slack = 1e-12 * scale;
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == m) continue;
      for (Eigen::Index via = 0; via < n; ++via) {
        if (via == m || via == k) continue;
        if (matrix(m, k) > matrix(m, via) + matrix(via, k) + slack) ++out.triangle_violations;
      }
    }
  }

  const Eigen::MatrixXd sym = 0.5 * (matrix + matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(double_centered_gram(sym),
                                                        Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& eig = solver.eigenvalues();
  out.gram_min_eigenvalue = eig.minCoeff();
  out.gram_max_eigenvalue = eig.maxCoeff();
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    if (eig(i) < 0.0) out.negative_eigen_mass += -eig(i);
  }
  return out;
}

}  // namespace edmlift

namespace edmlift {

DistanceMatrix network_input(const ObservedPose2D& observed) {
  observed.validate();
  const Pose2D normalized = normalize_2d(observed.pose, observed.visibility);
  return apply_occlusion(build_edm(normalized), observed.visibility);
}

}  // namespace edmlift
