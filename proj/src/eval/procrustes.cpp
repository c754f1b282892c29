#include "edmlift/eval/procrustes.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include "edmlift/core/error.hpp"

namespace edmlift::eval {
namespace {

void require_spread(const Points3& centred, const char* what) {
  const Eigen::Vector3d sv = Eigen::JacobiSVD<Eigen::MatrixXd>(centred).singularValues();
  if (!(sv(0) > 0.0) || sv(1) <= 1e-12 * sv(0)) {
    throw Error(ErrorCode::kDegenerateAlignment,
                std::string(what) + " joints are coincident or collinear");
  }
}

}  // namespace

AlignmentResult procrustes_align(const Pose3D& src, const Pose3D& dst, bool allow_reflection,
                                 bool allow_scale) {
  if (src.size() != dst.size()) {
    throw Error(ErrorCode::kShape, "cannot align poses with different joint counts");
  }
  if (src.size() < 3) throw Error(ErrorCode::kDegenerateAlignment, "need at least 3 joints");
  require_finite(src.joints, "source pose");
  require_finite(dst.joints, "target pose");

  const Eigen::RowVector3d mu_src = src.joints.colwise().mean();
  const Eigen::RowVector3d mu_dst = dst.joints.colwise().mean();
  const Points3 a = src.joints.rowwise() - mu_src;
  const Points3 b = dst.joints.rowwise() - mu_dst;
  require_spread(a, "source");
  require_spread(b, "target");

  if (src.joints == dst.joints) {
    // the SVD path leaves ~1e-13 residue here
    AlignmentResult same;
    same.aligned = dst;
    same.residuals = Eigen::VectorXd::Zero(src.size());
    return same;
  }

  const Eigen::Matrix3d h = a.transpose() * b;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d d = Eigen::Vector3d::Ones();
  if (!allow_reflection && (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) {
    d(2) = -1.0;
  }

  AlignmentResult out;
  out.rotation = svd.matrixV() * d.asDiagonal() * svd.matrixU().transpose();
  if (allow_scale) out.scale = svd.singularValues().dot(d) / a.squaredNorm();
  out.translation = mu_dst.transpose() - out.scale * out.rotation * mu_src.transpose();
  out.aligned.joints = (out.scale * src.joints * out.rotation.transpose()).rowwise() +
                       out.translation.transpose();
  out.residuals = (out.aligned.joints - dst.joints).rowwise().norm();
  return out;
}

}  // namespace edmlift::eval
